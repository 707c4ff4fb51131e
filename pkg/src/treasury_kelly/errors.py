"""Exception types. ``DomainError`` subclasses map to CLI exit code 1."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of an operation."""


class NoRoot(DomainError):
    """The divergence budget cannot be reached on one side of the centre."""

    def __init__(self, side: str, alpha: float, attainable: float):
        self.side = side
        self.alpha = alpha
        self.attainable = attainable
        super().__init__(
            f"no {side} root: alpha={alpha!r} is not below the attainable "
            f"divergence {attainable!r} on the {side} side"
        )


class ZeroNav(DomainError):
    """mNAV requested for a company holding no token value."""


class NonConvergence(DomainError):
    """The liquidation fixed point was not reached in the round budget."""

    def __init__(self, rounds: int, report=None):
        self.rounds = rounds
        self.report = report
        super().__init__(f"liquidation did not converge within {rounds} rounds")


class ConfigError(ValueError):
    """A scenario document failed schema validation (CLI exit code 2)."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid scenario config:\n  " + "\n  ".join(self.problems))
