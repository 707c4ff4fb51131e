"""Balance-sheet state of an idealised, debt-free token treasury company.

Arithmetic uses only + - * /, so states built from ``fractions.Fraction``
stay exact through :func:`issue_and_buy` and :func:`kpis`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..errors import DomainError, ZeroNav


@dataclass(frozen=True)
class CompanyState:
    shares_outstanding: float
    tokens_held: float
    token_price: float
    share_price: float

    def __post_init__(self):
        if not self.shares_outstanding > 0:
            raise DomainError(f"shares_outstanding must be > 0, got {self.shares_outstanding!r}")
        if not self.tokens_held >= 0:
            raise DomainError(f"tokens_held must be >= 0, got {self.tokens_held!r}")
        if not self.token_price > 0:
            raise DomainError(f"token_price must be > 0, got {self.token_price!r}")
        if not self.share_price > 0:
            raise DomainError(f"share_price must be > 0, got {self.share_price!r}")

    @property
    def market_cap(self):
        return self.shares_outstanding * self.share_price

    @property
    def nav(self):
        return self.tokens_held * self.token_price

    @property
    def btc_per_share(self):
        return self.tokens_held / self.shares_outstanding


def mnav(state: CompanyState):
    """Market capitalisation over the value of tokens held."""
    nav = state.nav
    if nav == 0:
        raise ZeroNav("mNAV is undefined for a company holding no token value")
    return state.market_cap / nav


def issue_and_buy(state: CompanyState, new_shares) -> CompanyState:
    """Sell ``new_shares`` at the current price, buy tokens, hold mNAV fixed."""
    if not new_shares > 0:
        raise DomainError(f"new_shares must be > 0, got {new_shares!r}")
    ratio = mnav(state)
    proceeds = new_shares * state.share_price
    tokens = state.tokens_held + proceeds / state.token_price
    shares = state.shares_outstanding + new_shares
    price = ratio * (tokens * state.token_price) / shares
    return replace(state, shares_outstanding=shares, tokens_held=tokens, share_price=price)


@dataclass(frozen=True)
class Kpis:
    mnav: float
    btc_per_share: float
    btc_yield: float
    btc_gain: float
    btc_dollar_gain: float


def kpis(before: CompanyState, after: CompanyState) -> Kpis:
    """KPI record for the move from ``before`` to ``after``.

    yield is the relative change in tokens per share, gain is that yield
    applied to the opening token count, and the dollar gain prices the gain
    at the closing token price.
    """
    bps0 = before.btc_per_share
    if bps0 == 0:
        raise DomainError("BTC yield is undefined when the opening tokens per share is zero")
    bps1 = after.btc_per_share
    yld = (bps1 - bps0) / bps0
    gain = before.tokens_held * yld
    return Kpis(
        mnav=mnav(after),
        btc_per_share=bps1,
        btc_yield=yld,
        btc_gain=gain,
        btc_dollar_gain=gain * after.token_price,
    )


@dataclass
class InvestorState:
    shares_held: float
    cash: float = 0.0
    debt: float = 0.0

    def __post_init__(self):
        if self.shares_held < 0:
            raise DomainError(f"shares_held must be >= 0, got {self.shares_held!r}")
        if self.debt < 0:
            raise DomainError(f"debt must be >= 0, got {self.debt!r}")

    def portfolio_value(self, share_price: float) -> float:
        return self.shares_held * share_price

    def capacity(self, share_price: float, haircut: float) -> float:
        """Unused borrowing room, never negative."""
        return max(0.0, (1.0 - haircut) * self.portfolio_value(share_price) - self.debt)

    def in_breach(self, share_price: float, haircut: float, tol: float = 1e-12) -> bool:
        limit = (1.0 - haircut) * self.portfolio_value(share_price)
        return self.debt > limit + tol * max(1.0, limit)


@dataclass
class CreditProvider:
    haircut: float
    exposure_limit: float
    exposure: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.haircut <= 1.0:
            raise DomainError(f"haircut must lie in [0, 1], got {self.haircut!r}")
        if not self.exposure_limit > 0:
            raise DomainError(f"exposure_limit must be > 0, got {self.exposure_limit!r}")
        if self.exposure < 0:
            raise DomainError(f"exposure must be >= 0, got {self.exposure!r}")

    @property
    def headroom(self) -> float:
        return max(0.0, self.exposure_limit - self.exposure)


@dataclass
class World:
    """Company, its investor base and the lender, mutated in place by a run."""

    company: CompanyState
    investors: list[InvestorState]
    credit: CreditProvider
    # mNAV the constant model reverts to; taken from the opening company state
    mnav_anchor: float = field(default=0.0)
    # cumulative haircut raise from shocks, added on top of the schedule
    haircut_shift: float = 0.0

    def __post_init__(self):
        if not self.mnav_anchor:
            self.mnav_anchor = mnav(self.company)

    @property
    def total_debt(self) -> float:
        return sum(inv.debt for inv in self.investors)

    def copy(self) -> "World":
        return World(
            company=self.company,
            investors=[replace(inv) for inv in self.investors],
            credit=replace(self.credit),
            mnav_anchor=self.mnav_anchor,
            haircut_shift=self.haircut_shift,
        )
