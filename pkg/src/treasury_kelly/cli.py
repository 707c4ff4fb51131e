"""Command-line front end.

Exit codes: 0 success, 1 domain error, 2 usage or config error. Results go to
stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import divergence as dv
from . import kelly, robust
from .errors import ConfigError, DomainError
from .flywheel import CompanyState, Shock, csvio, issue_and_buy, kpis, load_config, mnav, simulate, stress

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def fmt(x) -> str:
    return f"{x:.9g}"


def _table(rows, header=None, as_csv=False) -> str:
    """Aligned text at 9 significant digits, or CSV at full precision."""
    cell = (lambda c: repr(float(c))) if as_csv else fmt
    rows = [[c if isinstance(c, str) else cell(c) for c in row] for row in rows]
    if header:
        rows.insert(0, list(header))
    if as_csv:
        return "\n".join(",".join(r) for r in rows) + "\n"
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"


# ---------------------------------------------------------------------------
# kelly
# ---------------------------------------------------------------------------


def cmd_kelly(args, out) -> int:
    if args.action == "growth":
        out.write(fmt(kelly.growth_rate(args.p, args.f, unit=args.unit)) + "\n")
    elif args.action == "optimal":
        out.write(fmt(kelly.optimal_fraction(args.p)) + "\n")
    else:
        f = kelly.optimal_fraction(args.p) + args.epsilon
        exact = kelly.growth_rate(args.p, f, unit=args.unit)
        series = kelly.growth_expansion(args.p, args.epsilon, args.order, unit=args.unit)
        rows = [["f", f], ["exact", exact], [f"series_order_{args.order}", series], ["difference", exact - series]]
        out.write(_table(rows, ("quantity", args.unit), args.csv))
    return EXIT_OK


# ---------------------------------------------------------------------------
# fraction
# ---------------------------------------------------------------------------


def cmd_fraction(args, out) -> int:
    if args.action == "diagnose":
        d = dv.series_diagnostic(args.q, args.epsilon)
        out.write(_table(d.rows(), ("quantity", "nats"), args.csv))
        return EXIT_OK
    spec = dv.DivergenceSpec.from_name(args.divergence)
    uset = dv.solve_uncertainty_set(spec, args.q, args.alpha)
    if args.action == "solve":
        r_minus, r_plus = uset.residuals
        rows = [["p_minus", uset.p_minus], ["p_plus", uset.p_plus],
                ["residual_minus", r_minus], ["residual_plus", r_plus]]
        out.write(_table(rows, ("quantity", "value"), args.csv))
    else:
        rows = [[r.rule, r.fraction, "yes" if r.clamped else "no"] for r in robust.robust_table(uset, args.lam)]
        rows.append(["kelly", max(0.0, kelly.optimal_fraction(args.q)), "no" if args.q >= 0.5 else "yes"])
        out.write(_table(rows, ("rule", "fraction", "clamped"), args.csv))
    return EXIT_OK


# ---------------------------------------------------------------------------
# flywheel
# ---------------------------------------------------------------------------


def _run_to_csv(path: str) -> str:
    return csvio.steps_csv(simulate(load_config(path)).records)


def _emit(text: str, dest: str | None, out) -> None:
    if dest is None or dest == "-":
        out.write(text)
    else:
        Path(dest).write_text(text)


def example_table() -> tuple[str, Fraction]:
    """The 4-share / 1-token / mNAV 4 issuance, in floats and exactly."""
    before = CompanyState(4.0, 1.0, 1.0, 1.0)
    after = issue_and_buy(before, 1.0)
    exact = issue_and_buy(CompanyState(Fraction(4), Fraction(1), Fraction(1), Fraction(1)), Fraction(1))
    k = kpis(before, after)
    rows = [
        ["shares", before.shares_outstanding, after.shares_outstanding],
        ["tokens", before.tokens_held, after.tokens_held],
        ["token_price", before.token_price, after.token_price],
        ["share_price", before.share_price, after.share_price],
        ["mnav", mnav(before), mnav(after)],
        ["btc_per_share", before.btc_per_share, after.btc_per_share],
    ]
    text = _table(rows, ("quantity", "before", "after"))
    text += f"share price change: {fmt((after.share_price / before.share_price - 1.0) * 100)}%\n"
    text += f"share price (exact): {exact.share_price}\n"
    text += f"btc_yield: {fmt(k.btc_yield)}  btc_gain: {fmt(k.btc_gain)}  btc_dollar_gain: {fmt(k.btc_dollar_gain)}\n"
    return text, exact.share_price


def cmd_flywheel(args, out) -> int:
    if args.action == "example":
        out.write(example_table()[0])
        return EXIT_OK

    if not args.config:
        raise _UsageError(f"flywheel {args.action}: --config is required")

    if args.action == "run":
        if len(args.config) == 1:
            _emit(_run_to_csv(args.config[0]), args.out, out)
            return EXIT_OK
        if not args.out:
            raise _UsageError("flywheel run: --out DIR is required with several --config files")
        for path in args.config:
            load_config(path)
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                texts = list(pool.map(_run_to_csv, args.config))
        else:
            texts = [_run_to_csv(p) for p in args.config]
        for path, text in zip(args.config, texts):
            (outdir / (Path(path).stem + ".csv")).write_text(text)
        return EXIT_OK

    if len(args.config) != 1:
        raise _UsageError("flywheel stress: exactly one --config is expected")
    cfg = load_config(args.config[0])
    sim = simulate(cfg)
    if args.shock:
        shocks = [Shock.parse(s) for s in args.shock]
        reports = [("final", stress(sim.world, s, cfg.impact)) for s in shocks]
    else:
        reports = [(rec.step, rep) for rec in sim.records for rep in rec.stress]
    _emit(csvio.stress_csv(reports), args.out, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="treasury-kelly", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    k = sub.add_parser("kelly", help="growth rate of the double-or-nothing bet")
    k.add_argument("action", choices=("growth", "optimal", "expand"))
    k.add_argument("--p", type=float, required=True, help="win probability")
    k.add_argument("--f", type=float, help="bet fraction (growth)")
    k.add_argument("--epsilon", type=float, help="offset from the optimal fraction (expand)")
    k.add_argument("--order", type=int, default=3, choices=(2, 3))
    k.add_argument("--unit", choices=kelly.UNITS, default="nats")
    k.add_argument("--csv", action="store_true", help="CSV instead of an aligned table")
    k.set_defaults(handler=cmd_kelly)

    f = sub.add_parser("fraction", help="uncertainty sets and robust fractions")
    f.add_argument("action", choices=("solve", "robust", "diagnose"))
    f.add_argument("--q", type=float, required=True, help="centre win probability")
    f.add_argument("--alpha", type=float, default=0.0, help="divergence budget in nats")
    f.add_argument("--divergence", default="kl", choices=("kl", "is", "is-scalar", "se"))
    f.add_argument("--lambda", dest="lam", type=float, default=1.0, help="risk aversion (heuristic rule)")
    f.add_argument("--epsilon", type=float, help="offset from q (diagnose)")
    f.add_argument("--csv", action="store_true", help="CSV instead of an aligned table")
    f.set_defaults(handler=cmd_fraction)

    w = sub.add_parser("flywheel", help="treasury flywheel scenarios")
    w.add_argument("action", choices=("run", "stress", "example"))
    w.add_argument("--config", action="append", default=[], help="scenario YAML (repeatable for run)")
    w.add_argument("--out", help="output CSV path, or a directory with several configs")
    w.add_argument("--jobs", type=int, default=1, help="worker processes for several configs")
    w.add_argument("--shock", action="append", default=[],
                   help="kind:magnitude applied to the final state (stress); repeatable")
    w.set_defaults(handler=cmd_flywheel)
    return parser


def _check_flags(args) -> None:
    if args.command == "kelly":
        if args.action == "growth" and args.f is None:
            raise _UsageError("kelly growth: --f is required")
        if args.action == "expand" and args.epsilon is None:
            raise _UsageError("kelly expand: --epsilon is required")
    if args.command == "fraction" and args.action == "diagnose" and args.epsilon is None:
        raise _UsageError("fraction diagnose: --epsilon is required")
    if args.command == "flywheel" and args.jobs < 1:
        raise _UsageError("flywheel: --jobs must be >= 1")


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        _check_flags(args)
        return args.handler(args, out)
    except _UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except ConfigError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except DomainError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_DOMAIN
    except OSError as exc:
        err.write(f"error: cannot write output: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    raise SystemExit(main())
