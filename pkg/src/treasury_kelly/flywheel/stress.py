"""Shocks, margin calls and forced liquidation.

A margin-called loan is called in full: the lender sells the investor's
shares until the debt is repaid or the shares run out, and whatever is still
owed after that is written off as the lender's loss.

Rounds decide who is called. Starting from no sellers, each round finds the
price at which the shares of everyone called so far would clear under the
configured impact, then calls every investor in breach at that price. Once no
one new is called, all forced sales settle at that single clearing price. A
larger shock can only enlarge the called set and lower the clearing price, so
the lender's loss never falls as the shock grows.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..errors import DomainError, NonConvergence
from .config import ImpactConfig, Shock, ShockKind
from .model import World, mnav

MAX_ROUNDS = 100
_PRICE_FLOOR = 1e-9


@dataclass
class InvestorOutcome:
    index: int
    debt_before: float
    shares_before: float
    called: bool = False
    shares_sold: float = 0.0
    recovery: float = 0.0
    loss: float = 0.0
    debt_after: float = 0.0


@dataclass
class StressReport:
    shock: Shock
    haircut_before: float
    haircut_after: float
    share_price_before: float
    share_price_shocked: float
    share_price_final: float
    token_price_after: float
    mnav_after: float
    exposure_before: float
    exposure_after: float
    rounds: int
    converged: bool
    outcomes: list[InvestorOutcome] = field(default_factory=list)
    world: World | None = field(default=None, repr=False)

    @property
    def credit_loss(self) -> float:
        return sum(o.loss for o in self.outcomes)

    @property
    def recovered(self) -> float:
        return sum(o.recovery for o in self.outcomes)

    @property
    def margin_calls(self) -> int:
        return sum(o.called for o in self.outcomes)

    @property
    def shares_liquidated(self) -> float:
        return sum(o.shares_sold for o in self.outcomes)


def _apply_shock(world: World, shock: Shock) -> None:
    c = world.company
    if shock.kind is ShockKind.HAIRCUT_RAISE:
        world.haircut_shift += shock.magnitude
        world.credit.haircut = min(1.0, world.credit.haircut + shock.magnitude)
    elif shock.kind is ShockKind.TOKEN_PRICE_DROP:
        keep = 1.0 - shock.magnitude
        if keep != 1.0:
            # mNAV unchanged: market cap follows the token book
            world.company = replace(c, token_price=c.token_price * keep, share_price=c.share_price * keep)
    else:
        current = mnav(c)
        target = shock.magnitude
        if target > current * (1.0 + 1e-12):
            raise DomainError(f"target mNAV {target!r} is above the current mNAV {current!r}")
        if target < current * (1.0 - 1e-15):
            world.company = replace(c, share_price=target * c.nav / c.shares_outstanding)


def _clearing_price(reference: float, owed: list[tuple[float, float]], outstanding: float,
                    impact: ImpactConfig) -> float:
    """Largest P with P = reference * (1 - response(sold(P) / outstanding)).

    Each called investor, given as (shares, debt), sells min(shares, debt / P).
    """
    if impact.share == 0.0 or not owed:
        return reference

    def gap(p):
        total = sum(min(s, d / p) for s, d in owed)
        return p - reference * max(1.0 - impact.response(impact.share, total / outstanding), _PRICE_FLOOR)

    lo, hi = reference * _PRICE_FLOOR * 0.5, reference
    if gap(hi) <= 0.0:
        return hi
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if gap(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def apply_stress(world: World, shock: Shock, impact: ImpactConfig | None = None,
                 max_rounds: int = MAX_ROUNDS) -> StressReport:
    """Shock ``world`` in place, liquidate breaching investors, report losses."""
    impact = impact or ImpactConfig()
    credit = world.credit
    report = StressReport(
        shock=shock,
        haircut_before=credit.haircut,
        haircut_after=credit.haircut,
        share_price_before=world.company.share_price,
        share_price_shocked=world.company.share_price,
        share_price_final=world.company.share_price,
        token_price_after=world.company.token_price,
        mnav_after=mnav(world.company),
        exposure_before=credit.exposure,
        exposure_after=credit.exposure,
        rounds=0,
        converged=False,
        outcomes=[InvestorOutcome(i, inv.debt, inv.shares_held) for i, inv in enumerate(world.investors)],
        world=world,
    )

    _apply_shock(world, shock)
    h = credit.haircut
    report.haircut_after = h
    report.share_price_shocked = world.company.share_price

    outstanding = world.company.shares_outstanding
    reference = world.company.share_price
    price = reference
    called: list[int] = []
    for rnd in range(1, max_rounds + 1):
        new = [
            i for i, inv in enumerate(world.investors)
            if i not in called and inv.in_breach(price, h)
        ]
        if not new:
            report.converged = True
            break
        report.rounds = rnd
        called.extend(new)
        owed = [(world.investors[i].shares_held, world.investors[i].debt) for i in called]
        price = _clearing_price(reference, owed, outstanding, impact)

    for i in called:
        inv = world.investors[i]
        out = report.outcomes[i]
        out.called = True
        debt = inv.debt
        if inv.shares_held * price >= debt:
            sold = debt / price
            repay = debt
        else:
            sold = inv.shares_held
            repay = sold * price
        inv.shares_held = max(0.0, inv.shares_held - sold)
        inv.debt = 0.0
        out.shares_sold = sold
        out.recovery = repay
        out.loss = debt - repay
        credit.exposure -= debt
    world.company = replace(world.company, share_price=price)

    for out, inv in zip(report.outcomes, world.investors):
        out.debt_after = inv.debt
    credit.exposure = max(0.0, credit.exposure)
    report.share_price_final = world.company.share_price
    report.token_price_after = world.company.token_price
    report.mnav_after = mnav(world.company)
    report.exposure_after = credit.exposure
    world.mnav_anchor = report.mnav_after
    if not report.converged:
        raise NonConvergence(max_rounds, report)
    return report


def stress(world: World, shock: Shock, impact: ImpactConfig | None = None,
           max_rounds: int = MAX_ROUNDS) -> StressReport:
    """Like :func:`apply_stress` but leaves ``world`` untouched."""
    return apply_stress(world.copy(), shock, impact, max_rounds)
