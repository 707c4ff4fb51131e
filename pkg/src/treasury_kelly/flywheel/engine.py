"""One flywheel cycle per step, in a fixed order.

1. scheduled shares are offered at the current share price
2. investors borrow against their holdings, capped by the lender's limit
3. cash first, then credit, buys the offered shares
4. the company converts the proceeds into tokens (optionally moving the
   token price under the ``impact`` model)
5. the share price is reset by the mNAV model
6. collateral is re-checked; a breach is flagged, not liquidated
7. KPIs are recorded against the state at the start of the step

Scheduled shocks for a step are applied before (1).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..errors import NonConvergence
from .config import ScenarioConfig
from .model import CompanyState, Kpis, World, kpis
from .stress import StressReport, apply_stress

LOAN_GRANTED = "loan_granted"
LOAN_REFUSED = "loan_refused"
MARGIN_CALL = "margin_call"
LIQUIDATION = "liquidation"
INFEASIBLE = "infeasible"
EVENT_ORDER = (LOAN_GRANTED, LOAN_REFUSED, MARGIN_CALL, LIQUIDATION, INFEASIBLE)

_ABSORB_TOL = 1e-12


@dataclass(frozen=True)
class StepRecord:
    step: int
    company: CompanyState
    kpis: Kpis
    investor_debt: float
    credit_exposure: float
    haircut: float
    shares_offered: float
    shares_issued: float
    cash_raised: float
    tokens_bought: float
    events: tuple[str, ...]
    stress: tuple[StressReport, ...] = ()

    @property
    def event_flags(self) -> str:
        return "|".join(self.events)


def _buy_issuance(world: World, offered: float, price: float, haircut: float, events: set[str]) -> float:
    """Steps 2-3: returns the cash the company raised."""
    credit = world.credit
    powers = [inv.cash + inv.capacity(price, haircut) for inv in world.investors]
    total = sum(powers)
    if total <= 0.0:
        return 0.0
    scale = min(1.0, offered * price / total)
    raised = 0.0
    for inv, power in zip(world.investors, powers):
        target = power * scale
        from_cash = min(inv.cash, target)
        need = target - from_cash
        grant = min(need, credit.headroom) if need > 0.0 else 0.0
        if need > 0.0:
            if grant > 0.0:
                events.add(LOAN_GRANTED)
            if grant < need:
                events.add(LOAN_REFUSED)
        inv.cash -= from_cash
        inv.debt += grant
        credit.exposure += grant
        paid = from_cash + grant
        inv.shares_held += paid / price
        raised += paid
    return raised


def step(world: World, config: ScenarioConfig, t: int) -> StepRecord:
    """Advance ``world`` by one cycle in place and return its record."""
    start = world.company
    impact = config.impact
    events: set[str] = set()

    world.credit.haircut = min(1.0, config.haircut_at(t) + world.haircut_shift)
    reports = []
    for shock in config.shocks_at(t):
        try:
            rep = apply_stress(world, shock, impact)
        except NonConvergence as exc:
            rep = exc.report
        reports.append(rep)
        if rep.margin_calls:
            events.add(MARGIN_CALL)
        if rep.shares_liquidated > 0.0:
            events.add(LIQUIDATION)
    h = world.credit.haircut

    c = world.company
    price = c.share_price
    amount = config.issuance[t]
    offered = amount if config.issuance_mode == "shares" else amount / price

    raised = 0.0
    issued = 0.0
    bought = 0.0
    if offered > 0.0:
        raised = _buy_issuance(world, offered, price, h, events)
        issued = raised / price
        if issued < offered * (1.0 - _ABSORB_TOL):
            events.add(INFEASIBLE)
        if issued > 0.0:
            bought = raised / c.token_price
            token_price = c.token_price
            if config.mnav_model == "impact":
                token_price *= 1.0 + impact.response(impact.token, bought / impact.token_supply)
            c = replace(c, shares_outstanding=c.shares_outstanding + issued,
                        tokens_held=c.tokens_held + bought, token_price=token_price)

    if config.mnav_model == "constant":
        if issued > 0.0:
            c = replace(c, share_price=world.mnav_anchor * c.nav / c.shares_outstanding)
    elif config.mnav_model == "path":
        c = replace(c, share_price=config.mnav_path[t] * c.nav / c.shares_outstanding)
    elif issued > 0.0:
        move = impact.response(impact.share, issued / world.company.shares_outstanding)
        c = replace(c, share_price=c.share_price * (1.0 + move))
    world.company = c

    if any(inv.in_breach(c.share_price, h) for inv in world.investors):
        events.add(MARGIN_CALL)

    return StepRecord(
        step=t,
        company=c,
        kpis=kpis(start, c),
        investor_debt=world.total_debt,
        credit_exposure=world.credit.exposure,
        haircut=h,
        shares_offered=offered,
        shares_issued=issued,
        cash_raised=raised,
        tokens_bought=bought,
        events=tuple(e for e in EVENT_ORDER if e in events),
        stress=tuple(reports),
    )


@dataclass
class Simulation:
    records: list[StepRecord]
    world: World


def simulate(config: ScenarioConfig) -> Simulation:
    world = config.world()
    records = [step(world, config, t) for t in range(config.horizon)]
    return Simulation(records, world)


def run(config: ScenarioConfig) -> list[StepRecord]:
    """Full time series for ``config``."""
    return simulate(config).records
