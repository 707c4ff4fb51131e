"""CSV output. Floats are written with ``repr`` so every value round-trips."""

from __future__ import annotations

import csv
import io
from typing import Iterable, TextIO

from .engine import StepRecord
from .stress import StressReport

STEP_COLUMNS = (
    "step", "shares", "tokens", "token_price", "share_price", "mnav", "btc_per_share",
    "btc_yield", "btc_gain", "btc_dollar_gain", "investor_debt", "credit_exposure", "event_flags",
)

STRESS_COLUMNS = (
    "step", "shock", "magnitude", "haircut_before", "haircut_after", "share_price_before",
    "share_price_shocked", "share_price_final", "token_price", "mnav", "margin_calls",
    "shares_liquidated", "recovered", "credit_loss", "exposure_before", "exposure_after",
    "rounds", "converged",
)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def step_row(rec: StepRecord) -> list[str]:
    c = rec.company
    k = rec.kpis
    values = (
        rec.step, float(c.shares_outstanding), float(c.tokens_held), float(c.token_price),
        float(c.share_price), float(k.mnav), float(k.btc_per_share), float(k.btc_yield),
        float(k.btc_gain), float(k.btc_dollar_gain), float(rec.investor_debt),
        float(rec.credit_exposure), rec.event_flags,
    )
    return [_fmt(v) for v in values]


def stress_row(rep: StressReport, step: int | str = "") -> list[str]:
    values = (
        step, rep.shock.kind.value, float(rep.shock.magnitude), float(rep.haircut_before),
        float(rep.haircut_after), float(rep.share_price_before), float(rep.share_price_shocked),
        float(rep.share_price_final), float(rep.token_price_after), float(rep.mnav_after),
        rep.margin_calls, float(rep.shares_liquidated), float(rep.recovered), float(rep.credit_loss),
        float(rep.exposure_before), float(rep.exposure_after), rep.rounds, rep.converged,
    )
    return [_fmt(v) for v in values]


def write_steps(records: Iterable[StepRecord], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(STEP_COLUMNS)
    for rec in records:
        w.writerow(step_row(rec))


def write_stress(reports: Iterable[tuple[int | str, StressReport]], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(STRESS_COLUMNS)
    for step, rep in reports:
        w.writerow(stress_row(rep, step))


def steps_csv(records: Iterable[StepRecord]) -> str:
    buf = io.StringIO()
    write_steps(records, buf)
    return buf.getvalue()


def stress_csv(reports: Iterable[tuple[int | str, StressReport]]) -> str:
    buf = io.StringIO()
    write_stress(reports, buf)
    return buf.getvalue()
