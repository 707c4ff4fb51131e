"""Scenario documents (YAML) and their validated in-memory form.

Example document::

    name: accretion-10
    horizon: 10
    company: {shares_outstanding: 4, tokens_held: 1, token_price: 1, share_price: 1}
    investors:
      - {shares_held: 4, cash: 100, debt: 0}
    credit: {haircut: 0.5, exposure_limit: 1000}
    issuance: {mode: shares, per_step: 1}
    mnav_model: {kind: constant}
    impact: {share: 0.0, token: 0.0, token_supply: 21000000, form: linear}
    shocks:
      - {step: 5, kind: token_price_drop, magnitude: 0.3}

See the README for every key.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..errors import ConfigError, DomainError
from .model import CompanyState, CreditProvider, InvestorState, World


class ShockKind(str, enum.Enum):
    HAIRCUT_RAISE = "haircut_raise"
    TOKEN_PRICE_DROP = "token_price_drop"
    MNAV_COMPRESSION = "mnav_compression"


@dataclass(frozen=True)
class Shock:
    """``magnitude`` is the haircut increment, the fractional token price
    drop, or the target mNAV, depending on ``kind``."""

    kind: ShockKind
    magnitude: float
    step: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", ShockKind(self.kind))
        m = self.magnitude
        if not math.isfinite(m):
            raise DomainError(f"shock magnitude must be finite, got {m!r}")
        if self.kind is ShockKind.HAIRCUT_RAISE and not 0.0 <= m <= 1.0:
            raise DomainError(f"haircut raise must lie in [0, 1], got {m!r}")
        if self.kind is ShockKind.TOKEN_PRICE_DROP and not 0.0 <= m < 1.0:
            raise DomainError(f"token price drop must lie in [0, 1), got {m!r}")
        if self.kind is ShockKind.MNAV_COMPRESSION and not m > 0.0:
            raise DomainError(f"target mNAV must be > 0, got {m!r}")

    @classmethod
    def parse(cls, text: str, step: int = 0) -> "Shock":
        """Parse ``kind:magnitude``, e.g. ``token_price_drop:0.3``."""
        kind, sep, mag = text.partition(":")
        if not sep:
            raise DomainError(f"shock must look like kind:magnitude, got {text!r}")
        try:
            return cls(ShockKind(kind.strip()), float(mag), step)
        except ValueError as exc:
            raise DomainError(f"bad shock {text!r}: {exc}") from exc


@dataclass(frozen=True)
class ImpactConfig:
    share: float = 0.0
    token: float = 0.0
    token_supply: float = 21_000_000.0
    form: str = "linear"

    def response(self, coefficient: float, flow_fraction: float) -> float:
        """Relative price move for a signed flow expressed as a fraction of supply."""
        if coefficient == 0.0 or flow_fraction == 0.0:
            return 0.0
        if self.form == "sqrt":
            return coefficient * math.copysign(math.sqrt(abs(flow_fraction)), flow_fraction)
        return coefficient * flow_fraction


@dataclass(frozen=True)
class InvestorSpec:
    shares_held: float
    cash: float = 0.0
    debt: float = 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    company: CompanyState
    investors: tuple[InvestorSpec, ...]
    issuance: tuple[float, ...]
    haircuts: tuple[float, ...]
    exposure_limit: float
    issuance_mode: str = "shares"
    mnav_model: str = "constant"
    mnav_path: tuple[float, ...] = ()
    impact: ImpactConfig = field(default_factory=ImpactConfig)
    shocks: tuple[Shock, ...] = ()
    name: str = "scenario"

    @property
    def horizon(self) -> int:
        return len(self.issuance)

    def haircut_at(self, step: int) -> float:
        return self.haircuts[min(step, len(self.haircuts) - 1)]

    def shocks_at(self, step: int) -> list[Shock]:
        return [s for s in self.shocks if s.step == step]

    def world(self) -> World:
        investors = [InvestorState(i.shares_held, i.cash, i.debt) for i in self.investors]
        credit = CreditProvider(
            haircut=self.haircut_at(0),
            exposure_limit=self.exposure_limit,
            exposure=sum(i.debt for i in investors),
        )
        return World(self.company, investors, credit)


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------


def _line_map(text: str) -> dict[tuple, int]:
    lines: dict[tuple, int] = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return lines

    def walk(node, path):
        lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                walk(value, path + (key.value,))
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                walk(item, path + (i,))

    if root is not None:
        walk(root, ())
    return lines


class _Checker:
    def __init__(self, lines: dict[tuple, int]):
        self.lines = lines
        self.problems: list[str] = []

    def fail(self, path: tuple, msg: str) -> None:
        where = ".".join(str(p) for p in path) or "<root>"
        probe = path
        while probe and probe not in self.lines:
            probe = probe[:-1]
        line = self.lines.get(probe)
        self.problems.append(f"{where} (line {line}): {msg}" if line else f"{where}: {msg}")

    def mapping(self, data: Any, path: tuple, allowed: set[str], required: set[str] = frozenset()) -> dict:
        if not isinstance(data, dict):
            self.fail(path, "expected a mapping")
            return {}
        for key in data:
            if key not in allowed:
                self.fail(path + (key,), f"unknown key; expected one of {sorted(allowed)}")
        for key in sorted(required - set(data)):
            self.fail(path + (key,), "required key is missing")
        return data

    def number(self, data: dict, key: str, path: tuple, default=None, *, gt=None, ge=None, le=None, lt=None):
        if key not in data:
            return default
        value = data[key]
        where = path + (key,)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.fail(where, f"expected a finite number, got {value!r}")
            return default
        value = float(value)
        if gt is not None and not value > gt:
            self.fail(where, f"must be > {gt}, got {value!r}")
        if ge is not None and not value >= ge:
            self.fail(where, f"must be >= {ge}, got {value!r}")
        if le is not None and not value <= le:
            self.fail(where, f"must be <= {le}, got {value!r}")
        if lt is not None and not value < lt:
            self.fail(where, f"must be < {lt}, got {value!r}")
        return value

    def number_list(self, value: Any, path: tuple, **bounds) -> list[float]:
        if not isinstance(value, list):
            self.fail(path, "expected a list of numbers")
            return []
        box = {i: v for i, v in enumerate(value)}
        out = [self.number(box, i, path, **bounds) for i in range(len(value))]
        return [v for v in out if v is not None]

    def choice(self, data: dict, key: str, path: tuple, options: tuple[str, ...], default: str) -> str:
        value = data.get(key, default)
        if value not in options:
            self.fail(path + (key,), f"expected one of {list(options)}, got {value!r}")
            return default
        return value


def config_from_dict(data: Any, lines: dict[tuple, int] | None = None) -> ScenarioConfig:
    """Validate a parsed document; all problems are reported together."""
    ck = _Checker(lines or {})
    top = ck.mapping(
        data, (),
        {"name", "horizon", "company", "investors", "credit", "issuance", "mnav_model", "impact", "shocks"},
        {"horizon", "company", "credit", "issuance"},
    )

    horizon = top.get("horizon", 0)
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 0:
        ck.fail(("horizon",), f"expected an integer >= 0, got {horizon!r}")
        horizon = 0

    c = ck.mapping(top.get("company", {}), ("company",),
                   {"shares_outstanding", "tokens_held", "token_price", "share_price"},
                   {"shares_outstanding", "tokens_held", "token_price", "share_price"})
    p = ("company",)
    company_args = (
        ck.number(c, "shares_outstanding", p, 1.0, gt=0),
        ck.number(c, "tokens_held", p, 0.0, ge=0),
        ck.number(c, "token_price", p, 1.0, gt=0),
        ck.number(c, "share_price", p, 1.0, gt=0),
    )

    investors = []
    raw_inv = top.get("investors", [])
    if not isinstance(raw_inv, list):
        ck.fail(("investors",), "expected a list of investors")
        raw_inv = []
    for i, item in enumerate(raw_inv):
        path = ("investors", i)
        d = ck.mapping(item, path, {"shares_held", "cash", "debt"}, {"shares_held"})
        investors.append(InvestorSpec(
            ck.number(d, "shares_held", path, 0.0, ge=0),
            ck.number(d, "cash", path, 0.0, ge=0),
            ck.number(d, "debt", path, 0.0, ge=0),
        ))

    cr = ck.mapping(top.get("credit", {}), ("credit",), {"haircut", "exposure_limit"}, {"haircut", "exposure_limit"})
    hc = cr.get("haircut", 0.5)
    if isinstance(hc, list):
        haircuts = ck.number_list(hc, ("credit", "haircut"), ge=0, le=1)
        if not hc:
            ck.fail(("credit", "haircut"), "haircut schedule must not be empty")
    else:
        haircuts = [ck.number(cr, "haircut", ("credit",), 0.5, ge=0, le=1)]
    exposure_limit = ck.number(cr, "exposure_limit", ("credit",), 1.0, gt=0)

    iss = ck.mapping(top.get("issuance", {}), ("issuance",), {"mode", "per_step", "amounts"})
    mode = ck.choice(iss, "mode", ("issuance",), ("shares", "proceeds"), "shares")
    if ("per_step" in iss) == ("amounts" in iss):
        ck.fail(("issuance",), "give exactly one of per_step or amounts")
        amounts = [0.0] * horizon
    elif "per_step" in iss:
        amounts = [ck.number(iss, "per_step", ("issuance",), 0.0, ge=0)] * horizon
    else:
        amounts = ck.number_list(iss["amounts"], ("issuance", "amounts"), ge=0)
        if isinstance(iss["amounts"], list) and len(iss["amounts"]) != horizon:
            ck.fail(("issuance", "amounts"), f"expected {horizon} entries (the horizon), got {len(iss['amounts'])}")

    mm = ck.mapping(top.get("mnav_model", {}), ("mnav_model",), {"kind", "path"})
    kind = ck.choice(mm, "kind", ("mnav_model",), ("constant", "path", "impact"), "constant")
    path_values: list[float] = []
    if kind == "path":
        if "path" not in mm:
            ck.fail(("mnav_model", "path"), "required when kind is path")
        else:
            path_values = ck.number_list(mm["path"], ("mnav_model", "path"), gt=0)
            if isinstance(mm["path"], list) and len(mm["path"]) != horizon:
                ck.fail(("mnav_model", "path"), f"expected {horizon} entries (the horizon), got {len(mm['path'])}")
    elif "path" in mm:
        ck.fail(("mnav_model", "path"), "only used when kind is path")

    im = ck.mapping(top.get("impact", {}), ("impact",), {"share", "token", "token_supply", "form"})
    impact = ImpactConfig(
        share=ck.number(im, "share", ("impact",), 0.0, ge=0),
        token=ck.number(im, "token", ("impact",), 0.0, ge=0),
        token_supply=ck.number(im, "token_supply", ("impact",), 21_000_000.0, gt=0),
        form=ck.choice(im, "form", ("impact",), ("linear", "sqrt"), "linear"),
    )

    shocks = []
    raw_shocks = top.get("shocks", [])
    if not isinstance(raw_shocks, list):
        ck.fail(("shocks",), "expected a list of shocks")
        raw_shocks = []
    for i, item in enumerate(raw_shocks):
        path = ("shocks", i)
        d = ck.mapping(item, path, {"step", "kind", "magnitude"}, {"step", "kind", "magnitude"})
        step = d.get("step", 0)
        if isinstance(step, bool) or not isinstance(step, int) or not 0 <= step < max(horizon, 1):
            ck.fail(path + ("step",), f"expected an integer step in [0, {horizon}), got {step!r}")
            continue
        skind = ck.choice(d, "kind", path, tuple(k.value for k in ShockKind), ShockKind.TOKEN_PRICE_DROP.value)
        mag = ck.number(d, "magnitude", path, 0.0)
        try:
            shocks.append(Shock(ShockKind(skind), mag, step))
        except DomainError as exc:
            ck.fail(path + ("magnitude",), str(exc))

    name = top.get("name", "scenario")
    if not isinstance(name, str):
        ck.fail(("name",), "expected a string")
        name = "scenario"

    if ck.problems:
        raise ConfigError(ck.problems)

    try:
        company = CompanyState(*company_args)
    except DomainError as exc:
        raise ConfigError([f"company: {exc}"]) from exc
    if company.nav <= 0:
        raise ConfigError([f"company (line {ck.lines.get(('company',))}): nav must be > 0 for mNAV to exist"])
    debt = sum(i.debt for i in investors)
    if debt > exposure_limit:
        raise ConfigError([f"credit.exposure_limit: opening debt {debt!r} exceeds the limit"])

    return ScenarioConfig(
        company=company,
        investors=tuple(investors),
        issuance=tuple(amounts),
        haircuts=tuple(haircuts),
        exposure_limit=exposure_limit,
        issuance_mode=mode,
        mnav_model=kind,
        mnav_path=tuple(path_values),
        impact=impact,
        shocks=tuple(shocks),
        name=name,
    )


def loads_config(text: str) -> ScenarioConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1})" if mark is not None else ""
        raise ConfigError([f"not valid YAML{where}: {getattr(exc, 'problem', exc)}"]) from exc
    return config_from_dict(data, _line_map(text))


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"{path}: cannot read ({exc.strerror or exc})"]) from exc
    return loads_config(text)
