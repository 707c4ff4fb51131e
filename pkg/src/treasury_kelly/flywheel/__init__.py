"""Treasury-company flywheel: mNAV accretion, shareholder leverage, stress."""

from .config import ImpactConfig, InvestorSpec, ScenarioConfig, Shock, ShockKind, config_from_dict, load_config, loads_config
from .engine import Simulation, StepRecord, run, simulate, step
from .model import CompanyState, CreditProvider, InvestorState, Kpis, World, issue_and_buy, kpis, mnav
from .stress import InvestorOutcome, StressReport, apply_stress, stress

__all__ = [
    "CompanyState", "CreditProvider", "ImpactConfig", "InvestorOutcome", "InvestorSpec", "InvestorState",
    "Kpis", "ScenarioConfig", "Shock", "ShockKind", "Simulation", "StepRecord", "StressReport", "World",
    "apply_stress", "config_from_dict", "issue_and_buy", "kpis", "load_config", "loads_config", "mnav",
    "run", "simulate", "step", "stress",
]
