"""Robust Kelly sizing under divergence uncertainty, plus a treasury flywheel simulator."""

from ._backend import BACKEND
from .divergence import (
    DivergenceSpec,
    Family,
    UncertaintySet,
    bregman,
    kl_bernoulli,
    kl_series,
    series_diagnostic,
    solve_uncertainty_set,
)
from .errors import ConfigError, DomainError, NoRoot, NonConvergence, ZeroNav
from .kelly import BinaryGame, growth_expansion, growth_rate, optimal_fraction, optimal_growth
from .robust import (
    Mode,
    RobustPolicy,
    best_case_fraction,
    equal_weighted_fraction,
    heuristic_fraction,
    mixture_argmax,
    robust_fraction,
    robust_table,
    worst_case_fraction,
)

__version__ = "0.1.0"
