"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and repeated in the pytest terminal summary.
"""

import csv
import io
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from stress_cases import all_cases, shock_grids
from treasury_kelly import _kernels
from treasury_kelly.cli import main
from treasury_kelly.divergence import DivergenceSpec, attainable, kl_bernoulli, kl_series, series_diagnostic, solve_uncertainty_set
from treasury_kelly.flywheel import CompanyState, issue_and_buy, mnav, stress
from treasury_kelly.kelly import expansion_coefficients, growth_expansion, growth_rate
from treasury_kelly.robust import equal_weighted_fraction, heuristic_fraction, mixture_argmax_batch, mixture_grid_argmax

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
RESULTS: list[str] = []


def verdict(number, title, ok, detail, elapsed=None, budget=None):
    timing = ""
    if elapsed is not None:
        timing = f" [{elapsed:.3f}s"
        if budget is not None:
            timing += f" / budget {budget:g}s"
            ok = ok and elapsed < budget
        timing += "]"
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}: {detail}{timing}"
    RESULTS.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    # compile (or load cached) numba kernels outside the timed sections
    q = np.array([0.6])
    for code in (_kernels.KL, _kernels.ITAKURA_SAITO, _kernels.SQUARED_EUCLIDEAN):
        _kernels.uncertainty_roots(code, q, np.array([1e-3]))
    _kernels.mixture_golden(np.array([[0.55, 0.65]]), np.array([[0.5, 0.5]]), 0.0, 0.5, 1e-10)
    _kernels.mixture_grid_argmax(np.array([0.55, 0.65]), np.array([0.5, 0.5]), 0.0, 0.5, 0.1)
    solve_uncertainty_set(DivergenceSpec.kl(), 0.6, 1e-3)


def test_criterion_01_worked_example():
    t0 = time.perf_counter()
    before = CompanyState(Fraction(4), Fraction(1), Fraction(1), Fraction(1))
    after = issue_and_buy(before, Fraction(1))
    exact_ok = (after.share_price == Fraction(8, 5) and before.btc_per_share == Fraction(1, 4)
                and after.btc_per_share == Fraction(2, 5) and mnav(after) == 4)
    f_after = issue_and_buy(CompanyState(4.0, 1.0, 1.0, 1.0), 1.0)
    float_ok = (abs(f_after.share_price / 1.6 - 1) <= 1e-12 and abs(f_after.btc_per_share / 0.4 - 1) <= 1e-12)
    rise = after.share_price / before.share_price - 1
    verdict(1, "worked issuance example", exact_ok and float_ok,
            f"share price {after.share_price} exactly (a {float(rise):.0%} rise; the +80% label does not follow), "
            f"btc/share {before.btc_per_share} -> {after.btc_per_share}",
            time.perf_counter() - t0, 0.05)


@pytest.mark.xfail(strict=True, reason="1 -> 8/5 is +60%, not +80%")
def test_criterion_01_eighty_percent_label():
    after = issue_and_buy(CompanyState(Fraction(4), Fraction(1), Fraction(1), Fraction(1)), Fraction(1))
    assert after.share_price - 1 == Fraction(4, 5)


def test_criterion_02_growth_expansion():
    t0 = time.perf_counter()
    ratios = []
    fd_worst = 0.0
    for p in (0.55, 0.6, 0.7, 0.8, 0.9):
        fs = 2 * p - 1
        for eps in (1e-3, 3e-3, 1e-2, -1e-3, -3e-3, -1e-2):
            err = abs(growth_rate(p, fs + eps) - growth_expansion(p, eps, 3))
            err_half = abs(growth_rate(p, fs + eps / 2) - growth_expansion(p, eps / 2, 3))
            ratios.append(err / err_half)
        h = 1e-4
        second = (growth_rate(p, fs + h) - 2 * growth_rate(p, fs) + growth_rate(p, fs - h)) / h**2
        c2 = expansion_coefficients(p)[1]
        fd_worst = max(fd_worst, abs(second / 2 / c2 - 1))
    ok = all(12 <= r <= 20 for r in ratios) and fd_worst <= 1e-6
    verdict(2, "growth expansion is fourth order", ok,
            f"halving ratios in [{min(ratios):.2f}, {max(ratios):.2f}], "
            f"finite-difference quadratic coefficient within {fd_worst:.1e} relative",
            time.perf_counter() - t0, 1.0)


def test_criterion_03_asymmetry():
    t0 = time.perf_counter()
    checked = violations = 0
    for p in np.linspace(0.505, 0.995, 99):
        fs = 2 * p - 1
        for u in np.linspace(0.01, 0.99, 50):
            eps = u * min(1 - fs, 1 + fs)
            checked += 1
            violations += not growth_rate(p, fs - eps) > growth_rate(p, fs + eps)
    verdict(3, "under-betting beats over-betting", violations == 0,
            f"{violations} violations in {checked} grid points", time.perf_counter() - t0, 1.0)


def test_criterion_04_divergence_solver():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240401)
    worst = 0.0
    bad_order = 0
    for spec in (DivergenceSpec.kl(), DivergenceSpec.itakura_saito(), DivergenceSpec.squared_euclidean()):
        for _ in range(1000):
            q = rng.uniform(0.02, 0.98)
            alpha = rng.uniform(0.0, 1.0) * min(1.0, *attainable(spec, q))
            u = solve_uncertainty_set(spec, q, alpha)
            worst = max(worst, *map(abs, u.residuals))
            bad_order += not (u.p_minus <= q <= u.p_plus)
    verdict(4, "uncertainty-set roots", worst <= 1e-12 and bad_order == 0,
            f"3x1000 sets, worst residual {worst:.1e}, {bad_order} ordering failures",
            time.perf_counter() - t0, 5.0)


def test_criterion_05_conservatism():
    t0 = time.perf_counter()
    margins = {}
    for name, spec in (("KL", DivergenceSpec.kl()), ("IS", DivergenceSpec.itakura_saito())):
        for q in (0.55, 0.6, 0.7, 0.8):
            for a in (1e-4, 1e-3, 5e-3):
                margins[name, q, a] = (2 * q - 1) - equal_weighted_fraction(solve_uncertainty_set(spec, q, a))
    ref = margins["KL", 0.6, 0.005]
    ok = all(m > 0 for m in margins.values()) and abs(ref - 0.0007) <= 0.0005
    verdict(5, "equal-weighted rule is conservative", ok,
            f"min margin {min(margins.values()):.2e} over 24 points (KL and two-outcome IS), "
            f"margin at q=0.6, alpha=0.005: {ref:.5f} (KL), {margins['IS', 0.6, 0.005]:.5f} (IS)",
            time.perf_counter() - t0, 1.0)


def test_criterion_06_series_discrepancy():
    t0 = time.perf_counter()
    d_ratios, p_ratios = [], []
    for q in (0.55, 0.6, 0.7, 0.8):
        for eps in (1e-3, 3e-3, 1e-2, -1e-3, -3e-3, -1e-2):
            def err(e, variant):
                return abs(kl_bernoulli(q, q + e) - kl_series(q, e, variant))
            d_ratios.append(err(eps, "derivative_based") / err(eps / 2, "derivative_based"))
            p_ratios.append(err(eps, "as_printed") / err(eps / 2, "as_printed"))
    d = series_diagnostic(0.6, 0.01)
    ok = (all(12 <= r <= 20 for r in d_ratios) and all(6 <= r <= 10 for r in p_ratios)
          and abs(d.cubic_as_printed / -1.5e-6 - 1) < 0.01 and abs(d.required_cubic / 5.8e-7 - 1) < 0.05
          and d.cubic_as_printed < 0 < d.required_cubic)
    verdict(6, "printed cubic KL term has the wrong sign", ok,
            f"derivative-based halving ratios [{min(d_ratios):.1f}, {max(d_ratios):.1f}], "
            f"as-printed [{min(p_ratios):.1f}, {max(p_ratios):.1f}]; at q=0.6, eps=0.01 "
            f"as-printed cubic {d.cubic_as_printed:.3e} vs required {d.required_cubic:.3e}",
            time.perf_counter() - t0, 1.0)


def test_criterion_07_heuristic():
    t0 = time.perf_counter()
    at_zero = all(heuristic_fraction(q, 0.0, 3.0) == 2 * q - 1 for q in (0.55, 0.6, 0.9))
    alphas = np.linspace(0.0, 2.0, 201)
    lams = np.linspace(0.1, 20.0, 200)
    dec_alpha = all(np.all(np.diff([heuristic_fraction(0.6, a, lam) for a in alphas]) < 0) for lam in (0.5, 1, 10))
    dec_lam = all(np.all(np.diff([heuristic_fraction(0.6, a, lam) for lam in lams]) < 0) for a in (1e-3, 0.005, 0.5))
    value = heuristic_fraction(0.6, 0.005, 10.0)
    ok = at_zero and dec_alpha and dec_lam and abs(value - 0.190246) <= 1e-6
    verdict(7, "exponential shrinkage rule", ok,
            f"equals 2q-1 at alpha=0: {at_zero}, decreasing in alpha: {dec_alpha}, in lambda: {dec_lam}, "
            f"value at (0.6, 0.005, 10) = {value:.7f}", time.perf_counter() - t0, 0.05)


def test_criterion_08_accretion_sign_law():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    mismatches = 0
    neutral_worst = 0.0
    for i in range(500):
        shares, tokens, tprice = rng.uniform([1, 0.01, 0.1], [1e4, 1e3, 1e4])
        if i % 5 == 0:
            sprice = tokens * tprice / shares
        else:
            sprice = tokens * tprice / shares * rng.uniform(0.2, 5.0)
        s = CompanyState(shares, tokens, tprice, sprice)
        after = issue_and_buy(s, float(rng.uniform(0.01, 1e3)))
        change = after.btc_per_share - s.btc_per_share
        if i % 5 == 0:
            neutral_worst = max(neutral_worst, abs(change) / s.btc_per_share)
        else:
            mismatches += np.sign(change) != np.sign(mnav(s) - 1)
    ok = mismatches == 0 and neutral_worst <= 1e-15
    verdict(8, "issuance accretes iff mNAV > 1", ok,
            f"{mismatches} sign mismatches in 400 states, worst drift at mNAV=1 over 100 states "
            f"{neutral_worst:.1e} relative", time.perf_counter() - t0, 1.0)


def test_criterion_09_stress_conservation():
    t0 = time.perf_counter()
    identity = bookkeeping = 0.0
    non_monotone = runs = 0
    cases = list(all_cases())
    for _, world, impact in cases:
        for grid in shock_grids(world).values():
            losses = []
            for shock in grid:
                rep = stress(world, shock, impact)
                runs += 1
                expected = sum(max(0.0, o.debt_before - o.recovery) for o in rep.outcomes if o.called)
                identity = max(identity, abs(rep.credit_loss - expected))
                flow = rep.exposure_before - rep.exposure_after - rep.recovered - rep.credit_loss
                bookkeeping = max(bookkeeping, abs(flow), abs(rep.exposure_after - rep.world.total_debt))
                losses.append(rep.credit_loss)
            non_monotone += any(b < a - 1e-9 for a, b in zip(losses, losses[1:]))
    ok = identity <= 1e-9 and bookkeeping <= 1e-9 and non_monotone == 0
    verdict(9, "stress loss identity, bookkeeping, monotone fragility", ok,
            f"{runs} stress runs over {len(cases)} worlds: loss identity gap {identity:.1e}, "
            f"exposure imbalance {bookkeeping:.1e}, {non_monotone} non-monotone grids",
            time.perf_counter() - t0, 5.0)


def test_criterion_10_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    spec = DivergenceSpec.kl()
    q = rng.uniform(0.51, 0.95, 1000)
    alpha = rng.uniform(1e-5, 0.02, 1000)
    sets = [solve_uncertainty_set(spec, qi, ai) for qi, ai in zip(q, alpha)]
    closed = np.array([equal_weighted_fraction(u) for u in sets])
    probs = np.array([[u.p_minus, u.p_plus] for u in sets])
    golden = mixture_argmax_batch(probs, np.full_like(probs, 0.5))
    worst_golden = float(np.max(np.abs(closed - golden)))
    # brute-force grid on a subsample as a second, derivative-free oracle
    idx = rng.choice(1000, 50, replace=False)
    worst_grid = max(abs(closed[i] - mixture_grid_argmax(probs[i], [0.5, 0.5], step=2e-5)) for i in idx)
    ok = worst_golden <= 1e-4 and worst_grid <= 1e-4
    verdict(10, "closed form vs numerical maximiser", ok,
            f"1000 sets, worst gap {worst_golden:.1e} (golden section), {worst_grid:.1e} (grid, 50 sets)",
            time.perf_counter() - t0, 10.0)


def test_criterion_11_determinism(tmp_path):
    t0 = time.perf_counter()
    outputs = []
    for name in ("accretion_10.yaml", "levered_stress.yaml"):
        for k in range(2):
            dest = tmp_path / f"{name}.{k}.csv"
            assert main(["flywheel", "run", "--config", str(SCENARIOS / name), "--out", str(dest)]) == 0
            outputs.append(dest.read_bytes())
    rows = list(csv.reader(io.StringIO(outputs[0].decode())))
    ok = outputs[0] == outputs[1] and outputs[2] == outputs[3] and len(rows) == 11
    verdict(11, "flywheel run is byte-identical", ok,
            f"2 configs x 2 runs, {len(outputs[0]) + len(outputs[2])} bytes compared", time.perf_counter() - t0)
