"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called once per backend before timing so that numba compile
time (or cache loading) is excluded. Results from the two backends are also
compared, so a speed-up never hides a disagreement.
"""

import argparse
import time

import numpy as np

from treasury_kelly import _kernels


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    n = 20_000
    q = rng.uniform(0.05, 0.95, n)
    alpha = rng.uniform(1e-6, 0.02, n)
    m = 5_000
    probs = rng.uniform(0.3, 0.95, (m, 2))
    weights = np.full((m, 2), 0.5)
    mix_p = np.array([0.52, 0.70])
    mix_w = np.array([0.8, 0.2])
    return {
        f"uncertainty roots, KL, {n} sets": lambda b: _kernels.uncertainty_roots(_kernels.KL, q, alpha, backend=b),
        f"uncertainty roots, IS, {n} sets": lambda b: _kernels.uncertainty_roots(
            _kernels.ITAKURA_SAITO, q, alpha, backend=b),
        f"golden section, {m} mixtures": lambda b: _kernels.mixture_golden(probs, weights, 0.0, 1 - 1e-9, 1e-10,
                                                                        backend=b),
        "growth grid argmax, step 1e-7": lambda b: _kernels.growth_grid_argmax(0.6, -0.999, 0.999, 1e-7,
                                                                              backend=b),
        "mixture grid argmax, step 1e-7": lambda b: _kernels.mixture_grid_argmax(mix_p, mix_w, 0.0, 0.999, 1e-7,
                                                                                backend=b),
    }


def _flat(result):
    if isinstance(result, tuple):
        return np.concatenate([np.atleast_1d(np.asarray(r, dtype=float)) for r in result])
    return np.asarray(result, dtype=float)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = _kernels.available_backends()
    if "numba" not in backends:
        print("numba is not importable (or disabled); only the numpy timings are shown")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<36}" + "".join(f"{b:>12}" for b in backends) + ("     speed-up  max |diff|" if len(backends) > 1 else ""))
    for name, fn in cases(rng).items():
        times = [best_of(lambda: fn(b), args.repeat) for b in backends]
        line = f"{name:<36}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(backends) > 1:
            diff = float(np.max(np.abs(_flat(fn(backends[0])) - _flat(fn(backends[1])))))
            line += f"  {times[1] / times[0]:>10.1f}x  {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
