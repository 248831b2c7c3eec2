"""Compare the numba and numpy backends of the two hot kernels.

Run with ``python benchmarks/bench_kernels.py``.  Each kernel is timed on
the same inputs under both backends (best of ``--repeat`` runs, after one
warm-up call so that JIT compilation is excluded) and the maximum
difference between the two results is printed next to the timings.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from chebli import _accel as ac


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def magnus_case(n_steps, n_lam, seed=0):
    rng = np.random.default_rng(seed)
    nodes = np.cumsum(np.concatenate([[0.1], rng.uniform(0.002, 0.01, n_steps)]))
    g1, g2 = ac.magnus_gauss_points(nodes)
    q = lambda x: 0.75 / x**2 - 0.3 * np.exp(-x)
    k2 = np.linspace(0.0, 200.0, n_lam) ** 2
    out_idx = np.arange(0, n_steps + 1, max(1, n_steps // 50))
    return nodes, q(g1), q(g2), k2, np.ones(n_lam), np.zeros(n_lam), out_idx


def neumann_case(n_grid, n_lam):
    t = np.geomspace(1.0, 32.0, n_grid)
    q = -0.25 / t**2 + 0.5 * np.exp(-t)
    lam = np.linspace(0.0, 60.0, n_lam)
    return t, q, lam, np.ones((n_lam, n_grid), dtype=complex)


def run(repeat=3, sizes=((2000, 64), (8000, 256))):
    if not ac.HAVE_NUMBA:
        print("numba unavailable (or CHEBLI_NUMBA=0); only the numpy path can be timed")
    backends = ("numba", "numpy") if ac.HAVE_NUMBA else ("numpy",)
    rows = []
    for n, nl in sizes:
        args = magnus_case(n, nl)
        res = {b: _best(lambda b=b: ac.magnus_sweep(*args, backend=b), repeat) for b in backends}
        rows.append(("magnus_sweep", n, nl, res))
        t, q, lam, mh = neumann_case(n // 4, nl)
        res = {b: _best(lambda b=b: ac.volterra_neumann(t, q, lam, mh, 1e-12, backend=b), repeat)
               for b in backends}
        rows.append(("volterra_neumann", n // 4, nl, res))

    print(f"{'kernel':<18}{'grid':>7}{'batch':>7}{'numba s':>11}{'numpy s':>11}{'speedup':>9}{'max diff':>11}")
    for name, n, nl, res in rows:
        tn = res["numba"][0] if "numba" in res else float("nan")
        tp = res["numpy"][0]
        diff = float("nan")
        if "numba" in res:
            a, b = res["numba"][1][0], res["numpy"][1][0]
            diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
        print(f"{name:<18}{n:>7}{nl:>7}{tn:>11.4f}{tp:>11.4f}{tp / tn:>9.2f}{diff:>11.2e}")
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="small sizes only")
    args = ap.parse_args(argv)
    run(args.repeat, ((500, 16),) if args.quick else ((2000, 64), (8000, 256)))


if __name__ == "__main__":
    main()
