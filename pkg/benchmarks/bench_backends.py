"""Compare the compiled kernels against the pure NumPy fallback.

Run:  python benchmarks/bench_backends.py
"""

import time

import numpy as np

from revanneal import ModelParams, Schedule, build_basis, build_terms, classical_state
from revanneal._backend import HAS_COMPILED, get_backend


def time_fn(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_evolution(backend, n, n_up, gamma, tau, order):
    params = ModelParams(p=3, n_spins=n, n_up=n_up, gamma=gamma)
    basis = build_basis(params)
    terms = build_terms(basis, params)
    psi0 = classical_state(basis, basis.spin1, -basis.spin2)
    kind, s_min, ts, ss, ls = Schedule.ara_linear(tau).kernel_args()
    args = (np.ascontiguousarray(terms.h0_diag), np.ascontiguousarray(terms.hinit_diag),
            np.ascontiguousarray(terms.off1), np.ascontiguousarray(terms.offk),
            terms.koff, np.ascontiguousarray(terms.rowsum), gamma,
            kind, tau, s_min, ts, ss, ls, psi0, 1e-8, order,
            np.zeros(0), 100_000_000)
    return time_fn(backend.evolve_kernel, *args, repeat=2)


def bench_svmc(backend, runs=32, sweeps=200, n=50):
    eps = np.ones(n, dtype=np.int8)
    eps[40:] = -1
    theta0 = np.where(eps > 0, 0.0, np.pi)
    ks = np.arange(1, sweeps + 1) / sweeps
    rng = np.random.default_rng(0)
    prop = rng.random((runs, sweeps, n))
    acc = rng.random((runs, sweeps, n))
    return time_fn(backend.svmc_batch, eps, 3, 4.0, 5.0, ks, ks, theta0,
                   prop, acc, 0, 0.5)


def main():
    if not HAS_COMPILED:
        print("compiled backend not built; nothing to compare")
        return
    core = get_backend("compiled")
    pure = get_backend("pure")
    print(f"{'kernel':<38}{'compiled':>12}{'pure':>12}{'speedup':>9}")
    cases = [
        ("evolve N=20 c=0.8 G=2 tau=20 ord2", 20, 16, 2.0, 20.0, 2),
        ("evolve N=20 c=0.8 G=2 tau=20 ord4", 20, 16, 2.0, 20.0, 4),
        ("evolve N=50 c=0.8 G=2 tau=40 ord4", 50, 40, 2.0, 40.0, 4),
        ("evolve N=100 c=0.8 G=2 tau=50 ord4", 100, 80, 2.0, 50.0, 4),
    ]
    for label, n, n_up, g, tau, order in cases:
        tc, (psi_c, *_rest) = bench_evolution(core, n, n_up, g, tau, order)
        tp, (psi_p, *_rest) = bench_evolution(pure, n, n_up, g, tau, order)
        fidelity = abs(np.vdot(psi_c, psi_p))
        print(f"{label:<38}{tc:>10.3f}s{tp:>10.3f}s{tp / tc:>8.1f}x"
              f"   |<c|p>| = {fidelity:.12f}")
    tc, mc = bench_svmc(core)
    tp, mp = bench_svmc(pure)
    agree = np.max(np.abs(mc - mp))
    print(f"{'svmc 32 runs x 200 sweeps x 50 spins':<38}{tc:>10.3f}s{tp:>10.3f}s"
          f"{tp / tc:>8.1f}x   max |dm| = {agree:.2e}")


if __name__ == "__main__":
    main()
