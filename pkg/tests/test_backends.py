import numpy as np
import pytest

from revanneal import ModelParams, Schedule, build_basis, build_terms, classical_state
from revanneal._backend import HAS_COMPILED, get_backend

pure = get_backend("pure")
needs_compiled = pytest.mark.skipif(not HAS_COMPILED, reason="extension not built")


def kernel_args(n=10, n_up=8, gamma=1.5, tau=7.0, order=4, tol=1e-9, snaps=()):
    params = ModelParams(p=3, n_spins=n, n_up=n_up, gamma=gamma)
    basis = build_basis(params)
    terms = build_terms(basis, params)
    psi0 = classical_state(basis, basis.spin1, -basis.spin2)
    kind, s_min, ts, ss, ls = Schedule.ara_linear(tau).kernel_args()
    return (np.ascontiguousarray(terms.h0_diag), np.ascontiguousarray(terms.hinit_diag),
            np.ascontiguousarray(terms.off1), np.ascontiguousarray(terms.offk),
            terms.koff, np.ascontiguousarray(terms.rowsum), gamma,
            kind, tau, s_min, ts, ss, ls, psi0, tol, order,
            np.asarray(snaps, dtype=float), 10_000_000)


@needs_compiled
def test_bessel_coefficients_agree():
    core = get_backend("compiled")
    for z in (0.0, 1e-9, 0.05, 0.7, 3.0, 12.0, 55.0, 240.0):
        a = pure.bessel_coeffs(z)
        b = core.bessel_coeffs(z)
        assert abs(len(a) - len(b)) <= 1
        m = min(len(a), len(b))
        np.testing.assert_allclose(a[:m], b[:m], atol=2e-14)


@needs_compiled
def test_evolution_parity():
    core = get_backend("compiled")
    args = kernel_args(snaps=(2.0, 5.0, 7.0))
    psi_c, snaps_c, drift_c, steps_c, rej_c = core.evolve_kernel(*args)
    psi_p, snaps_p, drift_p, steps_p, rej_p = pure.evolve_kernel(*args)
    assert steps_c == steps_p
    assert rej_c == rej_p
    assert abs(np.vdot(psi_c, psi_p)) >= 1.0 - 1e-10
    np.testing.assert_allclose(snaps_c, snaps_p, atol=1e-8)
    assert drift_c < 1e-10 and drift_p < 1e-10


@needs_compiled
def test_expmv_parity_and_accuracy(rng):
    from scipy.linalg import expm
    core = get_backend("compiled")
    params = ModelParams(p=3, n_spins=8, n_up=6, gamma=2.0)
    terms = build_terms(build_basis(params), params)
    dg = 0.4 * terms.h0_diag + 0.3 * terms.hinit_diag
    w = 0.8
    psi = rng.normal(size=terms.dim) + 1j * rng.normal(size=terms.dim)
    psi /= np.linalg.norm(psi)
    h = np.diag(dg) + w * terms.vtf()
    for dt in (0.01, 0.3, 2.5):
        exact = expm(-1j * dt * h) @ psi
        got = pure.expmv(dg, w, terms.off1, terms.offk, terms.koff,
                         terms.rowsum, dt, psi)
        np.testing.assert_allclose(got, exact, atol=1e-12)


@needs_compiled
def test_svmc_parity():
    core = get_backend("compiled")
    n, runs, sweeps = 20, 6, 40
    eps = np.ones(n, dtype=np.int8)
    eps[16:] = -1
    theta0 = np.where(eps > 0, 0.0, np.pi)
    ks = np.arange(1, sweeps + 1) / sweeps
    rng = np.random.default_rng(5)
    prop = rng.random((runs, sweeps, n))
    acc = rng.random((runs, sweeps, n))
    for mode, width in ((0, 0.5), (1, 0.8)):
        a = core.svmc_batch(eps, 3, 4.0, 5.0, ks, ks, theta0, prop, acc, mode, width)
        b = pure.svmc_batch(eps, 3, 4.0, 5.0, ks, ks, theta0, prop, acc, mode, width)
        np.testing.assert_allclose(a, b, atol=1e-10)
