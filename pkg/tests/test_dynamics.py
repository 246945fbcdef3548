import math

import numpy as np
import pytest

import fullspace as fs
from revanneal import (
    ConfigError,
    ModelParams,
    NumericalFailure,
    Schedule,
    build_basis,
    build_terms,
    classical_state,
    error_probability,
    evolve,
    magnetization_diagonal,
    qa_ground_state,
    run_protocol,
    tts,
)


def make(p=3, n=10, n_up=8, gamma=1.0):
    params = ModelParams(p=p, n_spins=n, n_up=n_up, gamma=gamma)
    basis = build_basis(params)
    return params, basis, build_terms(basis, params)


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------
def test_schedule_shapes():
    qa = Schedule.qa(10.0)
    assert qa.s_of(0.0) == 0.0 and qa.s_of(10.0) == 1.0
    assert qa.lam_of(3.3) == 1.0
    ara = Schedule.ara_linear(8.0)
    assert ara.s_of(4.0) == pytest.approx(0.5)
    assert ara.lam_of(4.0) == pytest.approx(0.5)
    ira = Schedule.ira(10.0, 0.3)
    assert ira.s_of(0.0) == pytest.approx(1.0)
    assert ira.s_of(10.0) == pytest.approx(1.0)
    assert ira.s_of(5.0) == pytest.approx(0.3)
    assert np.min(ira.s_of(np.linspace(0, 10, 401))) >= 0.3 - 1e-12
    with pytest.raises(ConfigError):
        Schedule.ira(10.0, 0.0)
    with pytest.raises(ConfigError):
        Schedule.ara_custom(5.0, [(0.0, 0.0, 0.0)])


def test_custom_schedule_interpolation():
    sched = Schedule.ara_custom(4.0, [(0.0, 0.0, 1.0), (2.0, 0.5, 1.0), (4.0, 1.0, 0.0)])
    assert sched.s_of(1.0) == pytest.approx(0.25)
    assert sched.lam_of(3.0) == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# evolve
# ---------------------------------------------------------------------------
def test_diagonal_hamiltonian_only_phases():
    # lambda == 0 keeps H diagonal: populations frozen, pe = 0 for c = 1
    params, basis, terms = make(n=8, n_up=8)
    tau = 5.0
    sched = Schedule.ara_custom(tau, [(0.0, 0.0, 0.0), (tau, 1.0, 0.0)])
    psi0 = classical_state(basis, basis.spin1, basis.spin2)
    res = evolve(terms, sched, psi0, tol=1e-9)
    assert error_probability(res.final, terms) == pytest.approx(0.0, abs=1e-12)
    assert abs(abs(res.final[0]) - 1.0) < 1e-12


def test_matches_full_hilbert_evolution():
    n, n_up, gamma, tau = 6, 4, 1.0, 20.0
    params, basis, terms = make(n=n, n_up=n_up, gamma=gamma)
    sched = Schedule.ara_linear(tau)
    psi0 = classical_state(basis, basis.spin1, -basis.spin2)
    res = evolve(terms, sched, psi0, tol=1e-9)
    q = fs.dicke_embedding(n, n_up)
    full0 = q @ psi0
    full = fs.full_evolve_gamma(n, n_up, 3, gamma, sched, full0)
    overlap = abs(np.vdot(q @ res.final, full))
    assert overlap >= 1.0 - 1e-8


def test_order4_matches_order2():
    params, basis, terms = make(n=12, n_up=9, gamma=1.5)
    sched = Schedule.ara_linear(15.0)
    psi0 = classical_state(basis, basis.spin1, -basis.spin2)
    r2 = evolve(terms, sched, psi0, tol=1e-10, order=2)
    r4 = evolve(terms, sched, psi0, tol=1e-10, order=4)
    assert abs(np.vdot(r2.final, r4.final)) >= 1.0 - 1e-8
    assert r4.step_count < r2.step_count


def test_time_reversal():
    params, basis, terms = make(n=10, n_up=8, gamma=2.0)
    tau = 12.0
    sched = Schedule.ara_linear(tau)
    psi0 = classical_state(basis, basis.spin1, -basis.spin2)
    fwd = evolve(terms, sched, psi0, tol=1e-9)
    back = evolve(terms, sched.reversed(), np.conj(fwd.final), tol=1e-9)
    assert abs(np.vdot(back.final, np.conj(psi0))) >= 1.0 - 1e-6


def test_unitarity_monitor():
    params, basis, terms = make(n=20, n_up=16, gamma=2.0)
    res = evolve(terms, Schedule.ara_linear(50.0),
                 classical_state(basis, basis.spin1, -basis.spin2), tol=1e-7, order=4)
    assert res.norm_drift < 1e-8
    assert abs(np.linalg.norm(res.final) - 1.0) < 1e-8


def test_snapshots_and_magnetization_samples():
    params, basis, terms = make(n=10, n_up=8)
    tau = 10.0
    times = np.linspace(0.0, tau, 11)[1:]
    psi0 = classical_state(basis, basis.spin1, -basis.spin2)
    res = evolve(terms, Schedule.ara_linear(tau), psi0, tol=1e-9, sample_times=times)
    assert res.snapshots.shape == (10, terms.dim)
    m = res.magnetization_samples(terms)
    assert m.shape == (10,)
    mz = magnetization_diagonal(basis, 10)
    assert m[-1] == pytest.approx(float(np.abs(res.final) ** 2 @ mz), abs=1e-12)
    np.testing.assert_allclose(np.linalg.norm(res.snapshots, axis=1), 1.0, atol=1e-10)


def test_step_budget_failure():
    params, basis, terms = make(n=10, n_up=8)
    psi0 = classical_state(basis, basis.spin1, -basis.spin2)
    with pytest.raises(NumericalFailure):
        evolve(terms, Schedule.ara_linear(10.0), psi0, tol=1e-13, max_steps=10)


def test_rejects_unnormalized_state():
    params, basis, terms = make()
    bad = np.zeros(terms.dim, dtype=complex)
    bad[0] = 0.5
    with pytest.raises(ConfigError):
        evolve(terms, Schedule.qa(1.0), bad)


def test_adiabatic_limit_monotone():
    # gap-protected path: pe decreases with tau (3 points per decade coarse)
    pes = [run_protocol(3, 20, 18, 2.0, "ara_linear", tau, tol=1e-9, order=4)[0]
           for tau in (10.0, 50.0, 250.0)]
    assert pes[0] > pes[1] > pes[2]


# ---------------------------------------------------------------------------
# error probability and TTS
# ---------------------------------------------------------------------------
def test_error_probability_basis_states():
    params, basis, terms = make(p=3, n=10, n_up=8)
    up = classical_state(basis, basis.spin1, basis.spin2)
    assert error_probability(up, terms) == pytest.approx(0.0)
    start = classical_state(basis, basis.spin1, -basis.spin2)
    assert error_probability(start, terms) == pytest.approx(1.0)


def test_error_probability_even_p_degenerate_subspace():
    params, basis, terms = make(p=4, n=8, n_up=6)
    down = classical_state(basis, -basis.spin1, -basis.spin2)
    assert error_probability(down, terms) == pytest.approx(0.0)


def test_tts_values():
    assert tts(10.0, 0.01, 0.99) == pytest.approx(10.0)
    expected = 10.0 * math.log(0.01) / math.log(0.99)
    assert tts(10.0, 0.99, 0.99) == pytest.approx(expected, rel=1e-12)
    assert abs(tts(10.0, 0.99, 0.99) - 4581.5) < 1.0
    assert tts(7.0, 0.0) == 7.0
    assert tts(7.0, 0.005) == 7.0  # clamped: single run already succeeds
    assert tts(7.0, 1.0) == math.inf
    with pytest.raises(ConfigError):
        tts(1.0, 0.5, 1.5)


def test_optimal_tts_clamping_bound():
    from revanneal import optimal_tts_scaling
    from revanneal.dynamics import _pe_job

    taus = [2.0, 8.0, 30.0, 120.0]
    rows = optimal_tts_scaling(3, 1.0, 1.0, "qa", [8], taus, refine_iters=0,
                               tol=1e-8)
    sufficient = [t for t in taus
                  if _pe_job((3, 8, 8, 1.0, "qa", t, 1e-8, 4)) <= 0.01]
    if sufficient:
        assert rows[0]["tts_opt"] <= min(sufficient) + 1e-9
