"""Acceptance suite: one test per criterion, printed as PASS/FAIL lines.

Each test prints the measured quantities before asserting, so a red test
still documents what the code computed.  Three assertions are known to
disagree with exactly computable properties of the model itself (the
conventional-QA transition location, the size of the c = 0.8 diagonal jump,
and the low-temperature SVMC plateau); they are implemented as stated and
left to fail rather than tuned to pass.
"""

import numpy as np
import pytest

import fullspace as fs
import revanneal as rv
from revanneal import (
    CycleSpec,
    ModelParams,
    Schedule,
    SvmcConfig,
    build_basis,
    build_terms,
    classical_state,
    magnetization_diagonal,
    qa_ground_state,
)
from revanneal.ira import energy_groups, iterate, single_cycle, transition_matrix
from revanneal.semiclassical import (
    BlockAngles,
    svd_evolve,
    svd_threshold_scan,
    svmc_run,
    v_sc,
    v_sc_grad,
)
from revanneal.statics import free_energy, free_energy_dm, self_consistency_residual
from revanneal.util import classify_scaling


def report(criterion, name, ok, detail=""):
    print(f"ACCEPTANCE {criterion} [{name}]: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


# ---------------------------------------------------------------------------
# 1. oracle equivalence at N in {6, 8}
# ---------------------------------------------------------------------------
def test_criterion_01_oracle_equivalence(rng):
    ok_all = True
    for n, n_up in ((6, 4), (6, 6), (6, 3), (8, 6), (8, 8), (8, 4)):
        params = ModelParams(p=3, n_spins=n, n_up=n_up, gamma=1.0)
        basis = build_basis(params)
        terms = build_terms(basis, params)
        h0f, hif, vtff = fs.full_terms(n, n_up, 3)
        q = fs.dicke_embedding(n, n_up)
        # (a) eigenvalue containment at random control points
        worst = 0.0
        for _ in range(10):
            s, lam = rng.uniform(0, 1, 2)
            g = rng.uniform(0.5, 3.0)
            es = np.linalg.eigvalsh(rv.assemble(terms, s, lam, g))
            ef = np.linalg.eigvalsh(fs.full_assemble(h0f, hif, vtff, s, lam, g))
            scale = np.max(np.abs(ef))
            worst = max(worst, max(np.min(np.abs(ef - e)) / scale for e in es))
        ok_a = worst < 1e-10
        # (b) evolution overlap for ARA, QA and one IRA cycle
        overlaps = []
        for sched, psi0 in (
            (Schedule.ara_linear(10.0), classical_state(basis, basis.spin1, -basis.spin2)),
            (Schedule.qa(8.0), qa_ground_state(basis)),
            (Schedule.ira(6.0, 0.3), classical_state(basis, basis.spin1, -basis.spin2)),
        ):
            res = rv.evolve(terms, sched, psi0, tol=1e-10, order=4)
            full = fs.full_evolve(h0f, hif, 1.0 * vtff, sched, q @ psi0, rtol=1e-12)
            overlaps.append(abs(np.vdot(q @ res.final, full)))
        ok_b = min(overlaps) >= 1.0 - 1e-8
        ok_all &= report(1, f"N={n} n_up={n_up}", ok_a and ok_b,
                         f"containment {worst:.1e}, min overlap {min(overlaps):.10f}")
    assert ok_all


# ---------------------------------------------------------------------------
# 2. conventional-QA critical point from the statics
# ---------------------------------------------------------------------------
def test_criterion_02_qa_critical_point():
    ss = np.arange(0.30, 0.55, 0.0025)
    ms = np.array([rv.solve_m(s, 1.0, 1.0, 0.9, 3).m_star for s in ss])
    j = int(np.argmax(np.abs(np.diff(ms))))
    lo, hi, m_lo, m_hi = ss[j], ss[j + 1], ms[j], ms[j + 1]
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        mm = rv.solve_m(mid, 1.0, 1.0, 0.9, 3).m_star
        if abs(mm - m_lo) < abs(mm - m_hi):
            lo, m_lo = mid, mm
        else:
            hi, m_hi = mid, mm
    s_star = 0.5 * (lo + hi)
    ok = report(2, "jump at s = 0.40 +/- 0.02", abs(s_star - 0.40) <= 0.02,
                f"located s* = {s_star:.5f} (jump {abs(m_hi - m_lo):.3f}); "
                f"closed form gives 4/(4+3*sqrt(3)) = {4/(4+3*np.sqrt(3)):.5f}")
    assert ok


# ---------------------------------------------------------------------------
# 3. phase-diagram topology along the diagonal
# ---------------------------------------------------------------------------
def test_criterion_03_phase_diagram_topology():
    # s = lambda = 0 is excluded: the free energy is m-independent there
    def max_jump(gamma, c):
        ss, ms = rv.diagonal_scan(gamma, c, 3, step=0.005)
        return float(np.max(np.abs(np.diff(ms))))

    ok = True
    j7 = max_jump(1.0, 0.7)
    ok &= report(3, "G=1 c=0.7 jump > 0.3", j7 > 0.3, f"max |dm| = {j7:.4f}")
    j8 = max_jump(1.0, 0.8)
    ok &= report(3, "G=1 c=0.8 jump > 0.3", j8 > 0.3,
                 f"max |dm| = {j8:.4f} (refined discontinuity is 0.2801)")
    j9 = max_jump(1.0, 0.9)
    ok &= report(3, "G=1 c=0.9 smooth < 0.05", j9 < 0.05, f"max |dm| = {j9:.4f}")
    j82 = max_jump(2.0, 0.8)
    ok &= report(3, "G=2 c=0.8 no jump", j82 < 0.05, f"max |dm| = {j82:.4f}")
    assert ok


# ---------------------------------------------------------------------------
# 4. minimum-gap scaling classes along the diagonal, Gamma = 1
# ---------------------------------------------------------------------------
def test_criterion_04_gap_scaling_classes():
    n_list = (20, 40, 60, 80, 120, 160)

    def gaps_for(c, ns):
        # the first-order anticrossing dip narrows like gap/slope, far below
        # the default 1e-5 refinement width at the largest sizes, so the
        # minimum is polished much tighter here
        out = []
        for n in ns:
            params = ModelParams(p=3, n_spins=n, n_up=int(round(c * n)), gamma=1.0)
            terms = build_terms(build_basis(params), params)
            out.append(rv.gap_along_path(terms, path="diagonal",
                                         s_resolution=0.01,
                                         refine_tol=1e-10).min_gap)
        return out

    ok = True
    g9 = gaps_for(0.9, n_list)
    r9 = classify_scaling(n_list, g9)
    ok &= report(4, "c=0.9 polynomial", r9["preferred"] == "power",
                 f"power_rms {r9['power_rms']:.4f} vs exp_rms {r9['exp_rms']:.4f}; "
                 f"gaps {['%.3e' % g for g in g9]}")
    g7 = gaps_for(0.7, n_list)
    r7 = classify_scaling(n_list, g7)
    ok &= report(4, "c=0.7 exponential", r7["preferred"] == "exponential",
                 f"power_rms {r7['power_rms']:.4f} vs exp_rms {r7['exp_rms']:.4f}; "
                 f"gaps {['%.3e' % g for g in g7]}")
    # c = 0.8: nearly a power law up to N = 50 (log-log fit residual small,
    # an order of magnitude below the strongly curved full-range residual)
    sub_n = (20, 30, 40, 50)
    g8s = gaps_for(0.8, sub_n)
    g8f = g8s[:1] + gaps_for(0.8, (40, 60, 80, 120, 160))
    r8s = classify_scaling(sub_n, g8s)
    r8f = classify_scaling((20, 40, 60, 80, 120, 160), g8f)
    near_poly = r8s["power_rms"] < 0.05 and r8s["power_rms"] < 0.2 * r8f["power_rms"]
    ok &= report(4, "c=0.8 near-polynomial below N=50", near_poly,
                 f"power_rms {r8s['power_rms']:.4f} (N<=50) vs {r8f['power_rms']:.4f} (full)")
    assert ok


# ---------------------------------------------------------------------------
# 5. error-probability separation at N = 45, tau = 100
# ---------------------------------------------------------------------------
def test_criterion_05_error_separation():
    # N*c is not an integer for c = 0.9 at N = 45; the up block is floor(N*c)
    params = ModelParams.from_fraction(3, 45, 0.9, 2.0, nearest=True)
    pe_ara, drift_a, _ = rv.run_protocol(3, 45, params.n_up, 2.0, "ara_linear",
                                         100.0, tol=1e-8, order=4)
    pe_qa, drift_q, _ = rv.run_protocol(3, 45, 45, 2.0, "qa", 100.0,
                                        tol=1e-8, order=4)
    ok = report(5, "pe(ARA G2 c~0.9) < pe(QA G2) / 10", pe_ara * 10 < pe_qa,
                f"pe_ara = {pe_ara:.3e}, pe_qa = {pe_qa:.3e}, "
                f"ratio = {pe_qa / pe_ara:.1f}")
    assert drift_a < 1e-8 and drift_q < 1e-8
    assert ok


# ---------------------------------------------------------------------------
# 6. TTS minima and optimal-TTS scaling
# ---------------------------------------------------------------------------
def test_criterion_06_tts_minima_and_scaling():
    ok = True
    # (a) interior minimum of TTS(tau) at N = 45, Gamma = 2, c ~ 0.9
    taus = np.geomspace(1.0, 1000.0, 12)
    tts_vals = []
    for tau in taus:
        pe = rv.run_protocol(3, 45, 40, 2.0, "ara_linear", float(tau),
                             tol=3e-7, order=4)[0]
        tts_vals.append(rv.tts(float(tau), pe))
    i0 = int(np.argmin(tts_vals))
    ok &= report(6, "interior TTS minimum at N=45", 0 < i0 < len(taus) - 1,
                 f"argmin tau = {taus[i0]:.1f}, TTS = {tts_vals[i0]:.4g}")

    # (b) optimal-TTS scaling classes over N in {20..100}
    tau_grid = list(np.geomspace(1.0, 1000.0, 12))
    rows_poly = rv.optimal_tts_scaling(3, 2.0, 0.8, "ara_linear",
                                       range(20, 101, 10), tau_grid,
                                       tol=3e-7, order=4, refine_iters=3)
    fit = classify_scaling([r["N"] for r in rows_poly],
                           [r["tts_opt"] for r in rows_poly])
    ok &= report(6, "G=2 c=0.8 power-law preferred", fit["preferred"] == "power",
                 f"power_rms {fit['power_rms']:.4f} vs exp_rms {fit['exp_rms']:.4f}; "
                 f"tts {['%.3g' % r['tts_opt'] for r in rows_poly]}; "
                 f"boundary flags {[r['boundary'] for r in rows_poly]}")
    for kind, c, label in (("qa", 1.0, "QA"), ("ara_linear", 0.8, "G=1 c=0.8")):
        rows = rv.optimal_tts_scaling(3, 1.0, c, kind, range(20, 101, 20),
                                      tau_grid, tol=3e-7, order=4,
                                      refine_iters=0)
        fit = classify_scaling([r["N"] for r in rows],
                               [r["tts_opt"] for r in rows])
        ok &= report(6, f"{label} exponential preferred",
                     fit["preferred"] == "exponential",
                     f"power_rms {fit['power_rms']:.4f} vs exp_rms {fit['exp_rms']:.4f}; "
                     f"tts {['%.3g' % r['tts_opt'] for r in rows]}")
    assert ok


# ---------------------------------------------------------------------------
# 7. SVD versus quantum dynamics
# ---------------------------------------------------------------------------
def test_criterion_07_svd_quantum_divergence():
    ok = True
    finals = {}
    for g in (1.0, 2.0, 4.0):
        params = ModelParams(p=3, n_spins=50, n_up=40, gamma=g)
        sched = Schedule.ara_linear(40.0)
        m_svd = svd_evolve(sched, params).final_magnetization
        basis = build_basis(params)
        terms = build_terms(basis, params)
        res = rv.evolve(terms, sched,
                        classical_state(basis, basis.spin1, -basis.spin2),
                        tol=1e-7, order=4)
        m_q = float(np.abs(res.final) ** 2 @ magnetization_diagonal(basis, 50))
        finals[g] = (m_svd, m_q)
    for g in (1.0, 2.0):
        m_svd, m_q = finals[g]
        ok &= report(7, f"G={g:.0f} SVD tracks quantum", abs(m_svd - m_q) < 0.1,
                     f"m_svd = {m_svd:.4f}, m_quantum = {m_q:.4f}")
    m_svd, m_q = finals[4.0]
    ok &= report(7, "G=4 quantum succeeds, SVD fails",
                 m_q > 0.8 and m_svd < 0.5,
                 f"m_svd = {m_svd:.4f}, m_quantum = {m_q:.4f}")
    params = ModelParams(p=3, n_spins=50, n_up=40, gamma=1.0)
    rows = svd_threshold_scan(np.arange(1.0, 5.0 + 1e-9, 0.1), params, 40.0,
                              quantum_tol=1e-7)
    by_g = {round(r["gamma"], 3): r for r in rows}
    drop = by_g[3.2]["m_svd"] - by_g[3.6]["m_svd"]
    ok &= report(7, "SVD drop > 0.5 within G in [3.2, 3.6]", drop > 0.5,
                 f"m_svd(3.2) = {by_g[3.2]['m_svd']:.3f}, "
                 f"m_svd(3.6) = {by_g[3.6]['m_svd']:.3f}")
    mq_beyond = [by_g[round(g, 3)]["m_quantum"] for g in np.arange(3.4, 5.01, 0.2)]
    grad = np.max(np.abs(np.diff(mq_beyond)))
    ok &= report(7, "quantum declines gradually beyond 3.4", grad < 0.25,
                 f"m_quantum beyond 3.4: {['%.3f' % v for v in mq_beyond]}")
    assert ok


# ---------------------------------------------------------------------------
# 8. SVMC temperature dependence
# ---------------------------------------------------------------------------
def test_criterion_08_svmc_temperatures():
    params = ModelParams(p=3, n_spins=50, n_up=40, gamma=4.0)
    sched = Schedule.ara_linear(1.0)
    finals = {}
    for beta in (10.0, 5.0, 1.0):
        cfg = SvmcConfig(beta=beta, sweeps=500, runs=100, seed=2024)
        finals[beta] = svmc_run(cfg, sched, params).final_mean
    ok = True
    ok &= report(8, "beta=5 final m > 0.9", finals[5.0] > 0.9,
                 f"m = {finals[5.0]:.4f}")
    ok &= report(8, "beta=10 trapped near 0.6", abs(finals[10.0] - 0.6) <= 0.15,
                 f"m = {finals[10.0]:.4f} (fresh-angle proposals always escape; "
                 "see decisions ledger)")
    ok &= report(8, "beta=1 random |m| < 0.2", abs(finals[1.0]) < 0.2,
                 f"m = {finals[1.0]:.4f}")
    assert ok


# ---------------------------------------------------------------------------
# 9. IRA behavior
# ---------------------------------------------------------------------------
def test_criterion_09_ira():
    ok = True
    # (a) column stochasticity at N = 10 for all tested (tau, s_min)
    params10 = ModelParams(p=3, n_spins=10, n_up=10, gamma=1.0)
    worst = 0.0
    for tau, s_min in ((30.0, 0.5), (8.0, 0.5), (30.0, 0.3), (10.0, 0.3)):
        for initial in ("dicke", "bitstring"):
            tm = transition_matrix(CycleSpec(tau=tau, s_min=s_min), params10,
                                   initial=initial, tol=1e-9, order=4)
            worst = max(worst, float(np.max(np.abs(tm.matrix.sum(axis=0) - 1.0))))
    ok &= report(9, "columns stochastic to 1e-8", worst < 1e-8,
                 f"worst column-sum deviation {worst:.2e}")

    # (b) magnetization distribution after one cycle at N = 50, tau = 10
    n = 50
    params50 = ModelParams(p=3, n_spins=n, n_up=n, gamma=1.0)
    mz = magnetization_diagonal(build_basis(params50), n)

    def mean_after(c0, s_min):
        k = int(round(n * c0))
        probs = single_cycle(n - k, CycleSpec(tau=10.0, s_min=s_min), params50,
                             initial="bitstring", tol=1e-8, order=4)
        return float(probs @ mz)

    for c0 in (0.3, 0.7):
        m0 = 2 * c0 - 1
        m_hold = mean_after(c0, 0.5)
        m_move = mean_after(c0, 0.3)
        stays = abs(m_hold - m0) < 0.15 and abs(m_hold) <= abs(m0)
        moves = abs(m_move - m0) > 0.1 and abs(m_move) < abs(m0)
        ok &= report(9, f"c={c0} stays near m0 for s_min=0.5", stays,
                     f"mean {m_hold:+.4f} vs initial {m0:+.1f}")
        ok &= report(9, f"c={c0} shifts toward 0 for s_min=0.3", moves,
                     f"mean {m_move:+.4f} vs initial {m0:+.1f} "
                     f"(shift {abs(m_move - m0):.3f})")

    # (c, d) ground-state retention at N = 10, s_min = 0.3, tau = 30
    tm = transition_matrix(CycleSpec(tau=30.0, s_min=0.3), params10,
                           initial="bitstring", tol=1e-9, order=4)
    top = tm.matrix[0]
    ok &= report(9, "ground-to-ground dominates top row",
                 top[0] > np.max(top[1:]),
                 f"P[0,0] = {top[0]:.4f}, max other = {np.max(top[1:]):.4f}")
    ground5 = []
    for i in range(tm.dim):
        e = np.zeros(tm.dim)
        e[i] = 1.0
        ground5.append(iterate(tm, e, 5)[0])
    ok &= report(9, "r=5 ground prob low unless started there",
                 all(g < ground5[0] for g in ground5[1:]),
                 f"from ground {ground5[0]:.4f}, max from excited "
                 f"{max(ground5[1:]):.4f}")
    assert ok


# ---------------------------------------------------------------------------
# 10. numerical hygiene
# ---------------------------------------------------------------------------
def test_criterion_10_numerical_hygiene(rng):
    ok = True
    # unitarity on accepted evolutions
    drifts = []
    for n, n_up, g, kind, tau in ((20, 16, 2.0, "ara_linear", 50.0),
                                  (16, 16, 1.0, "qa", 30.0),
                                  (12, 10, 1.5, "ara_linear", 20.0)):
        drifts.append(rv.run_protocol(3, n, n_up, g, kind, tau,
                                      tol=1e-9, order=4)[1])
    ok &= report(10, "norm drift < 1e-8", max(drifts) < 1e-8,
                 f"max drift {max(drifts):.2e}")

    # SVD energy conservation under a frozen schedule
    params = ModelParams(p=3, n_spins=50, n_up=40, gamma=2.0)
    traj = svd_evolve(Schedule.frozen(100.0, 0.35, 0.35), params, n_samples=401)
    rel = float(np.max(np.abs(traj.energy - traj.energy[0]))
                / abs(traj.energy[0]))
    ok &= report(10, "SVD energy conserved to 1e-8", rel < 1e-8,
                 f"relative drift {rel:.2e}")

    # statics stationarity at interior minimizers
    worst_res = 0.0
    for _ in range(25):
        s, lam = rng.uniform(0.05, 0.95, 2)
        g = rng.uniform(0.5, 3.0)
        c = rng.uniform(0.55, 0.95)
        pt = rv.solve_m(s, lam, g, c, 3)
        if 1e-3 < pt.m_star < 1 - 1e-3:
            worst_res = max(worst_res, abs(pt.residual))
    ok &= report(10, "stationarity residual < 1e-8", worst_res < 1e-8,
                 f"worst |residual| {worst_res:.2e}")

    # centered finite-difference gradient checks
    worst_f = 0.0
    for _ in range(25):
        m = rng.uniform(-0.95, 0.95)
        s, lam = rng.uniform(0.05, 0.95, 2)
        g = rng.uniform(0.5, 3.0)
        c = rng.uniform(0.55, 0.95)
        h = 1e-6
        fd = (free_energy(m + h, s, lam, g, c, 3)
              - free_energy(m - h, s, lam, g, c, 3)) / (2 * h)
        worst_f = max(worst_f, abs(fd - float(free_energy_dm(m, s, lam, g, c, 3))))
    ok &= report(10, "free-energy gradient check at 1e-6", worst_f < 1e-6,
                 f"worst |fd - analytic| {worst_f:.2e}")

    worst_v = 0.0
    for _ in range(10):
        ang = BlockAngles(*rng.uniform(-2.5, 2.5, 4))
        s, lam = rng.uniform(0.05, 0.95, 2)
        grad = v_sc_grad(ang, s, lam, 2.0, 3, 50, 40)
        h = 1e-6
        for k, name in enumerate(("theta1", "phi1", "theta2", "phi2")):
            hi = BlockAngles(**{**ang.__dict__, name: getattr(ang, name) + h})
            lo = BlockAngles(**{**ang.__dict__, name: getattr(ang, name) - h})
            fd = (v_sc(hi, s, lam, 2.0, 3, 50, 40)
                  - v_sc(lo, s, lam, 2.0, 3, 50, 40)) / (2 * h)
            worst_v = max(worst_v, abs(fd - grad[k]) / 50.0)
    ok &= report(10, "potential gradient check at 1e-6", worst_v < 1e-6,
                 f"worst scaled |fd - analytic| {worst_v:.2e}")
    assert ok
