"""Experiment runners behind the CLI: one subcommand per study.

Each experiment validates a flat config dict against its declared keys
(unknown keys are configuration errors), fans independent work items over an
optional worker pool, and returns named column tables plus manifest details.
Results are merged by grid index, never by completion order, so output files
are identical for any worker count.
"""

from __future__ import annotations

import numpy as np

from . import dynamics, ira, semiclassical, spectrum, statics
from .errors import ConfigError
from .schedules import Schedule
from .sector import (
    ModelParams,
    build_basis,
    build_terms,
    classical_state,
    magnetization_diagonal,
    qa_ground_state,
)
from .util import classify_scaling

__all__ = ["EXPERIMENTS", "run_experiment", "resolve_config"]


def _log_grid(cfg):
    if cfg.get("tau_list"):
        return [float(t) for t in cfg["tau_list"]]
    n = int(cfg["tau_points"])
    if n < 2:
        raise ConfigError("tau_points must be >= 2")
    return list(np.geomspace(float(cfg["tau_min"]), float(cfg["tau_max"]), n))


def _params(cfg, c=None, gamma=None):
    c = cfg["c"] if c is None else c
    gamma = cfg["gamma"] if gamma is None else gamma
    return ModelParams.from_fraction(int(cfg["p"]), int(cfg["n"]), float(c),
                                     float(gamma), nearest=bool(cfg.get("c_nearest", False)))


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------
def _run_phase_diagram(cfg, seed, map_fn):
    cols = {"c": [], "gamma": [], "lam": [], "s": [], "jump": []}
    for c in cfg["c_list"]:
        line = statics.trace_transitions(
            float(c), float(cfg["gamma"]), int(cfg["p"]),
            grid_step=float(cfg["grid_step"]),
            jump_threshold=float(cfg["jump_threshold"]),
            lambda_step=float(cfg["lambda_step"]))
        for (lam, s), jump in zip(line.points, line.jump_sizes):
            cols["c"].append(float(c))
            cols["gamma"].append(float(cfg["gamma"]))
            cols["lam"].append(lam)
            cols["s"].append(s)
            cols["jump"].append(jump)
    return {"transitions": cols}, {}


def _gap_job(args):
    p, n, n_up, gamma, path, s_res = args
    params = ModelParams(p=p, n_spins=n, n_up=n_up, gamma=gamma)
    terms = build_terms(build_basis(params), params)
    scan = spectrum.gap_along_path(terms, path=path, s_resolution=s_res)
    return scan.s_at_min, scan.min_gap


def _run_gap_scaling(cfg, seed, map_fn):
    p = int(cfg["p"])
    gamma = float(cfg["gamma"])
    path = cfg["path"]
    jobs = []
    keys = []
    for c in cfg["c_list"]:
        for n in cfg["n_list"]:
            n_up = int(round(n * c))
            if abs(n * c - n_up) > 1e-9:
                raise ConfigError(f"N*c = {n * c} not an integer for N={n}, c={c}")
            jobs.append((p, int(n), n_up, gamma, path, float(cfg["s_resolution"])))
            keys.append((float(c), int(n)))
    res = list(map_fn(_gap_job, jobs))
    tab = {"N": [], "c": [], "gamma": [], "path": [], "s_at_min": [], "min_gap": []}
    fits = {"c": [], "path": [], "power_exponent": [], "power_rms": [],
            "exp_rate": [], "exp_rms": [], "preferred": []}
    for (c, n), (s_at, g) in zip(keys, res):
        tab["N"].append(n)
        tab["c"].append(c)
        tab["gamma"].append(gamma)
        tab["path"].append(path)
        tab["s_at_min"].append(s_at)
        tab["min_gap"].append(g)
    for c in cfg["c_list"]:
        gaps = [g for (cc, n), (_, g) in zip(keys, res) if cc == float(c)]
        ns = [n for (cc, n) in keys if cc == float(c)]
        f = classify_scaling(ns, gaps)
        fits["c"].append(float(c))
        fits["path"].append(path)
        for k in ("power_exponent", "power_rms", "exp_rate", "exp_rms", "preferred"):
            fits[k].append(f[k])
    return {"gap_scaling": tab, "gap_fits": fits}, {}


def _schedule_from_cfg(cfg):
    tau = float(cfg["tau"])
    kind = cfg["schedule"]
    if cfg.get("lambda_const") is not None:
        lam = float(cfg["lambda_const"])
        return Schedule.ara_custom(tau, [(0.0, 0.0, lam), (tau, 1.0, lam)])
    if kind == "qa":
        return Schedule.qa(tau)
    if kind == "ara_linear":
        return Schedule.ara_linear(tau)
    if kind == "ira_quadratic":
        return Schedule.ira(tau, float(cfg["s_min"]))
    raise ConfigError(f"unknown schedule {kind!r}")


def _run_evolve(cfg, seed, map_fn):
    params = _params(cfg)
    basis = build_basis(params)
    terms = build_terms(basis, params)
    sched = _schedule_from_cfg(cfg)
    if cfg["initial"] == "classical":
        psi0 = classical_state(basis, basis.spin1, -basis.spin2)
    elif cfg["initial"] == "qa_ground":
        psi0 = qa_ground_state(basis)
    else:
        raise ConfigError(f"unknown initial state {cfg['initial']!r}")
    n_samples = int(cfg["n_samples"])
    times = np.linspace(0.0, sched.tau, n_samples)[1:]
    res = dynamics.evolve(terms, sched, psi0, tol=float(cfg["tol"]),
                          order=int(cfg["order"]), sample_times=times)
    mz = magnetization_diagonal(basis, params.n_spins)
    traj = {"t": [0.0, *map(float, times)],
            "s": [float(sched.s_of(t)) for t in (0.0, *times)],
            "lam": [float(sched.lam_of(t)) for t in (0.0, *times)],
            "magnetization": [float(np.abs(psi0) ** 2 @ mz),
                              *(float(np.abs(v) ** 2 @ mz) for v in res.snapshots)]}
    k = int(cfg["k_levels"])
    if k > 0:
        ov = [float(spectrum.instantaneous_occupations(
            psi, terms.assemble(float(sched.s_of(t)), float(sched.lam_of(t))),
            1)[0]) for t, psi in zip((0.0, *times), [psi0, *res.snapshots])]
        traj["ground_overlap"] = ov
    pe = dynamics.error_probability(res.final, terms)
    summary = {"pe": [pe], "norm_drift": [res.norm_drift],
               "steps": [res.step_count], "rejected": [res.rejected_count]}
    return ({"trajectory": traj, "summary": summary},
            {"norm_drift": res.norm_drift, "steps": res.step_count})


def _run_error_scaling(cfg, seed, map_fn):
    p = int(cfg["p"])
    gamma = float(cfg["gamma"])
    tau = float(cfg["tau"])
    jobs = []
    keys = []
    if cfg["include_qa"]:
        for n in cfg["n_list"]:
            jobs.append((p, int(n), int(n), gamma, "qa", tau,
                         float(cfg["tol"]), int(cfg["order"])))
            keys.append(("qa", int(n), 1.0))
    for c in cfg["c_list"]:
        for n in cfg["n_list"]:
            n_up = int(round(n * c)) if not cfg.get("c_nearest") else int(np.floor(n * c + 1e-9))
            if not cfg.get("c_nearest") and abs(n * c - n_up) > 1e-9:
                raise ConfigError(f"N*c = {n * c} not an integer for N={n}, c={c}")
            jobs.append((p, int(n), n_up, gamma, "ara_linear", tau,
                         float(cfg["tol"]), int(cfg["order"])))
            keys.append(("ara", int(n), n_up / n))
    res = list(map_fn(dynamics._pe_job, jobs))
    tab = {"protocol": [], "N": [], "c": [], "gamma": [], "tau": [], "pe": []}
    for (proto, n, c), pe in zip(keys, res):
        tab["protocol"].append(proto)
        tab["N"].append(n)
        tab["c"].append(float(c))
        tab["gamma"].append(gamma)
        tab["tau"].append(tau)
        tab["pe"].append(float(pe))
    return {"error_scaling": tab}, {}


def _run_tts(cfg, seed, map_fn):
    taus = _log_grid(cfg)
    n = int(cfg["n"])
    kind = cfg["kind"]
    c = float(cfg["c"])
    n_up = n if kind == "qa" else (
        int(np.floor(n * c + 1e-9)) if cfg.get("c_nearest") else int(round(n * c)))
    jobs = [(int(cfg["p"]), n, n_up, float(cfg["gamma"]), kind, float(t),
             float(cfg["tol"]), int(cfg["order"])) for t in taus]
    pes = list(map_fn(dynamics._pe_job, jobs))
    tab = {"tau": [], "pe": [], "tts": []}
    for t, pe in zip(taus, pes):
        tab["tau"].append(float(t))
        tab["pe"].append(float(pe))
        tab["tts"].append(dynamics.tts(float(t), float(pe), float(cfg["p_d"])))
    return {"tts": tab}, {}


def _run_tts_scaling(cfg, seed, map_fn):
    rows = dynamics.optimal_tts_scaling(
        int(cfg["p"]), float(cfg["gamma"]), float(cfg["c"]), cfg["kind"],
        [int(n) for n in cfg["n_list"]], _log_grid(cfg), p_d=float(cfg["p_d"]),
        tol=float(cfg["tol"]), order=int(cfg["order"]),
        refine_iters=int(cfg["refine_iters"]), map_fn=map_fn)
    tab = {"N": [r["N"] for r in rows],
           "tau_opt": [r["tau_opt"] for r in rows],
           "tts_opt": [r["tts_opt"] for r in rows],
           "boundary_flag": [r["boundary"] for r in rows]}
    fit = classify_scaling(tab["N"], tab["tts_opt"])
    fits = {k: [v] for k, v in fit.items()}
    return {"tts_scaling": tab, "tts_fits": fits}, {"rows": rows}


def _run_svd(cfg, seed, map_fn):
    params = _params(cfg)
    sched = _schedule_from_cfg(cfg)
    traj = semiclassical.svd_evolve(sched, params, n_samples=int(cfg["n_samples"]))
    tab = {"t": list(map(float, traj.t)), "s": list(map(float, traj.s)),
           "lam": list(map(float, traj.lam)),
           "m_svd": list(map(float, traj.magnetization)),
           "energy": list(map(float, traj.energy))}
    if cfg["with_quantum"]:
        basis = build_basis(params)
        terms = build_terms(basis, params)
        psi0 = classical_state(basis, basis.spin1, -basis.spin2)
        res = dynamics.evolve(terms, sched, psi0, tol=float(cfg["tol"]),
                              order=int(cfg["order"]), sample_times=traj.t[1:])
        mz = magnetization_diagonal(basis, params.n_spins)
        mq = [float(np.abs(psi0) ** 2 @ mz)]
        mq += [float(np.abs(v) ** 2 @ mz) for v in res.snapshots]
        tab["m_quantum"] = mq
    return {"svd": tab}, {}


def _run_svd_scan(cfg, seed, map_fn):
    params = _params(cfg, gamma=cfg["gamma_min"])
    grid = np.arange(float(cfg["gamma_min"]), float(cfg["gamma_max"]) + 1e-12,
                     float(cfg["gamma_step"]))
    rows = semiclassical.svd_threshold_scan(
        grid, params, float(cfg["tau"]), quantum_tol=float(cfg["tol"]),
        order=int(cfg["order"]), map_fn=map_fn)
    tab = {"gamma": [r["gamma"] for r in rows],
           "m_svd": [r["m_svd"] for r in rows],
           "m_quantum": [r["m_quantum"] for r in rows]}
    return {"svd_scan": tab}, {}


def _run_potential(cfg, seed, map_fn):
    params = _params(cfg)
    s_list = cfg["s_list"]
    lam_list = cfg["lam_list"]
    if len(s_list) != len(lam_list):
        raise ConfigError("s_list and lam_list must have equal length")
    surf = {"s": [], "lam": [], "x1": [], "x2": [], "v": []}
    mins = {"s": [], "lam": [], "n_minima": [], "x1": [], "x2": []}
    for s, lam in zip(s_list, lam_list):
        x1, x2, v, n_min, pts = semiclassical.potential_landscape(
            float(s), float(lam), params.gamma, params, grid_n=int(cfg["grid_n"]))
        for i, a in enumerate(x1):
            for j, b in enumerate(x2):
                surf["s"].append(float(s))
                surf["lam"].append(float(lam))
                surf["x1"].append(float(a))
                surf["x2"].append(float(b))
                surf["v"].append(float(v[i, j]))
        for a, b in pts:
            mins["s"].append(float(s))
            mins["lam"].append(float(lam))
            mins["n_minima"].append(n_min)
            mins["x1"].append(a)
            mins["x2"].append(b)
    return {"potential": surf, "potential_minima": mins}, {}


def _run_svmc(cfg, seed, map_fn):
    params = _params(cfg)
    sched = Schedule.ara_linear(1.0)
    tab = {"sweep": [], "s": [], "mean_m": [], "std_m": [], "beta": []}
    for beta in cfg["beta_list"]:
        config = semiclassical.SvmcConfig(
            beta=float(beta), sweeps=int(cfg["sweeps"]), runs=int(cfg["runs"]),
            seed=int(seed), proposal=cfg["proposal"], width=float(cfg["width"]))
        res = semiclassical.svmc_run(config, sched, params)
        for k in range(config.sweeps):
            tab["sweep"].append(k + 1)
            tab["s"].append(float(res.s[k]))
            tab["mean_m"].append(float(res.mean_m[k]))
            tab["std_m"].append(float(res.std_m[k]))
            tab["beta"].append(float(beta))
    return {"svmc": tab}, {}


def _run_ira_cycle(cfg, seed, map_fn):
    n = int(cfg["n"])
    params = ModelParams(p=int(cfg["p"]), n_spins=n, n_up=n, gamma=float(cfg["gamma"]))
    spec = ira.CycleSpec(tau=float(cfg["tau"]), s_min=float(cfg["s_min"]))
    basis = build_basis(params)
    mz = magnetization_diagonal(basis, n)
    tab = {"c_init": [], "magnetization": [], "probability": []}
    for c0 in cfg["c_init_list"]:
        k = int(round(n * float(c0)))
        index = n - k  # single-block ordering is m descending
        probs = ira.single_cycle(index, spec, params, initial=cfg["initial"],
                                 tol=float(cfg["tol"]), order=int(cfg["order"]))
        for j, pr in enumerate(probs):
            tab["c_init"].append(float(c0))
            tab["magnetization"].append(float(mz[j]))
            tab["probability"].append(float(pr))
    return {"ira_cycle": tab}, {}


def _run_ira_markov(cfg, seed, map_fn):
    params = _params(cfg)
    spec = ira.CycleSpec(tau=float(cfg["tau"]), s_min=float(cfg["s_min"]))
    tm = ira.transition_matrix(spec, params, initial=cfg["initial"],
                               tol=float(cfg["tol"]), order=int(cfg["order"]),
                               map_fn=map_fn)
    mats = {}
    for r in cfg["r_list"]:
        m = np.linalg.matrix_power(tm.matrix, int(r))
        mats[int(r)] = ira.energy_aggregate(m, tm.groups) if cfg["aggregate"] else m
    tab = {"r": [], "i": [], "j": [], "prob": []}
    for r, m in mats.items():
        for j in range(m.shape[0]):
            for i in range(m.shape[1]):
                tab["r"].append(r)
                tab["i"].append(i)
                tab["j"].append(j)
                tab["prob"].append(float(m[j, i]))
    pi0 = np.zeros(tm.dim)
    pi0[int(cfg["start_index"])] = 1.0
    itab = {"r": [], "j": [], "prob": []}
    for r in cfg["r_list"]:
        vec = ira.iterate(tm, pi0, int(r))
        if cfg["aggregate"]:
            vec = ira.energy_aggregate(vec, tm.groups)
        for j, pr in enumerate(vec):
            itab["r"].append(int(r))
            itab["j"].append(j)
            itab["prob"].append(float(pr))
    return {"ira_markov": tab, "ira_iterates": itab}, {}


def _run_ira_spectrum(cfg, seed, map_fn):
    params = _params(cfg)
    spec = ira.CycleSpec(tau=float(cfg["tau"]), s_min=float(cfg["s_min"]))
    tr = ira.cycle_spectral_trace(int(cfg["start_index"]), spec, params,
                                  k=int(cfg["k_levels"]),
                                  n_samples=int(cfg["n_samples"]),
                                  tol=float(cfg["tol"]), order=int(cfg["order"]))
    tab = {"t": [], "s": [], "level": [], "energy": [], "occupation": []}
    for j in range(len(tr["t"])):
        for lvl in range(tr["energies"].shape[1]):
            tab["t"].append(float(tr["t"][j]))
            tab["s"].append(float(tr["s"][j]))
            tab["level"].append(lvl)
            tab["energy"].append(float(tr["energies"][j, lvl]))
            tab["occupation"].append(float(tr["occupations"][j, lvl]))
    return {"ira_spectrum": tab}, {}


# ---------------------------------------------------------------------------
# registry: experiment -> (defaults, runner); None marks a required key
# ---------------------------------------------------------------------------
EXPERIMENTS = {
    "phase-diagram": ({"p": 3, "gamma": 1.0, "c_list": [0.7, 0.8, 0.9],
                       "grid_step": 0.005, "lambda_step": 0.01,
                       "jump_threshold": 0.05, "format": "csv"},
                      _run_phase_diagram),
    "gap-scaling": ({"p": 3, "gamma": 1.0, "path": "diagonal",
                     "c_list": [0.9], "n_list": [20, 40, 60, 80],
                     "s_resolution": 0.01, "format": "csv"},
                    _run_gap_scaling),
    "evolve": ({"p": 3, "n": None, "c": 1.0, "gamma": 1.0,
                "schedule": "ara_linear", "tau": None, "s_min": 0.3,
                "lambda_const": None, "initial": "classical",
                "n_samples": 201, "k_levels": 0, "tol": 1e-9, "order": 2,
                "c_nearest": False, "format": "csv"},
               _run_evolve),
    "error-scaling": ({"p": 3, "gamma": 2.0, "tau": 100.0, "n_list": None,
                       "c_list": [0.8, 0.9], "include_qa": True,
                       "tol": 1e-7, "order": 4, "c_nearest": False,
                       "format": "csv"},
                      _run_error_scaling),
    "tts": ({"p": 3, "n": None, "c": 0.9, "gamma": 2.0, "kind": "ara_linear",
             "tau_list": None, "tau_min": 1.0, "tau_max": 1000.0,
             "tau_points": 12, "p_d": 0.99, "tol": 1e-7, "order": 4,
             "c_nearest": False, "format": "csv"},
            _run_tts),
    "tts-scaling": ({"p": 3, "gamma": 2.0, "c": 0.8, "kind": "ara_linear",
                     "n_list": None, "tau_list": None, "tau_min": 1.0,
                     "tau_max": 1000.0, "tau_points": 12, "p_d": 0.99,
                     "refine_iters": 6, "tol": 1e-7, "order": 4,
                     "format": "csv"},
                    _run_tts_scaling),
    "svd": ({"p": 3, "n": 50, "c": 0.8, "gamma": 1.0, "tau": 40.0,
             "schedule": "ara_linear", "s_min": 0.3, "lambda_const": None,
             "n_samples": 401, "with_quantum": True, "tol": 1e-7, "order": 4,
             "c_nearest": False, "format": "csv"},
            _run_svd),
    "svd-scan": ({"p": 3, "n": 50, "c": 0.8, "gamma_min": 1.0,
                  "gamma_max": 5.0, "gamma_step": 0.1, "tau": 40.0,
                  "tol": 1e-7, "order": 4, "c_nearest": False,
                  "format": "csv"},
                 _run_svd_scan),
    "potential": ({"p": 3, "n": 50, "c": 0.8, "gamma": 2.0,
                   "s_list": [0.2, 0.3], "lam_list": [0.2, 0.3],
                   "grid_n": 201, "c_nearest": False, "format": "csv"},
                  _run_potential),
    "svmc": ({"p": 3, "n": 50, "c": 0.8, "gamma": 4.0,
              "beta_list": [1.0, 5.0, 10.0], "sweeps": 500, "runs": 100,
              "proposal": "uniform", "width": 0.5, "c_nearest": False,
              "format": "csv"},
             _run_svmc),
    "ira-cycle": ({"p": 3, "n": 50, "gamma": 1.0, "tau": 10.0, "s_min": 0.5,
                   "c_init_list": [0.3, 0.5, 0.7, 0.9], "initial": "bitstring",
                   "tol": 1e-7, "order": 4, "format": "csv"},
                  _run_ira_cycle),
    "ira-markov": ({"p": 3, "n": 10, "c": 1.0, "gamma": 1.0, "tau": 30.0,
                    "s_min": 0.5, "r_list": [1, 5], "initial": "bitstring",
                    "aggregate": True, "start_index": 0, "tol": 1e-9,
                    "order": 2, "c_nearest": False, "format": "csv"},
                   _run_ira_markov),
    "ira-spectrum": ({"p": 3, "n": 10, "c": 1.0, "gamma": 1.0, "tau": 10.0,
                      "s_min": 0.3, "start_index": 0, "k_levels": 8,
                      "n_samples": 201, "tol": 1e-9, "order": 2,
                      "c_nearest": False, "format": "csv"},
                     _run_ira_spectrum),
}


def resolve_config(experiment: str, cfg: dict) -> dict:
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; choose from "
            + ", ".join(sorted(EXPERIMENTS)))
    defaults, _ = EXPERIMENTS[experiment]
    for key in cfg:
        if key not in defaults:
            raise ConfigError(f"unknown config key {key!r} for experiment {experiment!r}")
    out = dict(defaults)
    out.update(cfg)
    missing = [k for k, v in out.items() if v is None and defaults[k] is None
               and k not in ("lambda_const", "tau_list")]
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(sorted(missing))}")
    if out.get("format") not in ("csv", "jsonl"):
        raise ConfigError(f"format must be 'csv' or 'jsonl', got {out.get('format')!r}")
    return out


def run_experiment(experiment: str, cfg: dict, seed: int, map_fn=map):
    cfg = resolve_config(experiment, cfg)
    _, runner = EXPERIMENTS[experiment]
    tables, details = runner(cfg, seed, map_fn)
    return cfg, tables, details
