"""Classical comparators: spin-vector dynamics (SVD) and spin-vector
Monte Carlo (SVMC).

SVD treats each block as a classical unit vector u_k; with the spin-coherent
parametrization used here the z component is sin(theta)cos(phi) and the x
component cos(theta), so the semiclassical potential reads

    V_sc/N = -s (n1 u1z + n2 u2z)^p - (1-s)(1-lambda)(n1 u1z - n2 u2z)
             - Gamma (1-s) lambda (n1 u1x + n2 u2x).

Each block precesses in its mean field, du_k/dt = 2 b_k x u_k with
b_k = -(1/n_k) d(V_sc/N)/du_k; the rate constant 2 reproduces the two-level
precession frequency 2*Gamma of a single spin in a transverse field (the
sense of precession is immaterial: the fields lie in the x-z plane, so
mirroring u_y flips it without changing any observable used here).

SVMC replaces the two collective vectors by one planar rotor per spin,
updated by Metropolis sweeps at inverse temperature beta while the schedule
advances one step per sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np
from scipy.integrate import solve_ivp

from ._backend import kernels
from .dynamics import evolve
from .errors import ConfigError, NumericalFailure
from .schedules import Schedule
from .sector import (
    ModelParams,
    build_basis,
    build_terms,
    classical_state,
    magnetization_diagonal,
)

__all__ = [
    "BlockAngles",
    "SvmcConfig",
    "v_sc",
    "v_sc_grad",
    "svd_evolve",
    "SvdTrajectory",
    "svd_threshold_scan",
    "potential_landscape",
    "svmc_run",
    "SvmcResult",
    "metropolis_accept",
]


@dataclass(frozen=True)
class BlockAngles:
    """Spherical angles of the two block coherent states."""

    theta1: float
    phi1: float
    theta2: float
    phi2: float

    @classmethod
    def initial(cls) -> "BlockAngles":
        """The classical start: block 1 along +z, block 2 along -z."""
        return cls(theta1=pi / 2, phi1=0.0, theta2=-pi / 2, phi2=0.0)

    def vectors(self):
        """Unit vectors (ux, uy, uz) of both blocks."""
        u1 = np.array([np.cos(self.theta1),
                       np.sin(self.theta1) * np.sin(self.phi1),
                       np.sin(self.theta1) * np.cos(self.phi1)])
        u2 = np.array([np.cos(self.theta2),
                       np.sin(self.theta2) * np.sin(self.phi2),
                       np.sin(self.theta2) * np.cos(self.phi2)])
        return u1, u2


def _v_sc_vectors(u1, u2, s, lam, gamma, p, n, n1f, n2f):
    mz = n1f * u1[2] + n2f * u2[2]
    wz = n1f * u1[2] - n2f * u2[2]
    mx = n1f * u1[0] + n2f * u2[0]
    return n * (-s * mz ** p - (1.0 - s) * (1.0 - lam) * wz
                - gamma * (1.0 - s) * lam * mx)


def v_sc(angles: BlockAngles, s, lam, gamma, p, n_spins, n_up) -> float:
    """Semiclassical potential at the given block angles."""
    u1, u2 = angles.vectors()
    return float(_v_sc_vectors(u1, u2, s, lam, gamma, p, n_spins,
                               n_up / n_spins, 1.0 - n_up / n_spins))


def v_sc_grad(angles: BlockAngles, s, lam, gamma, p, n_spins, n_up) -> np.ndarray:
    """Analytic gradient of v_sc in (theta1, phi1, theta2, phi2)."""
    n1f = n_up / n_spins
    n2f = 1.0 - n1f
    t1, f1, t2, f2 = angles.theta1, angles.phi1, angles.theta2, angles.phi2
    mz = n1f * np.sin(t1) * np.cos(f1) + n2f * np.sin(t2) * np.cos(f2)
    dz = -s * p * mz ** (p - 1)  # d(V/N)/d(mz)
    w = -(1.0 - s) * (1.0 - lam)
    gx = -gamma * (1.0 - s) * lam
    n = n_spins
    return np.array([
        n * ((dz + w) * n1f * np.cos(t1) * np.cos(f1) - gx * n1f * np.sin(t1)),
        n * (-(dz + w) * n1f * np.sin(t1) * np.sin(f1)),
        n * ((dz - w) * n2f * np.cos(t2) * np.cos(f2) - gx * n2f * np.sin(t2)),
        n * (-(dz - w) * n2f * np.sin(t2) * np.sin(f2)),
    ])


@dataclass(frozen=True, eq=False)
class SvdTrajectory:
    t: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    lam: np.ndarray = field(repr=False)
    magnetization: np.ndarray = field(repr=False)
    energy: np.ndarray = field(repr=False)
    u_final: np.ndarray = field(repr=False)

    @property
    def final_magnetization(self) -> float:
        return float(self.magnetization[-1])


def svd_evolve(schedule: Schedule, params: ModelParams,
               initial: BlockAngles | None = None, n_samples: int = 501,
               rtol: float = 1e-10, atol: float = 1e-12) -> SvdTrajectory:
    """Integrate the block precession equations along an annealing schedule."""
    angles = BlockAngles.initial() if initial is None else initial
    u1, u2 = angles.vectors()
    y0 = np.concatenate([u1, u2])
    n1f = params.n_up / params.n_spins
    n2f = 1.0 - n1f
    g = params.gamma
    p = params.p
    tau = schedule.tau

    def rhs(t, y):
        u1 = y[:3]
        u2 = y[3:]
        s = float(schedule.s_of(t))
        lam = float(schedule.lam_of(t))
        mz = n1f * u1[2] + n2f * u2[2]
        bz = s * p * mz ** (p - 1)
        bx = g * (1.0 - s) * lam
        w = (1.0 - s) * (1.0 - lam)
        b1 = np.array([bx, 0.0, bz + w])
        b2 = np.array([bx, 0.0, bz - w])
        return np.concatenate([2.0 * np.cross(b1, u1), 2.0 * np.cross(b2, u2)])

    t_eval = np.linspace(0.0, tau, n_samples)
    sol = solve_ivp(rhs, (0.0, tau), y0, method="DOP853",
                    rtol=rtol, atol=atol, t_eval=t_eval, dense_output=False)
    if not sol.success:
        raise NumericalFailure(f"SVD integration failed: {sol.message}")
    ss = np.array([float(schedule.s_of(t)) for t in sol.t])
    ls = np.array([float(schedule.lam_of(t)) for t in sol.t])
    mags = n1f * sol.y[2] + n2f * sol.y[5]
    en = np.array([
        _v_sc_vectors(sol.y[:3, i], sol.y[3:, i], ss[i], ls[i], g, p,
                      params.n_spins, n1f, n2f)
        for i in range(len(sol.t))
    ])
    return SvdTrajectory(t=sol.t, s=ss, lam=ls, magnetization=mags, energy=en,
                         u_final=sol.y[:, -1].copy())


def svd_threshold_scan(gamma_grid, params: ModelParams, tau: float,
                       quantum_tol: float = 1e-7, order: int = 4,
                       map_fn=map):
    """Final SVD and quantum magnetizations across transverse-field strengths.

    Both use the diagonal ARA schedule from the classical start state of the
    ``params`` partition; only gamma is swept.
    """
    jobs = [(float(g), params.p, params.n_spins, params.n_up, tau,
             quantum_tol, order) for g in gamma_grid]
    return list(map_fn(_threshold_job, jobs))


def _threshold_job(args):
    g, p, n, n_up, tau, tol, order = args
    pg = ModelParams(p=p, n_spins=n, n_up=n_up, gamma=g)
    sched = Schedule.ara_linear(tau)
    m_svd = svd_evolve(sched, pg).final_magnetization
    basis = build_basis(pg)
    terms = build_terms(basis, pg)
    psi0 = classical_state(basis, basis.spin1, -basis.spin2)
    res = evolve(terms, sched, psi0, tol=tol, order=order)
    mz = magnetization_diagonal(basis, n)
    m_q = float(np.abs(res.final) ** 2 @ mz)
    return {"gamma": g, "m_svd": float(m_svd), "m_quantum": m_q}


def potential_landscape(s, lam, gamma, params: ModelParams, grid_n: int = 201):
    """V_sc over (sin theta1, sin theta2) at phi = 0, cos theta >= 0.

    Returns (x1, x2, v, n_minima, minima): grid axes, the potential surface
    v[i, j] = V(x1[i], x2[j]), the number of distinct local minima found by
    greedy grid descent, and their (x1, x2) coordinates.
    """
    if grid_n < 101:
        raise ConfigError("grid_n must be at least 101")
    x = np.linspace(-1.0, 1.0, grid_n)
    sz1 = x[:, None]
    sz2 = x[None, :]
    cx1 = np.sqrt(np.clip(1.0 - sz1 ** 2, 0.0, None))
    cx2 = np.sqrt(np.clip(1.0 - sz2 ** 2, 0.0, None))
    n1f = params.c
    n2f = 1.0 - n1f
    mz = n1f * sz1 + n2f * sz2
    wz = n1f * sz1 - n2f * sz2
    mx = n1f * cx1 + n2f * cx2
    v = params.n_spins * (-s * mz ** params.p - (1 - s) * (1 - lam) * wz
                          - gamma * (1 - s) * lam * mx)
    minima = _grid_minima(v)
    pts = [(float(x[i]), float(x[j])) for i, j in minima]
    return x, x, v, len(minima), pts


def _grid_minima(v: np.ndarray, tol: float = 1e-12, reach: int = 2):
    """Distinct fixed points of greedy descent on the grid.

    Every cell gets a descent pointer to the lowest cell within a
    (2*reach+1)^2 window (staying put unless that cell is lower by more than
    tol*scale); pointers are then followed with path doubling.  Sinks closer
    than ``reach`` cells are merged: a curved narrow valley can strand
    several staircase fixed points along its floor.
    """
    nr, nc = v.shape
    scale = float(np.max(np.abs(v))) or 1.0
    width = 2 * reach + 1
    pad = np.full((nr + 2 * reach, nc + 2 * reach), np.inf)
    pad[reach:-reach, reach:-reach] = v
    shifts = [(di, dj) for di in range(-reach, reach + 1)
              for dj in range(-reach, reach + 1)]
    stack = np.stack([pad[reach + di:reach + di + nr, reach + dj:reach + dj + nc]
                      for di, dj in shifts])
    k = np.argmin(stack, axis=0)
    best = np.take_along_axis(stack, k[None], 0)[0]
    move = best < v - tol * scale
    di = k // width - reach
    dj = k % width - reach
    ii, jj = np.meshgrid(np.arange(nr), np.arange(nc), indexing="ij")
    ti = np.where(move, ii + di, ii)
    tj = np.where(move, jj + dj, jj)
    ptr = (ti * nc + tj).ravel()
    for _ in range(64):
        nxt = ptr[ptr]
        if np.array_equal(nxt, ptr):
            break
        ptr = nxt
    sinks = [(int(i) // nc, int(i) % nc) for i in np.unique(ptr)]
    merged = []
    for si in sorted(sinks, key=lambda ij: v[ij]):
        if all(max(abs(si[0] - sj[0]), abs(si[1] - sj[1])) > reach
               for sj in merged):
            merged.append(si)
    return sorted(merged)


@dataclass(frozen=True)
class SvmcConfig:
    """Metropolis settings: one schedule step per sweep, ``runs`` repetitions."""

    beta: float
    sweeps: int = 500
    runs: int = 100
    seed: int = 0
    proposal: str = "uniform"  # or "perturbation"
    width: float = 0.5

    def __post_init__(self):
        if not self.beta > 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if self.sweeps < 1 or self.runs < 1:
            raise ConfigError("sweeps and runs must be >= 1")
        if self.proposal not in ("uniform", "perturbation"):
            raise ConfigError(f"unknown proposal {self.proposal!r}")


@dataclass(frozen=True, eq=False)
class SvmcResult:
    s: np.ndarray = field(repr=False)
    mean_m: np.ndarray = field(repr=False)
    std_m: np.ndarray = field(repr=False)
    m_runs: np.ndarray = field(repr=False)  # (runs, sweeps)

    @property
    def final_mean(self) -> float:
        return float(self.mean_m[-1])


def metropolis_accept(delta_e, beta, u):
    """The acceptance rule used by the sweep kernels (vectorized)."""
    delta_e = np.asarray(delta_e, dtype=float)
    return (delta_e <= 0.0) | (np.asarray(u) < np.exp(-beta * np.maximum(delta_e, 0.0)))


def svmc_run(config: SvmcConfig, schedule: Schedule, params: ModelParams) -> SvmcResult:
    """Run SVMC along a schedule discretized to one (s, lambda) per sweep.

    Streams are split per run index (counter-based Philox keyed by
    (seed, run)), so results do not depend on execution order.
    """
    n = params.n_spins
    eps = np.ones(n, dtype=np.int8)
    eps[params.n_up:] = -1
    theta0 = np.where(eps > 0, 0.0, pi)
    ks = np.arange(1, config.sweeps + 1, dtype=float)
    t_k = ks / config.sweeps * schedule.tau
    s_arr = np.asarray(schedule.s_of(t_k), dtype=float)
    lam_arr = np.asarray(schedule.lam_of(t_k), dtype=float)
    prop = np.empty((config.runs, config.sweeps, n))
    acc = np.empty_like(prop)
    for r in range(config.runs):
        rng = np.random.Generator(np.random.Philox(key=[config.seed, r]))
        prop[r] = rng.random((config.sweeps, n))
        acc[r] = rng.random((config.sweeps, n))
    mode = 0 if config.proposal == "uniform" else 1
    m_runs = kernels.svmc_batch(eps, params.p, params.gamma, config.beta,
                                s_arr, lam_arr, theta0, prop, acc,
                                mode, config.width)
    return SvmcResult(s=s_arr, mean_m=m_runs.mean(axis=0),
                      std_m=m_runs.std(axis=0), m_runs=m_runs)
