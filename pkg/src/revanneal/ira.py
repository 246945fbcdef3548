"""Iterated reverse annealing: non-monotonic cycles, measurement statistics,
and the cycle-to-cycle Markov chain.

A cycle evolves under s(t)*H0 + Gamma(1-s(t))*V_TF (no initialization term;
lambda is pinned at 1) with the quadratic schedule dipping to s_min, then
measures in the computational basis.  Because the Hamiltonian is symmetric
under permutations within each block, a measured bitstring is characterized
by its per-block up-counts (k1, k2), which map one-to-one onto the sector
labels (m1, m2).  Two initial-state conventions are offered:

* ``initial="dicke"``: the cycle starts from the symmetric sector basis
  state |m1, m2>.  This is exact when the start state is fully polarized in
  each block (e.g. the all-up state, or the classical state that defines the
  partition) but an approximation for other up-counts, since a single
  bitstring is not the symmetrized state.
* ``initial="bitstring"``: the cycle starts from an actual computational
  bitstring with those up-counts, decomposed exactly into block-spin
  sub-sectors (Schur weights), each evolved separately.  Outcome statistics
  then match full-Hilbert evolution exactly, and the resulting column-
  stochastic matrix is the true Markov kernel of the measure-and-restart
  protocol.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .dynamics import evolve
from .errors import ConfigError
from .schedules import Schedule
from .sector import HamiltonianTerms, ModelParams, build_basis, build_terms, sector_terms
from .spectrum import eigensystem, instantaneous_occupations

__all__ = [
    "CycleSpec",
    "TransitionMatrix",
    "single_cycle",
    "transition_matrix",
    "iterate",
    "energy_aggregate",
    "cycle_spectral_trace",
    "sub_spin_weights",
]


@dataclass(frozen=True)
class CycleSpec:
    """One IRA cycle: duration tau, schedule minimum s_min, cycle count."""

    tau: float
    s_min: float
    cycles: int = 1

    def __post_init__(self):
        if not 0.0 < self.s_min <= 1.0:
            raise ConfigError(f"s_min must be in (0, 1], got {self.s_min}")
        if not self.tau > 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.cycles < 0:
            raise ConfigError(f"cycles must be >= 0, got {self.cycles}")

    def schedule(self) -> Schedule:
        return Schedule.ira(self.tau, self.s_min)

    @property
    def total_time(self) -> float:
        return self.cycles * self.tau


def sub_spin_weights(n_block: int, k_up: int):
    """Weights of a bitstring with ``k_up`` ups on the block-spin sectors.

    Returns [(S, w)] with sum(w) = 1: a computational basis state of
    ``n_block`` spins at magnetization m = k_up - n_block/2 carries weight
    w = [C(n, n/2-S) - C(n, n/2-S-1)] / C(n, k_up) on total spin S.
    """
    if n_block == 0:
        return [(0.0, 1.0)]
    if not 0 <= k_up <= n_block:
        raise ConfigError(f"k_up = {k_up} outside 0..{n_block}")
    m = k_up - n_block / 2.0
    total = comb(n_block, k_up)
    out = []
    s = abs(m)
    while s <= n_block / 2.0 + 1e-9:
        j = int(round(n_block / 2.0 - s))
        d = comb(n_block, j) - (comb(n_block, j - 1) if j >= 1 else 0)
        out.append((s, d / total))
        s += 1.0
    return out


def _cycle_from_dicke(terms: HamiltonianTerms, spec: CycleSpec,
                      index: int, tol: float, order: int) -> np.ndarray:
    psi0 = np.zeros(terms.dim, dtype=complex)
    psi0[index] = 1.0
    if spec.s_min == 1.0:  # schedule is frozen at the classical Hamiltonian
        out = np.zeros(terms.dim)
        out[index] = 1.0
        return out
    res = evolve(terms, spec.schedule(), psi0, tol=tol, order=order)
    return np.abs(res.final) ** 2


def single_cycle(index: int, spec: CycleSpec, params: ModelParams,
                 initial: str = "dicke", tol: float = 1e-9,
                 order: int = 2, _terms: HamiltonianTerms | None = None) -> np.ndarray:
    """Measurement distribution over (m1, m2) classes after one cycle.

    ``index`` labels the start class in the maximal-sector ordering.  See the
    module docstring for the two ``initial`` conventions.
    """
    terms = build_terms(build_basis(params), params) if _terms is None else _terms
    basis = terms.basis
    if not 0 <= index < basis.dim:
        raise ConfigError(f"index {index} outside 0..{basis.dim - 1}")
    if initial == "dicke":
        return _cycle_from_dicke(terms, spec, index, tol, order)
    if initial != "bitstring":
        raise ConfigError(f"initial must be 'dicke' or 'bitstring', got {initial!r}")

    n1, n2 = basis.n1, basis.n2
    m1 = basis.m1[index]
    m2 = basis.m2[index]
    k1 = int(round(m1 + n1 / 2.0))
    k2 = int(round(m2 + n2 / 2.0))
    out = np.zeros(basis.dim)
    for s1, w1 in sub_spin_weights(n1, k1):
        for s2, w2 in sub_spin_weights(n2, k2):
            sub = sector_terms(s1, s2, params)
            sub_index = sub.basis.index_of(m1, m2)
            probs = _cycle_from_dicke(sub, spec, sub_index, tol, order)
            # outcome (mu1, mu2) in the sub-sector belongs to class (k1', k2')
            for j, (u1, u2) in enumerate(sub.basis.states()):
                tgt = basis.index_of(u1, u2)
                out[tgt] += w1 * w2 * probs[j]
    return out


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Column-stochastic single-cycle kernel over sector classes."""

    matrix: np.ndarray = field(repr=False)  # (j, i): i -> j in one cycle
    energies: np.ndarray = field(repr=False)  # H0 diagonal per class
    groups: tuple = ()  # index arrays of degenerate H0 levels, ascending

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def energy_groups(h0_diag: np.ndarray, n_spins: int):
    """Partition class indices into degenerate H0 levels (ascending energy)."""
    tol = 1e-9 * n_spins
    order = np.argsort(h0_diag, kind="stable")
    groups = []
    cur = [int(order[0])]
    for i in order[1:]:
        if h0_diag[i] - h0_diag[cur[-1]] <= tol:
            cur.append(int(i))
        else:
            groups.append(np.array(cur))
            cur = [int(i)]
    groups.append(np.array(cur))
    return tuple(groups)


def transition_matrix(spec: CycleSpec, params: ModelParams,
                      initial: str = "dicke", tol: float = 1e-9,
                      order: int = 2, map_fn=map) -> TransitionMatrix:
    """Assemble P column by column: column i is single_cycle(i)."""
    terms = build_terms(build_basis(params), params)
    d = terms.dim
    args = [(i, spec, params, initial, tol, order) for i in range(d)]
    cols = list(map_fn(_column_job, args))
    mat = np.column_stack(cols)
    return TransitionMatrix(matrix=mat, energies=terms.h0_diag.copy(),
                            groups=energy_groups(terms.h0_diag, params.n_spins))


def _column_job(args):
    i, spec, params, initial, tol, order = args
    return single_cycle(i, spec, params, initial=initial, tol=tol, order=order)


def iterate(tm: TransitionMatrix | np.ndarray, pi0: np.ndarray, r: int) -> np.ndarray:
    """pi after r cycles: P^r pi0.  The ground-state probability is out[0]."""
    mat = tm.matrix if isinstance(tm, TransitionMatrix) else np.asarray(tm)
    pi0 = np.asarray(pi0, dtype=float)
    if mat.shape[0] != len(pi0):
        raise ConfigError("dimension mismatch between P and pi0")
    if r < 0:
        raise ConfigError(f"r must be >= 0, got {r}")
    out = pi0.copy()
    for _ in range(r):
        out = mat @ out
    return out


def energy_aggregate(obj, groups):
    """Aggregate a class-resolved P or pi over degenerate H0 levels.

    Vector entries are summed within a level.  Matrix rows (outcomes) are
    summed and columns (initial states) averaged, so aggregated columns stay
    stochastic; the column average is the uniform mixture over the level's
    degenerate start states.
    """
    a = obj.matrix if isinstance(obj, TransitionMatrix) else np.asarray(obj)
    g = len(groups)
    if a.ndim == 1:
        return np.array([a[idx].sum() for idx in groups])
    out = np.empty((g, g))
    for bi, cols in enumerate(groups):
        block = a[:, cols].mean(axis=1)
        for bj, rows in enumerate(groups):
            out[bj, bi] = block[rows].sum()
    return out


def cycle_spectral_trace(index: int, spec: CycleSpec, params: ModelParams,
                         k: int = 8, n_samples: int = 201,
                         tol: float = 1e-9, order: int = 2):
    """Instantaneous spectrum and occupations along one cycle.

    Returns a dict of arrays: t, s, energies (n_samples, k) and occupations
    (n_samples, k), sampled on a uniform time grid.
    """
    terms = build_terms(build_basis(params), params)
    k = min(k, terms.dim)
    if not 0 <= index < terms.dim:
        raise ConfigError(f"index {index} outside 0..{terms.dim - 1}")
    if n_samples < 2:
        raise ConfigError("n_samples must be >= 2")
    sched = spec.schedule()
    times = np.linspace(0.0, spec.tau, n_samples)
    psi0 = np.zeros(terms.dim, dtype=complex)
    psi0[index] = 1.0
    res = evolve(terms, sched, psi0, tol=tol, order=order, sample_times=times[1:])
    states = np.vstack([psi0[None, :], res.snapshots])
    energies = np.empty((n_samples, k))
    occs = np.empty((n_samples, k))
    for j, t in enumerate(times):
        s = float(sched.s_of(t))
        h = terms.assemble(s, 1.0)
        es = eigensystem(h, k=k, with_vectors=True)
        energies[j] = es.values
        occs[j] = np.abs(es.vectors.T @ states[j]) ** 2
    return {"t": times, "s": np.asarray(sched.s_of(times), dtype=float),
            "energies": energies, "occupations": occs}
