"""Instantaneous eigensystems, gap scans along annealing paths, gap scaling.

The sector Hamiltonian is real symmetric and banded (half-bandwidth n2 + 1),
so small problems use a dense solver and large ones the LAPACK banded solver
with an eigenvalue-index subset.  The gap Delta01 is measured between
*distinct* levels: eigenvalues within 1e-10 of the spectral magnitude are
grouped as degenerate first (for even p the two fully polarized states make
the bare E1 - E0 vanish at s = 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import ConfigError, NumericalFailure
from .sector import HamiltonianTerms
from .util import golden_min

__all__ = [
    "EigenSystem",
    "GapScan",
    "eigensystem",
    "eigensystem_at",
    "grouped_gap",
    "gap_along_path",
    "instantaneous_occupations",
]

_DENSE_CUTOFF = 900  # use banded LAPACK above this dimension
_DEGEN_REL = 1e-10


@dataclass(frozen=True, eq=False)
class EigenSystem:
    s: float
    lam: float
    values: np.ndarray = field(repr=False)
    vectors: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class GapScan:
    path: str
    s_values: np.ndarray = field(repr=False)
    gaps: np.ndarray = field(repr=False)
    min_gap: float = 0.0
    s_at_min: float = 0.0


def eigensystem(h: np.ndarray, k: int | None = None,
                with_vectors: bool = False) -> EigenSystem:
    """Lowest k eigenpairs of a dense real symmetric matrix."""
    d = h.shape[0]
    k = d if k is None else int(k)
    if not 1 <= k <= d:
        raise ConfigError(f"k = {k} outside 1..{d}")
    try:
        if with_vectors:
            vals, vecs = sla.eigh(h, subset_by_index=(0, k - 1))
        else:
            vals = sla.eigvalsh(h, subset_by_index=(0, k - 1))
            vecs = None
    except sla.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalFailure(f"dense eigensolver failed: {exc}") from exc
    return EigenSystem(s=np.nan, lam=np.nan, values=vals, vectors=vecs)


def eigensystem_at(terms: HamiltonianTerms, s: float, lam: float,
                   k: int = 2, with_vectors: bool = False,
                   gamma: float | None = None) -> EigenSystem:
    """Lowest k eigenpairs of H(s, lambda), choosing dense or banded solver."""
    d = terms.dim
    k = min(int(k), d)
    if d <= _DENSE_CUTOFF or with_vectors:
        es = eigensystem(terms.assemble(s, lam, gamma), k, with_vectors)
    else:
        ab = terms.assemble_banded(s, lam, gamma)
        try:
            vals = sla.eig_banded(ab, lower=True, eigvals_only=True,
                                  select="i", select_range=(0, k - 1))
        except sla.LinAlgError as exc:  # pragma: no cover
            raise NumericalFailure(f"banded eigensolver failed: {exc}") from exc
        es = EigenSystem(s=np.nan, lam=np.nan, values=vals, vectors=None)
    return EigenSystem(s=float(s), lam=float(lam), values=es.values,
                       vectors=es.vectors)


def grouped_gap(values: np.ndarray) -> float:
    """E1 - E0 between distinct levels after degeneracy grouping."""
    scale = float(np.max(np.abs(values))) or 1.0
    e0 = values[0]
    for e in values[1:]:
        if e - e0 > _DEGEN_REL * scale:
            return float(e - e0)
    raise NumericalFailure(
        "no distinct level above the ground state among the computed eigenvalues")


def _lambda_of(path):
    if callable(path):
        return path
    if path == "qa":
        return lambda s: 1.0
    if path == "diagonal":
        return lambda s: s
    raise ConfigError(f"unknown path {path!r}; use 'qa', 'diagonal' or a callable")


def gap_along_path(terms: HamiltonianTerms, path="diagonal",
                   s_resolution: float = 0.01, refine_tol: float = 1e-5,
                   s_range=(0.0, 1.0), k: int = 4) -> GapScan:
    """Scan Delta01(s) along lambda(s) and refine the minimum.

    The grid minimum is polished by golden-section search in s down to
    ``refine_tol``.  ``k`` eigenvalues are computed per point so degeneracy
    grouping has headroom.
    """
    if s_resolution > 1e-2 + 1e-15:
        raise ConfigError("s_resolution must be <= 0.01")
    lam_of = _lambda_of(path)
    lo, hi = s_range
    ss = np.arange(lo, hi + s_resolution / 2, s_resolution)
    ss[-1] = min(ss[-1], hi)

    def gap_at(s):
        return grouped_gap(eigensystem_at(terms, s, lam_of(s), k=k).values)

    gaps = np.array([gap_at(s) for s in ss])
    i0 = int(np.argmin(gaps))
    a = ss[max(i0 - 1, 0)]
    b = ss[min(i0 + 1, len(ss) - 1)]
    s_min, g_min = golden_min(gap_at, a, b, refine_tol)
    if gaps[i0] < g_min:
        s_min, g_min = ss[i0], gaps[i0]
    name = path if isinstance(path, str) else "custom"
    return GapScan(path=name, s_values=ss, gaps=gaps,
                   min_gap=float(g_min), s_at_min=float(s_min))


def instantaneous_occupations(state: np.ndarray, h: np.ndarray, k: int) -> np.ndarray:
    """|<E_j|psi>|^2 for the lowest k instantaneous eigenstates of dense h."""
    nrm = np.linalg.norm(state)
    if abs(nrm - 1.0) > 1e-8:
        raise ConfigError(f"state is not normalized (|psi| = {nrm})")
    es = eigensystem(h, k=k, with_vectors=True)
    amps = es.vectors.T @ state
    return np.abs(amps) ** 2
