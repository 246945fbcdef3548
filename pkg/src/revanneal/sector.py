"""Permutation-symmetric two-block sector of the p-spin problem.

The N spins are split into an "up" block of ``n_up`` spins (epsilon = +1 in
the initial classical state) and a "down" block of the remaining spins.  All
Hamiltonian terms commute with the squared block spins, so dynamics starting
from the maximal-spin sector stays inside it.  Basis states are labelled by
the block magnetizations (m1, m2), ordered lexicographically with m1
descending, then m2 descending; index 0 is the all-up state, which is the
cost-function ground state.  Every operator is real symmetric in this basis.

Conventions: hbar = 1 and energies are those of the dimensionless annealing
Hamiltonian, so times are in inverse energy units.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, sqrt

import numpy as np

from .errors import ConfigError

__all__ = [
    "ModelParams",
    "SectorBasis",
    "HamiltonianTerms",
    "build_basis",
    "build_terms",
    "sector_terms",
    "assemble",
    "classical_state",
    "qa_ground_state",
    "magnetization_diagonal",
]


@dataclass(frozen=True)
class ModelParams:
    """Problem definition: cost exponent p, spin count N, up-block size and Gamma.

    The up fraction c = n_up / n_spins is stored as a block count so that
    "N*c is an integer" is true by construction.
    """

    p: int
    n_spins: int
    n_up: int
    gamma: float

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 3:
            raise ConfigError(f"p must be an integer >= 3, got {self.p}")
        if int(self.n_spins) != self.n_spins or self.n_spins < 2:
            raise ConfigError(f"n_spins must be an integer >= 2, got {self.n_spins}")
        if int(self.n_up) != self.n_up:
            raise ConfigError(f"n_up must be an integer, got {self.n_up}")
        if not (self.n_spins / 2 <= self.n_up <= self.n_spins):
            raise ConfigError(
                f"n_up={self.n_up} outside [{self.n_spins/2}, {self.n_spins}] "
                "(the up fraction c must lie in [1/2, 1])"
            )
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")

    @classmethod
    def from_fraction(cls, p: int, n_spins: int, c: float, gamma: float,
                      nearest: bool = False) -> "ModelParams":
        """Build params from the up fraction c.

        With ``nearest=False`` (default), ``n_spins * c`` must be an integer to
        within 1e-9, otherwise a ConfigError is raised.  ``nearest=True``
        instead assigns epsilon_i = +1 for i <= N*c, i.e. the block count is
        floor(N*c).
        """
        raw = n_spins * c
        if nearest:
            n_up = int(np.floor(raw + 1e-9))
        else:
            n_up = int(round(raw))
            if abs(raw - n_up) > 1e-9:
                raise ConfigError(
                    f"N*c = {raw} is not an integer; pick a valid block count"
                )
        return cls(p=p, n_spins=n_spins, n_up=n_up, gamma=gamma)

    @property
    def n_down(self) -> int:
        return self.n_spins - self.n_up

    @property
    def c(self) -> float:
        return self.n_up / self.n_spins

    @property
    def initial_magnetization(self) -> float:
        return 2.0 * self.c - 1.0


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Ordered (m1, m2) basis of a (spin1, spin2) block pair."""

    spin1: float
    spin2: float
    m1: np.ndarray = field(repr=False)
    m2: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.m1.shape[0]

    @property
    def n1(self) -> int:
        return int(round(2 * self.spin1))

    @property
    def n2(self) -> int:
        return int(round(2 * self.spin2))

    def index_of(self, m1: float, m2: float) -> int:
        i1 = self.spin1 - m1
        i2 = self.spin2 - m2
        if (abs(i1 - round(i1)) > 1e-9 or abs(i2 - round(i2)) > 1e-9
                or not 0 <= round(i1) <= self.n1 or not 0 <= round(i2) <= self.n2):
            raise ConfigError(f"(m1={m1}, m2={m2}) is not a state of this sector")
        return int(round(i1)) * (self.n2 + 1) + int(round(i2))

    def states(self):
        """Iterate (m1, m2) pairs in basis order."""
        return zip(self.m1, self.m2)


def _basis_for_spins(spin1: float, spin2: float) -> SectorBasis:
    n1 = int(round(2 * spin1))
    n2 = int(round(2 * spin2))
    m1 = np.repeat(spin1 - np.arange(n1 + 1), n2 + 1).astype(float)
    m2 = np.tile(spin2 - np.arange(n2 + 1), n1 + 1).astype(float)
    m1.flags.writeable = False
    m2.flags.writeable = False
    return SectorBasis(spin1=spin1, spin2=spin2, m1=m1, m2=m2)


def build_basis(params: ModelParams) -> SectorBasis:
    """Maximal-spin sector basis for the block partition of ``params``."""
    return _basis_for_spins(params.n_up / 2.0, params.n_down / 2.0)


@dataclass(frozen=True, eq=False)
class HamiltonianTerms:
    """The three Hamiltonian terms over a sector basis.

    ``h0_diag`` and ``hinit_diag`` are the diagonals of the cost function and
    of the initialization term.  The transverse-field term couples states
    differing by one unit in exactly one block magnetization; it is stored as
    two coupling bands: ``off1[i]`` links basis index i to i+1 (an m2 step,
    zero across block boundaries) and ``offk[i]`` links i to i+koff (an m1
    step), with koff = n2 + 1.
    """

    basis: SectorBasis
    n_spins: int
    p: int
    gamma: float
    h0_diag: np.ndarray = field(repr=False)
    hinit_diag: np.ndarray = field(repr=False)
    off1: np.ndarray = field(repr=False)
    offk: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def koff(self) -> int:
        return self.basis.n2 + 1

    @property
    def rowsum(self) -> np.ndarray:
        """Absolute off-diagonal row sums of the transverse term (for bounds)."""
        r = np.zeros(self.dim)
        r[:-1] += np.abs(self.off1[:-1])
        r[1:] += np.abs(self.off1[:-1])
        k = self.koff
        if self.dim > k:
            r[:-k] += np.abs(self.offk[:-k])
            r[k:] += np.abs(self.offk[:-k])
        return r

    def h0(self) -> np.ndarray:
        return np.diag(self.h0_diag)

    def hinit(self) -> np.ndarray:
        return np.diag(self.hinit_diag)

    def vtf(self) -> np.ndarray:
        d, k = self.dim, self.koff
        v = np.zeros((d, d))
        idx = np.arange(d - 1)
        v[idx, idx + 1] = self.off1[:-1]
        v[idx + 1, idx] = self.off1[:-1]
        if d > k:
            idx = np.arange(d - k)
            v[idx, idx + k] = self.offk[:-k]
            v[idx + k, idx] = self.offk[:-k]
        return v

    def assemble(self, s: float, lam: float, gamma: float | None = None) -> np.ndarray:
        return assemble(self, s, lam, self.gamma if gamma is None else gamma)

    def assemble_banded(self, s: float, lam: float, gamma: float | None = None) -> np.ndarray:
        """Lower-banded storage (rows = sub-diagonal offsets 0..koff)."""
        if not (0.0 <= s <= 1.0 and 0.0 <= lam <= 1.0):
            raise ConfigError(f"(s, lambda) = ({s}, {lam}) outside [0, 1]^2")
        g = self.gamma if gamma is None else gamma
        d, k = self.dim, self.koff
        ab = np.zeros((k + 1, d))
        ab[0] = s * self.h0_diag + (1.0 - s) * (1.0 - lam) * self.hinit_diag
        w = g * (1.0 - s) * lam
        ab[1, : d - 1] = w * self.off1[: d - 1]
        if d > k:
            ab[k, : d - k] = w * self.offk[: d - k]
        return ab


def sector_terms(spin1: float, spin2: float, params: ModelParams) -> HamiltonianTerms:
    """Hamiltonian terms over an arbitrary (spin1, spin2) block-spin pair.

    The maximal sector uses spin1 = n_up/2, spin2 = n_down/2; smaller spins
    arise when decomposing a computational bitstring into irreducible blocks.
    The cost-function prefactor keeps the physical N of ``params``.
    """
    basis = _basis_for_spins(spin1, spin2)
    n = params.n_spins
    h0 = -n * (2.0 * (basis.m1 + basis.m2) / n) ** params.p
    hinit = -2.0 * (basis.m1 - basis.m2)

    d = basis.dim
    n1, n2 = basis.n1, basis.n2
    s1, s2 = basis.spin1, basis.spin2
    off1 = np.zeros(d)
    offk = np.zeros(d)
    i1 = np.repeat(np.arange(n1 + 1), n2 + 1)
    i2 = np.tile(np.arange(n2 + 1), n1 + 1)
    # transverse field per spin: -sum_i sigma_i^x = -2(S1^x + S2^x), so the
    # m -> m-1 coupling is the full ladder element sqrt(S(S+1) - m(m-1))
    ok = i2 < n2
    off1[ok] = -np.sqrt(s2 * (s2 + 1) - basis.m2[ok] * (basis.m2[ok] - 1))
    ok = i1 < n1
    offk[ok] = -np.sqrt(s1 * (s1 + 1) - basis.m1[ok] * (basis.m1[ok] - 1))
    for a in (h0, hinit, off1, offk):
        a.flags.writeable = False
    return HamiltonianTerms(
        basis=basis, n_spins=n, p=params.p, gamma=params.gamma,
        h0_diag=h0, hinit_diag=hinit, off1=off1, offk=offk,
    )


def build_terms(basis: SectorBasis, params: ModelParams) -> HamiltonianTerms:
    """Terms of the annealing Hamiltonian over the maximal-sector ``basis``."""
    if basis.n1 != params.n_up or basis.n2 != params.n_down:
        raise ConfigError("basis does not match the block partition of params")
    return sector_terms(basis.spin1, basis.spin2, params)


def assemble(terms: HamiltonianTerms, s: float, lam: float, gamma: float) -> np.ndarray:
    """Dense H(s, lambda) = s*H0 + (1-s)(1-lambda)*Hinit + Gamma(1-s)lambda*V_TF."""
    if not (0.0 <= s <= 1.0 and 0.0 <= lam <= 1.0):
        raise ConfigError(f"(s, lambda) = ({s}, {lam}) outside [0, 1]^2")
    h = np.diag(s * terms.h0_diag + (1.0 - s) * (1.0 - lam) * terms.hinit_diag)
    h += gamma * (1.0 - s) * lam * terms.vtf()
    return h


def classical_state(basis: SectorBasis, m1: float, m2: float) -> np.ndarray:
    """Unit basis vector at (m1, m2); the ARA/IRA start state is (S1, -S2)."""
    psi = np.zeros(basis.dim, dtype=complex)
    psi[basis.index_of(m1, m2)] = 1.0
    return psi


def qa_ground_state(basis: SectorBasis) -> np.ndarray:
    """Ground state of the transverse field: all spins polarized along +x.

    Its energy is -N.  Amplitudes are the (positive) binomial product
    coefficients, i.e. the uniform superposition of all computational states
    restricted to the sector.
    """
    n1, n2 = basis.n1, basis.n2
    amp = np.empty(basis.dim)
    for i1 in range(n1 + 1):
        for i2 in range(n2 + 1):
            amp[i1 * (n2 + 1) + i2] = sqrt(comb(n1, i1)) * sqrt(comb(n2, i2))
    amp /= np.linalg.norm(amp)
    return amp.astype(complex)


def magnetization_diagonal(basis: SectorBasis, n_spins: int) -> np.ndarray:
    """Diagonal of the magnetization-per-spin operator 2(S1^z + S2^z)/N."""
    return 2.0 * (basis.m1 + basis.m2) / n_spins
