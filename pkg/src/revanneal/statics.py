"""Zero-temperature mean-field statics of the annealing Hamiltonian.

The ground-state free energy per spin at fixed controls (s, lambda) is

    f(m) = s(p-1)m^p
           - c     * sqrt([s p m^(p-1) + (1-s)(1-lambda)]^2 + G^2(1-s)^2 lambda^2)
           - (1-c) * sqrt([s p m^(p-1) - (1-s)(1-lambda)]^2 + G^2(1-s)^2 lambda^2)

and the equilibrium magnetization is the global minimizer.  Stationarity of f
is equivalent to the two-term self-consistency condition: df/dm factors as
s p (p-1) m^(p-2) times the self-consistency residual.

The minimizer search runs over m in [0, 1]: for odd p the expression above
decreases without bound toward m = -1 through points that are not stationary
(the m^(p-1) field term is even in m there), and every self-consistent
magnetization is non-negative for c >= 1/2, so nothing physical lives at
m < 0.  First-order transitions are detected as jumps of the global minimizer
between adjacent grid points, refined by bisection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .util import golden_min

__all__ = [
    "MeanFieldPoint",
    "TransitionLine",
    "free_energy",
    "free_energy_dm",
    "self_consistency_residual",
    "solve_m",
    "trace_transitions",
    "diagonal_scan",
]

_M_STEP = 1e-3  # dense grid pitch for the global scan
_M_XTOL = 1e-10  # golden-section refinement width
_F_TIE = 1e-12  # degenerate-minimum tolerance; ties break toward larger m


def _check_args(s, lam, gamma, c, p):
    if not (0.0 <= s <= 1.0 and 0.0 <= lam <= 1.0):
        raise ConfigError(f"(s, lambda) = ({s}, {lam}) outside [0, 1]^2")
    if not (0.5 <= c <= 1.0):
        raise ConfigError(f"c = {c} outside [1/2, 1]")
    if not gamma > 0:
        raise ConfigError(f"gamma must be positive, got {gamma}")
    if int(p) != p or p < 3:
        raise ConfigError(f"p must be an integer >= 3, got {p}")


def free_energy(m, s, lam, gamma, c, p):
    """Mean-field free energy per spin; vectorized in m."""
    m = np.asarray(m, dtype=float)
    field = s * p * m ** (p - 1)
    w = (1.0 - s) * (1.0 - lam)
    b = gamma * (1.0 - s) * lam
    return (s * (p - 1) * m ** p
            - c * np.sqrt((field + w) ** 2 + b * b)
            - (1.0 - c) * np.sqrt((field - w) ** 2 + b * b))


def free_energy_dm(m, s, lam, gamma, c, p):
    """Analytic d f / d m; vectorized in m."""
    m = np.asarray(m, dtype=float)
    field = s * p * m ** (p - 1)
    w = (1.0 - s) * (1.0 - lam)
    b = gamma * (1.0 - s) * lam
    dfield = s * p * (p - 1) * m ** (p - 2)
    ra = np.sqrt((field + w) ** 2 + b * b)
    rb = np.sqrt((field - w) ** 2 + b * b)
    ta = np.where(ra > 0, (field + w) / np.where(ra > 0, ra, 1.0), np.sign(field + w))
    tb = np.where(rb > 0, (field - w) / np.where(rb > 0, rb, 1.0), np.sign(field - w))
    return s * p * (p - 1) * m ** (p - 1) - dfield * (c * ta + (1.0 - c) * tb)


def self_consistency_residual(m, s, lam, gamma, c, p):
    """m minus the weighted two-block alignment; zero at stationary points.

    Guarded ratios: where a square root vanishes the ratio is taken as the
    sign of its numerator (0 for a zero numerator).
    """
    m = np.asarray(m, dtype=float)
    field = s * p * m ** (p - 1)
    w = (1.0 - s) * (1.0 - lam)
    b = gamma * (1.0 - s) * lam
    ra = np.sqrt((field + w) ** 2 + b * b)
    rb = np.sqrt((field - w) ** 2 + b * b)
    ta = np.where(ra > 0, (field + w) / np.where(ra > 0, ra, 1.0), np.sign(field + w))
    tb = np.where(rb > 0, (field - w) / np.where(rb > 0, rb, 1.0), np.sign(field - w))
    return m - (c * ta + (1.0 - c) * tb)


@dataclass(frozen=True)
class MeanFieldPoint:
    s: float
    lam: float
    m_star: float
    f_star: float
    residual: float


@dataclass(frozen=True)
class TransitionLine:
    c: float
    gamma: float
    points: tuple[tuple[float, float], ...]  # (lambda, s) of each located jump
    jump_sizes: tuple[float, ...]

    def min_lambda(self) -> float:
        return min((lam for lam, _ in self.points), default=np.inf)


def solve_m(s, lam, gamma, c, p) -> MeanFieldPoint:
    """Global minimizer of the free energy over m in [0, 1].

    Dense grid at pitch 1e-3 followed by golden-section refinement of the
    best bracket; near-degenerate minima (within 1e-12 in f) resolve toward
    larger m.
    """
    _check_args(s, lam, gamma, c, p)
    grid = np.linspace(0.0, 1.0, int(round(1.0 / _M_STEP)) + 1)
    f = free_energy(grid, s, lam, gamma, c, p)
    fmin = float(np.min(f))
    cand = np.nonzero(f <= fmin + _F_TIE)[0]
    picks = {int(cand[np.argmin(f[cand])]), int(cand[-1])}

    def refine(i):
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        return golden_min(lambda m: float(free_energy(m, s, lam, gamma, c, p)),
                          lo, hi, _M_XTOL)

    best = None
    for i in picks:
        m_i, f_i = refine(i)
        m_i, f_i = _polish_stationary(m_i, i, grid, s, lam, gamma, c, p)
        if best is None or f_i < best[1] - _F_TIE or (
                abs(f_i - best[1]) <= _F_TIE and m_i > best[0]):
            best = (m_i, f_i)
    m_star, f_star = best
    res = float(self_consistency_residual(m_star, s, lam, gamma, c, p))
    return MeanFieldPoint(s=float(s), lam=float(lam), m_star=float(m_star),
                          f_star=float(f_star), residual=res)


def _polish_stationary(m, i, grid, s, lam, gamma, c, p):
    """Bisect the self-consistency residual across the refined bracket.

    Near a shallow minimum the free energy is numerically flat over a window
    much wider than the true root, so golden-section alone can stall a few
    1e-8 away; the residual changes sign at the minimum and bisects to
    machine precision.
    """
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]

    def res(x):
        return float(self_consistency_residual(x, s, lam, gamma, c, p))

    r_lo, r_hi = res(lo), res(hi)
    if r_lo == 0.0:
        m = lo
    elif r_hi == 0.0:
        m = hi
    elif r_lo * r_hi < 0.0:
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            r_mid = res(mid)
            if r_mid == 0.0:
                lo = hi = mid
                break
            if r_lo * r_mid < 0.0:
                hi, r_hi = mid, r_mid
            else:
                lo, r_lo = mid, r_mid
        root = 0.5 * (lo + hi)
        # keep the root only if it is the same minimum golden found
        if abs(root - m) <= (grid[1] - grid[0]):
            m = root
    return m, float(free_energy(m, s, lam, gamma, c, p))


def _refine_jump(lam, s_lo, s_hi, m_lo, m_hi, gamma, c, p, s_tol):
    """Bisect a bracketed argmin jump in s; returns (s, jump size)."""
    while s_hi - s_lo > s_tol:
        mid = 0.5 * (s_lo + s_hi)
        mm = solve_m(mid, lam, gamma, c, p).m_star
        if abs(mm - m_lo) < abs(mm - m_hi):
            s_lo, m_lo = mid, mm
        else:
            s_hi, m_hi = mid, mm
    return 0.5 * (s_lo + s_hi), abs(m_hi - m_lo)


def diagonal_scan(gamma, c, p, step=0.005, s_start=None):
    """m_star along the ARA diagonal s = lambda.

    The scan starts one step above zero by default: at s = lambda = 0 the
    free energy is independent of m, so the minimizer there is a tie-break
    artifact, not a physical magnetization.
    """
    if s_start is None:
        s_start = step
    ss = np.arange(s_start, 1.0 + step / 2, step)
    ms = np.array([solve_m(s, s, gamma, c, p).m_star for s in ss])
    return ss, ms


def trace_transitions(c, gamma, p, grid_step=0.005, jump_threshold=0.05,
                      s_refine_tol=1e-4, lambda_step=None) -> TransitionLine:
    """Locate first-order jumps of m_star on the (lambda, s) grid.

    For each lambda column the s axis is scanned at ``grid_step``; adjacent
    argmin changes larger than ``jump_threshold`` are refined by bisection to
    ``s_refine_tol``.  An empty line is a valid result.
    """
    if lambda_step is None:
        lambda_step = grid_step
    points = []
    jumps = []
    lams = np.arange(0.0, 1.0 + lambda_step / 2, lambda_step)
    ss = np.arange(grid_step, 1.0 + grid_step / 2, grid_step)
    for lam in lams:
        ms = np.array([solve_m(s, lam, gamma, c, p).m_star for s in ss])
        dj = np.abs(np.diff(ms))
        for i in np.nonzero(dj > jump_threshold)[0]:
            s_jump, size = _refine_jump(lam, ss[i], ss[i + 1], ms[i], ms[i + 1],
                                        gamma, c, p, s_refine_tol)
            if size >= jump_threshold:
                points.append((float(lam), float(s_jump)))
                jumps.append(float(size))
    return TransitionLine(c=float(c), gamma=float(gamma),
                          points=tuple(points), jump_sizes=tuple(jumps))
