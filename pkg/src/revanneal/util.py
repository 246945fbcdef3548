"""Small shared numerics: golden-section search and scaling-law fits."""

from __future__ import annotations

import numpy as np

__all__ = ["golden_min", "linear_fit_rms", "classify_scaling"]

_GR = (np.sqrt(5.0) - 1.0) / 2.0


def golden_min(f, lo: float, hi: float, xtol: float):
    """Minimize a unimodal scalar function on [lo, hi] to bracket width xtol.

    Returns the best (x, f(x)) evaluated, which for sharp minima is a much
    better estimate than the final bracket midpoint.
    """
    x1 = hi - _GR * (hi - lo)
    x2 = lo + _GR * (hi - lo)
    f1, f2 = f(x1), f(x2)
    best = (x1, f1) if f1 <= f2 else (x2, f2)
    while hi - lo > xtol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GR * (hi - lo)
            f1 = f(x1)
            if f1 < best[1]:
                best = (x1, f1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GR * (hi - lo)
            f2 = f(x2)
            if f2 < best[1]:
                best = (x2, f2)
    return best


def linear_fit_rms(x, y):
    """Least-squares line fit; returns (slope, intercept, rms residual)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid ** 2)))


def classify_scaling(n_vals, y_vals):
    """Compare power-law vs exponential dependence of positive y on N.

    Fits log y against log N (power law) and against N (exponential) and
    reports both rms residuals; the smaller residual wins.
    """
    n_vals = np.asarray(n_vals, dtype=float)
    ly = np.log(np.asarray(y_vals, dtype=float))
    p_slope, p_icpt, p_rms = linear_fit_rms(np.log(n_vals), ly)
    e_slope, e_icpt, e_rms = linear_fit_rms(n_vals, ly)
    return {
        "power_exponent": p_slope,
        "power_rms": p_rms,
        "exp_rate": e_slope,
        "exp_rms": e_rms,
        "preferred": "power" if p_rms <= e_rms else "exponential",
    }
