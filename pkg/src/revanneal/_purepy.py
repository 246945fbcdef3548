"""Pure NumPy implementations of the hot kernels.

These mirror the compiled kernels in ``_core`` step for step: the adaptive
exponential integrator for the sector Schrodinger equation and the Metropolis
sweep loop of spin-vector Monte Carlo.  The compiled module is preferred at
import time; this module is the always-available fallback and the reference
the extension is tested against.
"""

from __future__ import annotations

import numpy as np
from scipy.special import jv

from .errors import NumericalFailure

BACKEND_NAME = "pure"

# Chebyshev series are truncated where the Bessel coefficients fall below
# this; the resulting exponentials are accurate to machine precision, which
# keeps the stepping strictly unitary up to roundoff.
_COEFF_CUTOFF = 1e-16

# CF4 (commutator-free fourth-order) nodes and weights.
_C1 = 0.5 - np.sqrt(3.0) / 6.0
_C2 = 0.5 + np.sqrt(3.0) / 6.0
_A1 = (3.0 - 2.0 * np.sqrt(3.0)) / 12.0
_A2 = (3.0 + 2.0 * np.sqrt(3.0)) / 12.0


def bessel_coeffs(z: float) -> np.ndarray:
    """J_k(z) for k = 0..M, truncated a few terms past the cutoff."""
    m_max = int(z) + 40 + int(6.0 * np.sqrt(z))
    cf = jv(np.arange(m_max + 1), z)
    nz = np.nonzero(np.abs(cf) > _COEFF_CUTOFF)[0]
    m = min((int(nz[-1]) if len(nz) else 0) + 3, m_max)
    return cf[: m + 1]


def _matvec(dg, w, off1, offk, koff, x, out):
    """out = (diag(dg) + w * V_TF) x with the two-band coupling layout."""
    np.multiply(dg, x, out=out)
    if w != 0.0:
        a = off1[:-1]
        out[:-1] += (w * a) * x[1:]
        out[1:] += (w * a) * x[:-1]
        if x.shape[0] > koff:
            b = offk[:-koff]
            out[:-koff] += (w * b) * x[koff:]
            out[koff:] += (w * b) * x[:-koff]
    return out


def expmv(dg, w, off1, offk, koff, rowsum, dt, psi):
    """exp(-i dt (diag(dg) + w V_TF)) psi via a Chebyshev expansion.

    Spectral bounds come from Gershgorin disks, so the scaled operator is
    rigorously inside [-1, 1].
    """
    aw = abs(w)
    hi = float(np.max(dg + aw * rowsum))
    lo = float(np.min(dg - aw * rowsum))
    cen = 0.5 * (hi + lo)
    half = 0.5 * (hi - lo)
    if half < 1e-300:
        return np.exp(-1j * dt * cen) * psi
    z = dt * half
    cf = bessel_coeffs(z)
    dgs = (dg - cen) / half
    ws = w / half
    tm2 = psi.astype(complex, copy=True)
    tm1 = np.empty_like(tm2)
    _matvec(dgs, ws, off1, offk, koff, tm2, tm1)
    acc = cf[0] * tm2 + (-2j * cf[1]) * tm1
    cur = np.empty_like(tm2)
    ph = -1j
    for k in range(2, len(cf)):
        _matvec(dgs, ws, off1, offk, koff, tm1, cur)
        cur *= 2.0
        cur -= tm2
        ph *= -1j
        acc += (2.0 * ph * cf[k]) * cur
        tm2, tm1, cur = tm1, cur, tm2
    acc *= np.exp(-1j * dt * cen)
    return acc


def _controls(kind, s_min, tbl_t, tbl_s, tbl_l, tau, t):
    if kind == 1:  # IRA quadratic, lambda = 1
        x = 2.0 * t / tau - 1.0
        return s_min + (1.0 - s_min) * x * x, 1.0
    return float(np.interp(t, tbl_t, tbl_s)), float(np.interp(t, tbl_t, tbl_l))


def evolve_kernel(h0diag, hidiag, off1, offk, koff, rowsum, gamma,
                  sched_kind, tau, s_min, tbl_t, tbl_s, tbl_l,
                  psi0, tol, order, t_snap, max_steps):
    """Adaptive exponential integrator for i dpsi/dt = H(t) psi.

    order=2 is the midpoint-exponential rule psi <- exp(-i dt H(t + dt/2)) psi;
    order=4 is the two-exponential commutator-free scheme on Gauss nodes.
    Steps are accepted by comparing one full step against two half steps,
    keeping the estimated local error below tol*dt.  The state is never
    renormalized.

    Returns (psi, snapshots, norm_drift, n_steps, n_rejected).
    """
    if order not in (2, 4):
        raise ValueError(f"order must be 2 or 4, got {order}")

    def ham(t):
        s, lam = _controls(sched_kind, s_min, tbl_t, tbl_s, tbl_l, tau, t)
        return s * h0diag + (1.0 - s) * (1.0 - lam) * hidiag, gamma * (1.0 - s) * lam

    def step(t, dt, v):
        if order == 2:
            dg, w = ham(t + 0.5 * dt)
            return expmv(dg, w, off1, offk, koff, rowsum, dt, v)
        dga, wa = ham(t + _C1 * dt)
        dgb, wb = ham(t + _C2 * dt)
        v1 = expmv(_A2 * dga + _A1 * dgb, _A2 * wa + _A1 * wb,
                   off1, offk, koff, rowsum, dt, v)
        return expmv(_A1 * dga + _A2 * dgb, _A1 * wa + _A2 * wb,
                     off1, offk, koff, rowsum, dt, v1)

    nsnap = len(t_snap)
    snaps = np.zeros((nsnap, len(psi0)), dtype=complex)
    psi = psi0.astype(complex, copy=True)
    t = 0.0
    isnap = 0
    dt = tau * 1e-3
    rich = 2.0 ** order - 1.0
    expo = 1.0 / (order + 1.0)
    n_steps = 0
    n_rej = 0
    drift = 0.0
    while t < tau * (1.0 - 1e-15):
        bound = t_snap[isnap] if isnap < nsnap else tau
        dt_eff = min(dt, bound - t, tau - t)
        if dt_eff < 1e-12 * tau:
            raise NumericalFailure(
                f"step size underflow at t={t:.6g} (dt={dt_eff:.3g}, tau={tau:.6g})")
        if n_steps + n_rej >= max_steps:
            raise NumericalFailure(f"step budget {max_steps} exhausted at t={t:.6g}")
        full = step(t, dt_eff, psi)
        half = step(t, 0.5 * dt_eff, psi)
        half = step(t + 0.5 * dt_eff, 0.5 * dt_eff, half)
        err = float(np.linalg.norm(full - half))
        budget = rich * tol * dt_eff
        if err <= budget:
            psi = half
            t += dt_eff
            n_steps += 1
            drift = max(drift, abs(float(np.linalg.norm(psi)) - 1.0))
            if drift > 1e-8:
                raise NumericalFailure(f"unitarity lost: norm drift {drift:.3g}")
            if isnap < nsnap and t >= t_snap[isnap] * (1.0 - 1e-15):
                snaps[isnap] = psi
                isnap += 1
        else:
            n_rej += 1
        grow = 0.9 * (budget / err) ** expo if err > 0.0 else 3.0
        dt = dt_eff * min(3.0, max(0.2, grow))
    while isnap < nsnap:  # snapshot exactly at tau
        snaps[isnap] = psi
        isnap += 1
    return psi, snaps, drift, n_steps, n_rej


def svmc_batch(eps, p, gamma, beta, s_arr, lam_arr, theta0, prop, acc, mode, width):
    """Metropolis sweeps of planar rotors, vectorized across independent runs.

    eps: +/-1 block signs per spin; prop/acc: uniform draws with shape
    (runs, sweeps, n); mode 0 proposes a fresh uniform angle in [0, pi],
    mode 1 a reflected perturbation of the current angle.  Returns the
    magnetization after each sweep, shape (runs, sweeps).
    """
    runs = prop.shape[0]
    sweeps = len(s_arr)
    n = len(theta0)
    theta = np.tile(np.asarray(theta0, dtype=float), (runs, 1))
    m_traj = np.empty((runs, sweeps))
    eps = np.asarray(eps, dtype=float)
    for k in range(sweeps):
        s = s_arr[k]
        lam = lam_arr[k]
        wi = (1.0 - s) * (1.0 - lam)
        wx = gamma * (1.0 - s) * lam
        # fresh sums each sweep so roundoff cannot accumulate over the anneal
        cz = np.sum(np.cos(theta), axis=1)
        sx = np.sum(np.sin(theta), axis=1)
        for i in range(n):
            if mode == 0:
                thp = np.pi * prop[:, k, i]
            else:
                thp = theta[:, i] + width * (2.0 * prop[:, k, i] - 1.0)
                thp = np.abs(thp)
                thp = np.where(thp > np.pi, 2.0 * np.pi - thp, thp)
            dcz = np.cos(thp) - np.cos(theta[:, i])
            dsx = np.sin(thp) - np.sin(theta[:, i])
            de = (-s * n * (((cz + dcz) / n) ** p - (cz / n) ** p)
                  - wi * eps[i] * dcz - wx * dsx)
            take = (de <= 0.0) | (acc[:, k, i] < np.exp(-beta * np.maximum(de, 0.0)))
            theta[take, i] = thp[take]
            cz = np.where(take, cz + dcz, cz)
            sx = np.where(take, sx + dsx, sx)
        m_traj[:, k] = cz / n
    return m_traj
