# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: adaptive exponential integrator and SVMC sweeps.

Algorithmically identical to ``revanneal._purepy``; see that module for the
documented reference implementation.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport M_PI, cos, exp, fabs, sin, sqrt
from libc.stdlib cimport free, malloc

from .errors import NumericalFailure

cnp.import_array()

BACKEND_NAME = "compiled"

cdef double COEFF_CUTOFF = 1e-16

# CF4 (commutator-free fourth-order) nodes and weights
cdef double C1 = 0.5 - sqrt(3.0) / 6.0
cdef double C2 = 0.5 + sqrt(3.0) / 6.0
cdef double A1 = (3.0 - 2.0 * sqrt(3.0)) / 12.0
cdef double A2 = (3.0 + 2.0 * sqrt(3.0)) / 12.0


# ---------------------------------------------------------------------------
# Bessel coefficients J_0..J_m_max by Miller's downward recurrence
# ---------------------------------------------------------------------------
cdef void _rescale_tail(double* out, int lo, int hi) noexcept:
    cdef int i
    for i in range(lo, hi + 1):
        out[i] *= 1e-250


cdef void _bessel_fill(double z, int m_max, double* out) noexcept:
    cdef int start, k
    cdef double jp, jc, jn, norm
    if z < 1e-12:
        out[0] = 1.0
        for k in range(1, m_max + 1):
            out[k] = 0.0
        return
    start = m_max + 14 + <int>(2.0 * sqrt(<double>m_max))
    jp = 0.0
    jc = 1e-300
    for k in range(start, -1, -1):
        jn = (2.0 * (k + 1) / z) * jc - jp
        jp = jc
        jc = jn
        if fabs(jc) > 1e250:
            jc *= 1e-250
            jp *= 1e-250
            if k + 1 <= m_max:
                _rescale_tail(out, k + 1, m_max)
        if k <= m_max:
            out[k] = jc
    norm = out[0]
    for k in range(2, m_max + 1, 2):
        norm += 2.0 * out[k]
    for k in range(m_max + 1):
        out[k] /= norm


def bessel_coeffs(double z):
    """J_k(z) for k = 0..M with the same truncation rule as the fallback."""
    cdef int m_max = <int>z + 40 + <int>(6.0 * sqrt(z))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m_max + 1)
    _bessel_fill(z, m_max, <double*>out.data)
    cdef int m = 0, k
    for k in range(m_max + 1):
        if fabs(out[k]) > COEFF_CUTOFF:
            m = k
    m = min(m + 3, m_max)
    return out[: m + 1].copy()


# ---------------------------------------------------------------------------
# Scratch workspace for one evolution
# ---------------------------------------------------------------------------
cdef class _Work:
    cdef double complex* c[8]
    cdef double* r[5]
    cdef double* cf
    cdef int cf_cap
    cdef int d

    def __cinit__(self, int d):
        cdef int i
        self.d = d
        for i in range(8):
            self.c[i] = <double complex*>malloc(d * sizeof(double complex))
        for i in range(5):
            self.r[i] = <double*>malloc(d * sizeof(double))
        self.cf_cap = 256
        self.cf = <double*>malloc(self.cf_cap * sizeof(double))

    cdef double* coeffs(self, int m_max) noexcept:
        if m_max + 1 > self.cf_cap:
            free(self.cf)
            self.cf_cap = 2 * (m_max + 1)
            self.cf = <double*>malloc(self.cf_cap * sizeof(double))
        return self.cf

    def __dealloc__(self):
        cdef int i
        for i in range(8):
            if self.c[i] != NULL:
                free(self.c[i])
        for i in range(5):
            if self.r[i] != NULL:
                free(self.r[i])
        if self.cf != NULL:
            free(self.cf)


# ---------------------------------------------------------------------------
# Banded matvec and Chebyshev exponential
# ---------------------------------------------------------------------------
cdef void _matvec(double* dg, double w, double* off1, double* offk, int koff,
                  int d, double complex* x, double complex* out) noexcept:
    # separate passes per band keep every loop free of carried dependencies,
    # so the compiler can vectorize them
    cdef int i
    for i in range(d):
        out[i] = dg[i] * x[i]
    if w != 0.0:
        for i in range(d - 1):
            out[i] = out[i] + (w * off1[i]) * x[i + 1]
        for i in range(1, d):
            out[i] = out[i] + (w * off1[i - 1]) * x[i - 1]
        for i in range(d - koff):
            out[i] = out[i] + (w * offk[i]) * x[i + koff]
        for i in range(koff, d):
            out[i] = out[i] + (w * offk[i - koff]) * x[i - koff]


cdef void _cheb_term(double* dg, double w, double* a, double* b, int koff,
                     int d, double complex* t1, double complex* t2,
                     double complex* out, double complex coef) noexcept:
    """t2 <- 2*(diag(dg) + w V) t1 - t2 (the Chebyshev recurrence), fused
    with out += coef * t2.  One pass over memory; the interior loop is
    branch-free so the compiler can vectorize it."""
    cdef int i, lo, hi
    cdef double complex acc
    lo = koff if koff < d else d
    hi = d - koff
    if hi < lo:
        hi = lo
    for i in range(lo):
        acc = dg[i] * t1[i]
        if w != 0.0:
            if i + 1 < d:
                acc = acc + (w * a[i]) * t1[i + 1]
            if i >= 1:
                acc = acc + (w * a[i - 1]) * t1[i - 1]
            if i + koff < d:
                acc = acc + (w * b[i]) * t1[i + koff]

        t2[i] = 2.0 * acc - t2[i]
        out[i] = out[i] + coef * t2[i]
    for i in range(lo, hi):
        acc = (dg[i] * t1[i]
               + (w * a[i]) * t1[i + 1] + (w * a[i - 1]) * t1[i - 1]
               + (w * b[i]) * t1[i + koff] + (w * b[i - koff]) * t1[i - koff])
        t2[i] = 2.0 * acc - t2[i]
        out[i] = out[i] + coef * t2[i]
    for i in range(hi, d):
        acc = dg[i] * t1[i]
        if w != 0.0:
            if i + 1 < d:
                acc = acc + (w * a[i]) * t1[i + 1]
            if i >= 1:
                acc = acc + (w * a[i - 1]) * t1[i - 1]
            if i >= koff:
                acc = acc + (w * b[i - koff]) * t1[i - koff]
        t2[i] = 2.0 * acc - t2[i]
        out[i] = out[i] + coef * t2[i]


cdef void _expmv(_Work wk, double* dg, double w, double* off1, double* offk,
                 int koff, double* rowsum, int d, double dt,
                 double complex* psi, double complex* out) noexcept:
    """out = exp(-i dt (diag(dg) + w V)) psi."""
    cdef double aw = fabs(w)
    cdef double hi = dg[0] + aw * rowsum[0]
    cdef double lo = dg[0] - aw * rowsum[0]
    cdef double v
    cdef int i, k, m, m_max
    for i in range(1, d):
        v = dg[i] + aw * rowsum[i]
        if v > hi:
            hi = v
        v = dg[i] - aw * rowsum[i]
        if v < lo:
            lo = v
    cdef double cen = 0.5 * (hi + lo)
    cdef double half = 0.5 * (hi - lo)
    cdef double complex phase = cos(dt * cen) - 1j * sin(dt * cen)
    if half < 1e-300:
        for i in range(d):
            out[i] = phase * psi[i]
        return
    cdef double z = dt * half
    m_max = <int>z + 40 + <int>(6.0 * sqrt(z))
    cdef double* cf = wk.coeffs(m_max)
    _bessel_fill(z, m_max, cf)
    m = 0
    for k in range(m_max + 1):
        if fabs(cf[k]) > COEFF_CUTOFF:
            m = k
    m = min(m + 3, m_max)

    cdef double* dgs = wk.r[4]
    cdef double ws = w / half
    for i in range(d):
        dgs[i] = (dg[i] - cen) / half
    cdef double complex* tm2 = wk.c[2]
    cdef double complex* tm1 = wk.c[3]
    cdef double complex* swp
    for i in range(d):
        tm2[i] = psi[i]
    _matvec(dgs, ws, off1, offk, koff, d, tm2, tm1)
    for i in range(d):
        out[i] = cf[0] * tm2[i] - 2j * cf[1] * tm1[i]
    cdef double complex ph = -1j
    cdef double complex coef
    for k in range(2, m + 1):
        ph = ph * (-1j)
        coef = 2.0 * ph * cf[k]
        # tm2 is overwritten with t_k, then the roles rotate
        _cheb_term(dgs, ws, off1, offk, koff, d, tm1, tm2, out, coef)
        swp = tm2
        tm2 = tm1
        tm1 = swp
    for i in range(d):
        out[i] = phase * out[i]


# ---------------------------------------------------------------------------
# Schedule evaluation and stepping
# ---------------------------------------------------------------------------
cdef void _controls(int kind, double s_min, double* tt, double* ts, double* tl,
                    int ntbl, double tau, double t, double* s, double* lam) noexcept:
    cdef double x, f
    cdef int j
    if kind == 1:  # IRA quadratic, lambda = 1
        x = 2.0 * t / tau - 1.0
        s[0] = s_min + (1.0 - s_min) * x * x
        lam[0] = 1.0
        return
    if t <= tt[0]:
        s[0] = ts[0]
        lam[0] = tl[0]
        return
    if t >= tt[ntbl - 1]:
        s[0] = ts[ntbl - 1]
        lam[0] = tl[ntbl - 1]
        return
    j = 1
    while tt[j] < t:
        j += 1
    f = (t - tt[j - 1]) / (tt[j] - tt[j - 1])
    s[0] = ts[j - 1] + f * (ts[j] - ts[j - 1])
    lam[0] = tl[j - 1] + f * (tl[j] - tl[j - 1])


cdef void _one_step(_Work wk, int order,
                    double* h0, double* hini, double* o1, double* ok,
                    int koff, double* rs, int d, double gamma,
                    int kind, double s_min, double* ptt, double* pts, double* ptl,
                    int ntbl, double tau, double t, double dt,
                    double complex* vin, double complex* vout) noexcept:
    cdef double s, lam, sa, la, sb, lb, wa, wb
    cdef double* dga = wk.r[0]
    cdef double* dgb = wk.r[1]
    cdef double* dgs = wk.r[2]
    cdef int i
    if order == 2:
        _controls(kind, s_min, ptt, pts, ptl, ntbl, tau, t + 0.5 * dt, &s, &lam)
        for i in range(d):
            dga[i] = s * h0[i] + (1.0 - s) * (1.0 - lam) * hini[i]
        _expmv(wk, dga, gamma * (1.0 - s) * lam, o1, ok, koff, rs, d, dt, vin, vout)
        return
    _controls(kind, s_min, ptt, pts, ptl, ntbl, tau, t + C1 * dt, &sa, &la)
    _controls(kind, s_min, ptt, pts, ptl, ntbl, tau, t + C2 * dt, &sb, &lb)
    wa = gamma * (1.0 - sa) * la
    wb = gamma * (1.0 - sb) * lb
    for i in range(d):
        dga[i] = sa * h0[i] + (1.0 - sa) * (1.0 - la) * hini[i]
        dgb[i] = sb * h0[i] + (1.0 - sb) * (1.0 - lb) * hini[i]
    for i in range(d):
        dgs[i] = A2 * dga[i] + A1 * dgb[i]
    _expmv(wk, dgs, A2 * wa + A1 * wb, o1, ok, koff, rs, d, dt, vin, wk.c[6])
    for i in range(d):
        dgs[i] = A1 * dga[i] + A2 * dgb[i]
    _expmv(wk, dgs, A1 * wa + A2 * wb, o1, ok, koff, rs, d, dt, wk.c[6], vout)


def evolve_kernel(cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] h0diag,
                  cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] hidiag,
                  cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] off1,
                  cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] offk,
                  int koff,
                  cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] rowsum,
                  double gamma,
                  int sched_kind, double tau, double s_min,
                  cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] tbl_t,
                  cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] tbl_s,
                  cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] tbl_l,
                  cnp.ndarray[cnp.complex128_t, ndim=1, mode="c"] psi0,
                  double tol, int order,
                  cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] t_snap,
                  long max_steps):
    if order != 2 and order != 4:
        raise ValueError(f"order must be 2 or 4, got {order}")
    cdef int d = h0diag.shape[0]
    cdef int nsnap = t_snap.shape[0]
    cdef int ntbl = tbl_t.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] snaps = np.zeros((nsnap, d), dtype=complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] psi_arr = psi0.astype(complex)
    cdef _Work wk = _Work(d)
    cdef double complex* psi = <double complex*>psi_arr.data
    cdef double* h0 = <double*>h0diag.data
    cdef double* hini = <double*>hidiag.data
    cdef double* o1 = <double*>off1.data
    cdef double* ok = <double*>offk.data
    cdef double* rs = <double*>rowsum.data
    cdef double* ptt = <double*>tbl_t.data
    cdef double* pts = <double*>tbl_s.data
    cdef double* ptl = <double*>tbl_l.data

    cdef double t = 0.0, dt = tau * 1e-3, dt_eff, bound, err, budget, grow
    cdef double drift = 0.0, nrm, dre, dim_
    cdef double rich = (2.0 ** order) - 1.0
    cdef double expo = 1.0 / (order + 1.0)
    cdef long n_steps = 0, n_rej = 0
    cdef int isnap = 0, i

    while t < tau * (1.0 - 1e-15):
        bound = t_snap[isnap] if isnap < nsnap else tau
        dt_eff = dt
        if bound - t < dt_eff:
            dt_eff = bound - t
        if tau - t < dt_eff:
            dt_eff = tau - t
        if dt_eff < 1e-12 * tau:
            raise NumericalFailure(
                f"step size underflow at t={t:.6g} (dt={dt_eff:.3g}, tau={tau:.6g})")
        if n_steps + n_rej >= max_steps:
            raise NumericalFailure(f"step budget {max_steps} exhausted at t={t:.6g}")
        _one_step(wk, order, h0, hini, o1, ok, koff, rs, d, gamma,
                  sched_kind, s_min, ptt, pts, ptl, ntbl, tau,
                  t, dt_eff, psi, wk.c[0])
        _one_step(wk, order, h0, hini, o1, ok, koff, rs, d, gamma,
                  sched_kind, s_min, ptt, pts, ptl, ntbl, tau,
                  t, 0.5 * dt_eff, psi, wk.c[5])
        _one_step(wk, order, h0, hini, o1, ok, koff, rs, d, gamma,
                  sched_kind, s_min, ptt, pts, ptl, ntbl, tau,
                  t + 0.5 * dt_eff, 0.5 * dt_eff, wk.c[5], wk.c[1])
        err = 0.0
        for i in range(d):
            dre = wk.c[0][i].real - wk.c[1][i].real
            dim_ = wk.c[0][i].imag - wk.c[1][i].imag
            err += dre * dre + dim_ * dim_
        err = sqrt(err)
        budget = rich * tol * dt_eff
        if err <= budget:
            nrm = 0.0
            for i in range(d):
                psi[i] = wk.c[1][i]
                nrm += psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
            nrm = fabs(sqrt(nrm) - 1.0)
            if nrm > drift:
                drift = nrm
            if drift > 1e-8:
                raise NumericalFailure(f"unitarity lost: norm drift {drift:.3g}")
            t += dt_eff
            n_steps += 1
            if isnap < nsnap and t >= t_snap[isnap] * (1.0 - 1e-15):
                for i in range(d):
                    snaps[isnap, i] = psi[i]
                isnap += 1
        else:
            n_rej += 1
        grow = 0.9 * (budget / err) ** expo if err > 0.0 else 3.0
        if grow > 3.0:
            grow = 3.0
        if grow < 0.2:
            grow = 0.2
        dt = dt_eff * grow
    while isnap < nsnap:
        for i in range(d):
            snaps[isnap, i] = psi[i]
        isnap += 1
    return psi_arr, snaps, drift, n_steps, n_rej


# ---------------------------------------------------------------------------
# SVMC
# ---------------------------------------------------------------------------
def svmc_batch(cnp.ndarray[cnp.int8_t, ndim=1] eps, int p, double gamma,
               double beta,
               cnp.ndarray[cnp.float64_t, ndim=1] s_arr,
               cnp.ndarray[cnp.float64_t, ndim=1] lam_arr,
               cnp.ndarray[cnp.float64_t, ndim=1] theta0,
               cnp.ndarray[cnp.float64_t, ndim=3] prop,
               cnp.ndarray[cnp.float64_t, ndim=3] acc,
               int mode, double width):
    cdef int runs = prop.shape[0]
    cdef int sweeps = s_arr.shape[0]
    cdef int n = theta0.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] m_traj = np.empty((runs, sweeps))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] theta = np.empty(n)
    cdef int r, k, i
    cdef double s, lam, wi, wx, cz, sx, thp, dcz, dsx, de, x0, x1
    for r in range(runs):
        for i in range(n):
            theta[i] = theta0[i]
        for k in range(sweeps):
            s = s_arr[k]
            lam = lam_arr[k]
            wi = (1.0 - s) * (1.0 - lam)
            wx = gamma * (1.0 - s) * lam
            cz = 0.0
            sx = 0.0
            for i in range(n):
                cz += cos(theta[i])
                sx += sin(theta[i])
            for i in range(n):
                if mode == 0:
                    thp = M_PI * prop[r, k, i]
                else:
                    thp = theta[i] + width * (2.0 * prop[r, k, i] - 1.0)
                    thp = fabs(thp)
                    if thp > M_PI:
                        thp = 2.0 * M_PI - thp
                dcz = cos(thp) - cos(theta[i])
                dsx = sin(thp) - sin(theta[i])
                x0 = cz / n
                x1 = (cz + dcz) / n
                de = (-s * n * (_ipow(x1, p) - _ipow(x0, p))
                      - wi * eps[i] * dcz - wx * dsx)
                if de <= 0.0 or acc[r, k, i] < exp(-beta * de):
                    theta[i] = thp
                    cz += dcz
                    sx += dsx
            m_traj[r, k] = cz / n
    return m_traj


cdef inline double _ipow(double x, int p) noexcept:
    cdef double out = 1.0
    cdef int i
    for i in range(p):
        out *= x
    return out
