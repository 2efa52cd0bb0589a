# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: AMCS gradients, the QSL_cl objective and the classical integrator.

Same signatures and algorithms as ``_pykernels``.
"""
import numpy as np

from libc.math cimport sqrt, exp, log, cos, sin, atan2, hypot, pow, fabs
from libc.stdlib cimport malloc, free

cdef double[6][6] A_
cdef double[6] B_
cdef double[7] E_
cdef double[7][4] P_

A_[1][0] = 1.0 / 5
A_[2][0] = 3.0 / 40; A_[2][1] = 9.0 / 40
A_[3][0] = 44.0 / 45; A_[3][1] = -56.0 / 15; A_[3][2] = 32.0 / 9
A_[4][0] = 19372.0 / 6561; A_[4][1] = -25360.0 / 2187; A_[4][2] = 64448.0 / 6561
A_[4][3] = -212.0 / 729
A_[5][0] = 9017.0 / 3168; A_[5][1] = -355.0 / 33; A_[5][2] = 46732.0 / 5247
A_[5][3] = 49.0 / 176; A_[5][4] = -5103.0 / 18656
B_[:] = [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84]
E_[:] = [-71.0 / 57600, 0.0, 71.0 / 16695, -71.0 / 1920, 17253.0 / 339200, -22.0 / 525, 1.0 / 40]
P_[0][:] = [1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432]
P_[1][:] = [0.0, 0.0, 0.0, 0.0]
P_[2][:] = [0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799]
P_[3][:] = [0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072]
P_[4][:] = [0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632]
P_[5][:] = [0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844]
P_[6][:] = [0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423]

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = -1
STATUS_MAX_STEPS = -2


cdef struct Sector:
    int n
    const double complex* hmat
    const double* hdiag
    bint is_diag
    const double* hlb_n
    const double* hlb_nm1
    double complex* c
    double complex* v
    double complex* d


cdef inline double cabs(double complex z) noexcept nogil:
    return hypot(z.real, z.imag)


cdef void _amcs(int n, double complex ap, double complex am, const double* hlb,
                double complex* out) noexcept nogil:
    cdef double rp = cabs(ap), rm = cabs(am)
    cdef double thp = atan2(ap.imag, ap.real), thm = atan2(am.imag, am.real)
    cdef double lp, lm, mag, ph
    cdef int k
    if rp == 0.0 or rm == 0.0:
        for k in range(n + 1):
            out[k] = 0.0
        if rp == 0.0:
            mag = pow(rm, n); ph = n * thm; k = 0
        else:
            mag = pow(rp, n); ph = n * thp; k = n
        out[k] = mag * cos(ph) + 1j * (mag * sin(ph))
        return
    lp = log(rp)
    lm = log(rm)
    for k in range(n + 1):
        mag = exp(hlb[k] + k * lp + (n - k) * lm)
        ph = k * thp + (n - k) * thm
        out[k] = mag * cos(ph) + 1j * (mag * sin(ph))


cdef void _grad(Sector* s, double complex ap, double complex am,
                double complex* gp, double complex* gm) noexcept nogil:
    cdef int n = s.n, k, q
    cdef double complex acc, gpl = 0.0, gmi = 0.0
    _amcs(n, ap, am, s.hlb_n, s.c)
    if s.is_diag:
        for k in range(n + 1):
            s.v[k] = s.hdiag[k] * s.c[k]
    else:
        for k in range(n + 1):
            acc = 0.0
            for q in range(n + 1):
                acc = acc + s.hmat[k * (n + 1) + q] * s.c[q]
            s.v[k] = acc
    _amcs(n - 1, ap, am, s.hlb_nm1, s.d)
    for k in range(1, n + 1):
        gpl = gpl + s.d[k - 1].conjugate() * sqrt(<double>n * k) * s.v[k]
    for k in range(n):
        gmi = gmi + s.d[k].conjugate() * sqrt(<double>n * (n - k)) * s.v[k]
    gp[0] = gpl
    gm[0] = gmi


cdef void _rhs(Sector* s, double complex ap, double complex am,
               double complex* dp, double complex* dm) noexcept nogil:
    cdef double complex gp, gm
    cdef double nm1 = s.n - 1.0
    cdef double complex pre = -1j / (<double>s.n * s.n)
    cdef double ap2 = ap.real * ap.real + ap.imag * ap.imag
    cdef double am2 = am.real * am.real + am.imag * am.imag
    _grad(s, ap, am, &gp, &gm)
    dp[0] = pre * ((1.0 + nm1 * am2) * gp - nm1 * am.conjugate() * ap * gm)
    dm[0] = pre * (-nm1 * ap.conjugate() * am * gp + (1.0 + nm1 * ap2) * gm)


cdef class _SectorHolder:
    """Owns scratch buffers and keeps the operator arrays alive."""
    cdef Sector s
    cdef object refs

    def __cinit__(self, int n, hmat, hdiag, bint is_diag, hlb_n, hlb_nm1):
        cdef const double complex[:, ::1] hm = np.ascontiguousarray(hmat, dtype=np.complex128)
        cdef const double[::1] hd = np.ascontiguousarray(hdiag, dtype=np.float64)
        cdef const double[::1] l1 = np.ascontiguousarray(hlb_n, dtype=np.float64)
        hlb_nm1 = np.ascontiguousarray(hlb_nm1, dtype=np.float64)
        if hlb_nm1.shape[0] == 0:
            hlb_nm1 = np.zeros(1)
        cdef const double[::1] l0 = hlb_nm1
        self.refs = (hm, hd, l1, l0)
        self.s.n = n
        self.s.hmat = &hm[0, 0]
        self.s.hdiag = &hd[0]
        self.s.is_diag = is_diag
        self.s.hlb_n = &l1[0]
        self.s.hlb_nm1 = &l0[0]
        self.s.c = <double complex*> malloc((n + 1) * sizeof(double complex))
        self.s.v = <double complex*> malloc((n + 1) * sizeof(double complex))
        self.s.d = <double complex*> malloc((n + 1) * sizeof(double complex))
        if self.s.c == NULL or self.s.v == NULL or self.s.d == NULL:
            raise MemoryError()

    def __dealloc__(self):
        free(self.s.c)
        free(self.s.v)
        free(self.s.d)


def grad_batch(int n, hmat, hdiag, bint is_diag, hlb_n, hlb_nm1, ap, am):
    cdef _SectorHolder h = _SectorHolder(n, hmat, hdiag, is_diag, hlb_n, hlb_nm1)
    ap_arr = np.asarray(ap, dtype=np.complex128)
    am_arr = np.asarray(am, dtype=np.complex128)
    shape = np.broadcast_shapes(ap_arr.shape, am_arr.shape)
    cdef const double complex[::1] a1 = np.ascontiguousarray(np.broadcast_to(ap_arr, shape)).reshape(-1)
    cdef const double complex[::1] a2 = np.ascontiguousarray(np.broadcast_to(am_arr, shape)).reshape(-1)
    gp_out = np.empty(a1.shape[0], dtype=np.complex128)
    gm_out = np.empty(a1.shape[0], dtype=np.complex128)
    cdef double complex[::1] g1 = gp_out, g2 = gm_out
    cdef Py_ssize_t i
    with nogil:
        for i in range(a1.shape[0]):
            _grad(&h.s, a1[i], a2[i], &g1[i], &g2[i])
    if shape == ():
        return complex(gp_out[0]), complex(gm_out[0])
    return gp_out.reshape(shape), gm_out.reshape(shape)


def classical_rhs(int n, hmat, hdiag, bint is_diag, hlb_n, hlb_nm1, double complex ap, double complex am):
    cdef _SectorHolder h = _SectorHolder(n, hmat, hdiag, is_diag, hlb_n, hlb_nm1)
    cdef double complex dp, dm
    _rhs(&h.s, ap, am, &dp, &dm)
    return dp, dm


def objective_grid(int n, hmat, hdiag, bint is_diag, hlb_n, hlb_nm1, p, phi):
    """``(2/sqrt N) |alpha- g+ - alpha+ g-|`` on the gauge-fixed (p, phi) grid."""
    cdef _SectorHolder h = _SectorHolder(n, hmat, hdiag, is_diag, hlb_n, hlb_nm1)
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[::1] fv = np.ascontiguousarray(phi, dtype=np.float64)
    out = np.empty((pv.shape[0], fv.shape[0]))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef double complex ap, am, gp, gm
    cdef double pref = 2.0 / sqrt(<double>n), rm
    with nogil:
        for i in range(pv.shape[0]):
            ap = sqrt(pv[i])
            rm = sqrt(1.0 - pv[i])
            for j in range(fv.shape[0]):
                am = rm * cos(fv[j]) + 1j * (rm * sin(fv[j]))
                _grad(&h.s, ap, am, &gp, &gm)
                o[i, j] = pref * cabs(am * gp - ap * gm)
    return out


def objective_point(int n, hmat, hdiag, bint is_diag, hlb_n, hlb_nm1, double p, double phi):
    cdef _SectorHolder h = _SectorHolder(n, hmat, hdiag, is_diag, hlb_n, hlb_nm1)
    cdef double complex ap = sqrt(p), gp, gm
    cdef double rm = sqrt(1.0 - p)
    cdef double complex am = rm * cos(phi) + 1j * (rm * sin(phi))
    _grad(&h.s, ap, am, &gp, &gm)
    return 2.0 / sqrt(<double>n) * cabs(am * gp - ap * gm)


cdef inline double _rms2(double complex e0, double complex e1, double s0, double s1) noexcept nogil:
    cdef double a = cabs(e0) / s0, b = cabs(e1) / s1
    return sqrt(0.5 * (a * a + b * b))


def integrate_classical(int n, hmat, hdiag, bint is_diag, hlb_n, hlb_nm1,
                        double complex ap0, double complex am0, times,
                        double rtol, double atol, bint renormalize, long max_steps):
    """Adaptive Dormand-Prince integration of the restricted equations of motion.

    Returns ``(alphas, n_steps, n_fev, status)``.
    """
    cdef _SectorHolder h = _SectorHolder(n, hmat, hdiag, is_diag, hlb_n, hlb_nm1)
    cdef const double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef Py_ssize_t ns = tv.shape[0]
    out = np.empty((ns, 2), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef double complex y0 = ap0, y1 = am0, f0, f1, z0, z1, g0, g1, n0, n1, fn0, fn1
    cdef double complex K0[7]
    cdef double complex K1[7]
    cdef double complex q0[4]
    cdef double complex q1[4]
    cdef double t = 0.0, t_end, t_new, hh, hs, h_next, err, factor, s0, s1, d0, d1, d2, h0, h1, x, xp, nrm
    cdef long nsteps = 0, nfev = 0
    cdef Py_ssize_t j = 1
    cdef int st, q, m
    cdef bint rejected
    cdef int status = 0

    o[0, 0] = y0
    o[0, 1] = y1
    t_end = tv[ns - 1]
    if ns == 1 or t_end <= 0.0:
        for j in range(ns):
            o[j, 0] = y0
            o[j, 1] = y1
        return out, 0, 0, STATUS_OK

    with nogil:
        _rhs(&h.s, y0, y1, &f0, &f1)
        nfev = 1
        s0 = atol + rtol * cabs(y0)
        s1 = atol + rtol * cabs(y1)
        d0 = _rms2(y0, y1, s0, s1)
        d1 = _rms2(f0, f1, s0, s1)
        if d0 < 1e-5 or d1 < 1e-5:
            h0 = 1e-6
        else:
            h0 = 0.01 * d0 / d1
        if h0 > t_end:
            h0 = t_end
        _rhs(&h.s, y0 + h0 * f0, y1 + h0 * f1, &z0, &z1)
        nfev += 1
        d2 = _rms2(z0 - f0, z1 - f1, s0, s1) / h0
        if d1 > d2:
            d2 = d1
        if d2 <= 1e-15:
            h1 = h0 * 1e-3
            if h1 < 1e-6:
                h1 = 1e-6
        else:
            h1 = pow(0.01 / d2, 0.2)
        hs = 100.0 * h0
        if h1 < hs:
            hs = h1
        if t_end < hs:
            hs = t_end

        while j < ns:
            if nsteps >= max_steps:
                status = -2
                break
            rejected = False
            while True:
                if hs < 1e-14 * (fabs(t) if fabs(t) > 1.0 else 1.0):
                    status = -1
                    break
                t_new = t + hs
                if t_new >= t_end or t_end - t_new < 1e-12 * t_end:
                    t_new = t_end
                hh = t_new - t
                K0[0] = f0
                K1[0] = f1
                for st in range(1, 6):
                    z0 = 0.0
                    z1 = 0.0
                    for q in range(st):
                        z0 = z0 + A_[st][q] * K0[q]
                        z1 = z1 + A_[st][q] * K1[q]
                    _rhs(&h.s, y0 + hh * z0, y1 + hh * z1, &K0[st], &K1[st])
                z0 = 0.0
                z1 = 0.0
                for st in range(6):
                    z0 = z0 + B_[st] * K0[st]
                    z1 = z1 + B_[st] * K1[st]
                n0 = y0 + hh * z0
                n1 = y1 + hh * z1
                _rhs(&h.s, n0, n1, &fn0, &fn1)
                K0[6] = fn0
                K1[6] = fn1
                nfev += 6
                s0 = atol + rtol * (cabs(y0) if cabs(y0) > cabs(n0) else cabs(n0))
                s1 = atol + rtol * (cabs(y1) if cabs(y1) > cabs(n1) else cabs(n1))
                z0 = 0.0
                z1 = 0.0
                for st in range(7):
                    z0 = z0 + E_[st] * K0[st]
                    z1 = z1 + E_[st] * K1[st]
                err = _rms2(hh * z0, hh * z1, s0, s1)
                if err < 1.0:
                    if err == 0.0:
                        factor = MAX_FACTOR
                    else:
                        factor = SAFETY * pow(err, -0.2)
                        if factor > MAX_FACTOR:
                            factor = MAX_FACTOR
                    if rejected and factor > 1.0:
                        factor = 1.0
                    h_next = hh * factor
                    break
                factor = SAFETY * pow(err, -0.2)
                if factor < MIN_FACTOR:
                    factor = MIN_FACTOR
                hs = hh * factor
                rejected = True
            if status != 0:
                break

            for m in range(4):
                q0[m] = 0.0
                q1[m] = 0.0
                for st in range(7):
                    q0[m] = q0[m] + K0[st] * P_[st][m]
                    q1[m] = q1[m] + K1[st] * P_[st][m]
            while j < ns and tv[j] <= t_new:
                x = (tv[j] - t) / hh
                z0 = 0.0
                z1 = 0.0
                xp = x
                for m in range(4):
                    z0 = z0 + q0[m] * xp
                    z1 = z1 + q1[m] * xp
                    xp = xp * x
                o[j, 0] = y0 + hh * z0
                o[j, 1] = y1 + hh * z1
                j += 1
            nsteps += 1
            if renormalize:
                nrm = sqrt(n0.real * n0.real + n0.imag * n0.imag + n1.real * n1.real + n1.imag * n1.imag)
                n0 = n0 / nrm
                n1 = n1 / nrm
            t = t_new
            y0 = n0
            y1 = n1
            f0 = fn0
            f1 = fn1
            hs = h_next
    return out, nsteps, nfev, status
