"""Pure-Python/NumPy implementations of the hot kernels.

Mirrors ``_ckernels.pyx`` function for function; selected automatically when
the compiled extension is unavailable or ``STOKES_QSL_PURE_PYTHON=1``.
"""
import math

import numpy as np

# Dormand-Prince 5(4) tableau with Shampine's quartic dense output.
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = -1
STATUS_MAX_STEPS = -2


def _log_terms(n, ap, am, hlb):
    k = np.arange(n + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = np.log(np.abs(ap))
        lm = np.log(np.abs(am))
        tp = np.where(k == 0, 0.0, np.multiply.outer(lp, k))
        tm = np.where(k == n, 0.0, np.multiply.outer(lm, n - k))
    phase = np.multiply.outer(np.angle(ap), k) + np.multiply.outer(np.angle(am), n - k)
    return np.exp(hlb + tp + tm) * np.exp(1j * phase)


def amcs_batch(n, ap, am, hlb):
    """Raw AMCS amplitudes for arrays of parameters, shape ``(..., n + 1)``."""
    return _log_terms(n, np.asarray(ap, dtype=complex), np.asarray(am, dtype=complex), hlb)


def _apply_h(n, hmat, hdiag, is_diag, c):
    if is_diag:
        return hdiag * c
    return c @ hmat.T


def grad_batch(n, hmat, hdiag, is_diag, hlb_n, hlb_nm1, ap, am):
    c = amcs_batch(n, ap, am, hlb_n)
    v = _apply_h(n, hmat, hdiag, is_diag, c)
    d = np.conj(amcs_batch(n - 1, ap, am, hlb_nm1))
    k = np.arange(n + 1)
    wp = np.sqrt(n * k[1:])
    wm = np.sqrt(n * (n - k[:-1]))
    gp = np.sum(d * wp * v[..., 1:], axis=-1)
    gm = np.sum(d * wm * v[..., :-1], axis=-1)
    return gp, gm


def classical_rhs(n, hmat, hdiag, is_diag, hlb_n, hlb_nm1, ap, am):
    gp, gm = grad_batch(n, hmat, hdiag, is_diag, hlb_n, hlb_nm1, ap, am)
    gp, gm = complex(gp), complex(gm)
    ap, am = complex(ap), complex(am)
    nm1 = n - 1.0
    pre = -1j / (n * n)
    dp = pre * ((1.0 + nm1 * abs(am) ** 2) * gp - nm1 * am.conjugate() * ap * gm)
    dm = pre * (-nm1 * ap.conjugate() * am * gp + (1.0 + nm1 * abs(ap) ** 2) * gm)
    return dp, dm


def objective_grid(n, hmat, hdiag, is_diag, hlb_n, hlb_nm1, p, phi):
    """``(2/sqrt N) |alpha- g+ - alpha+ g-|`` on the gauge-fixed (p, phi) grid."""
    p = np.asarray(p, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ap = np.broadcast_to(np.sqrt(p)[:, None], (p.size, phi.size)).astype(complex)
    am = np.sqrt(1.0 - p)[:, None] * np.exp(1j * phi)[None, :]
    out = np.empty((p.size, phi.size))
    rows = max(1, 4096 // max(phi.size, 1))
    for i0 in range(0, p.size, rows):
        sl = slice(i0, i0 + rows)
        gp, gm = grad_batch(n, hmat, hdiag, is_diag, hlb_n, hlb_nm1, ap[sl], am[sl])
        out[sl] = 2.0 / math.sqrt(n) * np.abs(am[sl] * gp - ap[sl] * gm)
    return out


def objective_point(n, hmat, hdiag, is_diag, hlb_n, hlb_nm1, p, phi):
    ap = complex(math.sqrt(p))
    am = math.sqrt(1.0 - p) * complex(math.cos(phi), math.sin(phi))
    gp, gm = grad_batch(n, hmat, hdiag, is_diag, hlb_n, hlb_nm1, ap, am)
    return 2.0 / math.sqrt(n) * abs(am * complex(gp) - ap * complex(gm))


def _rms(err, scale):
    return math.sqrt(0.5 * ((abs(err[0]) / scale[0]) ** 2 + (abs(err[1]) / scale[1]) ** 2))


def integrate_classical(n, hmat, hdiag, is_diag, hlb_n, hlb_nm1, ap0, am0, times,
                        rtol, atol, renormalize, max_steps):
    """Adaptive Dormand-Prince integration of the restricted equations of motion.

    Returns ``(alphas, n_steps, n_fev, status)``; ``alphas[j]`` is the dense
    output at ``times[j]``. ``times`` must start at 0 and be increasing.
    """
    times = np.asarray(times, dtype=float)
    ns = times.shape[0]
    out = np.empty((ns, 2), dtype=complex)

    def f(y):
        return np.array(classical_rhs(n, hmat, hdiag, is_diag, hlb_n, hlb_nm1, y[0], y[1]))

    y = np.array([ap0, am0], dtype=complex)
    out[0] = y
    t_end = times[-1]
    if ns == 1 or t_end <= 0.0:
        out[:] = y
        return out, 0, 0, STATUS_OK

    fy = f(y)
    nfev = 1
    scale = atol + rtol * np.abs(y)
    d0 = _rms(y, scale)
    d1 = _rms(fy, scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t_end)
    f1 = f(y + h0 * fy)
    nfev += 1
    d2 = _rms(f1 - fy, scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    h = min(100.0 * h0, h1, t_end)

    t = 0.0
    j = 1
    nsteps = 0
    K = np.empty((7, 2), dtype=complex)
    while j < ns:
        if nsteps >= max_steps:
            return out, nsteps, nfev, STATUS_MAX_STEPS
        rejected = False
        while True:
            if h < 1e-14 * max(1.0, abs(t)):
                return out, nsteps, nfev, STATUS_STEP_UNDERFLOW
            t_new = t + h
            if t_new >= t_end or t_end - t_new < 1e-12 * t_end:
                t_new = t_end
            hh = t_new - t
            K[0] = fy
            for s in range(1, 6):
                dy = np.zeros(2, dtype=complex)
                for q in range(s):
                    dy += A[s][q] * K[q]
                K[s] = f(y + hh * dy)
            y_new = y + hh * (B @ K[:6])
            f_new = f(y_new)
            K[6] = f_new
            nfev += 6
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = _rms(hh * (E @ K), scale)
            if err < 1.0:
                factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * err ** -0.2)
                if rejected:
                    factor = min(1.0, factor)
                h_next = hh * factor
                break
            h = hh * max(MIN_FACTOR, SAFETY * err ** -0.2)
            rejected = True

        Q = K.T @ P
        while j < ns and times[j] <= t_new:
            x = (times[j] - t) / hh
            out[j] = y + hh * (Q @ np.array([x, x * x, x ** 3, x ** 4]))
            j += 1
        nsteps += 1
        if renormalize:
            nrm = math.sqrt(abs(y_new[0]) ** 2 + abs(y_new[1]) ** 2)
            y_new = y_new / nrm
        t, y, fy, h = t_new, y_new, f_new, h_next
    return out, nsteps, nfev, STATUS_OK
