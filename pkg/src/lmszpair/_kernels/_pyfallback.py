"""NumPy reference implementations of the hot kernels.

Selected at import time by :mod:`lmszpair._kernels` when the compiled
extension is unavailable (or when ``LMSZPAIR_FORCE_PYTHON`` is set).  The
Cython core in ``_core.pyx`` mirrors these functions operation-for-operation;
``tests/test_kernels.py`` asserts the two backends agree.

Three kernels live here:

``propagate_linear_tdse``
    Adaptive Dormand-Prince 5(4) propagation of i dy/dt = H(t) y for the
    2x2 sector blocks and the full 4x4 problem, with PI step control and
    4th-order dense output onto a caller-supplied grid.

``noisy_block_final``
    Fixed-step piecewise-constant propagation of a sector block for a chunk
    of noise realizations (exact 2x2 exponential per step).

``kummer_m_dd``
    Kummer confluent hypergeometric series M(a, b, x) accumulated in
    double-double arithmetic, the cancellation-proof core of the parabolic
    cylinder evaluation at moderate |x|.
"""

from __future__ import annotations

import math

import numpy as np

# field protocol kinds shared with the compiled core
FIELD_RAMP_SPIN1 = 0
FIELD_RAMP_SPIN2 = 1
FIELD_RAMP_HOMOG = 2
FIELD_CONSTANT = 3
FIELD_OSCILLATING = 4
FIELD_TABULATED = 5

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2

_MAX_STEPS = 20_000_000

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
])
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# b5 - b4 (error estimator weights, incl. the FSAL stage)
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# dense-output polynomial (Shampine's interpolant for DOPRI5)
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_SCALE = 0.2
_MAX_SCALE = 10.0
_BETA = 0.04
_EXPO1 = 0.2 - 0.75 * _BETA  # PI controller exponent


def _eval_fields(kind, fp, ftimes, fw1, fw2, t):
    """Return (w1, w2) for the protocol encoding used by the kernels."""
    if kind == FIELD_RAMP_SPIN1:
        return 0.5 * fp[0] * t, 0.0
    if kind == FIELD_RAMP_SPIN2:
        return 0.0, 0.5 * fp[0] * t
    if kind == FIELD_RAMP_HOMOG:
        w = 0.25 * fp[0] * t
        return w, w
    if kind == FIELD_CONSTANT:
        return fp[0], fp[1]
    if kind == FIELD_OSCILLATING:
        return fp[0] * math.cos(fp[1] * t), 0.0
    if kind == FIELD_TABULATED:
        return (
            float(np.interp(t, ftimes, fw1)),
            float(np.interp(t, ftimes, fw2)),
        )
    raise ValueError(f"unknown field kind {kind}")


def _rhs(kind, fp, ftimes, fw1, fw2, dim, hp, t, y):
    """dy/dt = -i H(t) y for the block (dim 2) or full (dim 4) problem."""
    w1, w2 = _eval_fields(kind, fp, ftimes, fw1, fw2, t)
    if dim == 2:
        sign, g, xi_up, xi_dn = hp[0], hp[1], hp[2], hp[3]
        w = w1 + sign * w2
        h00 = w - 0.5j * xi_up
        h11 = -w - 0.5j * xi_dn
        return np.array([
            -1j * (h00 * y[0] + g * y[1]),
            -1j * (g * y[0] + h11 * y[1]),
        ])
    gx, gy, gz, xi1, xi2 = hp[0], hp[1], hp[2], hp[3], hp[4]
    gp, gm = gx - gy, gx + gy
    d0 = w1 + w2 + gz - 0.5j * (xi1 + xi2)
    d1 = w1 - w2 - gz - 0.5j * xi1
    d2 = -w1 + w2 - gz - 0.5j * xi2
    d3 = -w1 - w2 + gz
    return np.array([
        -1j * (d0 * y[0] + gp * y[3]),
        -1j * (d1 * y[1] + gm * y[2]),
        -1j * (gm * y[1] + d2 * y[2]),
        -1j * (gp * y[0] + d3 * y[3]),
    ])


def _error_norm(err_vec, y0, y1, rtol, atol):
    sc = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return math.sqrt(float(np.mean((np.abs(err_vec) / sc) ** 2)))


def propagate_linear_tdse(kind, fp, ftimes, fw1, fw2, dim, hp, y0, grid, rtol, atol):
    """Adaptive propagation with dense output on ``grid``.

    Returns ``(status, last_t, out)`` where ``out`` has shape
    ``(len(grid), dim)`` and rows past the failure point are zero when
    ``status != STATUS_OK``.
    """
    fp = np.asarray(fp, dtype=float)
    hp = np.asarray(hp, dtype=float)
    grid = np.asarray(grid, dtype=float)
    y = np.array(y0, dtype=complex)
    n_out = len(grid)
    out = np.zeros((n_out, dim), dtype=complex)
    out[0] = y
    t = grid[0]
    t_end = grid[-1]
    if n_out == 1:
        return STATUS_OK, t, out

    def f(tt, yy):
        return _rhs(kind, fp, ftimes, fw1, fw2, dim, hp, tt, yy)

    # Hairer-style initial step selection
    f0 = f(t, y)
    sc = atol + rtol * np.abs(y)
    d0 = math.sqrt(float(np.mean((np.abs(y) / sc) ** 2)))
    d1 = math.sqrt(float(np.mean((np.abs(f0) / sc) ** 2)))
    h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h = min(h, t_end - t)
    y1 = y + h * f0
    f1 = f(t + h, y1)
    d2 = math.sqrt(float(np.mean((np.abs(f1 - f0) / sc) ** 2))) / h
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    h = min(100 * h, h1, t_end - t)

    k = np.zeros((7, dim), dtype=complex)
    k[0] = f0
    facold = 1e-4
    rejected = False
    j_out = 1
    eps = np.finfo(float).eps
    for _ in range(_MAX_STEPS):
        # rounding can leave a sub-ulp remainder before t_end; treat as done
        if t_end - t <= 4.0 * eps * max(abs(t_end), 1.0):
            break
        h = min(h, t_end - t)
        if h < 4.0 * eps * max(abs(t), 1.0):
            return STATUS_STEP_UNDERFLOW, t, out

        for i in range(1, 6):
            yi = y + h * (k[:i].T @ _A[i, :i])
            k[i] = f(t + _C[i] * h, yi)
        y_new = y + h * (k[:6].T @ _B)
        k[6] = f(t + h, y_new)
        err_vec = h * (k.T @ _E)
        err = _error_norm(err_vec, y, y_new, rtol, atol)

        if err <= 1.0:
            # dense output for grid points inside (t, t + h]
            t_new = t + h
            while j_out < n_out and grid[j_out] <= t_new + 1e-14 * max(abs(t_new), 1.0):
                theta = (grid[j_out] - t) / h
                if theta >= 1.0:
                    out[j_out] = y_new
                else:
                    q = np.array([theta, theta**2, theta**3, theta**4])
                    out[j_out] = y + h * (k.T @ (_P @ q))
                j_out += 1
            fac = _SAFETY * err ** (-_EXPO1) * facold**_BETA if err > 0 else _MAX_SCALE
            fac = min(_MAX_SCALE, max(_MIN_SCALE, fac))
            if rejected:
                fac = min(fac, 1.0)
            facold = max(err, 1e-4)
            rejected = False
            y = y_new
            t = t_new
            k[0] = k[6]  # FSAL
            h *= fac
        else:
            if math.isnan(err):  # NaN from an overflowed state: shrink hard
                h *= _MIN_SCALE
            else:
                h *= max(_MIN_SCALE, _SAFETY * err ** (-0.2))
            rejected = True
    else:
        return STATUS_MAX_STEPS, t, out
    return STATUS_OK, t, out


def noisy_block_final(w_det, c_eta, noise, gamma, dtau, u0):
    """Propagate a chunk of noisy block realizations with exact 2x2 steps.

    Parameters
    ----------
    w_det : (n_steps,) float array
        Deterministic diagonal field at each step midpoint.
    c_eta : float
        Coupling of the per-step noise value into the diagonal field.
    noise : (n_real, n_steps) float array
        Piecewise-constant noise samples.
    gamma : float
        Static off-diagonal coupling of the block.
    dtau : float
        Step size.
    u0 : (2,) complex
        Initial block state, shared by all realizations.

    Returns
    -------
    (n_real, 2) complex array of final states.
    """
    n_real, n_steps = noise.shape
    u1 = np.full(n_real, complex(u0[0]), dtype=complex)
    u2 = np.full(n_real, complex(u0[1]), dtype=complex)
    g = float(gamma)
    for kstep in range(n_steps):
        w = w_det[kstep] + c_eta * noise[:, kstep]
        e = np.sqrt(w * w + g * g)
        theta = e * dtau
        c = np.cos(theta)
        # sin(theta)/e, finite at e -> 0
        small = e < 1e-300
        s = np.where(small, dtau, np.sin(theta) / np.where(small, 1.0, e))
        v1 = (c - 1j * s * w) * u1 - 1j * s * g * u2
        v2 = -1j * s * g * u1 + (c + 1j * s * w) * u2
        u1, u2 = v1, v2
    return np.stack([u1, u2], axis=1)


# --------------------------------------------------------------------------
# double-double arithmetic (real) and the Kummer series
# --------------------------------------------------------------------------

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _two_prod(a, b):
    p = a * b
    aa = _SPLITTER * a
    a_hi = aa - (aa - a)
    a_lo = a - a_hi
    bb = _SPLITTER * b
    b_hi = bb - (bb - b)
    b_lo = b - b_hi
    err = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, err


def _dd_add(xh, xl, yh, yl):
    s, e = _two_sum(xh, yh)
    e += xl + yl
    return _quick_two_sum(s, e)


def _dd_mul_d(xh, xl, d):
    p, e = _two_prod(xh, d)
    e += xl * d
    return _quick_two_sum(p, e)


def _dd_div_d(xh, xl, d):
    q1 = xh / d
    p, e = _two_prod(q1, d)
    q2 = ((xh - p) - e + xl) / d
    return _quick_two_sum(q1, q2)


def kummer_m_dd(a: complex, b_real: float, x: complex, max_terms: int = 400, tol: float = 1e-35):
    """M(a, b, x) via the Taylor series with double-double accumulation.

    ``b`` must be real (the parabolic cylinder use cases have b = 1/2, 3/2).
    Both the running term and the partial sum are kept in double-double so
    the catastrophic cancellation for purely oscillatory x (|x| up to ~45)
    stays below ~1e-10 relative.  Returns the rounded complex sum.
    """
    ar, ai = a.real, a.imag
    xr, xi = x.real, x.imag
    # term t_k, sum s as complex double-double
    trh, trl, tih, til = 1.0, 0.0, 0.0, 0.0
    srh, srl, sih, sil = 1.0, 0.0, 0.0, 0.0
    for k in range(max_terms):
        # t *= (a + k)
        cr, ci = ar + k, ai
        prh, prl = _dd_mul_d(trh, trl, cr)
        qrh, qrl = _dd_mul_d(tih, til, ci)
        pih, pil = _dd_mul_d(trh, trl, ci)
        qih, qil = _dd_mul_d(tih, til, cr)
        trh, trl = _dd_add(prh, prl, -qrh, -qrl)
        tih, til = _dd_add(pih, pil, qih, qil)
        # t *= x
        prh, prl = _dd_mul_d(trh, trl, xr)
        qrh, qrl = _dd_mul_d(tih, til, xi)
        pih, pil = _dd_mul_d(trh, trl, xi)
        qih, qil = _dd_mul_d(tih, til, xr)
        trh, trl = _dd_add(prh, prl, -qrh, -qrl)
        tih, til = _dd_add(pih, pil, qih, qil)
        # t /= (b + k) * (k + 1), both factors real and exact
        trh, trl = _dd_div_d(trh, trl, b_real + k)
        trh, trl = _dd_div_d(trh, trl, k + 1.0)
        tih, til = _dd_div_d(tih, til, b_real + k)
        tih, til = _dd_div_d(tih, til, k + 1.0)
        # s += t
        srh, srl = _dd_add(srh, srl, trh, trl)
        sih, sil = _dd_add(sih, sil, tih, til)
        t_mag = abs(trh) + abs(tih)
        s_mag = abs(srh) + abs(sih)
        if t_mag < tol * max(s_mag, 1e-300) and k > 2:
            break
    return complex(srh + srl, sih + sil)
