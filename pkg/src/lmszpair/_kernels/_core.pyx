# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of the NumPy kernel fallback.

Implements the same three entry points as ``_pyfallback`` with identical
semantics: the adaptive Dormand-Prince 5(4) propagator, the fixed-step
noisy-ensemble stepper and the double-double Kummer series.  Keep the two
modules in lockstep; ``tests/test_kernels.py`` compares them directly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, isfinite, pow, sin, sqrt

cnp.import_array()

ctypedef double complex dcomplex

FIELD_RAMP_SPIN1 = 0
FIELD_RAMP_SPIN2 = 1
FIELD_RAMP_HOMOG = 2
FIELD_CONSTANT = 3
FIELD_OSCILLATING = 4
FIELD_TABULATED = 5

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2

cdef long _MAX_STEPS = 20000000

# Dormand-Prince 5(4) tableau (same values as the fallback)
cdef double _C[7]
_C[0] = 0.0; _C[1] = 1.0/5.0; _C[2] = 3.0/10.0; _C[3] = 4.0/5.0
_C[4] = 8.0/9.0; _C[5] = 1.0; _C[6] = 1.0

cdef double _A[6][6]
_A[1][0] = 1.0/5.0
_A[2][0] = 3.0/40.0;       _A[2][1] = 9.0/40.0
_A[3][0] = 44.0/45.0;      _A[3][1] = -56.0/15.0;      _A[3][2] = 32.0/9.0
_A[4][0] = 19372.0/6561.0; _A[4][1] = -25360.0/2187.0; _A[4][2] = 64448.0/6561.0
_A[4][3] = -212.0/729.0
_A[5][0] = 9017.0/3168.0;  _A[5][1] = -355.0/33.0;     _A[5][2] = 46732.0/5247.0
_A[5][3] = 49.0/176.0;     _A[5][4] = -5103.0/18656.0

cdef double _B[6]
_B[0] = 35.0/384.0; _B[1] = 0.0; _B[2] = 500.0/1113.0
_B[3] = 125.0/192.0; _B[4] = -2187.0/6784.0; _B[5] = 11.0/84.0

cdef double _E[7]
_E[0] = 71.0/57600.0; _E[1] = 0.0; _E[2] = -71.0/16695.0; _E[3] = 71.0/1920.0
_E[4] = -17253.0/339200.0; _E[5] = 22.0/525.0; _E[6] = -1.0/40.0

cdef double _P[7][4]
_P[0][0] = 1.0
_P[0][1] = -8048581381.0/2820520608.0
_P[0][2] = 8663915743.0/2820520608.0
_P[0][3] = -12715105075.0/11282082432.0
_P[1][0] = 0.0; _P[1][1] = 0.0; _P[1][2] = 0.0; _P[1][3] = 0.0
_P[2][0] = 0.0
_P[2][1] = 131558114200.0/32700410799.0
_P[2][2] = -68118460800.0/10900136933.0
_P[2][3] = 87487479700.0/32700410799.0
_P[3][0] = 0.0
_P[3][1] = -1754552775.0/470086768.0
_P[3][2] = 14199869525.0/1410260304.0
_P[3][3] = -10690763975.0/1880347072.0
_P[4][0] = 0.0
_P[4][1] = 127303824393.0/49829197408.0
_P[4][2] = -318862633887.0/49829197408.0
_P[4][3] = 701980252875.0/199316789632.0
_P[5][0] = 0.0
_P[5][1] = -282668133.0/205662961.0
_P[5][2] = 2019193451.0/616988883.0
_P[5][3] = -1453857185.0/822651844.0
_P[6][0] = 0.0
_P[6][1] = 40617522.0/29380423.0
_P[6][2] = -110615467.0/29380423.0
_P[6][3] = 69997945.0/29380423.0

cdef double _SAFETY = 0.9
cdef double _MIN_SCALE = 0.2
cdef double _MAX_SCALE = 10.0
cdef double _BETA_PI = 0.04
cdef double _EXPO1 = 0.2 - 0.75 * 0.04
cdef double _EPS = 2.220446049250313e-16


cdef inline double _interp(const double[:] xs, const double[:] ys, double t) noexcept nogil:
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t lo = 0, hi = n - 1, mid
    if t <= xs[0]:
        return ys[0]
    if t >= xs[n - 1]:
        return ys[n - 1]
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if xs[mid] <= t:
            lo = mid
        else:
            hi = mid
    cdef double f = (t - xs[lo]) / (xs[lo + 1] - xs[lo])
    return ys[lo] + f * (ys[lo + 1] - ys[lo])


cdef inline void _field_eval(int kind, const double* fp,
                             const double[:] ftimes, const double[:] fw1, const double[:] fw2,
                             double t, double* w1, double* w2) noexcept nogil:
    cdef double w
    if kind == 0:      # ramp on spin 1
        w1[0] = 0.5 * fp[0] * t; w2[0] = 0.0
    elif kind == 1:    # ramp on spin 2
        w1[0] = 0.0; w2[0] = 0.5 * fp[0] * t
    elif kind == 2:    # homogeneous ramp
        w = 0.25 * fp[0] * t
        w1[0] = w; w2[0] = w
    elif kind == 3:    # constant
        w1[0] = fp[0]; w2[0] = fp[1]
    elif kind == 4:    # oscillating on spin 1
        w1[0] = fp[0] * cos(fp[1] * t); w2[0] = 0.0
    else:              # tabulated
        w1[0] = _interp(ftimes, fw1, t)
        w2[0] = _interp(ftimes, fw2, t)


cdef inline void _rhs(int kind, const double* fp,
                      const double[:] ftimes, const double[:] fw1, const double[:] fw2,
                      int dim, const double* hp, double t,
                      const dcomplex* y, dcomplex* out) noexcept nogil:
    cdef double w1, w2, w, g, gp, gm
    cdef dcomplex mi = -1j
    cdef dcomplex h00, h11, d0, d1, d2, d3
    _field_eval(kind, fp, ftimes, fw1, fw2, t, &w1, &w2)
    if dim == 2:
        w = w1 + hp[0] * w2
        g = hp[1]
        h00 = w - 0.5j * hp[2]
        h11 = -w - 0.5j * hp[3]
        out[0] = mi * (h00 * y[0] + g * y[1])
        out[1] = mi * (g * y[0] + h11 * y[1])
    else:
        gp = hp[0] - hp[1]
        gm = hp[0] + hp[1]
        d0 = (w1 + w2 + hp[2]) - 0.5j * (hp[3] + hp[4])
        d1 = (w1 - w2 - hp[2]) - 0.5j * hp[3]
        d2 = (-w1 + w2 - hp[2]) - 0.5j * hp[4]
        d3 = (-w1 - w2 + hp[2])
        out[0] = mi * (d0 * y[0] + gp * y[3])
        out[1] = mi * (d1 * y[1] + gm * y[2])
        out[2] = mi * (gm * y[1] + d2 * y[2])
        out[3] = mi * (gp * y[0] + d3 * y[3])


cdef inline double _cmod(dcomplex z) noexcept nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


def propagate_linear_tdse(int kind, fp_in, ftimes_in, fw1_in, fw2_in,
                          int dim, hp_in, y0_in, grid_in, double rtol, double atol):
    """See ``_pyfallback.propagate_linear_tdse``; identical contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fp_a = np.ascontiguousarray(fp_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hp_a = np.ascontiguousarray(hp_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grid_a = np.ascontiguousarray(grid_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] y0_a = np.ascontiguousarray(y0_in, dtype=np.complex128)
    cdef double[:] ftimes = np.ascontiguousarray(ftimes_in, dtype=np.float64)
    cdef double[:] fw1 = np.ascontiguousarray(fw1_in, dtype=np.float64)
    cdef double[:] fw2 = np.ascontiguousarray(fw2_in, dtype=np.float64)
    cdef double[:] grid = grid_a
    cdef const double* fp = <const double*> fp_a.data
    cdef const double* hp = <const double*> hp_a.data

    cdef Py_ssize_t n_out = grid.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out_arr = np.zeros((n_out, dim), dtype=np.complex128)
    cdef dcomplex[:, :] out = out_arr

    cdef dcomplex y[4]
    cdef dcomplex y_new[4]
    cdef dcomplex yi[4]
    cdef dcomplex k[7][4]
    cdef dcomplex err_c, acc
    cdef double t, t_end, h, h1, d0, d1, d2, sc, err, fac, theta, bc
    cdef double bcoef[7]
    cdef Py_ssize_t i, j, m, j_out
    cdef long step
    cdef bint rejected = False
    cdef double facold = 1e-4

    for i in range(dim):
        y[i] = y0_a[i]
        out[0, i] = y[i]
    t = grid[0]
    t_end = grid[n_out - 1]
    if n_out == 1:
        return STATUS_OK, t, out_arr

    # Hairer-style initial step selection (mirrors the fallback)
    _rhs(kind, fp, ftimes, fw1, fw2, dim, hp, t, y, k[0])
    d0 = 0.0
    d1 = 0.0
    for i in range(dim):
        sc = atol + rtol * _cmod(y[i])
        d0 += (_cmod(y[i]) / sc) ** 2
        d1 += (_cmod(k[0][i]) / sc) ** 2
    d0 = sqrt(d0 / dim)
    d1 = sqrt(d1 / dim)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    if h > t_end - t:
        h = t_end - t
    for i in range(dim):
        yi[i] = y[i] + h * k[0][i]
    _rhs(kind, fp, ftimes, fw1, fw2, dim, hp, t + h, yi, k[1])
    d2 = 0.0
    for i in range(dim):
        sc = atol + rtol * _cmod(y[i])
        d2 += (_cmod(k[1][i] - k[0][i]) / sc) ** 2
    d2 = sqrt(d2 / dim) / h
    if d1 > d2:
        d2 = d1
    if d2 <= 1e-15:
        h1 = h * 1e-3
        if h1 < 1e-6:
            h1 = 1e-6
    else:
        h1 = pow(0.01 / d2, 0.2)
    if 100.0 * h < h1:
        h1 = 100.0 * h
    h = h1
    if h > t_end - t:
        h = t_end - t

    _rhs(kind, fp, ftimes, fw1, fw2, dim, hp, t, y, k[0])
    j_out = 1
    for step in range(_MAX_STEPS):
        # rounding can leave a sub-ulp remainder before t_end; treat as done
        if t_end - t <= 4.0 * _EPS * (fabs(t_end) if fabs(t_end) > 1.0 else 1.0):
            break
        if h > t_end - t:
            h = t_end - t
        if h < 4.0 * _EPS * (fabs(t) if fabs(t) > 1.0 else 1.0):
            return STATUS_STEP_UNDERFLOW, t, out_arr

        for m in range(1, 6):
            for i in range(dim):
                acc = 0
                for j in range(m):
                    if _A[m][j] != 0.0:
                        acc = acc + _A[m][j] * k[j][i]
                yi[i] = y[i] + h * acc
            _rhs(kind, fp, ftimes, fw1, fw2, dim, hp, t + _C[m] * h, yi, k[m])
        for i in range(dim):
            acc = 0
            for j in range(6):
                if _B[j] != 0.0:
                    acc = acc + _B[j] * k[j][i]
            y_new[i] = y[i] + h * acc
        _rhs(kind, fp, ftimes, fw1, fw2, dim, hp, t + h, y_new, k[6])

        err = 0.0
        for i in range(dim):
            err_c = 0
            for j in range(7):
                if _E[j] != 0.0:
                    err_c = err_c + _E[j] * k[j][i]
            err_c = h * err_c
            d0 = _cmod(y[i])
            d1 = _cmod(y_new[i])
            sc = atol + rtol * (d0 if d0 > d1 else d1)
            err += (_cmod(err_c) / sc) ** 2
        err = sqrt(err / dim)

        if err <= 1.0:
            while j_out < n_out and grid[j_out] <= t + h + 1e-14 * (fabs(t + h) if fabs(t + h) > 1.0 else 1.0):
                theta = (grid[j_out] - t) / h
                if theta >= 1.0:
                    for i in range(dim):
                        out[j_out, i] = y_new[i]
                else:
                    for j in range(7):
                        bc = 0.0
                        for m in range(3, -1, -1):
                            bc = (bc + _P[j][m]) * theta
                        bcoef[j] = bc
                    for i in range(dim):
                        acc = 0
                        for j in range(7):
                            if bcoef[j] != 0.0:
                                acc = acc + bcoef[j] * k[j][i]
                        out[j_out, i] = y[i] + h * acc
                j_out += 1
            if err > 0.0:
                fac = _SAFETY * pow(err, -_EXPO1) * pow(facold, _BETA_PI)
            else:
                fac = _MAX_SCALE
            if fac > _MAX_SCALE:
                fac = _MAX_SCALE
            if fac < _MIN_SCALE:
                fac = _MIN_SCALE
            if rejected and fac > 1.0:
                fac = 1.0
            facold = err if err > 1e-4 else 1e-4
            rejected = False
            for i in range(dim):
                y[i] = y_new[i]
                k[0][i] = k[6][i]
            t = t + h
            h = h * fac
        else:
            if err != err:  # NaN from an overflowed state: shrink hard
                fac = _MIN_SCALE
            else:
                fac = _SAFETY * pow(err, -0.2)
            if fac < _MIN_SCALE:
                fac = _MIN_SCALE
            h = h * fac
            rejected = True
    else:
        return STATUS_MAX_STEPS, t, out_arr
    return STATUS_OK, t, out_arr


def noisy_block_final(w_det_in, double c_eta, noise_in, double gamma, double dtau, u0_in):
    """See ``_pyfallback.noisy_block_final``; identical contract."""
    cdef double[:] w_det = np.ascontiguousarray(w_det_in, dtype=np.float64)
    cdef double[:, :] noise = np.ascontiguousarray(noise_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] u0_a = np.ascontiguousarray(u0_in, dtype=np.complex128)
    cdef Py_ssize_t n_real = noise.shape[0]
    cdef Py_ssize_t n_steps = noise.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out_arr = np.empty((n_real, 2), dtype=np.complex128)
    cdef dcomplex[:, :] out = out_arr
    cdef dcomplex u1, u2, v1, v2, isw, isg
    cdef dcomplex u1_0 = u0_a[0]
    cdef dcomplex u2_0 = u0_a[1]
    cdef double w, e, theta, c, s
    cdef Py_ssize_t r, m
    with nogil:
        for r in range(n_real):
            u1 = u1_0
            u2 = u2_0
            for m in range(n_steps):
                w = w_det[m] + c_eta * noise[r, m]
                e = sqrt(w * w + gamma * gamma)
                theta = e * dtau
                c = cos(theta)
                if e < 1e-300:
                    s = dtau
                else:
                    s = sin(theta) / e
                isw = 1j * (s * w)
                isg = 1j * (s * gamma)
                v1 = (c - isw) * u1 - isg * u2
                v2 = -isg * u1 + (c + isw) * u2
                u1 = v1
                u2 = v2
            out[r, 0] = u1
            out[r, 1] = u2
    return out_arr


# --------------------------------------------------------------------------
# double-double arithmetic and the Kummer series
# --------------------------------------------------------------------------

cdef double _SPLITTER = 134217729.0  # 2**27 + 1


cdef inline void _two_sum(double a, double b, double* s, double* e) noexcept nogil:
    cdef double ss = a + b
    cdef double bb = ss - a
    s[0] = ss
    e[0] = (a - (ss - bb)) + (b - bb)


cdef inline void _quick_two_sum(double a, double b, double* s, double* e) noexcept nogil:
    cdef double ss = a + b
    s[0] = ss
    e[0] = b - (ss - a)


cdef inline void _two_prod(double a, double b, double* p, double* e) noexcept nogil:
    cdef double pp = a * b
    cdef double aa = _SPLITTER * a
    cdef double a_hi = aa - (aa - a)
    cdef double a_lo = a - a_hi
    cdef double bb = _SPLITTER * b
    cdef double b_hi = bb - (bb - b)
    cdef double b_lo = b - b_hi
    p[0] = pp
    e[0] = ((a_hi * b_hi - pp) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo


cdef inline void _dd_add(double xh, double xl, double yh, double yl,
                         double* rh, double* rl) noexcept nogil:
    cdef double s, e
    _two_sum(xh, yh, &s, &e)
    e += xl + yl
    _quick_two_sum(s, e, rh, rl)


cdef inline void _dd_mul_d(double xh, double xl, double d,
                           double* rh, double* rl) noexcept nogil:
    cdef double p, e
    _two_prod(xh, d, &p, &e)
    e += xl * d
    _quick_two_sum(p, e, rh, rl)


cdef inline void _dd_div_d(double xh, double xl, double d,
                           double* rh, double* rl) noexcept nogil:
    cdef double q1 = xh / d
    cdef double p, e, q2
    _two_prod(q1, d, &p, &e)
    q2 = ((xh - p) - e + xl) / d
    _quick_two_sum(q1, q2, rh, rl)


def kummer_m_dd(a, double b_real, x, int max_terms=400, double tol=1e-35):
    """See ``_pyfallback.kummer_m_dd``; identical contract."""
    cdef double ar = a.real, ai = a.imag
    cdef double xr = x.real, xi = x.imag
    cdef double trh = 1.0, trl = 0.0, tih = 0.0, til = 0.0
    cdef double srh = 1.0, srl = 0.0, sih = 0.0, sil = 0.0
    cdef double prh, prl, qrh, qrl, pih, pil, qih, qil
    cdef double cr, ci, t_mag, s_mag
    cdef int k
    with nogil:
        for k in range(max_terms):
            cr = ar + k
            ci = ai
            _dd_mul_d(trh, trl, cr, &prh, &prl)
            _dd_mul_d(tih, til, ci, &qrh, &qrl)
            _dd_mul_d(trh, trl, ci, &pih, &pil)
            _dd_mul_d(tih, til, cr, &qih, &qil)
            _dd_add(prh, prl, -qrh, -qrl, &trh, &trl)
            _dd_add(pih, pil, qih, qil, &tih, &til)
            _dd_mul_d(trh, trl, xr, &prh, &prl)
            _dd_mul_d(tih, til, xi, &qrh, &qrl)
            _dd_mul_d(trh, trl, xi, &pih, &pil)
            _dd_mul_d(tih, til, xr, &qih, &qil)
            _dd_add(prh, prl, -qrh, -qrl, &trh, &trl)
            _dd_add(pih, pil, qih, qil, &tih, &til)
            _dd_div_d(trh, trl, b_real + k, &trh, &trl)
            _dd_div_d(trh, trl, k + 1.0, &trh, &trl)
            _dd_div_d(tih, til, b_real + k, &tih, &til)
            _dd_div_d(tih, til, k + 1.0, &tih, &til)
            _dd_add(srh, srl, trh, trl, &srh, &srl)
            _dd_add(sih, sil, tih, til, &sih, &sil)
            t_mag = fabs(trh) + fabs(tih)
            s_mag = fabs(srh) + fabs(sih)
            if s_mag < 1e-300:
                s_mag = 1e-300
            if t_mag < tol * s_mag and k > 2:
                break
    return complex(srh + srl, sih + sil)
