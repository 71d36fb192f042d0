# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: initializedcheck=False, language_level=3
"""Compiled contour-integration kernel (Cython backend).

Same ABI, tableau, step controller and status codes as the pure-NumPy
fallback in ``_dopri_py``; scalar loops over typed memoryviews instead of
vectorized array arithmetic.
"""

import numpy as np

from libc.math cimport cos, fabs, isfinite, pow, sin, sqrt

BACKEND_NAME = "cython"

STATUS_OK = 0
STATUS_NEAR_POLE = 1
STATUS_UNDERFLOW = 2
STATUS_NONFINITE = 3
STATUS_MAXSTEPS = 4

SEGMENT = 0
ARC = 1

cdef double H_INIT = 0.01
cdef double H_MIN = 1e-14
cdef double SAFETY = 0.9
cdef double FAC_MIN = 0.2
cdef double FAC_MAX = 10.0

# Dormand-Prince 5(4) tableau (same rational literals as the Python backend).
cdef double[7] DP_C
DP_C[0] = 0.0; DP_C[1] = 1.0 / 5.0; DP_C[2] = 3.0 / 10.0; DP_C[3] = 4.0 / 5.0
DP_C[4] = 8.0 / 9.0; DP_C[5] = 1.0; DP_C[6] = 1.0

cdef double[7][7] DP_A
cdef int _i, _j
for _i in range(7):
    for _j in range(7):
        DP_A[_i][_j] = 0.0
DP_A[1][0] = 1.0 / 5.0
DP_A[2][0] = 3.0 / 40.0;        DP_A[2][1] = 9.0 / 40.0
DP_A[3][0] = 44.0 / 45.0;       DP_A[3][1] = -56.0 / 15.0
DP_A[3][2] = 32.0 / 9.0
DP_A[4][0] = 19372.0 / 6561.0;  DP_A[4][1] = -25360.0 / 2187.0
DP_A[4][2] = 64448.0 / 6561.0;  DP_A[4][3] = -212.0 / 729.0
DP_A[5][0] = 9017.0 / 3168.0;   DP_A[5][1] = -355.0 / 33.0
DP_A[5][2] = 46732.0 / 5247.0;  DP_A[5][3] = 49.0 / 176.0
DP_A[5][4] = -5103.0 / 18656.0
DP_A[6][0] = 35.0 / 384.0;      DP_A[6][1] = 0.0
DP_A[6][2] = 500.0 / 1113.0;    DP_A[6][3] = 125.0 / 192.0
DP_A[6][4] = -2187.0 / 6784.0;  DP_A[6][5] = 11.0 / 84.0

cdef double[7] DP_B
for _i in range(7):
    DP_B[_i] = DP_A[6][_i]

cdef double[7] DP_E
DP_E[0] = 71.0 / 57600.0
DP_E[1] = 0.0
DP_E[2] = -71.0 / 16695.0
DP_E[3] = 71.0 / 1920.0
DP_E[4] = -17253.0 / 339200.0
DP_E[5] = 22.0 / 525.0
DP_E[6] = -1.0 / 40.0


cdef inline double _cabs(double complex z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef int _eval_system(int n, double complex[::1] locs, long long[::1] offsets,
                      double complex[:, :, ::1] laurent,
                      double complex[:, :, ::1] poly,
                      double guard, double complex z,
                      double complex[:, ::1] A) nogil:
    """Fill A(z); returns 1 when z is inside a pole guard radius."""
    cdef Py_ssize_t P = locs.shape[0]
    cdef Py_ssize_t D = poly.shape[0]
    cdef Py_ssize_t p, r, c, row, d
    cdef double complex u, inv, w, acc
    for r in range(n):
        for c in range(n):
            A[r, c] = 0.0
    for p in range(P):
        u = z - locs[p]
        if _cabs(u) < guard:
            return 1
        inv = 1.0 / u
        w = inv
        for row in range(offsets[p + 1] - 1, offsets[p] - 1, -1):
            for r in range(n):
                for c in range(n):
                    A[r, c] = A[r, c] + w * laurent[row, r, c]
            w = w * inv
    if D > 0:
        for r in range(n):
            for c in range(n):
                acc = poly[D - 1, r, c]
                for d in range(D - 2, -1, -1):
                    acc = acc * z + poly[d, r, c]
                A[r, c] = A[r, c] + acc
    return 0


cdef int _rhs(int n, double complex[::1] locs, long long[::1] offsets,
              double complex[:, :, ::1] laurent,
              double complex[:, :, ::1] poly, double guard,
              long long ptype, double complex p0, double complex p1,
              double complex p2, double s,
              double complex[:, ::1] Ycur, double complex[:, ::1] A,
              double complex[:, ::1] out) nogil:
    """out = (dz/ds) A(z(s)) Ycur; returns 1 on pole-guard violation."""
    cdef double complex z, dz, e, acc
    cdef double radius, th0, th1, th
    cdef Py_ssize_t r, c, m
    if ptype == 0:
        z = p0 + s * (p1 - p0)
        dz = p1 - p0
    else:
        radius = p1.real
        th0 = p2.real
        th1 = p2.imag
        th = th0 + s * (th1 - th0)
        e = cos(th) + 1j * sin(th)
        z = p0 + radius * e
        dz = 1j * radius * e * (th1 - th0)
    if _eval_system(n, locs, offsets, laurent, poly, guard, z, A):
        return 1
    for r in range(n):
        for c in range(n):
            acc = 0.0
            for m in range(n):
                acc = acc + A[r, m] * Ycur[m, c]
            out[r, c] = dz * acc
    return 0


def integrate_polyline_raw(int n, double complex[::1] locs,
                           long long[::1] offsets,
                           double complex[:, :, ::1] laurent,
                           double complex[:, :, ::1] poly, double guard,
                           long long[::1] piece_types,
                           double complex[:, ::1] piece_params,
                           double complex[:, ::1] Y0,
                           double rtol, double atol,
                           double h0=0.01, long long max_steps=200000):
    """Returns (status, Y, err_acc, fail_pos); see the Python backend."""
    Y_arr = np.array(Y0, dtype=complex)
    K_arr = np.zeros((7, n, n), dtype=complex)
    Yi_arr = np.zeros((n, n), dtype=complex)
    Ynew_arr = np.zeros((n, n), dtype=complex)
    A_arr = np.zeros((n, n), dtype=complex)

    cdef double complex[:, ::1] Y = Y_arr
    cdef double complex[:, :, ::1] K = K_arr
    cdef double complex[:, ::1] Yi = Yi_arr
    cdef double complex[:, ::1] Ynew = Ynew_arr
    cdef double complex[:, ::1] A = A_arr

    cdef double err_acc = 0.0
    cdef double h = h0 if h0 < 1.0 else 1.0
    cdef long long nsteps = 0
    cdef Py_ssize_t npieces = piece_types.shape[0]
    cdef Py_ssize_t piece, i, j, r, c
    cdef long long ptype
    cdef double complex p0, p1, p2, acc, E_rc
    cdef double s, err, qsum, sc, q, emax, absval, factor, ay, aynew
    cdef int bad, nonfinite

    for piece in range(npieces):
        ptype = piece_types[piece]
        p0 = piece_params[piece, 0]
        p1 = piece_params[piece, 1]
        p2 = piece_params[piece, 2]
        s = 0.0
        if _rhs(n, locs, offsets, laurent, poly, guard, ptype, p0, p1, p2,
                0.0, Y, A, K[0]):
            return STATUS_NEAR_POLE, Y_arr, err_acc, piece + 0.0
        if h > 1.0:
            h = 1.0
        while s < 1.0:
            if nsteps >= max_steps:
                return STATUS_MAXSTEPS, Y_arr, err_acc, piece + s
            if h > 1.0 - s:
                h = 1.0 - s
            if h < H_MIN:
                return STATUS_UNDERFLOW, Y_arr, err_acc, piece + s
            bad = 0
            for i in range(1, 6):
                for r in range(n):
                    for c in range(n):
                        acc = 0.0
                        for j in range(i):
                            acc = acc + DP_A[i][j] * K[j, r, c]
                        Yi[r, c] = Y[r, c] + h * acc
                if _rhs(n, locs, offsets, laurent, poly, guard, ptype,
                        p0, p1, p2, s + DP_C[i] * h, Yi, A, K[i]):
                    bad = 1
                    break
            if not bad:
                for r in range(n):
                    for c in range(n):
                        acc = 0.0
                        for j in range(7):
                            acc = acc + DP_B[j] * K[j, r, c]
                        Ynew[r, c] = Y[r, c] + h * acc
                if _rhs(n, locs, offsets, laurent, poly, guard, ptype,
                        p0, p1, p2, s + h, Ynew, A, K[6]):
                    bad = 1
            if bad:
                return STATUS_NEAR_POLE, Y_arr, err_acc, piece + s
            qsum = 0.0
            emax = 0.0
            nonfinite = 0
            for r in range(n):
                for c in range(n):
                    acc = 0.0
                    for j in range(7):
                        acc = acc + DP_E[j] * K[j, r, c]
                    E_rc = h * acc
                    if not (isfinite(Ynew[r, c].real)
                            and isfinite(Ynew[r, c].imag)
                            and isfinite(E_rc.real)
                            and isfinite(E_rc.imag)):
                        nonfinite = 1
                    absval = _cabs(E_rc)
                    if absval > emax:
                        emax = absval
                    ay = _cabs(Y[r, c])
                    aynew = _cabs(Ynew[r, c])
                    sc = atol + rtol * (ay if ay > aynew else aynew)
                    q = absval / sc
                    qsum = qsum + q * q
            if nonfinite:
                return STATUS_NONFINITE, Y_arr, err_acc, piece + s
            err = sqrt(qsum / (n * n))
            nsteps = nsteps + 1
            if err <= 1.0:
                err_acc = err_acc + emax
                for r in range(n):
                    for c in range(n):
                        Y[r, c] = Ynew[r, c]
                        K[0, r, c] = K[6, r, c]
                s = s + h
                if err == 0.0:
                    factor = FAC_MAX
                else:
                    factor = SAFETY * pow(err, -0.2)
                    if factor < FAC_MIN:
                        factor = FAC_MIN
                    elif factor > FAC_MAX:
                        factor = FAC_MAX
            else:
                factor = SAFETY * pow(err, -0.2)
                if factor < FAC_MIN:
                    factor = FAC_MIN
            h = h * factor
    return STATUS_OK, Y_arr, err_acc, 0.0
