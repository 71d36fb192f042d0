"""Pure-NumPy contour-integration kernel (fallback backend).

Integrates dY/ds = (dz/ds) A(z(s)) Y along a polyline of segments and
circular arcs, each parameterized over s in [0, 1], with the adaptive
Dormand-Prince 5(4) pair.  Behaviour (tableau, step controller, error norm,
status codes) matches the compiled Cython backend bit-for-bit in structure;
tiny floating-point differences can arise from BLAS versus scalar loops.

Status codes returned by ``integrate_polyline_raw``:
0 = success, 1 = near pole, 2 = step underflow, 3 = non-finite values,
4 = step budget exhausted.
"""

from __future__ import annotations

import cmath

import numpy as np

from ..dopri import DP_A, DP_B, DP_C, DP_E, FAC_MIN, FAC_MAX, H_INIT, H_MIN, SAFETY

BACKEND_NAME = "python"

STATUS_OK = 0
STATUS_NEAR_POLE = 1
STATUS_UNDERFLOW = 2
STATUS_NONFINITE = 3
STATUS_MAXSTEPS = 4

SEGMENT = 0
ARC = 1


def _piece_point(ptype: int, params, s: float):
    """Map piece-local s in [0,1] to (z, dz/ds)."""
    if ptype == SEGMENT:
        a, b = params[0], params[1]
        return a + s * (b - a), b - a
    center = params[0]
    radius = params[1].real
    th0, th1 = params[2].real, params[2].imag
    th = th0 + s * (th1 - th0)
    e = cmath.exp(1j * th)
    return center + radius * e, 1j * radius * e * (th1 - th0)


def _eval_system(n, locs, offsets, laurent, poly, guard, z):
    """A(z) from frozen partial-fraction data, or None when inside a guard."""
    A = np.zeros((n, n), dtype=complex)
    for p in range(len(locs)):
        u = z - locs[p]
        if abs(u) < guard:
            return None
        inv = 1.0 / u
        w = inv
        lo, hi = offsets[p], offsets[p + 1]
        for row in range(hi - 1, lo - 1, -1):  # orders 1..m ascending
            A += w * laurent[row]
            w *= inv
    D = len(poly)
    if D:
        acc = poly[D - 1].copy()
        for d in range(D - 2, -1, -1):
            acc *= z
            acc += poly[d]
        A += acc
    return A


def integrate_polyline_raw(n, locs, offsets, laurent, poly, guard,
                           piece_types, piece_params, Y0,
                           rtol, atol, h0=H_INIT, max_steps=200000):
    """Returns (status, Y, err_acc, fail_pos).

    ``fail_pos`` is the global arc-length-like coordinate piece_index + s of
    the failure (0.0 on success).  ``err_acc`` accumulates max|E| over
    accepted steps.
    """
    Y = np.array(Y0, dtype=complex)
    K = [np.zeros((n, n), dtype=complex) for _ in range(7)]
    err_acc = 0.0
    h = min(h0, 1.0)
    nsteps = 0

    def rhs(ptype, params, s, Ycur):
        z, dz = _piece_point(ptype, params, s)
        A = _eval_system(n, locs, offsets, laurent, poly, guard, z)
        if A is None:
            return None
        return dz * (A @ Ycur)

    for piece in range(len(piece_types)):
        ptype = int(piece_types[piece])
        params = piece_params[piece]
        s = 0.0
        k = rhs(ptype, params, 0.0, Y)
        if k is None:
            return STATUS_NEAR_POLE, Y, err_acc, piece + 0.0
        K[0] = k
        h = min(h, 1.0)
        while s < 1.0:
            if nsteps >= max_steps:
                return STATUS_MAXSTEPS, Y, err_acc, piece + s
            h = min(h, 1.0 - s)
            if h < H_MIN:
                return STATUS_UNDERFLOW, Y, err_acc, piece + s
            bad = False
            for i in range(1, 6):
                Yi = Y + h * sum(DP_A[i, j] * K[j] for j in range(i))
                k = rhs(ptype, params, s + DP_C[i] * h, Yi)
                if k is None:
                    bad = True
                    break
                K[i] = k
            if not bad:
                Ynew = Y + h * sum(DP_B[j] * K[j] for j in range(7))
                k = rhs(ptype, params, s + h, Ynew)
                if k is None:
                    bad = True
                else:
                    K[6] = k
            if bad:
                return STATUS_NEAR_POLE, Y, err_acc, piece + s
            E = h * sum(DP_E[j] * K[j] for j in range(7))
            if not (np.all(np.isfinite(Ynew.view(float)))
                    and np.all(np.isfinite(E.view(float)))):
                return STATUS_NONFINITE, Y, err_acc, piece + s
            sc = atol + rtol * np.maximum(np.abs(Y), np.abs(Ynew))
            q = np.abs(E) / sc
            err = float(np.sqrt(np.mean(q * q)))
            nsteps += 1
            if err <= 1.0:
                err_acc += float(np.max(np.abs(E)))
                Y = Ynew
                K[0] = K[6].copy()
                s += h
                factor = FAC_MAX if err == 0.0 else min(
                    FAC_MAX, max(FAC_MIN, SAFETY * err ** -0.2))
            else:
                factor = max(FAC_MIN, SAFETY * err ** -0.2)
            h *= factor
    return STATUS_OK, Y, err_acc, 0.0
