"""Adaptive Dormand-Prince 5(4) integration with dense output.

This is the generic (vector-valued, complex) integrator used for parameter
-space flows and quadrature along trajectories.  The contour-integration
kernels in :mod:`parmono._kernels` use the same tableau and step controller,
specialised to matrix ODEs along x-plane paths.

The dense output is the standard quartic interpolant for this pair; together
with Gauss-Legendre quadrature per accepted step it gives spectrally accurate
integrals of functionals along a trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntegrationFailureError, NonFiniteError, StepUnderflowError

__all__ = ["DenseSolution", "integrate_adaptive",
           "DP_A", "DP_B", "DP_C", "DP_E", "DP_P",
           "H_INIT", "H_MIN", "SAFETY", "FAC_MIN", "FAC_MAX"]

# Dormand-Prince 5(4) tableau (FSAL; 7th stage is the next step's first).
DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])

DP_A = np.zeros((7, 7))
DP_A[1, 0] = 1 / 5
DP_A[2, :2] = [3 / 40, 9 / 40]
DP_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
DP_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
DP_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
DP_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]

DP_B = DP_A[6, :7].copy()  # 5th-order weights (b2 = 0, b7 = 0)

# local error weights: 5th-order solution minus embedded 4th-order one
DP_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
                 -17253 / 339200, 22 / 525, -1 / 40])

# dense-output polynomial: y(s0 + theta h) = y0 + h * sum_i K_i P_i(theta),
# P_i(theta) = sum_j DP_P[i, j] theta^(j+1)
DP_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

H_INIT = 0.01
H_MIN = 1e-14
SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0


@dataclass
class DenseSolution:
    """Accepted nodes, states and stage data of an adaptive integration."""

    ss: np.ndarray       # accepted abscissae, shape (m+1,)
    ys: np.ndarray       # states at nodes, shape (m+1, dim), complex
    stages: np.ndarray   # per-step stage derivatives, shape (m, 7, dim)
    err_acc: float       # accumulated local error estimates (sup norm)

    @property
    def end_state(self) -> np.ndarray:
        return self.ys[-1]

    def _locate(self, s: float) -> int:
        i = int(np.searchsorted(self.ss, s, side="right") - 1)
        return min(max(i, 0), len(self.ss) - 2)

    def __call__(self, s: float) -> np.ndarray:
        """Interpolated state at abscissa s (quartic dense output)."""
        i = self._locate(float(s))
        h = self.ss[i + 1] - self.ss[i]
        if h == 0.0 or i >= len(self.stages):
            return self.ys[i].copy()
        theta = (float(s) - self.ss[i]) / h
        powers = theta ** np.arange(1, 5)
        weights = DP_P @ powers          # (7,)
        return self.ys[i] + h * (weights @ self.stages[i])

    def steps(self):
        """Iterate (s_left, s_right) pairs of accepted steps."""
        for i in range(len(self.ss) - 1):
            yield float(self.ss[i]), float(self.ss[i + 1])


def _scaled_error(E, y, ynew, rtol, atol) -> float:
    sc = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
    q = np.abs(E) / sc
    return float(np.sqrt(np.mean(q * q)))


def integrate_adaptive(f, s_end: float, y0, rtol: float, atol: float, *,
                       h0: float = H_INIT, max_steps: int = 200000,
                       dense: bool = True, check=None) -> DenseSolution:
    """Integrate dy/ds = f(s, y) over [0, s_end] adaptively.

    ``check(s, y)`` (if given) runs after every accepted step and may raise to
    abort (used for e.g. collision detection along flows).  Raises
    StepUnderflowError / NonFiniteError / IntegrationFailureError on failure.
    """
    y = np.array(y0, dtype=complex).ravel()
    dim = y.size
    if s_end <= 0.0:
        return DenseSolution(np.array([0.0, 0.0]), np.array([y, y.copy()]),
                             np.empty((0, 7, dim), complex), 0.0)
    s = 0.0
    h = min(h0, s_end)
    # Zero-filled so the unused 7th weight (DP_B[6] == 0) cannot pick up
    # garbage (0 * nan = nan) before the FSAL slot is first written.
    K = np.zeros((7, dim), dtype=complex)
    K[0] = f(0.0, y)
    ss = [0.0]
    ys = [y.copy()]
    stages = []
    err_acc = 0.0
    nsteps = 0
    while s < s_end:
        if nsteps >= max_steps:
            raise IntegrationFailureError(
                f"exceeded {max_steps} steps", s=s)
        h = min(h, s_end - s)
        if h < H_MIN:
            raise StepUnderflowError(f"step size underflow at s={s}", s=s)
        for i in range(1, 6):
            yi = y + h * (DP_A[i, :i] @ K[:i])
            K[i] = f(s + DP_C[i] * h, yi)
        ynew = y + h * (DP_B @ K[:7])
        K[6] = f(s + h, ynew)
        E = h * (DP_E @ K)
        if not np.all(np.isfinite(ynew.view(float))) or not np.all(
                np.isfinite(E.view(float))):
            raise NonFiniteError(f"non-finite state at s={s}", s=s)
        err = _scaled_error(E, y, ynew, rtol, atol)
        nsteps += 1
        if err <= 1.0:
            s_next = s + h
            if check is not None:
                check(s_next, ynew)
            err_acc += float(np.max(np.abs(E)))
            if dense:
                stages.append(K.copy())
                ss.append(s_next)
                ys.append(ynew.copy())
            y = ynew.copy()
            K[0] = K[6]  # FSAL
            s = s_next
            factor = FAC_MAX if err == 0.0 else min(
                FAC_MAX, max(FAC_MIN, SAFETY * err ** -0.2))
        else:
            factor = max(FAC_MIN, SAFETY * err ** -0.2)
        h *= factor
    if dense:
        return DenseSolution(np.array(ss), np.array(ys),
                             np.array(stages) if stages else
                             np.empty((0, 7, dim), complex), err_acc)
    return DenseSolution(np.array([0.0, s]), np.array([ys[0], y.copy()]),
                         np.empty((0, 7, dim), complex), err_acc)
