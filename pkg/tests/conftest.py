"""Shared fixture builders for the test suite.

These are plain functions (imported via ``from conftest import ...``) so the
individual tests stay explicit about what they construct.
"""

import numpy as np

from parmono.classify import ConnectionSystem
from parmono.expr import const, param
from parmono.sysmodel import ParamRationalMatrix, make_system


def t_over_x_system() -> ParamRationalMatrix:
    """dy/dx = (t1/x) y: monodromy around 0 is e^{2 pi i t1}."""
    return make_system(1, 1, poles=[(const(0), [[[param(1)]]])])


def upper_triangular_system() -> ParamRationalMatrix:
    """A = [[1/x, 1], [0, 0]]: monodromy at base 1 is [[1, 2 pi i], [0, 1]].

    The residue [[1,0],[0,0]] has the resonant eigenvalue pair (1, 0).
    """
    zero, one = const(0), const(1)
    return make_system(2, 0,
                       poles=[(zero, [[[one, zero], [zero, zero]]])],
                       poly=[[[zero, one], [zero, zero]]])


def constant_matrix(vals) -> list:
    return [[const(complex(v)) for v in row] for row in vals]


def moving_pole_system(B, scale=1.0) -> ParamRationalMatrix:
    """A = scale * B / (x - t1) with B a constant matrix."""
    n = len(B)
    mat = constant_matrix(np.asarray(B, dtype=complex) * scale)
    return make_system(n, 1, poles=[(param(1), [mat])])


def schlesinger_pair(B) -> ConnectionSystem:
    """The integrable pair A_x = B/(x - t1), A_t = -B/(x - t1)."""
    return ConnectionSystem(moving_pole_system(B, 1.0),
                            (moving_pole_system(B, -1.0),))


NONNORMAL_C = np.array([[0.3, 1.0], [0.0, -0.2]], dtype=complex)


def gauge_example():
    """The order-2/order-1 equivalent pair with its rational gauge.

    A = [[0,-3],[0,0]]/(x-t)^2 + [[t,0],[0,t-2]]/(x-t)
    B = (t-1) I / (x-t)
    P = [[1/(x-t), -1/(x-t)^2], [0, x-t]]   (det P = 1)
    Returns (A, B, P).
    """
    t = param(1)
    zero, one = const(0), const(1)
    A = make_system(2, 1, poles=[(t, [
        [[zero, const(-3)], [zero, zero]],
        [[t, zero], [zero, t - 2]],
    ])])
    B = make_system(2, 1, poles=[(t, [[[t - 1, zero], [zero, t - 1]]])])
    P = make_system(2, 1,
                    poles=[(t, [
                        [[zero, const(-1)], [zero, zero]],
                        [[one, zero], [zero, zero]],
                    ])],
                    poly=[
                        [[zero, zero], [zero, const(0) - t]],
                        [[zero, zero], [zero, one]],
                    ])
    return A, B, P


LAX_MU = 1.0
LAX_LAMBDAS = (0.3, 0.2, -0.5)
LAX_C = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
LAX_X0 = (0.0, 1.0, 1j)
LAX_BASE = 3.2 + 1.7j


def random_simple_pole_system(n: int, seed: int,
                              eig_radius: float = 0.4) -> ParamRationalMatrix:
    """A = R/x + D/(x-2): simple pole at 0, non-resonant by construction.

    The residue R has eigenvalues inside a disk of radius ``eig_radius``
    (< 1/2), so no two eigenvalues can differ by a nonzero integer.
    """
    rng = np.random.default_rng(seed)
    eigs = eig_radius * np.sqrt(rng.uniform(size=n)) * np.exp(
        2j * np.pi * rng.uniform(size=n))
    while True:
        P = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        if abs(np.linalg.det(P)) > 0.3:
            break
    R = P @ np.diag(eigs) @ np.linalg.inv(P)
    D = 0.3 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return make_system(n, 0, poles=[(const(0), [constant_matrix(R)]),
                                    (const(2), [constant_matrix(D)])])
