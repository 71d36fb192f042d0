"""Frobenius series at simple poles, residual diagnostics, growth probe."""

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import random_simple_pole_system, upper_triangular_system
from parmono.errors import NotSimplePoleError, ResonantSpectrumError
from parmono.expr import const, param
from parmono.local import (
    frobenius_solution,
    growth_probe,
    local_monodromy,
    regular_part_taylor,
    residual_slope,
    series_residual,
)
from parmono.monodromy import LoopSpec, Segment, integrate_along, monodromy_matrix
from parmono.sysmodel import ParamRationalMatrix, PoleLocus
from parmono.util import eig_multiset_distance, norm_inf


def _expr_matrix(M):
    return tuple(tuple(const(complex(v)) for v in row) for row in M)


def test_regular_part_taylor_two_poles_and_poly():
    R = np.array([[0.2, 0.1], [0.0, -0.3]])
    D = np.array([[0.5, 0.0], [0.25, -0.5]])
    P0 = np.array([[1.0, 2.0], [3.0, 4.0]])
    P1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    A = ParamRationalMatrix(
        2, 0,
        (PoleLocus(const(0.0), (_expr_matrix(R),)),
         PoleLocus(const(2.0), (_expr_matrix(D),))),
        (_expr_matrix(P0), _expr_matrix(P1)))
    coeffs = regular_part_taylor(A, 0, (), 5)
    # D/(x-2) = -(D/2) sum_j (x/2)^j around 0; poly adds P0 + P1 x
    for j in range(5):
        expect = -D * 0.5 ** (j + 1)
        if j == 0:
            expect = expect + P0
        if j == 1:
            expect = expect + P1
        assert norm_inf(coeffs[j] - expect) < 1e-14


def test_frobenius_series_solves_equation():
    A = random_simple_pole_system(2, seed=5)
    sol = frobenius_solution(A, 0, (), order=25)
    assert sol.order == 25
    assert norm_inf(sol.series[0] - np.eye(2)) == 0.0
    assert sol.radius_estimate == pytest.approx(1.0)  # poles at 0 and 2
    rho = sol.radius_estimate / 4.0
    assert series_residual(sol, A, rho) < 1e-12


def test_frobenius_matches_numeric_continuation():
    A = random_simple_pole_system(2, seed=11)
    sol = frobenius_solution(A, 0, (), order=30)
    # connect two points near the pole inside the disk of convergence,
    # staying in the right half-plane so the principal log branch is shared
    x1 = sol.location + 0.3
    x2 = sol.location + 0.2j + 0.1
    Y, _ = integrate_along(A, [Segment(x1, x2)], (), sol.fundamental(x1))
    assert norm_inf(Y - sol.fundamental(x2)) < 1e-9


def test_local_monodromy_conjugate_to_contour():
    for seed, n in [(3, 2), (4, 3)]:
        A = random_simple_pole_system(n, seed=seed)
        sol = frobenius_solution(A, 0, (), order=20)
        M_local = local_monodromy(sol)
        eig_expected = np.exp(2j * np.pi * np.linalg.eigvals(sol.exponent))
        assert eig_multiset_distance(
            M_local, np.diag(eig_expected)) < 1e-10
        rec = monodromy_matrix(A, LoopSpec(0, sol.location + 0.9), ())
        assert eig_multiset_distance(M_local, rec.matrix) < 1e-8


def test_residual_slope_tracks_truncation_order():
    A = random_simple_pole_system(2, seed=7)
    for order in (6, 10):
        sol = frobenius_solution(A, 0, (), order=order)
        # start at the (conservative) radius estimate and stop at a factor
        # 8 below it, keeping every residual above the double-precision
        # floor even at order 10
        rho = sol.radius_estimate
        radii = [rho * 0.125 ** (k / 5.0) for k in range(6)]
        slope, residuals = residual_slope(sol, A, radii)
        assert slope >= order - 0.5
        assert residuals == sorted(residuals, reverse=True)


def test_resonant_residue_rejected():
    # residue [[1,0],[0,0]]: eigenvalue gap is exactly the integer 1
    with pytest.raises(ResonantSpectrumError) as info:
        frobenius_solution(upper_triangular_system(), 0, ())
    assert info.value.code == "RESONANT_SPECTRUM"
    assert info.value.context["gaps"]


def test_non_simple_pole_rejected():
    A = ParamRationalMatrix(
        1, 1,
        (PoleLocus(const(0.0), (((param(1),),), ((const(0.3),),))),),
        ())
    with pytest.raises(NotSimplePoleError):
        frobenius_solution(A, 0, (1.0,))
    # the order-2 coefficient vanishes at t = 0: effectively simple again
    sol = frobenius_solution(A, 0, (0.0,))
    assert sol.exponent[0, 0] == pytest.approx(0.3)
    with pytest.raises(NotSimplePoleError):
        frobenius_solution(A, 5, (0.0,))


def test_growth_probe_moderate_on_fuchsian():
    A = random_simple_pole_system(2, seed=9)
    report = growth_probe(A, 0, ())
    assert report.verdict == "moderate_growth"
    # |slope| is bounded by the largest residue eigenvalue magnitude (~0.4)
    assert abs(report.slope) < 2.0
    assert report.fit_deviation < 0.2


def test_growth_probe_flags_irregular():
    # scalar (1/x^2) pole: Y = exp(-1/x + const), essential growth on the ray
    A = ParamRationalMatrix(
        1, 0,
        (PoleLocus(const(0.0), (_expr_matrix([[1.0]]), _expr_matrix([[0.0]]))),),
        ())
    report = growth_probe(A, 0, (), ray_angle=np.pi)
    assert report.verdict == "suspected_irregular"
    report2 = growth_probe(A, 0, (), ray_angle=0.0)
    assert report2.verdict == "suspected_irregular"
