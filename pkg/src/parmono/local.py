"""Local solutions at simple poles and growth diagnostics.

At a simple pole alpha with residue R = A_{-1}(t), a fundamental solution has
the form Y(x) = H(x) (x - alpha)^R with H holomorphic, H(alpha) = I, provided
no two eigenvalues of R differ by a nonzero integer (non-resonance).  The
series coefficients solve the Sylvester recursions

    H_k (R + k I) - R H_k = sum_{j=0}^{k-1} A_{k-1-j} H_j,   k = 1..N,

where A_m are the Taylor coefficients at alpha of the regular part of A.
Those Taylor coefficients are computed exactly from the partial-fraction form
(geometric/binomial re-expansion of the other poles and of the polynomial
part), then evaluated at t.

The growth probe integrates toward a pole along a ray and classifies the
growth of ||Y|| as moderate (regular-singular-like) or suspected irregular.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.linalg import expm, solve_sylvester

from .errors import (
    IntegrationFailureError,
    NotSimplePoleError,
    ResonantSpectrumError,
)
from .expr import ParameterPoint, as_parameter_point
from .monodromy import Segment, integrate_along
from .sysmodel import (
    DEFAULT_GUARD,
    DROP_TOL,
    ParamRationalMatrix,
    eval_expr_matrix,
)
from .util import norm_inf

__all__ = [
    "LocalSolution", "GrowthReport",
    "frobenius_solution", "local_monodromy", "regular_part_taylor",
    "series_residual", "residual_slope", "growth_probe",
    "RESONANCE_TOL", "SIGMA_MAX",
]

RESONANCE_TOL = 1e-9
SIGMA_MAX = 50.0


# --- exact Taylor data --------------------------------------------------------

def regular_part_taylor(A: ParamRationalMatrix, pole_index: int, t,
                        order: int) -> np.ndarray:
    """Taylor coefficients A_0..A_{order-1} at alpha_i of A minus its own
    singular part, evaluated at t.

    Uses (x-gamma)^{-k} = (alpha-gamma)^{-k} sum_j C(k+j-1, j)
    (u/(gamma-alpha))^j with u = x - alpha for every other pole gamma, and
    binomial re-expansion of the polynomial part.
    """
    t = as_parameter_point(t, A.num_params)
    n = A.dimension
    locs = A.pole_locations(t)
    alpha = complex(locs[pole_index])
    out = np.zeros((order, n, n), dtype=complex)
    for p, locus in enumerate(A.poles):
        if p == pole_index:
            continue
        c = complex(locs[p]) - alpha  # u = c is the shifted pole
        m = locus.order
        for idx, mat in enumerate(locus.laurent):
            k = m - idx
            Lk = eval_expr_matrix(mat, t)
            base = (-c) ** (-k)
            for j in range(order):
                out[j] += Lk * (base * comb(k + j - 1, j) * c ** (-j))
    for d, mat in enumerate(A.poly):
        Pd = eval_expr_matrix(mat, t)
        for j in range(min(d, order - 1) + 1):
            out[j] += Pd * (comb(d, j) * alpha ** (d - j))
    return out


# --- Frobenius solutions ------------------------------------------------------

@dataclass
class LocalSolution:
    """Truncated Frobenius solution H(x) (x-alpha)^R at a simple pole."""

    pole_index: int
    location: complex
    exponent: np.ndarray        # residue matrix R at t
    series: np.ndarray          # H_0..H_N, shape (N+1, n, n), H_0 = I
    t: ParameterPoint
    radius_estimate: float      # half the distance to the nearest other pole

    @property
    def order(self) -> int:
        return len(self.series) - 1

    def regular_part(self, x) -> np.ndarray:
        """H(x) by Horner evaluation of the truncated series."""
        u = complex(x) - self.location
        acc = self.series[-1].copy()
        for k in range(len(self.series) - 2, -1, -1):
            acc *= u
            acc += self.series[k]
        return acc

    def regular_part_dx(self, x) -> np.ndarray:
        u = complex(x) - self.location
        top = len(self.series) - 1
        acc = top * self.series[top]
        for k in range(top - 1, 0, -1):
            acc = acc * u + k * self.series[k]
        return acc

    def fundamental(self, x) -> np.ndarray:
        """Y(x) = H(x) expm(log(x-alpha) R), principal branch of the log."""
        u = complex(x) - self.location
        return self.regular_part(x) @ expm(cmath.log(u) * self.exponent)


def _eigenvalue_gaps(eigs, max_int: int, tol: float):
    """Pairs (gap, nearest integer) that violate non-resonance."""
    bad = []
    for a in range(len(eigs)):
        for b in range(len(eigs)):
            if a == b:
                continue
            gap = eigs[a] - eigs[b]
            nearest = round(gap.real)
            if (nearest != 0 and abs(nearest) <= max_int
                    and abs(gap - nearest) <= tol):
                bad.append((complex(gap), int(nearest)))
    return bad


def frobenius_solution(A: ParamRationalMatrix, pole_index: int, t,
                       order: int = 20, resonance_tol: float = RESONANCE_TOL,
                       guard: float = DEFAULT_GUARD) -> LocalSolution:
    """Truncated local fundamental solution at a simple pole.

    Raises NotSimplePoleError unless the pole has effective order exactly 1
    at t, and ResonantSpectrumError when residue eigenvalues differ by a
    nonzero integer up to ``order`` (within ``resonance_tol``).
    """
    t = as_parameter_point(t, A.num_params)
    if not 0 <= pole_index < len(A.poles):
        raise NotSimplePoleError(f"no declared pole with index {pole_index}")
    locus = A.poles[pole_index]
    mats = [eval_expr_matrix(m, t) for m in locus.laurent]
    scale = max(1.0, max((norm_inf(m) for m in mats), default=0.0))
    eff = len(mats)
    while eff > 0 and norm_inf(mats[len(mats) - eff]) < DROP_TOL * scale:
        eff -= 1
    if eff != 1:
        raise NotSimplePoleError(
            f"pole {pole_index} has effective order {eff} at this t",
            order=eff)
    R = mats[-1]
    n = A.dimension
    eigs = np.linalg.eigvals(R)
    bad = _eigenvalue_gaps(eigs, order, resonance_tol)
    if bad:
        raise ResonantSpectrumError(
            "residue eigenvalues differ by a nonzero integer",
            gaps=bad[:4], eigenvalues=[complex(e) for e in eigs])

    coeffs = regular_part_taylor(A, pole_index, t, order)
    H = np.zeros((order + 1, n, n), dtype=complex)
    H[0] = np.eye(n)
    for k in range(1, order + 1):
        rhs = np.zeros((n, n), dtype=complex)
        for j in range(k):
            rhs += coeffs[k - 1 - j] @ H[j]
        # H_k (R + kI) - R H_k = rhs  <=>  (-R) H_k + H_k (R + kI) = rhs
        H[k] = solve_sylvester(-R, R + k * np.eye(n), rhs)

    locs = A.pole_locations(t)
    alpha = complex(locs[pole_index])
    others = np.delete(locs, pole_index)
    radius = float(np.min(np.abs(others - alpha))) / 2.0 if len(others) else 1.0
    return LocalSolution(pole_index=pole_index, location=alpha,
                         exponent=R, series=H, t=t, radius_estimate=radius)


def local_monodromy(sol: LocalSolution) -> np.ndarray:
    """Monodromy of the Frobenius solution around its pole: expm(2 pi i R)."""
    return expm(2j * np.pi * sol.exponent)


# --- residual diagnostics -----------------------------------------------------

def series_residual(sol: LocalSolution, A: ParamRationalMatrix, rho: float,
                    num_points: int = 8, guard: float = DEFAULT_GUARD) -> float:
    """Max over a circle |x-alpha| = rho of ||H' + H R/u - A H||.

    This is the defect of the regular-part equation; for a truncation at
    order N it scales like rho^N as rho -> 0.
    """
    worst = 0.0
    frozen = A.freeze(sol.t, guard)
    for k in range(num_points):
        u = rho * cmath.exp(2j * cmath.pi * (k + 0.125) / num_points)
        x = sol.location + u
        H = sol.regular_part(x)
        dH = sol.regular_part_dx(x)
        D = dH + H @ sol.exponent / u - frozen.eval(x) @ H
        worst = max(worst, norm_inf(D))
    return worst


def residual_slope(sol: LocalSolution, A: ParamRationalMatrix, radii,
                   num_points: int = 8) -> tuple:
    """Least-squares slope of log residual vs log radius; returns
    (slope, residuals list)."""
    rs = [series_residual(sol, A, float(r), num_points) for r in radii]
    logs = np.log(np.maximum(rs, 1e-290))
    slope = float(np.polyfit(np.log(np.asarray(radii, float)), logs, 1)[0])
    return slope, rs


# --- growth probe -------------------------------------------------------------

@dataclass
class GrowthReport:
    """Growth of ||Y|| along a ray into a pole, with a log-log line fit.

    verdict: "moderate_growth" (consistent with a regular singular point) or
    "suspected_irregular" (fit slope beyond sigma_max, strongly nonlinear
    log-log data, or overflow during approach).
    """

    pole_index: int
    ray_angle: float
    radii: np.ndarray
    log_norms: np.ndarray
    slope: float
    fit_deviation: float
    verdict: str
    detail: str = ""


def growth_probe(A: ParamRationalMatrix, pole_index: int, t,
                 ray_angle: float = 0.0, num_points: int = 12,
                 start_radius: float | None = None, ratio: float = 0.65,
                 sigma_max: float = SIGMA_MAX, fit_tol: float = 0.75,
                 rtol: float = 1e-10, atol: float = 1e-12,
                 guard: float = DEFAULT_GUARD) -> GrowthReport:
    """Integrate Y toward pole ``pole_index`` along the ray at ``ray_angle``
    and classify the growth of ||Y||.

    The probe starts at a regular point (half the distance to the nearest
    other pole by default, at most 1) and steps down geometrically.
    """
    t = as_parameter_point(t, A.num_params)
    locs = A.pole_locations(t)
    alpha = complex(locs[pole_index])
    others = np.delete(locs, pole_index)
    if start_radius is None:
        start_radius = 1.0
        if len(others):
            start_radius = min(1.0, float(np.min(np.abs(others - alpha))) / 2.0)
    radii = start_radius * ratio ** np.arange(num_points)
    radii = radii[radii > 100.0 * guard]
    direction = cmath.exp(1j * ray_angle)
    points = [alpha + r * direction for r in radii]

    Y = np.eye(A.dimension, dtype=complex)
    log_norms = [np.log(max(norm_inf(Y), 1e-290))]
    detail = ""
    for a, b in zip(points[:-1], points[1:]):
        try:
            Y, _ = integrate_along(A, [Segment(a, b)], t, Y, rtol, atol, guard)
        except IntegrationFailureError as exc:
            detail = f"aborted approaching the pole: {exc.code}"
            break
        log_norms.append(np.log(max(norm_inf(Y), 1e-290)))
    log_norms = np.array(log_norms)
    used = radii[:len(log_norms)]

    if len(log_norms) >= 3:
        ell = np.log(used)
        slope, intercept = np.polyfit(ell, log_norms, 1)
        fit_dev = float(np.max(np.abs(slope * ell + intercept - log_norms)))
        slope = float(slope)
    else:  # overflow almost immediately
        slope, fit_dev = np.inf, np.inf
    if detail or abs(slope) > sigma_max or fit_dev > fit_tol:
        verdict = "suspected_irregular"
    else:
        verdict = "moderate_growth"
    return GrowthReport(pole_index=pole_index, ray_angle=float(ray_angle),
                        radii=used, log_norms=log_norms, slope=slope,
                        fit_deviation=fit_dev, verdict=verdict, detail=detail)
