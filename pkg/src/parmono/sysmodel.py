"""Rational-in-x matrix systems with parameter-dependent coefficients.

A system ``dY/dx = A(x,t) Y`` is stored in partial-fraction form:

    A(x,t) = sum_i  sum_{k=1..m_i}  L_{i,k}(t) / (x - alpha_i(t))^k
           + sum_d  P_d(t) x^d

with every Laurent coefficient matrix ``L_{i,k}``, polynomial coefficient
matrix ``P_d`` and pole location ``alpha_i`` given by closed-form parameter
expressions.  Laurent coefficient lists are stored highest order first.

This module provides construction/serialization, pointwise evaluation with a
pole guard, freezing at a parameter point (numeric arrays for the integration
kernels), exact differentiation in x and in each parameter, gauge
transformation reports, and seeded sampling-based equality checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ConfigError,
    NearPoleError,
    PoleCollisionError,
    SamplingExhaustedError,
    SingularGaugeError,
)
from .expr import (
    Const,
    ParamExpr,
    ParameterPoint,
    as_parameter_point,
    diff_expr,
    eval_expr,
    expr_to_src,
    parse_expr,
)
from .jsonutil import dump_json, load_json
from .util import norm_inf, rel_scale

__all__ = [
    "ExprMatrix", "PoleLocus", "ParamRationalMatrix", "FrozenSystem",
    "GaugeTransform", "GaugeReport",
    "as_expr_matrix", "eval_expr_matrix", "diff_expr_matrix",
    "make_system", "eval_matrix", "dt_matrix", "dx_matrix",
    "pole_orders", "apply_gauge", "max_sampled_difference",
    "identity_sample_count",
    "DEFAULT_GUARD", "DROP_TOL", "IDENTITY_SEED",
]

DEFAULT_GUARD = 1e-12     # pole guard radius for evaluation/integration
DROP_TOL = 1e-13          # magnitude below which sampled coefficients count as zero
IDENTITY_SEED = 0xA11CE   # seed for sampling-based identity/equality checks
_PRUNE_POINTS = 20        # t-samples used to detect identically-zero coefficients

# type alias: immutable matrix of expressions (tuple of row-tuples)
ExprMatrix = tuple


# --- expression-matrix helpers ------------------------------------------------

def as_expr_matrix(rows, num_params: int, dimension=None) -> ExprMatrix:
    """Coerce nested lists of strings/numbers/expressions to an ExprMatrix."""
    out = []
    for row in rows:
        out.append(tuple(
            e if isinstance(e, ParamExpr)
            else parse_expr(e, num_params) if isinstance(e, str)
            else Const(complex(e))
            for e in row))
    mat = tuple(out)
    n = dimension if dimension is not None else len(mat)
    if len(mat) != n or any(len(r) != n for r in mat):
        raise ConfigError(f"matrix is not {n}x{n}")
    return mat


def eval_expr_matrix(mat: ExprMatrix, t) -> np.ndarray:
    return np.array([[eval_expr(e, t) for e in row] for row in mat],
                    dtype=complex)


def diff_expr_matrix(mat: ExprMatrix, j: int) -> ExprMatrix:
    return tuple(tuple(diff_expr(e, j) for e in row) for row in mat)


def _zero_expr_matrix(n: int) -> ExprMatrix:
    z = Const(0j)
    return tuple((z,) * n for _ in range(n))


def _matrix_src(mat: ExprMatrix) -> list:
    return [[expr_to_src(e) for e in row] for row in mat]


def _structurally_zero(mat: ExprMatrix) -> bool:
    return all(isinstance(e, Const) and e.value == 0 for row in mat for e in row)


def _identically_zero(mat: ExprMatrix, num_params: int, rng) -> bool:
    """Structural check, then seeded sampling at _PRUNE_POINTS points."""
    if _structurally_zero(mat):
        return True
    for _ in range(_PRUNE_POINTS):
        t = _disk_samples(rng, num_params, 1.0)
        try:
            if norm_inf(eval_expr_matrix(mat, t)) > DROP_TOL:
                return False
        except Exception:
            return False  # not evaluable here: cannot certify zero
    return True


def _disk_samples(rng, count: int, radius: float):
    """Uniform complex samples in the disk of the given radius."""
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, size=count))
    th = rng.uniform(-np.pi, np.pi, size=count)
    return tuple(complex(rv * np.cos(tv), rv * np.sin(tv))
                 for rv, tv in zip(r, th))


# --- core data types ----------------------------------------------------------

@dataclass(frozen=True)
class PoleLocus:
    """One pole location with its Laurent coefficients (highest order first)."""

    location: ParamExpr
    laurent: tuple  # tuple[ExprMatrix, ...]; laurent[0] has order len(laurent)

    @property
    def order(self) -> int:
        return len(self.laurent)


@dataclass(frozen=True)
class ParamRationalMatrix:
    """Partial-fraction form of a rational-in-x matrix A(x, t)."""

    dimension: int
    num_params: int
    poles: tuple  # tuple[PoleLocus, ...]
    poly: tuple = ()  # tuple[ExprMatrix, ...], index = degree in x

    # -- constructors / serialization -----------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "ParamRationalMatrix":
        try:
            n = int(data["dimension"])
            r = int(data["num_params"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad system header: {exc}") from None
        if n < 1 or r < 0:
            raise ConfigError(f"bad dimensions n={n}, r={r}")
        poles = []
        for entry in data.get("poles", ()):
            loc = entry["location"]
            loc = loc if isinstance(loc, ParamExpr) else parse_expr(str(loc), r)
            laurent = tuple(as_expr_matrix(m, r, n) for m in entry["laurent"])
            poles.append(PoleLocus(loc, laurent))
        poly = tuple(as_expr_matrix(m, r, n) for m in data.get("poly", ()))
        return cls(n, r, tuple(poles), poly)._pruned()

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "num_params": self.num_params,
            "poles": [
                {"location": expr_to_src(p.location),
                 "laurent": [_matrix_src(m) for m in p.laurent]}
                for p in self.poles
            ],
            "poly": [_matrix_src(m) for m in self.poly],
        }

    @classmethod
    def load(cls, path) -> "ParamRationalMatrix":
        return cls.from_dict(load_json(path))

    def dump(self, path) -> None:
        dump_json(self.to_dict(), path)

    def _pruned(self) -> "ParamRationalMatrix":
        """Drop identically-zero leading Laurent terms, empty loci and
        trailing zero polynomial coefficients (seeded 20-point sampling)."""
        rng = np.random.default_rng(IDENTITY_SEED)
        poles = []
        for p in self.poles:
            laurent = list(p.laurent)
            while laurent and _identically_zero(laurent[0], self.num_params, rng):
                laurent.pop(0)
            if laurent:
                poles.append(PoleLocus(p.location, tuple(laurent)))
        poly = list(self.poly)
        while poly and _identically_zero(poly[-1], self.num_params, rng):
            poly.pop()
        return ParamRationalMatrix(self.dimension, self.num_params,
                                   tuple(poles), tuple(poly))

    # -- pointwise data --------------------------------------------------------

    def pole_locations(self, t, collision_check: bool = True) -> np.ndarray:
        """Evaluated pole locations at t; optionally reject collisions."""
        t = as_parameter_point(t, self.num_params)
        locs = np.array([eval_expr(p.location, t) for p in self.poles],
                        dtype=complex)
        if collision_check:
            for a in range(len(locs)):
                for b in range(a + 1, len(locs)):
                    tol = 1e-9 * max(1.0, abs(locs[a]), abs(locs[b]))
                    if abs(locs[a] - locs[b]) < tol:
                        raise PoleCollisionError(
                            f"poles {a} and {b} collide at t",
                            locations=(locs[a], locs[b]), t=tuple(t))
        return locs

    def freeze(self, t, guard: float = DEFAULT_GUARD) -> "FrozenSystem":
        """Evaluate all coefficients at t, producing numeric kernel input."""
        t = as_parameter_point(t, self.num_params)
        n = self.dimension
        locs = self.pole_locations(t)
        offsets = [0]
        rows = []
        for p in self.poles:
            for mat in p.laurent:
                rows.append(eval_expr_matrix(mat, t))
            offsets.append(len(rows))
        laurent = (np.array(rows, dtype=complex) if rows
                   else np.zeros((0, n, n), dtype=complex))
        poly = (np.array([eval_expr_matrix(m, t) for m in self.poly],
                         dtype=complex) if self.poly
                else np.zeros((0, n, n), dtype=complex))
        return FrozenSystem(n, locs, np.array(offsets, dtype=np.int64),
                            laurent, poly, float(guard))

    def eval(self, x, t, guard: float = DEFAULT_GUARD) -> np.ndarray:
        return self.freeze(t, guard).eval(complex(x))

    # -- calculus --------------------------------------------------------------

    def dx(self) -> "ParamRationalMatrix":
        return dx_matrix(self)

    def dt(self, j: int) -> "ParamRationalMatrix":
        return dt_matrix(self, j)


@dataclass(frozen=True)
class FrozenSystem:
    """A(x) at fixed t: numeric partial-fraction data for the kernels.

    ``laurent[offsets[p]:offsets[p+1]]`` are pole p's coefficient matrices,
    highest order first.
    """

    n: int
    locs: np.ndarray      # complex128[P]
    offsets: np.ndarray   # int64[P+1]
    laurent: np.ndarray   # complex128[L, n, n]
    poly: np.ndarray      # complex128[D, n, n]
    guard: float

    def eval(self, x: complex) -> np.ndarray:
        x = complex(x)
        A = np.zeros((self.n, self.n), dtype=complex)
        for p in range(len(self.locs)):
            u = x - self.locs[p]
            if abs(u) < self.guard:
                raise NearPoleError("evaluation inside pole guard radius",
                                    x=x, pole=self.locs[p])
            inv = 1.0 / u
            w = inv
            lo, hi = self.offsets[p], self.offsets[p + 1]
            for row in range(hi - 1, lo - 1, -1):  # ascending order 1..m
                A += w * self.laurent[row]
                w *= inv
        if len(self.poly):
            acc = self.poly[-1].copy()
            for d in range(len(self.poly) - 2, -1, -1):
                acc *= x
                acc += self.poly[d]
            A += acc
        return A

    def min_pole_distance(self, x: complex) -> float:
        if len(self.locs) == 0:
            return np.inf
        return float(np.min(np.abs(np.asarray(self.locs) - complex(x))))


# --- construction sugar -------------------------------------------------------

def make_system(dimension: int, num_params: int, poles=(), poly=()) -> ParamRationalMatrix:
    """Build a system from (location, [laurent matrices]) pairs.

    Accepts strings, numbers or expression trees everywhere; applies the same
    load-time pruning as JSON deserialization.
    """
    n, r = dimension, num_params
    locs = []
    for loc, laurent in poles:
        loc = loc if isinstance(loc, ParamExpr) else parse_expr(str(loc), r)
        locs.append(PoleLocus(loc, tuple(as_expr_matrix(m, r, n) for m in laurent)))
    return ParamRationalMatrix(
        n, r, tuple(locs),
        tuple(as_expr_matrix(m, r, n) for m in poly))._pruned()


def eval_matrix(A: ParamRationalMatrix, x, t, guard: float = DEFAULT_GUARD) -> np.ndarray:
    """A(x, t) as a numeric matrix (guard-checked)."""
    return A.eval(x, t, guard)


# --- exact differentiation ----------------------------------------------------

def dx_matrix(A: ParamRationalMatrix) -> ParamRationalMatrix:
    """Exact d/dx in partial-fraction form.

    d/dx [L_k (x-a)^-k] = -k L_k (x-a)^-(k+1), so each locus gains one order;
    the polynomial part differentiates termwise.
    """
    poles = []
    for p in A.poles:
        m = p.order
        new = []
        for idx, mat in enumerate(p.laurent):
            k = m - idx  # this matrix's order
            new.append(tuple(tuple(Const(complex(-k)) * e for e in row)
                             for row in mat))
        new.append(_zero_expr_matrix(A.dimension))  # vacated order 1
        poles.append(PoleLocus(p.location, tuple(new)))
    poly = []
    for d in range(1, len(A.poly)):
        poly.append(tuple(tuple(Const(complex(d)) * e for e in row)
                          for row in A.poly[d]))
    return ParamRationalMatrix(A.dimension, A.num_params,
                               tuple(poles), tuple(poly))._pruned()


def dt_matrix(A: ParamRationalMatrix, j: int) -> ParamRationalMatrix:
    """Exact d/dt_j in partial-fraction form (1-based j).

    With u = x - alpha(t):  d/dt [L_k u^-k] = L_k' u^-k + k alpha' L_k u^-(k+1),
    so order k of the result collects  L_k' + (k-1) alpha' L_{k-1}.
    """
    if not 1 <= j <= A.num_params:
        from .errors import ParamRangeError
        raise ParamRangeError(
            f"direction {j} out of range 1..{A.num_params}")
    n = A.dimension
    poles = []
    for p in A.poles:
        m = p.order
        dalpha = diff_expr(p.location, j)

        def coeff(k):  # order-k matrix of the original locus, 0 outside range
            return p.laurent[m - k] if 1 <= k <= m else _zero_expr_matrix(n)

        new = []
        for k in range(m + 1, 0, -1):  # highest order first
            dmat = diff_expr_matrix(coeff(k), j)
            prev = coeff(k - 1)
            scale = Const(complex(k - 1)) * dalpha
            new.append(tuple(
                tuple(dmat[a][b] + scale * prev[a][b] for b in range(n))
                for a in range(n)))
        poles.append(PoleLocus(p.location, tuple(new)))
    poly = tuple(diff_expr_matrix(mat, j) for mat in A.poly)
    return ParamRationalMatrix(n, A.num_params, tuple(poles), poly)._pruned()


# --- pole orders --------------------------------------------------------------

def pole_orders(A: ParamRationalMatrix, t, drop_tol: float = DROP_TOL) -> list:
    """Effective (location, order) pairs at t.

    Declared coefficients that vanish at this t (max entry below drop_tol
    relative to the locus coefficient scale) do not count toward the order;
    loci whose coefficients all vanish are dropped from the list.
    """
    t = as_parameter_point(t, A.num_params)
    locs = A.pole_locations(t)
    out = []
    for p, locus in enumerate(A.poles):
        mats = [eval_expr_matrix(m, t) for m in locus.laurent]
        scale = max(1.0, max((norm_inf(m) for m in mats), default=0.0))
        order = len(mats)
        while order > 0 and norm_inf(mats[len(mats) - order]) < drop_tol * scale:
            order -= 1
        if order > 0:
            out.append((complex(locs[p]), order))
    return out


# --- gauge transformations ----------------------------------------------------

@dataclass(frozen=True)
class GaugeTransform:
    """An invertible rational gauge P(x, t) with its exact x-derivative."""

    matrix: ParamRationalMatrix
    derivative: ParamRationalMatrix

    @classmethod
    def from_matrix(cls, P: ParamRationalMatrix) -> "GaugeTransform":
        return cls(P, dx_matrix(P))


@dataclass
class GaugeReport:
    """Result of a gauge-transformation check.

    ``evaluate(x, t)`` returns B(x,t) = (dP/dx) P^-1 + P A P^-1 pointwise.
    ``max_residual`` is the entrywise sup-norm gap to the candidate B over the
    seeded samples (None when no candidate was supplied).
    """

    evaluate: Callable
    max_residual: float | None
    samples_used: int
    seed: int


def _gauge_pointwise(A, gauge, x, t, guard):
    fp = gauge.matrix.freeze(t, guard)
    fdp = gauge.derivative.freeze(t, guard)
    fa = A.freeze(t, guard)
    Pm = fp.eval(x)
    if abs(np.linalg.det(Pm)) < 1e-10 * rel_scale(Pm) ** A.dimension:
        raise SingularGaugeError("gauge matrix numerically singular",
                                 x=x, t=tuple(t))
    Pinv = np.linalg.inv(Pm)
    return fdp.eval(x) @ Pinv + Pm @ fa.eval(x) @ Pinv


def apply_gauge(A: ParamRationalMatrix, gauge, x_samples: int = 10,
                t_samples: int = 10, seed: int = 0, b_candidate=None, *,
                region_radius: float = 3.0, t_radius: float = 1.0,
                margin: float = 0.25, guard: float = DEFAULT_GUARD) -> GaugeReport:
    """Transform A by the gauge P and compare with an optional candidate.

    Samples are drawn from seeded uniform disks (radius ``t_radius`` per
    parameter, ``region_radius`` in x) with x rejected within ``margin`` of
    any pole of A or P, so the comparison stays well-conditioned.
    """
    if isinstance(gauge, ParamRationalMatrix):
        gauge = GaugeTransform.from_matrix(gauge)
    r = A.num_params

    def evaluate(x, t):
        return _gauge_pointwise(A, gauge, complex(x),
                                as_parameter_point(t, r), guard)

    rng = np.random.default_rng(seed)
    worst = None
    used = 0
    for _ in range(t_samples):
        t = as_parameter_point(_disk_samples(rng, r, t_radius), r)
        fa = A.freeze(t, guard)
        fp = gauge.matrix.freeze(t, guard)
        fdp = gauge.derivative.freeze(t, guard)
        fb = b_candidate.freeze(t, guard) if b_candidate is not None else None
        avoid = np.concatenate([fa.locs, fp.locs, fdp.locs,
                                fb.locs if fb is not None else []])
        for _ in range(x_samples):
            x = _admissible_point(rng, avoid, region_radius, margin)
            Pm = fp.eval(x)
            if abs(np.linalg.det(Pm)) < 1e-10 * rel_scale(Pm) ** A.dimension:
                raise SingularGaugeError("gauge matrix numerically singular",
                                         x=x, t=tuple(t))
            Pinv = np.linalg.inv(Pm)
            B = fdp.eval(x) @ Pinv + Pm @ fa.eval(x) @ Pinv
            used += 1
            if fb is not None:
                resid = norm_inf(B - fb.eval(x))
                worst = resid if worst is None else max(worst, resid)
    return GaugeReport(evaluate=evaluate, max_residual=worst,
                       samples_used=used, seed=seed)


def _admissible_point(rng, avoid, radius, margin, tries: int = 200) -> complex:
    avoid = np.asarray(avoid, dtype=complex)
    for _ in range(tries):
        (x,) = _disk_samples(rng, 1, radius)
        if avoid.size == 0 or np.min(np.abs(avoid - x)) >= margin:
            return x
    raise SamplingExhaustedError(
        f"no sample point at distance >= {margin} from all poles "
        f"within {tries} draws")


# --- sampled equality ---------------------------------------------------------

def identity_sample_count(*mats: ParamRationalMatrix) -> int:
    """Number of x-samples sufficient to separate the given rational shapes:
    2 * (max pole order * pole count + polynomial degree) + 8."""
    budget = 0
    for A in mats:
        max_order = max((p.order for p in A.poles), default=0)
        deg = len(A.poly) - 1 if A.poly else 0
        budget = max(budget, max_order * len(A.poles) + deg)
    return 2 * budget + 8


def max_sampled_difference(A: ParamRationalMatrix, B: ParamRationalMatrix,
                           seed: int = IDENTITY_SEED, num_points=None,
                           t_samples: int = 5, *, x_radius: float = 3.0,
                           t_radius: float = 1.0, margin: float = 0.25,
                           guard: float = DEFAULT_GUARD) -> float:
    """Max entrywise |A - B| over seeded random (x, t) samples."""
    if A.dimension != B.dimension or A.num_params != B.num_params:
        raise ConfigError("systems have incompatible shapes")
    if num_points is None:
        num_points = identity_sample_count(A, B)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(t_samples):
        t = as_parameter_point(_disk_samples(rng, A.num_params, t_radius),
                               A.num_params)
        fa, fbz = A.freeze(t, guard), B.freeze(t, guard)
        avoid = np.concatenate([fa.locs, fbz.locs])
        for _ in range(num_points):
            x = _admissible_point(rng, avoid, x_radius, margin)
            worst = max(worst, norm_inf(fa.eval(x) - fbz.eval(x)))
    return worst
