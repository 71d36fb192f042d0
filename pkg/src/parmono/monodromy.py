"""Numerical monodromy of dY/dx = A(x,t) Y along loops in the x-plane.

Loops are segment-circle-segment paths from a regular base point around a
single target pole, traversed counterclockwise by default.  Fundamental
solutions are normalized to Y(x0) = I, and analytic continuation along a loop
acts on the right: the continued solution is Y * M.

Grid computations evaluate a family of loops over a set of parameter points
(t-major, loop-minor order) and record per-cell failures with stable error
codes instead of aborting the whole grid.
"""

from __future__ import annotations

import cmath
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._kernels import integrate_polyline
from .errors import (
    IntegrationFailureError,
    MissingRecordError,
    NearPoleError,
    ParmonoError,
    PoleMigrationError,
)
from .expr import ParameterPoint, as_parameter_point
from .jsonutil import complex_to_pair, matrix_to_pairs, pair_to_complex, pairs_to_matrix
from .sysmodel import (
    DEFAULT_GUARD,
    DROP_TOL,
    ParamRationalMatrix,
    eval_expr_matrix,
)
from .util import norm_inf, rel_scale

__all__ = [
    "Segment", "Arc", "LoopSpec", "TGrid", "MonodromyRecord",
    "encode_path", "loop_path", "integrate_along",
    "monodromy_matrix", "monodromy_grid", "product_relation",
    "records_to_dicts", "records_from_dicts",
    "DEFAULT_RTOL", "DEFAULT_ATOL",
]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12

_SEGMENT = 0
_ARC = 1


# --- path geometry ------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    start: complex
    end: complex


@dataclass(frozen=True)
class Arc:
    """Circular arc z = center + radius * e^{i theta}, theta from theta0 to
    theta1 (theta1 > theta0 means counterclockwise)."""

    center: complex
    radius: float
    theta0: float
    theta1: float


def encode_path(pieces) -> tuple:
    """Pack path pieces into the (types, params) arrays the kernels consume."""
    types = np.empty(len(pieces), dtype=np.int64)
    params = np.zeros((len(pieces), 3), dtype=complex)
    for i, piece in enumerate(pieces):
        if isinstance(piece, Segment):
            types[i] = _SEGMENT
            params[i, 0] = piece.start
            params[i, 1] = piece.end
        elif isinstance(piece, Arc):
            types[i] = _ARC
            params[i, 0] = piece.center
            params[i, 1] = complex(piece.radius, 0.0)
            params[i, 2] = complex(piece.theta0, piece.theta1)
        else:
            raise TypeError(f"unknown path piece {piece!r}")
    return types, params


def _effective_order(locus, t) -> int:
    """Order of a declared locus at t (coefficients vanishing at t dropped)."""
    mats = [eval_expr_matrix(m, t) for m in locus.laurent]
    scale = max(1.0, max((norm_inf(m) for m in mats), default=0.0))
    order = len(mats)
    while order > 0 and norm_inf(mats[len(mats) - order]) < DROP_TOL * scale:
        order -= 1
    return order


def _segment_pole_distance(a: complex, b: complex, p: complex) -> float:
    """Distance from point p to the segment [a, b]."""
    d = b - a
    L2 = abs(d) ** 2
    if L2 == 0.0:
        return abs(p - a)
    s = ((p - a) * d.conjugate()).real / L2
    s = min(1.0, max(0.0, s))
    return abs(p - (a + s * d))


@dataclass(frozen=True)
class LoopSpec:
    """A loop around one declared pole from a fixed base point.

    ``radius=None`` selects half the distance to the nearest other pole
    (capped by the base-point distance); ``margin=None`` defaults to a quarter
    of the radius.  ``orientation`` +1 is counterclockwise.
    """

    pole_index: int
    base_point: complex
    radius: float | None = None
    margin: float | None = None
    orientation: int = 1


def loop_path(A: ParamRationalMatrix, loop: LoopSpec, t,
              guard: float = DEFAULT_GUARD) -> list:
    """Construct and validate the segment-circle-segment path at t.

    Raises PoleMigrationError when the requested geometry is not realizable
    at this parameter point (another pole inside the loop disk or too close
    to the path, or the base point no longer clears the margin).
    """
    t = as_parameter_point(t, A.num_params)
    locs = A.pole_locations(t)
    if not 0 <= loop.pole_index < len(locs):
        raise MissingRecordError(
            f"pole index {loop.pole_index} out of range 0..{len(locs) - 1}")
    alpha = complex(locs[loop.pole_index])
    others = np.delete(locs, loop.pole_index)
    x0 = complex(loop.base_point)

    d_base = abs(x0 - alpha)
    if d_base < max(10.0 * guard, 1e-9):
        raise NearPoleError("base point coincides with the target pole",
                            base=x0, pole=alpha)
    if loop.radius is None:
        radius = d_base
        if len(others):
            radius = min(radius, float(np.min(np.abs(others - alpha))) / 2.0)
    else:
        radius = float(loop.radius)
        if radius <= 0:
            raise PoleMigrationError("loop radius must be positive")
        if radius > d_base:
            raise PoleMigrationError(
                "fixed loop radius exceeds base-point distance at this t",
                radius=radius, base_distance=d_base)
    margin = radius / 4.0 if loop.margin is None else float(loop.margin)
    if not 0 < margin < radius:
        raise PoleMigrationError(
            "path margin must lie strictly between 0 and the loop radius",
            margin=margin, radius=radius)

    # target isolation: every other pole must clear the loop disk + margin
    for other in others:
        if abs(other - alpha) <= radius + margin:
            raise PoleMigrationError(
                "another pole entered the loop disk at this t",
                pole=complex(other), target=alpha, radius=radius)
    # the base point must clear every pole
    for p in locs:
        if abs(x0 - p) < margin and p != alpha:
            raise PoleMigrationError(
                "base point within margin of a pole at this t",
                base=x0, pole=complex(p))

    entry = alpha + radius * (x0 - alpha) / d_base
    theta0 = cmath.phase(entry - alpha)
    pieces = []
    with_segments = abs(x0 - entry) > 1e-14 * max(1.0, abs(x0))
    if with_segments:
        seg = Segment(x0, entry)
        for other in others:
            if _segment_pole_distance(seg.start, seg.end, other) < margin:
                raise PoleMigrationError(
                    "approach segment passes within margin of a pole",
                    pole=complex(other))
        pieces.append(seg)
    pieces.append(Arc(alpha, radius, theta0,
                      theta0 + loop.orientation * 2.0 * np.pi))
    if with_segments:
        pieces.append(Segment(entry, x0))
    return pieces


# --- integration --------------------------------------------------------------

def integrate_along(A: ParamRationalMatrix, pieces, t, Y0=None,
                    rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                    guard: float = DEFAULT_GUARD) -> tuple:
    """Continue Y along the given path pieces; returns (Y_end, err_estimate)."""
    t = as_parameter_point(t, A.num_params)
    frozen = A.freeze(t, guard)
    if Y0 is None:
        Y0 = np.eye(A.dimension, dtype=complex)
    types, params = encode_path(pieces)
    return integrate_polyline(frozen, types, params, Y0, rtol, atol)


# --- records ------------------------------------------------------------------

@dataclass
class MonodromyRecord:
    """One grid cell: the monodromy matrix of one loop at one t (or a coded
    failure).  ``det_residual`` is |det M - exp(2 pi i tr Res)| when the
    target pole is simple at t, else None."""

    t: ParameterPoint
    loop: int
    matrix: np.ndarray | None
    err_estimate: float = 0.0
    error: str | None = None
    detail: str = ""
    pole: complex | None = None
    base_point: complex | None = None
    det_residual: float | None = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.matrix is not None

    def to_dict(self) -> dict:
        out = {
            "t": [complex_to_pair(z) for z in self.t],
            "loop": self.loop,
            "M": matrix_to_pairs(self.matrix) if self.matrix is not None else None,
            "err": float(self.err_estimate),
        }
        if self.error is not None:
            out["error"] = self.error
            out["detail"] = self.detail
        return out


def records_to_dicts(records) -> list:
    return [r.to_dict() for r in records]


def records_from_dicts(cells) -> list:
    """Rehydrate records (numeric fields only) from their JSON form."""
    out = []
    for cell in cells:
        out.append(MonodromyRecord(
            t=ParameterPoint(tuple(pair_to_complex(v) for v in cell["t"])),
            loop=int(cell["loop"]),
            matrix=None if cell.get("M") is None else pairs_to_matrix(cell["M"]),
            err_estimate=float(cell.get("err", 0.0)),
            error=cell.get("error"),
            detail=cell.get("detail", ""),
        ))
    return out


def monodromy_matrix(A: ParamRationalMatrix, loop: LoopSpec, t,
                     rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                     guard: float = DEFAULT_GUARD) -> MonodromyRecord:
    """Monodromy of one loop at one parameter point (frame Y(x0) = I)."""
    t = as_parameter_point(t, A.num_params)
    pieces = loop_path(A, loop, t, guard)
    M, err = integrate_along(A, pieces, t, None, rtol, atol, guard)
    n = A.dimension
    det = complex(np.linalg.det(M))
    if abs(det) <= 1e-12 * rel_scale(M) ** n:
        raise IntegrationFailureError(
            "monodromy matrix numerically singular", det=det)
    alpha = complex(A.pole_locations(t)[loop.pole_index])
    det_residual = None
    if _effective_order(A.poles[loop.pole_index], t) == 1:
        # Liouville: det M = exp(2 pi i tr Res) for a simple pole
        residue = eval_expr_matrix(A.poles[loop.pole_index].laurent[-1], t)
        expected = cmath.exp(loop.orientation * 2j * np.pi
                             * complex(np.trace(residue)))
        det_residual = abs(det - expected)
    return MonodromyRecord(t=t, loop=loop.pole_index, matrix=M,
                           err_estimate=err, pole=alpha,
                           base_point=complex(loop.base_point),
                           det_residual=det_residual)


# --- grids --------------------------------------------------------------------

@dataclass(frozen=True)
class TGrid:
    """Finite list of parameter points to sweep (may be a single point)."""

    points: tuple

    @classmethod
    def explicit(cls, points) -> "TGrid":
        return cls(tuple(as_parameter_point(p) for p in points))

    @classmethod
    def linear(cls, start, end, steps: int) -> "TGrid":
        """Componentwise linear interpolation, endpoints included."""
        start = as_parameter_point(start)
        end = as_parameter_point(end, len(start))
        if steps < 1:
            raise ValueError("steps must be >= 1")
        if steps == 1:
            return cls((start,))
        pts = []
        for k in range(steps):
            w = k / (steps - 1)
            pts.append(ParameterPoint(tuple(
                (1 - w) * a + w * b for a, b in zip(start, end))))
        return cls(tuple(pts))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, k):
        return self.points[k]


def _grid_chunk(args):
    A, loops, t, rtol, atol, guard = args
    out = []
    for loop in loops:
        try:
            out.append(monodromy_matrix(A, loop, t, rtol, atol, guard))
        except ParmonoError as exc:
            out.append(MonodromyRecord(
                t=as_parameter_point(t, A.num_params), loop=loop.pole_index,
                matrix=None, error=exc.code, detail=str(exc),
                base_point=complex(loop.base_point)))
    return out


def monodromy_grid(A: ParamRationalMatrix, loops: Sequence[LoopSpec], grid,
                   rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                   jobs: int = 1, guard: float = DEFAULT_GUARD) -> list:
    """All (t, loop) monodromy records, t-major then loop-minor.

    Failed cells carry their error code; the sweep never aborts on a coded
    error.  ``jobs > 1`` distributes parameter points over processes.
    """
    points = list(grid.points if isinstance(grid, TGrid) else grid)
    tasks = [(A, tuple(loops), t, rtol, atol, guard) for t in points]
    records = []
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for chunk in pool.map(_grid_chunk, tasks):
                records.extend(chunk)
    else:
        for task in tasks:
            records.extend(_grid_chunk(task))
    return records


# --- product relation ---------------------------------------------------------

def product_relation(records, ordering=None) -> float:
    """Deviation ||M_{i1} M_{i2} ... M_{im} - I|| for loops at one t.

    Traversing the loops in ascending order of arg(pole - base_point) around
    a common base point composes to the loop around all finite poles; when no
    pole lies at infinity that composite is trivial.  Continuation acts on
    the right (gamma then delta gives M_delta M_gamma), so the matrices are
    multiplied in descending-angle order.  ``ordering`` overrides the matrix
    product order directly (a list of loop indices, leftmost factor first).
    All referenced records must be successful cells at the same t.
    """
    if not records:
        raise MissingRecordError("no records supplied")
    t0 = records[0].t
    cells = {}
    for rec in records:
        if rec.t.coords != t0.coords:
            continue
        if rec.loop in cells:
            raise MissingRecordError(f"duplicate record for loop {rec.loop}")
        cells[rec.loop] = rec
    if ordering is None:
        for rec in cells.values():
            if rec.pole is None or rec.base_point is None:
                raise MissingRecordError(
                    "records lack pole/base data; pass an explicit ordering")
        ordering = sorted(cells, key=lambda i: cmath.phase(
            cells[i].pole - cells[i].base_point), reverse=True)
    n = None
    prod = None
    for idx in ordering:
        rec = cells.get(idx)
        if rec is None or rec.matrix is None:
            raise MissingRecordError(f"no successful record for loop {idx}")
        if prod is None:
            n = rec.matrix.shape[0]
            prod = np.eye(n, dtype=complex)
        prod = prod @ rec.matrix
    return norm_inf(prod - np.eye(n, dtype=complex))
