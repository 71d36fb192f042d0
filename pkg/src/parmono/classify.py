"""Integrability tests and (projective) isomonodromy classification.

A family dY/dx = A_x(x,t) Y extends to an integrable connection when matrices
A_j(x,t) for each parameter direction satisfy the zero-curvature relations

    d_i A_j - d_j A_i = [A_i, A_j]        (d_0 = d/dx, d_j = d/dt_j).

Integrability is equivalent to isomonodromy of the family (constant monodromy
matrices); projective isomonodromy means every monodromy matrix moves only by
a scalar factor M_i(t) = c_i(t) Gamma_i.  For Fuchsian systems, splitting
each residue into its trace part and a traceless part,

    A_i = B_i + b_i I,   b_i = tr(A_i)/n,

reduces projective isomonodromy of A to isomonodromy of the traceless system,
with the scalar factors recovered from the b_i.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import (
    MissingDirectionError,
    MissingRecordError,
    NotFuchsianError,
    ParmonoError,
    SamplingExhaustedError,
    SingularReferenceError,
)
from .expr import Const, ParamExpr, as_parameter_point, eval_expr
from .jsonutil import complex_to_pair, matrix_to_pairs
from .sysmodel import (
    DEFAULT_GUARD,
    ParamRationalMatrix,
    PoleLocus,
    _admissible_point,
    _disk_samples,
    dt_matrix,
    dx_matrix,
)
from .monodromy import DEFAULT_ATOL, DEFAULT_RTOL, monodromy_grid
from .util import norm_inf, rel_scale

__all__ = [
    "ConnectionSystem", "IntegrabilityReport", "FuchsianSplit",
    "LoopClassification", "ClassificationReport", "SplitCheckReport",
    "zero_curvature_residual", "integrability_report", "fuchsian_split",
    "classify_monodromy", "projective_split_check",
    "ZC_TOL", "ISO_TOL", "PROJ_TOL",
]

ZC_TOL = 1e-9
ISO_TOL = 1e-7
PROJ_TOL = 1e-6


# --- connection data ----------------------------------------------------------

@dataclass(frozen=True)
class ConnectionSystem:
    """The matrices of a putative integrable connection.

    Direction 0 is x; directions 1..r are the parameters.  All matrices must
    share dimension and parameter count.
    """

    a_x: ParamRationalMatrix
    a_t: tuple

    def __post_init__(self):
        for B in self.a_t:
            if (B.dimension != self.a_x.dimension
                    or B.num_params != self.a_x.num_params):
                raise MissingDirectionError(
                    "connection matrices have mismatched shapes")
        if len(self.a_t) != self.a_x.num_params:
            raise MissingDirectionError(
                f"expected {self.a_x.num_params} parameter matrices, "
                f"got {len(self.a_t)}")

    @property
    def num_directions(self) -> int:
        return 1 + len(self.a_t)

    def direction(self, i: int) -> ParamRationalMatrix:
        if i == 0:
            return self.a_x
        if 1 <= i <= len(self.a_t):
            return self.a_t[i - 1]
        raise MissingDirectionError(f"no direction {i} in this connection")

    def derivative(self, i: int, j: int) -> ParamRationalMatrix:
        """d_i of the direction-j matrix."""
        target = self.direction(j)
        return dx_matrix(target) if i == 0 else dt_matrix(target, i)


def zero_curvature_residual(conn: ConnectionSystem, i: int, j: int,
                            num_samples: int = 60, seed: int = 0, *,
                            x_radius: float = 3.0, t_radius: float = 1.0,
                            margin: float = 0.25,
                            guard: float = DEFAULT_GUARD) -> float:
    """Max sampled ||d_i A_j - d_j A_i - [A_i, A_j]|| for one direction pair.

    Derivatives are exact (symbolic partial-fraction calculus); only the
    evaluation points are random.  Samples keep ``margin`` clear of every
    declared pole so the comparison is well-conditioned.
    """
    Ai, Aj = conn.direction(i), conn.direction(j)
    dij = conn.derivative(i, j)
    dji = conn.derivative(j, i)
    mats = (Ai, Aj, dij, dji)
    r = Ai.num_params
    rng = np.random.default_rng(seed)
    worst = 0.0
    drawn = 0
    attempts = 0
    while drawn < num_samples:
        attempts += 1
        if attempts > 50 * num_samples:
            raise SamplingExhaustedError(
                "could not draw enough well-separated sample points")
        t = as_parameter_point(_disk_samples(rng, r, t_radius), r)
        try:
            frozen = [M.freeze(t, guard) for M in mats]
        except ParmonoError:
            continue  # pole collision etc. at this t: resample
        avoid = np.concatenate([f.locs for f in frozen]) if frozen else []
        try:
            x = _admissible_point(rng, avoid, x_radius, margin)
        except SamplingExhaustedError:
            continue
        vi, vj, vdij, vdji = (f.eval(x) for f in frozen)
        resid = vdij - vdji - (vi @ vj - vj @ vi)
        worst = max(worst, norm_inf(resid))
        drawn += 1
    return worst


@dataclass
class IntegrabilityReport:
    """Zero-curvature residuals for every direction pair."""

    residuals: dict            # (i, j) -> float, i < j
    max_residual: float
    integrable: bool
    tol: float
    num_samples: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "verdict": "integrable" if self.integrable else "not_integrable",
            "max_residual": self.max_residual,
            "pairs": [{"directions": [i, j], "residual": v}
                      for (i, j), v in sorted(self.residuals.items())],
            "tolerances": {"zero_curvature": self.tol},
        }


def integrability_report(conn: ConnectionSystem, num_samples: int = 60,
                         seed: int = 0, tol: float = ZC_TOL,
                         **kwargs) -> IntegrabilityReport:
    """Sampled zero-curvature check over all direction pairs."""
    residuals = {}
    for i in range(conn.num_directions):
        for j in range(i + 1, conn.num_directions):
            residuals[(i, j)] = zero_curvature_residual(
                conn, i, j, num_samples, seed, **kwargs)
    worst = max(residuals.values(), default=0.0)
    return IntegrabilityReport(residuals=residuals, max_residual=worst,
                               integrable=worst < tol, tol=tol,
                               num_samples=num_samples, seed=seed)


# --- Fuchsian trace split -----------------------------------------------------

@dataclass(frozen=True)
class FuchsianSplit:
    """Residue decomposition A_i = B_i + b_i I of a Fuchsian system.

    ``scalar_parts[i]`` is the expression b_i = tr(A_i)/n; ``traceless`` is
    the system with residues B_i (exactly traceless by construction).
    """

    system: ParamRationalMatrix
    scalar_parts: tuple
    traceless: ParamRationalMatrix

    def scalar_at(self, i: int, t) -> complex:
        return eval_expr(self.scalar_parts[i], t)


def fuchsian_split(A: ParamRationalMatrix) -> FuchsianSplit:
    """Split each residue of a Fuchsian system into scalar + traceless parts.

    Raises NotFuchsianError when any pole has order > 1 or a polynomial part
    is present.
    """
    if A.poly:
        raise NotFuchsianError("system has a polynomial part")
    for idx, p in enumerate(A.poles):
        if p.order != 1:
            raise NotFuchsianError(
                f"pole {idx} has order {p.order} (> 1)", pole=idx)
    n = A.dimension
    inv_n = Const(complex(1.0 / n))
    scalars = []
    loci = []
    for p in A.poles:
        res = p.laurent[0]
        trace = res[0][0]
        for d in range(1, n):
            trace = trace + res[d][d]
        b = inv_n * trace
        scalars.append(b)
        B = tuple(
            tuple(res[a][c] - b if a == c else res[a][c] for c in range(n))
            for a in range(n))
        loci.append(PoleLocus(p.location, (B,)))
    traceless = ParamRationalMatrix(n, A.num_params, tuple(loci), ())
    return FuchsianSplit(system=A, scalar_parts=tuple(scalars),
                         traceless=traceless)


# --- monodromy classification -------------------------------------------------

@dataclass
class LoopClassification:
    """Per-loop classification data over the grid."""

    loop: int
    reference: np.ndarray       # M_i(t0)
    iso_residual: float         # max_t ||M(t) - M(t0)||
    proj_residual: float        # max_t ||M(t) M(t0)^-1 - c(t) I||
    c_samples: list             # scalar factors tr(N)/n per grid point
    continuity_ok: bool

    def to_dict(self) -> dict:
        return {
            "Gamma": matrix_to_pairs(self.reference),
            "c_samples": [complex_to_pair(c) for c in self.c_samples],
            "max_residual": self.proj_residual,
            "iso_residual": self.iso_residual,
            "continuity_ok": self.continuity_ok,
        }


@dataclass
class ClassificationReport:
    """Grid-level verdict: isomonodromic / projectively_isomonodromic /
    neither / inconclusive (deciding residual within 10x integration error)."""

    verdict: str
    loops: list                 # LoopClassification, loop-sorted
    iso_tol: float
    proj_tol: float
    max_err_estimate: float

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "loops": [lc.to_dict() for lc in self.loops],
            "tolerances": {"iso": self.iso_tol, "proj": self.proj_tol},
        }


def classify_monodromy(records, iso_tol: float = ISO_TOL,
                       proj_tol: float = PROJ_TOL) -> ClassificationReport:
    """Classify a complete grid of monodromy records.

    Tolerances are scaled per loop by max(1, ||M_i(t0)||).  Requires at least
    two grid points and a successful record for every (t, loop) cell.
    """
    by_loop = {}
    t_seqs = {}
    for rec in records:
        if not rec.ok:
            raise MissingRecordError(
                f"cell (loop {rec.loop}) failed with {rec.error}",
                loop=rec.loop, error=rec.error)
        by_loop.setdefault(rec.loop, []).append(rec)
        t_seqs.setdefault(rec.loop, []).append(rec.t.coords)
    if not by_loop:
        raise MissingRecordError("no records supplied")
    seqs = list(t_seqs.values())
    if any(s != seqs[0] for s in seqs[1:]):
        raise MissingRecordError("loops cover different parameter grids")
    if len(seqs[0]) < 2:
        raise MissingRecordError("need at least two grid points to classify")

    loops = []
    all_iso = True
    all_proj = True
    deciding = 0.0
    max_err = 0.0
    for loop in sorted(by_loop):
        cells = by_loop[loop]
        M0 = cells[0].matrix
        n = M0.shape[0]
        scale = rel_scale(M0)
        if abs(np.linalg.det(M0)) < 1e-12 * scale ** n:
            raise SingularReferenceError(
                f"reference monodromy for loop {loop} is singular")
        M0inv = np.linalg.inv(M0)
        iso_res = 0.0
        proj_res = 0.0
        cs = []
        for rec in cells:
            max_err = max(max_err, rec.err_estimate)
            iso_res = max(iso_res, norm_inf(rec.matrix - M0))
            N = rec.matrix @ M0inv
            c = complex(np.trace(N)) / n
            cs.append(c)
            proj_res = max(proj_res, norm_inf(N - c * np.eye(n)))
        jumps = [abs(cmath.phase(b / a)) for a, b in zip(cs[:-1], cs[1:])
                 if a != 0]
        continuity_ok = max(jumps, default=0.0) < 3.0
        loops.append(LoopClassification(
            loop=loop, reference=M0, iso_residual=iso_res,
            proj_residual=proj_res, c_samples=cs, continuity_ok=continuity_ok))
        all_iso = all_iso and iso_res < iso_tol * scale
        all_proj = all_proj and proj_res < proj_tol * scale
        deciding = max(deciding, proj_res)

    if all_iso:
        verdict = "isomonodromic"
    elif all_proj:
        verdict = "projectively_isomonodromic"
    elif deciding <= 10.0 * max_err:
        verdict = "inconclusive"
    else:
        verdict = "neither"
    return ClassificationReport(verdict=verdict, loops=loops,
                                iso_tol=iso_tol, proj_tol=proj_tol,
                                max_err_estimate=max_err)


# --- combined Fuchsian projective check ---------------------------------------

@dataclass
class SplitCheckReport:
    """Projective-isomonodromy check through the Fuchsian trace split.

    The traceless part is classified over the grid; the scalar parts are then
    used to reconstruct the full monodromy, and ``max_drift`` measures how
    far M_i(t) e^{-2 pi i b_i(t)} moves from its reference value (relative,
    per loop).
    """

    split: FuchsianSplit
    traceless_report: ClassificationReport
    drift_per_loop: dict
    max_drift: float
    verdict: str
    proj_tol: float

    def to_dict(self) -> dict:
        out = self.traceless_report.to_dict()
        out["verdict"] = self.verdict
        out["traceless_verdict"] = self.traceless_report.verdict
        out["scalar_reconstruction_drift"] = {
            str(k): v for k, v in sorted(self.drift_per_loop.items())}
        out["max_drift"] = self.max_drift
        return out


def projective_split_check(A: ParamRationalMatrix, loops, grid, *,
                           iso_tol: float = ISO_TOL,
                           proj_tol: float = PROJ_TOL,
                           rtol: float = DEFAULT_RTOL,
                           atol: float = DEFAULT_ATOL, jobs: int = 1,
                           guard: float = DEFAULT_GUARD) -> SplitCheckReport:
    """Decide projective isomonodromy of a Fuchsian family via the trace
    split, and verify the scalar reconstruction on the full system."""
    split = fuchsian_split(A)
    recs_b = monodromy_grid(split.traceless, loops, grid, rtol, atol,
                            jobs, guard)
    rep_b = classify_monodromy(recs_b, iso_tol, proj_tol)
    recs_a = monodromy_grid(A, loops, grid, rtol, atol, jobs, guard)

    by_loop = {}
    for rec in recs_a:
        if not rec.ok:
            raise MissingRecordError(
                f"full-system cell (loop {rec.loop}) failed with {rec.error}")
        by_loop.setdefault(rec.loop, []).append(rec)
    drift = {}
    for loop, cells in by_loop.items():
        ref = None
        worst = 0.0
        for rec in cells:
            b = split.scalar_at(loop, rec.t)
            D = rec.matrix * cmath.exp(-2j * cmath.pi * b)
            if ref is None:
                ref = D
                ref_scale = rel_scale(D)
            else:
                worst = max(worst, norm_inf(D - ref) / ref_scale)
        drift[loop] = worst
    max_drift = max(drift.values(), default=0.0)
    if rep_b.verdict == "isomonodromic" and max_drift < proj_tol:
        verdict = "projectively_isomonodromic"
    elif rep_b.verdict in ("isomonodromic", "projectively_isomonodromic"):
        verdict = "inconclusive"
    else:
        verdict = rep_b.verdict
    return SplitCheckReport(split=split, traceless_report=rep_b,
                            drift_per_loop=drift, max_drift=max_drift,
                            verdict=verdict, proj_tol=proj_tol)
