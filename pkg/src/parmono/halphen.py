"""Darboux-Halphen flows and the monodromy evolution law of their Lax systems.

Three classical quadratic flows are provided:

``DHV``      five variables (w1, w2, w3, theta, phi):
             w1' = w2 w3 - w1(w2+w3) + phi^2        (cyclic for w2, w3 with
             theta^2 and -theta*phi), theta' = -w2(theta-phi) - w3(theta+phi),
             phi' = w1(theta-phi) - w3(theta+phi).
``HI``       three variables with pairwise sums (wi + wj)' = wi wj, i.e.
             w1' = (w1 w2 + w1 w3 - w2 w3)/2 and cyclic.
``HII_flow`` pole coordinates x1, x2, x3 with x_i' = x_i^2 + V(x), where
             V = a (x1-x2)^2 + b (x2-x3)^2 + c (x3-x1)^2.

The ``HII_flow`` variant drives the Fuchsian Lax system

    dY/dx = ( mu I / prod(x - x_i)  +  sum_i lambda_i C / (x - x_i) ) Y

with sum(lambda_i) = 0 and C constant traceless 2x2.  Its residues split as
A_i = lambda_i C + b_i I with b_i = mu / prod_{j != i}(x_i - x_j), and the
monodromy along a loop around x_i(t) evolves by a scalar factor only:

    M_i(t) = c_i(t) M_i(t0),    c_i(t) = exp(-2 pi i mu int_{t0}^t beta_i dt),

where the beta_i are the partial-fraction coefficients of
(x + x1 + x2 + x3) / prod(x - x_i).  ``verify_evolution_law`` checks this
end to end: it integrates the flow, computes the c_i by dense-output
Gauss-Legendre quadrature along the trajectory, recomputes monodromy matrices
at checkpoints by contour integration, and reports the worst relative
residual together with the defining identities of the beta_i.
"""

from __future__ import annotations

import bisect
import cmath
import csv
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .dopri import DenseSolution, integrate_adaptive
from .errors import CollisionError, ConfigError
from .expr import Const, Param, const
from .jsonutil import (
    complex_to_pair,
    matrix_to_pairs,
    pair_to_complex,
    pairs_to_matrix,
)
from .monodromy import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    LoopSpec,
    monodromy_matrix,
)
from .sysmodel import ParamRationalMatrix, PoleLocus, as_expr_matrix
from .util import norm_inf

__all__ = [
    "VARIANTS", "FLOW_DIMS", "HalphenRun", "FlowTrajectory", "EvolutionReport",
    "flow_rhs", "integrate_flow", "beta_coefficients", "scalar_parts",
    "scalar_parts_rate", "lax_matrix", "lax_family", "BetaIntegrator",
    "verify_evolution_law", "write_trajectory_csv",
    "EVOLUTION_TOL", "COLLISION_TOL",
]

VARIANTS = ("DHV", "HII_flow", "HI")
FLOW_DIMS = {"DHV": 5, "HII_flow": 3, "HI": 3}
_VAR_NAMES = {"DHV": ("w1", "w2", "w3", "theta", "phi"),
              "HI": ("w1", "w2", "w3"),
              "HII_flow": ("x1", "x2", "x3")}

EVOLUTION_TOL = 1e-6
COLLISION_TOL = 1e-8


# --- flow right-hand sides ----------------------------------------------------

def flow_rhs(variant: str, state, quad_constants=(0, 0, 0)) -> np.ndarray:
    """Time derivative of the flow variables for the given variant."""
    y = np.asarray(state, dtype=complex)
    if variant == "DHV":
        w1, w2, w3, th, ph = y
        return np.array([
            w2 * w3 - w1 * (w2 + w3) + ph * ph,
            w3 * w1 - w2 * (w3 + w1) + th * th,
            w1 * w2 - w3 * (w1 + w2) - th * ph,
            -w2 * (th - ph) - w3 * (th + ph),
            w1 * (th - ph) - w3 * (th + ph),
        ])
    if variant == "HI":
        w1, w2, w3 = y
        return 0.5 * np.array([
            w1 * w2 + w1 * w3 - w2 * w3,
            w2 * w3 + w2 * w1 - w3 * w1,
            w3 * w1 + w3 * w2 - w1 * w2,
        ])
    if variant == "HII_flow":
        x1, x2, x3 = y
        a, b, c = quad_constants
        V = (a * (x1 - x2) ** 2 + b * (x2 - x3) ** 2 + c * (x3 - x1) ** 2)
        return np.array([x1 * x1 + V, x2 * x2 + V, x3 * x3 + V])
    raise ConfigError(f"unknown flow variant {variant!r}")


def _check_distinct(xs, where=""):
    xs = np.asarray(xs, dtype=complex)
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            tol = COLLISION_TOL * max(1.0, abs(xs[i]), abs(xs[j]))
            if abs(xs[i] - xs[j]) < tol:
                raise CollisionError(
                    f"pole coordinates x{i + 1} and x{j + 1} collide{where}",
                    values=(complex(xs[i]), complex(xs[j])))


# --- trajectories -------------------------------------------------------------

@dataclass
class FlowTrajectory:
    """Dense flow solution along the straight parameter path t0 -> t_end."""

    variant: str
    t0: complex
    t_end: complex
    quad_constants: tuple
    solution: DenseSolution

    @property
    def delta(self) -> complex:
        return self.t_end - self.t0

    def t_of(self, s: float) -> complex:
        return self.t0 + s * self.delta

    def state_at(self, s: float) -> np.ndarray:
        return self.solution(float(s))

    @property
    def err_estimate(self) -> float:
        return self.solution.err_acc

    def checkpoint_fractions(self, count: int) -> list:
        return [k / count for k in range(1, count + 1)]


def integrate_flow(variant: str, initial, t0, t_end, quad_constants=(0, 0, 0),
                   rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL
                   ) -> FlowTrajectory:
    """Integrate the flow along the straight path from t0 to t_end.

    For HII_flow the pole coordinates are collision-checked at the start and
    after every accepted step (CollisionError on failure).
    """
    if variant not in VARIANTS:
        raise ConfigError(f"unknown flow variant {variant!r}")
    y0 = np.asarray(initial, dtype=complex)
    if y0.shape != (FLOW_DIMS[variant],):
        raise ConfigError(
            f"{variant} takes {FLOW_DIMS[variant]} initial values, "
            f"got shape {y0.shape}")
    t0 = complex(t0)
    t_end = complex(t_end)
    delta = t_end - t0
    qc = tuple(complex(v) for v in quad_constants)

    def f(s, y):
        return delta * flow_rhs(variant, y, qc)

    check = None
    if variant == "HII_flow":
        _check_distinct(y0, " at t0")

        def check(s, y):
            _check_distinct(y, f" along the flow (s={s:.4g})")

    sol = integrate_adaptive(f, 1.0 if delta != 0 else 0.0, y0, rtol, atol,
                             check=check)
    return FlowTrajectory(variant=variant, t0=t0, t_end=t_end,
                          quad_constants=qc, solution=sol)


# --- Lax data for HII_flow ----------------------------------------------------

def beta_coefficients(xs) -> np.ndarray:
    """Partial-fraction coefficients of (x + sum x_i)/prod(x - x_i):
    beta_i = (2 x_i + x_j + x_k) / ((x_i - x_j)(x_i - x_k))."""
    _check_distinct(xs)
    x1, x2, x3 = (complex(v) for v in xs)
    return np.array([
        (2 * x1 + x2 + x3) / ((x1 - x2) * (x1 - x3)),
        (2 * x2 + x3 + x1) / ((x2 - x3) * (x2 - x1)),
        (2 * x3 + x1 + x2) / ((x3 - x1) * (x3 - x2)),
    ])


def scalar_parts(xs, mu) -> np.ndarray:
    """Scalar residue parts b_i = mu / prod_{j != i}(x_i - x_j)."""
    _check_distinct(xs)
    x1, x2, x3 = (complex(v) for v in xs)
    mu = complex(mu)
    return np.array([
        mu / ((x1 - x2) * (x1 - x3)),
        mu / ((x2 - x1) * (x2 - x3)),
        mu / ((x3 - x1) * (x3 - x2)),
    ])


def scalar_parts_rate(xs, mu, quad_constants=(0, 0, 0)) -> np.ndarray:
    """db_i/dt along the flow, via the chain rule through x_i' = Q_i.

    Independent of the beta identity, so comparing against -mu beta_i tests
    the scalar evolution law db_i/dt = -mu beta_i.
    """
    x1, x2, x3 = (complex(v) for v in xs)
    q1, q2, q3 = flow_rhs("HII_flow", xs, quad_constants)
    b = scalar_parts(xs, mu)
    return np.array([
        b[0] * ((q2 - q1) / (x1 - x2) + (q3 - q1) / (x1 - x3)),
        b[1] * ((q1 - q2) / (x2 - x1) + (q3 - q2) / (x2 - x3)),
        b[2] * ((q1 - q3) / (x3 - x1) + (q2 - q3) / (x3 - x2)),
    ])


def lax_matrix(mu, lambdas, C, xs) -> ParamRationalMatrix:
    """The Fuchsian Lax system at fixed pole coordinates (no parameters).

    Residues are A_i = lambda_i C + b_i I.  Loci are kept in order x1, x2,
    x3 so loop indices line up with the flow variables.
    """
    C = np.asarray(C, dtype=complex)
    n = C.shape[0]
    bs = scalar_parts(xs, mu)
    loci = []
    for i, x in enumerate(xs):
        res = np.asarray(lambdas[i] * C + bs[i] * np.eye(n), dtype=complex)
        mat = tuple(tuple(Const(complex(v)) for v in row) for row in res)
        loci.append(PoleLocus(Const(complex(x)), (mat,)))
    return ParamRationalMatrix(n, 0, tuple(loci), ())


def lax_family(mu, lambdas, C, x0_state) -> ParamRationalMatrix:
    """The Lax system as a one-parameter family in the flow time t1.

    Valid for zero quadratic-form constants only, where the pole flow
    x_i' = x_i^2 has the closed form x_i(t) = x_i(0) / (1 - x_i(0) t); all
    coefficients are then rational in t1 and exact expressions are emitted.
    """
    C = np.asarray(C, dtype=complex)
    n = C.shape[0]
    _check_distinct(x0_state)
    t = Param(1)
    xs = []
    for v in x0_state:
        v = complex(v)
        xs.append(Const(0j) if v == 0 else const(v) / (1 - const(v) * t))
    mu_c = const(mu)
    bs = [
        mu_c / ((xs[0] - xs[1]) * (xs[0] - xs[2])),
        mu_c / ((xs[1] - xs[0]) * (xs[1] - xs[2])),
        mu_c / ((xs[2] - xs[0]) * (xs[2] - xs[1])),
    ]
    loci = []
    for i in range(3):
        lam_c = complex(lambdas[i])
        res = tuple(
            tuple(const(lam_c * C[a, b]) + bs[i] if a == b
                  else const(lam_c * C[a, b])
                  for b in range(n))
            for a in range(n))
        loci.append(PoleLocus(xs[i], (res,)))
    return ParamRationalMatrix(n, 1, tuple(loci), ())


# --- run configuration --------------------------------------------------------

@dataclass
class HalphenRun:
    """A flow run: variant, time window, initial data and (for HII_flow)
    the Lax constants needed for monodromy verification."""

    variant: str
    t0: complex
    t_end: complex
    initial: tuple
    checkpoints: int = 4
    mu: complex = 1.0 + 0j
    lambdas: tuple = (0j, 0j, 0j)
    C: np.ndarray = field(default_factory=lambda: np.zeros((2, 2), complex))
    quad_constants: tuple = (0j, 0j, 0j)

    @classmethod
    def from_dict(cls, data: dict) -> "HalphenRun":
        try:
            variant = data["variant"]
            if variant not in VARIANTS:
                raise ConfigError(f"unknown variant {variant!r}")
            initial = _initial_from_json(variant, data["initial"])
            run = cls(
                variant=variant,
                t0=pair_to_complex(data.get("t0", 0.0)),
                t_end=pair_to_complex(data["t_end"]),
                initial=initial,
                checkpoints=int(data.get("checkpoints", 4)),
                mu=pair_to_complex(data.get("mu", 1.0)),
                lambdas=tuple(pair_to_complex(v)
                              for v in data.get("lambdas", (0, 0, 0))),
                C=(pairs_to_matrix(data["C"]) if "C" in data
                   else np.zeros((2, 2), complex)),
                quad_constants=tuple(pair_to_complex(v)
                                     for v in data.get("abc", (0, 0, 0))),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad flow configuration: {exc}") from None
        run.validate()
        return run

    def to_dict(self) -> dict:
        names = _VAR_NAMES[self.variant]
        return {
            "variant": self.variant,
            "t0": complex_to_pair(self.t0),
            "t_end": complex_to_pair(self.t_end),
            "initial": {k: complex_to_pair(v)
                        for k, v in zip(names, self.initial)},
            "checkpoints": self.checkpoints,
            "mu": complex_to_pair(self.mu),
            "lambdas": [complex_to_pair(v) for v in self.lambdas],
            "C": matrix_to_pairs(self.C),
            "abc": [complex_to_pair(v) for v in self.quad_constants],
        }

    def validate(self):
        if len(self.initial) != FLOW_DIMS[self.variant]:
            raise ConfigError(
                f"{self.variant} needs {FLOW_DIMS[self.variant]} initial "
                f"values, got {len(self.initial)}")
        if self.checkpoints < 1:
            raise ConfigError("checkpoints must be >= 1")
        if self.variant == "HII_flow":
            _check_distinct(self.initial, " in initial data")
            if self.mu == 0:
                raise ConfigError("mu must be nonzero for the Lax system")
            if abs(sum(self.lambdas)) > 1e-12 * max(
                    1.0, max(abs(v) for v in self.lambdas)):
                raise ConfigError("lambda constants must sum to zero")
            C = np.asarray(self.C)
            if C.shape[0] != C.shape[1]:
                raise ConfigError("C must be square")
            if abs(np.trace(C)) > 1e-12 * max(1.0, norm_inf(C)):
                raise ConfigError("C must be traceless")

    def integrate(self, rtol: float = DEFAULT_RTOL,
                  atol: float = DEFAULT_ATOL) -> FlowTrajectory:
        return integrate_flow(self.variant, self.initial, self.t0, self.t_end,
                              self.quad_constants, rtol, atol)


def _initial_from_json(variant: str, obj) -> tuple:
    names = _VAR_NAMES[variant]
    if isinstance(obj, dict):
        missing = [k for k in names if k not in obj]
        if missing:
            raise ConfigError(f"initial data missing {missing}")
        return tuple(pair_to_complex(obj[k]) for k in names)
    vals = tuple(pair_to_complex(v) for v in obj)
    if len(vals) != len(names):
        raise ConfigError(
            f"initial data needs {len(names)} values, got {len(vals)}")
    return vals


# --- quadrature of the scalar factors -----------------------------------------

_GL_NODES, _GL_WEIGHTS = leggauss(5)


class BetaIntegrator:
    """Cumulative quadrature of the beta_i along an HII_flow trajectory.

    Composite 5-point Gauss-Legendre over the accepted steps of the dense
    flow solution; prefix sums make evaluation at arbitrary fractions cheap.
    ``integral(s)`` returns int_{t0}^{t(s)} beta_i dt (a length-3 vector in
    t units); ``scalar_factor(s, mu)`` the corresponding c_i(t(s)).
    """

    def __init__(self, traj: FlowTrajectory):
        self.traj = traj
        self._steps = list(traj.solution.steps())
        self._starts = [a for a, _ in self._steps]
        prefix = [np.zeros(3, dtype=complex)]
        for a, b in self._steps:
            prefix.append(prefix[-1] + self._gl_panel(a, b))
        self._prefix = prefix

    def _gl_panel(self, lo: float, hi: float) -> np.ndarray:
        if hi <= lo:
            return np.zeros(3, dtype=complex)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        total = np.zeros(3, dtype=complex)
        for node, w in zip(_GL_NODES, _GL_WEIGHTS):
            xs = self.traj.state_at(mid + half * node)
            total += (w * half) * beta_coefficients(xs)
        return total

    def integral(self, s: float) -> np.ndarray:
        if not self._steps:
            return np.zeros(3, dtype=complex)
        i = bisect.bisect_right(self._starts, s) - 1
        i = min(max(i, 0), len(self._steps) - 1)
        lo, hi = self._steps[i]
        partial = self._gl_panel(lo, min(s, hi))
        return (self._prefix[i] + partial) * self.traj.delta

    def scalar_factor(self, s: float, mu) -> np.ndarray:
        return np.exp(-2j * np.pi * complex(mu) * self.integral(s))


def _beta_integrals(traj: FlowTrajectory, fractions) -> np.ndarray:
    """int_{t0}^{t(s_k)} beta_i dt for each checkpoint fraction, shape (3, K)."""
    quad = BetaIntegrator(traj)
    out = np.zeros((3, len(list(fractions))), dtype=complex)
    for k, s_k in enumerate(fractions):
        out[:, k] = quad.integral(s_k)
    return out


# --- evolution-law verification -----------------------------------------------

@dataclass
class EvolutionReport:
    """End-to-end check of M_i(t) = c_i(t) M_i(t0) for an HII_flow run."""

    run: HalphenRun
    checkpoints: list            # t values of the checkpoints
    base_point: complex
    references: list             # M_i(t0), i = 0..2
    c_values: np.ndarray         # (3, K) scalar factors from quadrature
    residuals: np.ndarray        # (3, K) relative evolution-law residuals
    max_residual: float
    beta_sum_max: float          # max |sum_i beta_i| at checkpoints
    beta_moment_max: float       # max |sum_i beta_i x_i - 1| at checkpoints
    scalar_rate_max: float       # max |db_i/dt + mu beta_i| along trajectory
    quad_consistency_max: float  # max |b_i(t_k) - b_i(t0) + mu I_ik|
    flow_err_estimate: float
    monodromy_err_estimate: float
    verdict: str
    tol: float

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "loops": [
                {
                    "Gamma": matrix_to_pairs(self.references[i]),
                    "c_samples": [complex_to_pair(c)
                                  for c in self.c_values[i]],
                    "max_residual": float(np.max(self.residuals[i])),
                }
                for i in range(3)
            ],
            "tolerances": {"evolution": self.tol},
            "checkpoints": [complex_to_pair(t) for t in self.checkpoints],
            "base_point": complex_to_pair(self.base_point),
            "beta_sum_max": self.beta_sum_max,
            "beta_moment_max": self.beta_moment_max,
            "scalar_rate_max": self.scalar_rate_max,
            "quad_consistency_max": self.quad_consistency_max,
            "max_residual": self.max_residual,
        }


def _default_base_point(states) -> complex:
    """A base point well clear of every pole position passed in."""
    pts = np.concatenate([np.asarray(s, dtype=complex) for s in states])
    center = complex(np.mean(pts))
    spread = float(np.max(np.abs(pts - center))) if len(pts) else 1.0
    return center + (2.5 * spread + 1.0) * cmath.exp(0.45j)


def verify_evolution_law(run: HalphenRun, *, base_point=None,
                         tol: float = EVOLUTION_TOL,
                         rtol: float = DEFAULT_RTOL,
                         atol: float = DEFAULT_ATOL) -> EvolutionReport:
    """Verify the scalar monodromy evolution law for an HII_flow run.

    Integrates the flow, recomputes monodromy by contour integration at t0
    and at each checkpoint, computes the scalar factors by quadrature of the
    beta_i along the trajectory, and checks the beta and scalar-part
    identities.  Everything is numeric; no step uses the closed-form answer.
    """
    if run.variant != "HII_flow":
        raise ConfigError(
            "the evolution law applies to the HII_flow (Lax) variant")
    run.validate()
    traj = run.integrate(rtol, atol)
    fractions = traj.checkpoint_fractions(run.checkpoints)
    states = [traj.state_at(s) for s in [0.0] + fractions]
    if base_point is None:
        base_point = _default_base_point(states)

    mono_err = 0.0

    def monodromies(xs):
        nonlocal mono_err
        system = lax_matrix(run.mu, run.lambdas, run.C, xs)
        out = []
        for i in range(3):
            rec = monodromy_matrix(system, LoopSpec(i, base_point), (),
                                   rtol, atol)
            mono_err = max(mono_err, rec.err_estimate)
            out.append(rec.matrix)
        return out

    refs = monodromies(states[0])
    integrals = _beta_integrals(traj, fractions)
    c_values = np.exp(-2j * np.pi * run.mu * integrals)

    residuals = np.zeros((3, len(fractions)))
    for k, s_k in enumerate(fractions):
        mats = monodromies(states[k + 1])
        for i in range(3):
            residuals[i, k] = (norm_inf(mats[i] - c_values[i, k] * refs[i])
                               / norm_inf(refs[i]))

    beta_sum_max = 0.0
    beta_moment_max = 0.0
    for xs in states:
        beta = beta_coefficients(xs)
        beta_sum_max = max(beta_sum_max, abs(np.sum(beta)))
        beta_moment_max = max(
            beta_moment_max,
            abs(np.sum(beta * np.asarray(xs, complex)) - 1.0))

    # scalar-part ODE along the trajectory, at step midpoints and nodes
    scalar_rate_max = 0.0
    sample_ss = sorted({0.0, 1.0,
                        *(float(s) for s in traj.solution.ss),
                        *(0.5 * (a + b) for a, b in traj.solution.steps())})
    for s in sample_ss:
        xs = traj.state_at(s)
        rate = scalar_parts_rate(xs, run.mu, run.quad_constants)
        beta = beta_coefficients(xs)
        scalar_rate_max = max(scalar_rate_max,
                              float(np.max(np.abs(rate + run.mu * beta))))

    # quadrature consistency: b_i(t_k) - b_i(t0) = -mu * int beta_i dt
    b0 = scalar_parts(states[0], run.mu)
    quad_consistency_max = 0.0
    for k in range(len(fractions)):
        bk = scalar_parts(states[k + 1], run.mu)
        gap = bk - b0 + run.mu * integrals[:, k]
        quad_consistency_max = max(quad_consistency_max,
                                   float(np.max(np.abs(gap))))

    max_residual = float(np.max(residuals)) if residuals.size else 0.0
    verdict = ("evolution_law_verified" if max_residual < tol
               else "evolution_law_violated")
    return EvolutionReport(
        run=run, checkpoints=[traj.t_of(s) for s in fractions],
        base_point=complex(base_point), references=refs, c_values=c_values,
        residuals=residuals, max_residual=max_residual,
        beta_sum_max=beta_sum_max, beta_moment_max=beta_moment_max,
        scalar_rate_max=scalar_rate_max,
        quad_consistency_max=quad_consistency_max,
        flow_err_estimate=traj.err_estimate,
        monodromy_err_estimate=mono_err, verdict=verdict, tol=tol)


# --- trajectory output --------------------------------------------------------

def write_trajectory_csv(traj: FlowTrajectory, path, num_rows: int = 201,
                         mu=None) -> None:
    """Uniformly sampled trajectory table.

    Columns: s, re/im of t and of each flow variable.  For HII_flow the
    beta_i are appended, and when mu is given also the scalar parts b_i and
    the accumulated scalar monodromy factors c_i.
    """
    names = _VAR_NAMES[traj.variant]
    with_lax = traj.variant == "HII_flow"
    with_mu = with_lax and mu is not None
    header = ["s", "t_re", "t_im"]
    for name in names:
        header += [f"{name}_re", f"{name}_im"]
    if with_lax:
        for i in (1, 2, 3):
            header += [f"beta{i}_re", f"beta{i}_im"]
    if with_mu:
        for i in (1, 2, 3):
            header += [f"b{i}_re", f"b{i}_im"]
        for i in (1, 2, 3):
            header += [f"c{i}_re", f"c{i}_im"]
        quad = BetaIntegrator(traj)

    def emit(row, values):
        for v in values:
            row += [f"{v.real:.17g}", f"{v.imag:.17g}"]

    with open(path, "w", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(header)
        for k in range(num_rows):
            s = k / (num_rows - 1) if num_rows > 1 else 0.0
            t = traj.t_of(s)
            state = traj.state_at(s)
            row = [f"{s:.10g}", f"{t.real:.17g}", f"{t.imag:.17g}"]
            emit(row, state)
            if with_lax:
                emit(row, beta_coefficients(state))
            if with_mu:
                emit(row, scalar_parts(state, mu))
                emit(row, quad.scalar_factor(s, mu))
            writer.writerow(row)
