"""Exception hierarchy with stable machine-readable error codes.

Every exception carries a ``code`` string (used in CLI error envelopes and
result records) and an optional human-oriented ``detail`` plus free-form
context attributes.
"""

from __future__ import annotations


class ParmonoError(Exception):
    """Base class for all library errors."""

    code = "INTERNAL"

    def __init__(self, detail: str = "", **context):
        self.detail = detail
        self.context = context
        super().__init__(detail)

    def __str__(self):
        if self.context:
            ctx = ", ".join(f"{k}={v!r}" for k, v in sorted(self.context.items()))
            return f"[{self.code}] {self.detail} ({ctx})" if self.detail else f"[{self.code}] ({ctx})"
        return f"[{self.code}] {self.detail}" if self.detail else f"[{self.code}]"


# --- expression layer ---------------------------------------------------------

class ExprSyntaxError(ParmonoError):
    """Malformed expression source; carries position and expected-token hint."""

    code = "SYNTAX_ERROR"

    def __init__(self, detail="", position=None, expected=None, **context):
        if position is not None:
            context.setdefault("position", position)
        super().__init__(detail, **context)
        self.position = position
        self.expected = expected


class UnknownIdentifierError(ParmonoError):
    code = "UNKNOWN_IDENTIFIER"


class ParamRangeError(ParmonoError):
    """Parameter index outside 1..num_params, or arity mismatch at evaluation."""

    code = "PARAM_OUT_OF_RANGE"


class EvalSingularError(ParmonoError):
    """Expression not evaluable at the point (division by zero, log of zero, overflow)."""

    code = "EVAL_SINGULAR"


# --- system model -------------------------------------------------------------

class NearPoleError(ParmonoError):
    """Evaluation or integration point inside the guard radius of a pole."""

    code = "NEAR_POLE"


class PoleCollisionError(ParmonoError):
    """Two declared pole loci coincide at the given parameter point."""

    code = "POLE_COLLISION"


class SingularGaugeError(ParmonoError):
    """Gauge matrix not invertible at a sample point."""

    code = "SINGULAR_GAUGE"


class SamplingExhaustedError(ParmonoError):
    """Could not draw enough admissible random samples (e.g. all near poles)."""

    code = "SAMPLING_EXHAUSTED"


# --- local solutions ----------------------------------------------------------

class NotFuchsianError(ParmonoError):
    """Operation requires simple poles only and no polynomial part."""

    code = "NOT_FUCHSIAN"


class NotSimplePoleError(ParmonoError):
    """Requested pole does not have order exactly 1 at this parameter point."""

    code = "NOT_SIMPLE"


class ResonantSpectrumError(ParmonoError):
    """Residue eigenvalues differ by a nonzero integer within tolerance."""

    code = "RESONANT_SPECTRUM"


# --- integration --------------------------------------------------------------

class IntegrationFailureError(ParmonoError):
    code = "INTEGRATION_FAILURE"


class StepUnderflowError(IntegrationFailureError):
    code = "STEP_UNDERFLOW"


class NonFiniteError(IntegrationFailureError):
    code = "NONFINITE"


class PoleMigrationError(ParmonoError):
    """Loop geometry invalid at this parameter point (pole entered the loop disk,
    base point too close to a pole, or fixed radius no longer isolates the target)."""

    code = "POLE_MIGRATION"


# --- classification -----------------------------------------------------------

class MissingRecordError(ParmonoError):
    """Monodromy record set incomplete for the requested comparison."""

    code = "MISSING_RECORD"


class SingularReferenceError(ParmonoError):
    """Reference monodromy matrix not invertible within tolerance."""

    code = "SINGULAR_REFERENCE"


# --- Halphen flows ------------------------------------------------------------

class CollisionError(ParmonoError):
    """Pole trajectories collided (or started equal) along the flow."""

    code = "COLLISION"


class MissingDirectionError(ParmonoError):
    """Requested parameter direction not present in the connection data."""

    code = "MISSING_DIRECTION"


# --- CLI / configuration ------------------------------------------------------

class ConfigError(ParmonoError):
    """Invalid configuration file or option combination."""

    code = "CONFIG_INVALID"


class InputFileError(ParmonoError):
    code = "FILE_NOT_FOUND"
