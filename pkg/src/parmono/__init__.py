"""parmono: parameterized monodromy of linear ODE systems in the complex plane.

Systems dY/dx = A(x, t) Y with A rational in x and depending on parameters t
through exact expression trees.  The package computes monodromy matrices by
adaptive contour integration, local (Frobenius) solutions at simple poles,
zero-curvature integrability residuals, and classifies parameter families as
isomonodromic / projectively isomonodromic; a Darboux-Halphen module drives
Fuchsian Lax systems along quadratic pole flows and verifies the scalar
monodromy evolution law end to end.

Conventions: fundamental solutions are normalized to Y(x0) = I at the loop
base point, monodromy acts on the right (Y -> Y M), and loops are
counterclockwise unless stated otherwise.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    CollisionError,
    ConfigError,
    EvalSingularError,
    ExprSyntaxError,
    InputFileError,
    IntegrationFailureError,
    MissingDirectionError,
    MissingRecordError,
    NearPoleError,
    NonFiniteError,
    NotFuchsianError,
    NotSimplePoleError,
    ParamRangeError,
    ParmonoError,
    PoleCollisionError,
    PoleMigrationError,
    ResonantSpectrumError,
    SamplingExhaustedError,
    SingularGaugeError,
    SingularReferenceError,
    StepUnderflowError,
    UnknownIdentifierError,
)
from .expr import (  # noqa: F401
    ParameterPoint,
    ParamExpr,
    as_parameter_point,
    const,
    diff_expr,
    eval_expr,
    expr_to_src,
    param,
    parse_expr,
)
from .sysmodel import (  # noqa: F401
    GaugeReport,
    GaugeTransform,
    ParamRationalMatrix,
    PoleLocus,
    apply_gauge,
    dt_matrix,
    dx_matrix,
    eval_matrix,
    make_system,
    pole_orders,
)
from .monodromy import (  # noqa: F401
    Arc,
    LoopSpec,
    MonodromyRecord,
    Segment,
    TGrid,
    integrate_along,
    loop_path,
    monodromy_grid,
    monodromy_matrix,
    product_relation,
)
from .local import (  # noqa: F401
    GrowthReport,
    LocalSolution,
    frobenius_solution,
    growth_probe,
    local_monodromy,
    regular_part_taylor,
    residual_slope,
    series_residual,
)
from .classify import (  # noqa: F401
    ClassificationReport,
    ConnectionSystem,
    FuchsianSplit,
    IntegrabilityReport,
    LoopClassification,
    SplitCheckReport,
    classify_monodromy,
    fuchsian_split,
    integrability_report,
    projective_split_check,
    zero_curvature_residual,
)
from .halphen import (  # noqa: F401
    EvolutionReport,
    FlowTrajectory,
    HalphenRun,
    beta_coefficients,
    flow_rhs,
    integrate_flow,
    lax_family,
    lax_matrix,
    scalar_parts,
    verify_evolution_law,
    write_trajectory_csv,
)
from ._kernels import available_backends, backend_name  # noqa: F401
