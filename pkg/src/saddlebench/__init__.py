"""saddlebench: doubly smoothed optimistic gradient methods and a
convergence-rate benchmark harness for constrained smooth minimax
problems."""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    Ball,
    Box,
    ConvexSet,
    IterationRecord,
    KLInfo,
    MinimaxProblem,
    Oracles,
    Regime,
    Simplex,
    SolverParams,
    SolverState,
    StructureInfo,
    WholeSpace,
    as_vector,
    diameter,
    normal_cone_distance,
    project,
)
from .operator import (  # noqa: F401
    AlgorithmKind,
    OperatorValue,
    RunResult,
    eval_operator,
    initial_state,
    ppm_error,
    regularized_value,
    run,
    step,
    transpose_problem,
)
from .measures import (  # noqa: F401
    MeasureResult,
    game_stationarity,
    inner_solve_strongly_convex,
    os_stationarity,
    saddle_gap,
)
from .stepsizes import (  # noqa: F401
    DerivedConstants,
    FeasibilityInterval,
    ValidationReport,
    select_params,
    symmetric_feasibility,
    validate_condition1,
)
from .diagnostics import (  # noqa: F401
    DescentRow,
    ErrorBoundConstants,
    LyapunovBreakdown,
    descent_check,
    error_bound_constants,
    lyapunov,
)
from .problems import (  # noqa: F401
    InstanceSpec,
    make_instance,
    reference_solution,
)
from .harness import (  # noqa: F401
    ExperimentConfig,
    RateFit,
    compare,
    fit_rate,
    load_config,
    min_so_far,
    parse_config,
    run_experiment,
    tightness_report,
)
from .backend import COMPILED_AVAILABLE  # noqa: F401
