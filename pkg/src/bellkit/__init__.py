"""Bell expressions over finite measurement scenarios: exact local bounds by
strategy enumeration, quantum values on small multi-qubit states, white-noise
robustness, and measurement-angle search."""

__version__ = "0.1.0"

from .builtins import (
    TRIPARTITE_BINARY,
    builtin_expression,
    builtin_magnitude,
    builtin_names,
    register_builtin,
)
from .errors import (
    BellkitError,
    ConfigError,
    DegenerateExpressionError,
    DimensionMismatchError,
    EnumerationCapError,
    NoRootError,
    NoViolationError,
    ParseError,
    ScenarioError,
    ScenarioMismatchError,
    UnknownBuiltinError,
    UnsupportedScenarioError,
)
from .exprformat import (
    DuplicateTermWarning,
    ExpressionDocument,
    parse_document,
    parse_expansion,
    parse_expression,
    serialize_expansion,
    serialize_expression,
)
from .fixtures import (
    g_paper_expansion_fixture,
    g_paper_expansion_fixture_path,
    g_paper_expansion_fixture_text,
)
from .lhv import (
    DEFAULT_ENUMERATION_CAP,
    DiffEntry,
    DiffReport,
    FullJointExpansion,
    LocalBoundResult,
    diff_expansion,
    enumerate_strategies,
    evaluate_on_strategy,
    expand_full_joint,
    local_bounds,
    trivial_bounds,
)
from .noise import (
    NoiseReport,
    coefficient_sum,
    tolerance_by_root_scan,
    white_noise_tolerance,
)
from .optimize import (
    AngleParameterization,
    OptimizationResult,
    OptimizerConfig,
    optimize_measurements,
)
from .quantum import (
    DensityMatrix,
    ExpressionValue,
    MeasurementModel,
    PureState,
    TermContribution,
    ViolationReport,
    correlator,
    expression_value,
    ghz_state,
    joint_probability,
    mix_with_white_noise,
    paper_model,
    parse_model,
    violation_report,
)
from .scenario import (
    BellExpression,
    CorrelatorExpression,
    MarginalTerm,
    Scenario,
    as_probability_form,
    correlator_to_probability,
    make_correlator_expression,
    make_expression,
    term_count,
)
