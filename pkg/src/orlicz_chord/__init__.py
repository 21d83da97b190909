"""Chord integrals, Orlicz chord additions and their inequalities for star bodies."""
from .chord_addition import LpSum, OrliczSum, eps_combination, lp_chord_add, orlicz_chord_combine, solve_half_chord
from .errors import (
    ArityMismatch,
    ChordError,
    ConfigError,
    ConvergenceFailure,
    DigestParseError,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidParameter,
    NonPositiveArgument,
    NonPositiveRadial,
    SingularMatrix,
    TabulatedLookupError,
    ZeroCoefficients,
)
from .inequalities import (
    CHECK_NAMES,
    GeneratorConfig,
    InequalityReport,
    check_decomposition,
    check_jensen_bound,
    check_lp_bm,
    check_lp_minkowski,
    check_minkowski_ith,
    check_orlicz_bm,
    check_orlicz_minkowski,
    check_sl_invariance,
    falsification_search,
    replay_digest,
    run_check,
    run_trials,
)
from .integrals import (
    IntegralResult,
    chord_integral,
    chord_measure,
    ith_mixed_chord,
    lp_mixed_chord,
    mixed_chord_integral,
    orlicz_mixed_chord,
    variational_derivative,
)
from .orlicz_fn import OrliczFunction, OrliczFunctionM, Power, PowerMix, PowerSum, SumOfUnivariate, validate_class
from .quadrature import SphereQuadrature, circle_rule, integrate, monte_carlo_rule, parse_rule, refine, sphere_rule_n3
from .star_body import (
    Ball,
    Dilate,
    Ellipsoid,
    LinearImage,
    LinearMap,
    PerturbationTerm,
    PerturbedSphere,
    StarBody,
    Tabulated,
    half_chord,
    linear_image,
    radial,
    radial_distance,
    similar_chord_check,
)

__version__ = "0.1.0"
