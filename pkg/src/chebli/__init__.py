"""Chebli-Trimeche hypergroups: characters, product measures and asymptotic decisions."""

__version__ = "0.1.0"

from .coefficients import CoefficientModel, eval_A, phase, tail_bv  # noqa: E402
from .eigenfunctions import Character, JostSolution, character, solve_jost  # noqa: E402
from .measures import RadialMeasure  # noqa: E402
from .spectral import (  # noqa: E402
    PlancherelSpec,
    SpectralSymbol,
    calibrate_plancherel,
    forward_transform,
    inverse_transform,
    line_transform,
)
from .convolution import convolve, l1_distance, product_measure, recentre, reflect, weighted_norm  # noqa: E402
from .asymptotics import ConvergenceReport, asymptotic_measure, limit_measure, nu_left, nu_right  # noqa: E402
from .decision import (  # noqa: E402
    CentreComparison,
    DecisionReport,
    WeightSpec,
    check_beurling,
    compare_centres,
    decide_irregularity,
    decide_weighted,
    weighted_admissibility,
)

__all__ = [
    "CoefficientModel", "eval_A", "phase", "tail_bv", "Character", "JostSolution", "character", "solve_jost",
    "RadialMeasure", "PlancherelSpec", "SpectralSymbol", "calibrate_plancherel", "forward_transform",
    "inverse_transform", "line_transform", "convolve", "l1_distance", "product_measure", "recentre", "reflect",
    "weighted_norm", "ConvergenceReport", "asymptotic_measure", "limit_measure", "nu_left", "nu_right",
    "CentreComparison", "DecisionReport", "WeightSpec", "check_beurling", "compare_centres",
    "decide_irregularity", "decide_weighted", "weighted_admissibility",
]
