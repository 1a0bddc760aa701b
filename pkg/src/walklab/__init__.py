"""Exact laws, limit laws and scheme checks for statistics of lattice paths."""

from .steps import StepSet, StructuralConstants, eval_P, motzkin, period, structural_constants
from .dist_exact import ExactDistribution, distribution
from .limits import law_eval, predict
from .errors import WalkLabError

__version__ = "0.1.0"

__all__ = [
    "StepSet",
    "StructuralConstants",
    "ExactDistribution",
    "WalkLabError",
    "eval_P",
    "motzkin",
    "period",
    "structural_constants",
    "distribution",
    "predict",
    "law_eval",
    "__version__",
]
