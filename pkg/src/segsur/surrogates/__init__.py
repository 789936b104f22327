"""Surrogate models for the simulation's sparsity and convergence outputs."""

from .base import (
    MODEL_KINDS,
    ModelSpec,
    SingularSystemError,
    SurrogateModel,
    UnsupportedCapabilityError,
)
from .evaluate import (
    DEFAULT_ROSTER,
    EvaluationReport,
    ModelScore,
    classify,
    evaluate,
    fit,
    fit_roster,
    make_model,
    predict_mean,
    predict_variance,
)
from .kriging import GaussianProcess
from .linear import PolynomialLeastSquares, quadratic_expansion
from .neighbors import InverseDistanceWeighting, KNearestNeighbors
from .rbf import RbfInterpolant
from .trees import DecisionTree, RandomForest

__all__ = [
    "MODEL_KINDS",
    "DEFAULT_ROSTER",
    "ModelSpec",
    "SurrogateModel",
    "SingularSystemError",
    "UnsupportedCapabilityError",
    "EvaluationReport",
    "ModelScore",
    "GaussianProcess",
    "RbfInterpolant",
    "InverseDistanceWeighting",
    "KNearestNeighbors",
    "PolynomialLeastSquares",
    "quadratic_expansion",
    "DecisionTree",
    "RandomForest",
    "make_model",
    "fit",
    "fit_roster",
    "predict_mean",
    "predict_variance",
    "classify",
    "evaluate",
]
