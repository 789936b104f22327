"""segsur: Schelling segregation simulation plus a surrogate-model workbench.

The pipeline: build a nested Latin hypercube design over the five simulation
inputs, run the seeded simulation batch, fit and rank a roster of surrogate
models on the resulting dataset, and explain the best ones with MDI, exact
Shapley attributions and PDP/ICE curves.
"""

from .data import Dataset, RunRecord, anova_f, pearson, summarize
from .doe import Design, DesignSpec, expand_repetitions, generate_nested_lhs
from .params import FEATURE_BOUNDS, FEATURE_NAMES, ScenarioParams
from .schelling import (
    Grid,
    SimulationOutcome,
    agent_count,
    initialize,
    is_satisfied,
    neighborhood,
    run_simulation,
    similarity,
    sparsity,
    step,
)
from .seeding import stable_seed

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ScenarioParams",
    "FEATURE_NAMES",
    "FEATURE_BOUNDS",
    "Grid",
    "SimulationOutcome",
    "agent_count",
    "neighborhood",
    "is_satisfied",
    "sparsity",
    "similarity",
    "initialize",
    "step",
    "run_simulation",
    "Design",
    "DesignSpec",
    "generate_nested_lhs",
    "expand_repetitions",
    "Dataset",
    "RunRecord",
    "pearson",
    "anova_f",
    "summarize",
    "stable_seed",
]
