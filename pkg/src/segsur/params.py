"""Scenario parameter space shared by the simulator, the designs and the models.

Every matrix in the pipeline uses the canonical feature order
``(num_types, density, intolerance, map_side, perception)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEATURE_NAMES = ("num_types", "density", "intolerance", "map_side", "perception")

# name -> (lower, upper, is_integer)
FEATURE_BOUNDS = {
    "num_types": (2, 5, True),
    "density": (0.01, 1.0, False),
    "intolerance": (0.0, 1.0, False),
    "map_side": (10, 40, True),
    "perception": (1, 10, True),
}

CONTINUOUS_FEATURES = tuple(
    i for i, name in enumerate(FEATURE_NAMES) if not FEATURE_BOUNDS[name][2]
)
INTEGER_FEATURES = tuple(
    i for i, name in enumerate(FEATURE_NAMES) if FEATURE_BOUNDS[name][2]
)


def bounds_arrays() -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper bound vectors in canonical feature order."""
    lower = np.array([FEATURE_BOUNDS[n][0] for n in FEATURE_NAMES], dtype=float)
    upper = np.array([FEATURE_BOUNDS[n][1] for n in FEATURE_NAMES], dtype=float)
    return lower, upper


def normalize_features(X: np.ndarray) -> np.ndarray:
    """Min-max map of raw scenario rows onto the unit hypercube."""
    lower, upper = bounds_arrays()
    return (np.asarray(X, dtype=float) - lower) / (upper - lower)


@dataclass(frozen=True)
class ScenarioParams:
    """One point of the five-dimensional simulation input space.

    num_types : number of agent types, 2..5
    density : fraction of occupied cells, 0.01..1
    intolerance : demanded same-type neighbor fraction, 0..1
    map_side : side of the square grid in cells, 10..40
    perception : Euclidean neighborhood radius in cells, 1..10
    """

    num_types: int
    density: float
    intolerance: float
    map_side: int
    perception: int

    def __post_init__(self):
        if not 2 <= self.num_types <= 5:
            raise ValueError(f"num_types {self.num_types} outside [2, 5]")
        if not 0.01 <= self.density <= 1.0:
            raise ValueError(f"density {self.density} outside [0.01, 1]")
        if not 0.0 <= self.intolerance <= 1.0:
            raise ValueError(f"intolerance {self.intolerance} outside [0, 1]")
        if not 10 <= self.map_side <= 40:
            raise ValueError(f"map_side {self.map_side} outside [10, 40]")
        if not 1 <= self.perception <= 10:
            raise ValueError(f"perception {self.perception} outside [1, 10]")

    def to_vector(self) -> np.ndarray:
        return np.array(
            [self.num_types, self.density, self.intolerance, self.map_side, self.perception],
            dtype=float,
        )

    @classmethod
    def from_vector(cls, v) -> "ScenarioParams":
        v = np.asarray(v, dtype=float)
        return cls(
            num_types=int(round(v[0])),
            density=float(v[1]),
            intolerance=float(v[2]),
            map_side=int(round(v[3])),
            perception=int(round(v[4])),
        )
