"""Nested Latin hypercube designs over the mixed integer/continuous input space.

The design is built tier by tier: the smallest tier is a plain LHS, and each
extension fills exactly the bins left empty at the finer stratification, so
every declared prefix keeps the one-point-per-bin property. A stochastic
evolutionary search then improves the maximin criterion (minimum pairwise
Euclidean distance in the unit hypercube) using coordinate swaps restricted
to points of the same tier segment, which cannot break any prefix's
stratification.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import FEATURE_BOUNDS, FEATURE_NAMES, ScenarioParams
from .seeding import stable_seed


@dataclass(frozen=True)
class VariableSpec:
    name: str
    lower: float
    upper: float
    integer: bool

    @property
    def cardinality(self) -> int:
        """Number of distinct levels (integer variables only)."""
        if not self.integer:
            raise ValueError(f"{self.name} is continuous")
        return int(self.upper) - int(self.lower) + 1


def scenario_variables() -> tuple[VariableSpec, ...]:
    return tuple(
        VariableSpec(name, *FEATURE_BOUNDS[name]) for name in FEATURE_NAMES
    )


@dataclass(frozen=True)
class DesignSpec:
    sizes: tuple[int, ...] = (50, 100, 200)
    repetitions: int = 5
    seed: int = 0
    variables: tuple[VariableSpec, ...] = field(default_factory=scenario_variables)
    ese_iterations: int = 300
    strict_integers: bool = False

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError("sizes must be positive")
        for a, b in zip(sizes, sizes[1:]):
            if b <= a:
                raise ValueError(f"sizes must be strictly ascending, got {sizes}")
            if b % a != 0:
                raise ValueError(
                    f"each size must divide the next ({a} does not divide {b})"
                )
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.strict_integers:
            for v in self.variables:
                if v.integer and sizes[-1] > v.cardinality:
                    raise ValueError(
                        f"strict integer LHS impossible: size {sizes[-1]} exceeds "
                        f"the {v.cardinality} levels of {v.name}"
                    )


@dataclass
class Design:
    """Ordered design points with per-point tier and the generating unit coordinates."""

    points: list[ScenarioParams]
    tier: np.ndarray
    unit: np.ndarray
    initial_maximin: float
    maximin: float

    def __len__(self) -> int:
        return len(self.points)

    def matrix(self) -> np.ndarray:
        return np.array([p.to_vector() for p in self.points])


@dataclass(frozen=True)
class RunDescriptor:
    design_index: int
    tier: int
    repetition: int
    seed: int
    params: ScenarioParams


def _base_lhs(m: int, d: int, rng: np.random.Generator) -> np.ndarray:
    u = np.empty((m, d))
    for k in range(d):
        u[:, k] = (rng.permutation(m) + rng.random(m)) / m
    return u


def _extend_lhs(u: np.ndarray, m_new: int, rng: np.random.Generator) -> np.ndarray:
    """Add points so the first m_new rows are an LHS, keeping existing rows."""
    m_old, d = u.shape
    added = np.empty((m_new - m_old, d))
    for k in range(d):
        occupied = np.floor(u[:, k] * m_new).astype(int)
        empty = np.setdiff1d(np.arange(m_new), occupied)
        rng.shuffle(empty)
        added[:, k] = (empty + rng.random(len(empty))) / m_new
    return np.vstack([u, added])


def _min_distance(u: np.ndarray) -> float:
    diff = u[:, None, :] - u[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=2))
    np.fill_diagonal(d, np.inf)
    return float(d.min())


def _ese_improve(
    u: np.ndarray,
    segments: list[tuple[int, int]],
    rng: np.random.Generator,
    n_iter: int,
    inner: int = 30,
) -> tuple[np.ndarray, float]:
    """Stochastic evolutionary maximin search with segment-restricted swaps.

    Swapping one coordinate between two points of the same tier segment keeps
    every tier's per-dimension value multiset intact, hence preserves nested
    stratification. A threshold allows occasional worsening moves and adapts
    to the acceptance/improvement ratio; the best design seen is returned.
    """
    n, d = u.shape
    diff = u[:, None, :] - u[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    crit = float(dist.min())
    best_u, best_crit = u.copy(), crit
    seg_sizes = np.array([b - a for a, b in segments], dtype=float)
    seg_prob = seg_sizes / seg_sizes.sum()
    threshold = 0.005 * max(crit, 1e-12)

    for _ in range(n_iter):
        accepted = improved = 0
        for _ in range(inner):
            s = rng.choice(len(segments), p=seg_prob)
            a0, b0 = segments[s]
            if b0 - a0 < 2:
                continue
            i, j = rng.choice(np.arange(a0, b0), size=2, replace=False)
            k = rng.integers(0, d)
            ui, uj = u[i].copy(), u[j].copy()
            ui[k], uj[k] = u[j, k], u[i, k]
            row_i = np.sqrt(((u - ui) ** 2).sum(axis=1))
            row_j = np.sqrt(((u - uj) ** 2).sum(axis=1))
            row_i[i] = np.inf
            row_j[j] = np.inf
            row_i[j] = row_j[i] = np.sqrt(((ui - uj) ** 2).sum())
            masked = dist.copy()
            masked[[i, j], :] = np.inf
            masked[:, [i, j]] = np.inf
            new_crit = float(min(masked.min(), row_i.min(), row_j.min()))
            if new_crit >= crit - threshold * rng.random():
                u[i, k], u[j, k] = ui[k], uj[k]
                dist[i, :] = row_i
                dist[:, i] = row_i
                dist[j, :] = row_j
                dist[:, j] = row_j
                dist[i, j] = dist[j, i] = row_i[j]
                dist[i, i] = dist[j, j] = np.inf
                crit = new_crit
                accepted += 1
                if crit > best_crit:
                    best_crit = crit
                    best_u = u.copy()
                    improved += 1
        # adapt: cool down while improving, warm up when stuck
        ratio = accepted / inner
        if improved > 0:
            threshold *= 0.8 if ratio > 0.1 else 1.0 / 0.8
        else:
            threshold = threshold / 0.9 if ratio < 0.1 else threshold * 0.9
        threshold = min(threshold, max(best_crit, 1e-12))
    return best_u, best_crit


def scale_unit(u: np.ndarray, variables: tuple[VariableSpec, ...]) -> np.ndarray:
    """Map unit-hypercube coordinates to raw variable values.

    Integer variables scale onto [lower, upper + 1) and floor, so every level
    has equal mass; continuous variables scale linearly.
    """
    out = np.empty_like(u)
    for k, v in enumerate(variables):
        if v.integer:
            levels = v.cardinality
            out[:, k] = np.minimum(
                np.floor(u[:, k] * levels).astype(int) + int(v.lower), int(v.upper)
            )
        else:
            out[:, k] = v.lower + u[:, k] * (v.upper - v.lower)
    return out


def generate_nested_lhs(spec: DesignSpec) -> Design:
    """Build the nested LHS and improve its maximin score; fully seeded."""
    rng = np.random.default_rng(spec.seed)
    d = len(spec.variables)
    u = _base_lhs(spec.sizes[0], d, rng)
    for m in spec.sizes[1:]:
        u = _extend_lhs(u, m, rng)
    initial_maximin = _min_distance(u)
    bounds = [0] + list(spec.sizes)
    segments = list(zip(bounds[:-1], bounds[1:]))
    u, maximin = _ese_improve(u, segments, rng, spec.ese_iterations)

    raw = scale_unit(u, spec.variables)
    points = [ScenarioParams.from_vector(row) for row in raw]
    tier = np.searchsorted(np.array(spec.sizes), np.arange(len(points)), side="right")
    return Design(
        points=points,
        tier=tier.astype(int),
        unit=u,
        initial_maximin=initial_maximin,
        maximin=maximin,
    )


def check_stratification(design: Design, sizes: tuple[int, ...], dims: tuple[int, ...]) -> bool:
    """Exact one-point-per-bin check for every tier size on the given dimensions."""
    for m in sizes:
        for k in dims:
            bins = np.floor(design.unit[:m, k] * m).astype(int)
            if sorted(bins) != list(range(m)):
                return False
    return True


def expand_repetitions(
    design: Design, repetitions: int, global_seed: int
) -> list[RunDescriptor]:
    """One descriptor per (design point, repetition) with a deterministic run seed."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    return [
        RunDescriptor(
            design_index=i,
            tier=int(design.tier[i]),
            repetition=r,
            seed=stable_seed(global_seed, i, r),
            params=p,
        )
        for i, p in enumerate(design.points)
        for r in range(repetitions)
    ]


DESIGN_HEADER = ("index", "tier") + FEATURE_NAMES


def write_design_csv(design: Design, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(DESIGN_HEADER) + "\n")
        for i, p in enumerate(design.points):
            f.write(
                f"{i},{int(design.tier[i])},{p.num_types},{p.density!r},"
                f"{p.intolerance!r},{p.map_side},{p.perception}\n"
            )


def read_design_csv(path) -> tuple[list[ScenarioParams], np.ndarray]:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        if tuple(header) != DESIGN_HEADER:
            raise ValueError(f"unexpected design header {header}")
        points, tiers = [], []
        for line in f:
            parts = line.strip().split(",")
            if not parts or parts == [""]:
                continue
            tiers.append(int(parts[1]))
            points.append(
                ScenarioParams(
                    num_types=int(parts[2]),
                    density=float(parts[3]),
                    intolerance=float(parts[4]),
                    map_side=int(parts[5]),
                    perception=int(parts[6]),
                )
            )
    return points, np.array(tiers, dtype=int)
