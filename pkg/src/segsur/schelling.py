"""Schelling segregation simulator on a square lattice with hard borders.

Agents live on a side x side grid, one per cell, each carrying a type id.
An agent inspects every occupied cell within Euclidean distance ``perception``
and is satisfied when the same-type fraction of its occupied neighbors
reaches its intolerance threshold (agents with no occupied neighbors are
always satisfied). Each iteration, satisfaction is evaluated against a
snapshot of the grid; the unsatisfied agents then relocate one by one, in a
seeded random order, each to a cell drawn uniformly from the cells vacant at
its move time. A run stops at the first iteration with no movement, or at
the iteration cap.

Neighbor counts are obtained per iteration by convolving the per-type
occupancy indicators with a disk kernel (FFT, zero padding = hard borders),
so the per-step cost is independent of how many agents move.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
import scipy.fft

from .params import ScenarioParams

try:
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

VACANT = -1
ITERATION_CAP = 1000


class Grid:
    """Square occupancy lattice: ``cells[i, j]`` is -1 (vacant) or a type id."""

    __slots__ = ("cells",)

    def __init__(self, cells: np.ndarray):
        cells = np.asarray(cells, dtype=np.int8)
        if cells.ndim != 2 or cells.shape[0] != cells.shape[1]:
            raise ValueError("grid must be a square 2-D array")
        self.cells = cells

    @property
    def side(self) -> int:
        return self.cells.shape[0]

    def copy(self) -> "Grid":
        return Grid(self.cells.copy())

    def agent_cells(self) -> np.ndarray:
        """Flat row-major indices of occupied cells."""
        return np.flatnonzero(self.cells.ravel() != VACANT)

    @property
    def agent_count(self) -> int:
        return int(np.count_nonzero(self.cells != VACANT))

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and np.array_equal(self.cells, other.cells)

    def to_csv(self, path) -> None:
        """Debug/plot export: side on the first line, then the cell rows."""
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"{self.side}\n")
            for row in self.cells:
                f.write(",".join(str(int(v)) for v in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "Grid":
        with open(path, "r", encoding="utf-8") as f:
            side = int(f.readline().strip())
            rows = [
                [int(v) for v in f.readline().strip().split(",")] for _ in range(side)
            ]
        return cls(np.array(rows, dtype=np.int8))


@dataclass(frozen=True)
class SimulationOutcome:
    converged: bool
    iterations: int
    final_sparsity: float
    final_similarity: float
    seed: int


def agent_count(density: float, side: int) -> int:
    """Number of agents placed on a side x side grid at the given density."""
    return int(math.floor(density * side * side))


def neighborhood(cell: tuple[int, int], radius: int, side: int) -> set[tuple[int, int]]:
    """On-grid cells within Euclidean distance ``radius`` of ``cell``, excluding it.

    Distances are measured between integer cell coordinates; borders are hard
    (no wraparound).
    """
    i, j = cell
    out = set()
    r2 = radius * radius
    for di in range(-radius, radius + 1):
        for dj in range(-radius, radius + 1):
            if di == 0 and dj == 0:
                continue
            if di * di + dj * dj > r2:
                continue
            ni, nj = i + di, j + dj
            if 0 <= ni < side and 0 <= nj < side:
                out.add((ni, nj))
    return out


def is_satisfied(
    agent_cell: tuple[int, int], grid: Grid, intolerance: float, radius: int
) -> bool:
    """Whether the agent accepts its neighborhood.

    Satisfied when it has no occupied neighbors, or when the same-type
    fraction of its occupied neighbors is at least ``intolerance``.
    """
    i, j = agent_cell
    own = grid.cells[i, j]
    if own == VACANT:
        raise ValueError(f"cell {agent_cell} is vacant")
    same = 0
    occupied = 0
    for ni, nj in neighborhood(agent_cell, radius, grid.side):
        t = grid.cells[ni, nj]
        if t != VACANT:
            occupied += 1
            if t == own:
                same += 1
    if occupied == 0:
        return True
    return same / occupied >= intolerance


class _NeighborCounter:
    """Cached FFT machinery for one (side, radius) pair."""

    _cache: dict[tuple[int, int], "_NeighborCounter"] = {}

    def __init__(self, side: int, radius: int):
        self.side = side
        self.radius = radius
        size = 2 * radius + 1
        dy, dx = np.mgrid[-radius : radius + 1, -radius : radius + 1]
        kernel = ((dx * dx + dy * dy <= radius * radius) & ((dx != 0) | (dy != 0))).astype(
            float
        )
        # zero padding to at least side + 2*radius makes the circular
        # convolution linear, i.e. hard borders
        self.n = scipy.fft.next_fast_len(side + size - 1)
        self.kernel_f = scipy.fft.rfftn(kernel, s=(self.n, self.n))
        ones = np.ones((side, side))
        self.neighborhood_sizes = self._convolve(ones[None])[0]

    @classmethod
    def get(cls, side: int, radius: int) -> "_NeighborCounter":
        key = (side, radius)
        if key not in cls._cache:
            cls._cache[key] = cls(side, radius)
        return cls._cache[key]

    def _convolve(self, stack: np.ndarray) -> np.ndarray:
        f = scipy.fft.rfftn(stack, s=(self.n, self.n), axes=(-2, -1))
        conv = scipy.fft.irfftn(f * self.kernel_f[None], s=(self.n, self.n), axes=(-2, -1))
        r = self.radius
        out = conv[:, r : r + self.side, r : r + self.side]
        return np.rint(out).astype(np.int64)

    def type_counts(self, cells: np.ndarray, num_types: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-cell counts of same-radius neighbors: one plane per type, plus total."""
        stack = (cells[None, :, :] == np.arange(num_types, dtype=cells.dtype)[:, None, None])
        per_type = self._convolve(stack.astype(float))
        return per_type, per_type.sum(axis=0)


def _agent_neighbor_stats(grid: Grid, radius: int, num_types: int):
    """(same, occupied, neighborhood size) per agent, in row-major agent order."""
    agents = grid.agent_cells()
    if agents.size == 0:
        raise ValueError("grid has no agents")
    counter = _NeighborCounter.get(grid.side, radius)
    per_type, occ = counter.type_counts(grid.cells, num_types)
    types = grid.cells.ravel()[agents].astype(np.int64)
    rows, cols = np.divmod(agents, grid.side)
    same = per_type[types, rows, cols]
    occupied = occ.ravel()[agents]
    sizes = counter.neighborhood_sizes.ravel()[agents]
    return same, occupied, sizes


def sparsity(grid: Grid, radius: int) -> float:
    """Mean spread measure over agents: (different + vacant) / (same + self).

    For each agent, the numerator counts different-type occupied neighbors
    plus vacant cells in its neighborhood; the denominator counts same-type
    occupied neighbors plus one for the agent itself. Low values mean strong
    segregation, high values mean mixing or emptiness.
    """
    num_types = int(grid.cells.max()) + 1
    same, occupied, sizes = _agent_neighbor_stats(grid, radius, num_types)
    different = occupied - same
    vacant = sizes - occupied
    return float(np.mean((different + vacant) / (same + 1)))


def similarity(grid: Grid, radius: int) -> float:
    """Mean same-type fraction among occupied neighbors (1.0 for isolated agents)."""
    num_types = int(grid.cells.max()) + 1
    same, occupied, _ = _agent_neighbor_stats(grid, radius, num_types)
    ratios = np.where(occupied == 0, 1.0, same / np.maximum(occupied, 1))
    return float(np.mean(ratios))


def _initialize(params: ScenarioParams, rng: np.random.Generator) -> Grid:
    side = params.map_side
    n_cells = side * side
    n_agents = agent_count(params.density, side)
    positions = rng.choice(n_cells, size=n_agents, replace=False)
    types = rng.integers(0, params.num_types, size=n_agents)
    cells = np.full(n_cells, VACANT, dtype=np.int8)
    cells[positions] = types.astype(np.int8)
    return Grid(cells.reshape(side, side))


def initialize(params: ScenarioParams, seed: int) -> Grid:
    """Seeded random placement: uniform cells without replacement, uniform types."""
    return _initialize(params, np.random.default_rng(seed))


if _HAVE_NUMBA:

    @_njit(cache=True)
    def _apply_moves(cells, vacant, movers, targets):  # pragma: no cover - jitted
        for i in range(movers.shape[0]):
            old = movers[i]
            j = targets[i]
            tgt = vacant[j]
            vacant[j] = old
            cells[tgt] = cells[old]
            cells[old] = VACANT

else:

    def _apply_moves(cells, vacant, movers, targets):
        for i in range(movers.shape[0]):
            old = movers[i]
            j = targets[i]
            tgt = vacant[j]
            vacant[j] = old
            cells[tgt] = cells[old]
            cells[old] = VACANT


def _step_inplace(
    cells_flat: np.ndarray,
    side: int,
    params: ScenarioParams,
    rng: np.random.Generator,
    counter: _NeighborCounter,
) -> int:
    cells2d = cells_flat.reshape(side, side)
    per_type, occ = counter.type_counts(cells2d, params.num_types)
    agents = np.flatnonzero(cells_flat != VACANT)
    types = cells_flat[agents].astype(np.int64)
    rows, cols = np.divmod(agents, side)
    same = per_type[types, rows, cols]
    occupied = occ.ravel()[agents]
    satisfied = (occupied == 0) | (
        same / np.maximum(occupied, 1) >= params.intolerance
    )
    unhappy = agents[~satisfied]
    if unhappy.size == 0:
        return 0
    vacant = np.flatnonzero(cells_flat == VACANT)
    if vacant.size == 0:
        return 0
    movers = unhappy[rng.permutation(unhappy.size)]
    targets = rng.integers(0, vacant.size, size=movers.size)
    _apply_moves(cells_flat, vacant, movers, targets)
    return int(movers.size)


def step(
    grid: Grid, params: ScenarioParams, rng: np.random.Generator
) -> tuple[Grid, int]:
    """One synchronous-evaluation iteration; returns the new grid and move count.

    Satisfaction is judged on the pre-step snapshot; the unsatisfied agents
    then move sequentially, in an order shuffled by ``rng``, each to a cell
    uniformly drawn from those vacant when its turn comes. With no vacant
    cell anywhere, nobody moves.
    """
    new = grid.copy()
    counter = _NeighborCounter.get(grid.side, params.perception)
    moved = _step_inplace(new.cells.reshape(-1), grid.side, params, rng, counter)
    return new, moved


def iter_steps(
    params: ScenarioParams, seed: int, max_iterations: int = ITERATION_CAP
) -> Iterator[tuple[int, Grid, int]]:
    """Drive a run, yielding (iteration, grid, moved) after every step.

    The yielded grid is live and reused between iterations; copy it to keep a
    snapshot. Ends after the first zero-move step or at the cap.
    """
    rng = np.random.default_rng(seed)
    grid = _initialize(params, rng)
    counter = _NeighborCounter.get(grid.side, params.perception)
    cells_flat = grid.cells.reshape(-1)
    for iteration in range(1, max_iterations + 1):
        moved = _step_inplace(cells_flat, grid.side, params, rng, counter)
        yield iteration, grid, moved
        if moved == 0:
            return


def run_simulation(
    params: ScenarioParams, seed: int, max_iterations: int = ITERATION_CAP
) -> SimulationOutcome:
    """Run to convergence (an iteration without movement) or to the cap."""
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    iterations = 0
    moved = -1
    grid = None
    for iterations, grid, moved in iter_steps(params, seed, max_iterations):
        pass
    return SimulationOutcome(
        converged=moved == 0,
        iterations=iterations,
        final_sparsity=sparsity(grid, params.perception),
        final_similarity=similarity(grid, params.perception),
        seed=seed,
    )
