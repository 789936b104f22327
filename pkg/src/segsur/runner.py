"""Deterministic parallel execution of simulation batches.

Each run is a pure function of its descriptor, so scheduling never affects
results; the output ordering is canonical (design index, then repetition).
Failed runs become error markers instead of aborting the batch.
"""

from __future__ import annotations

import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional, Union

from .data import ErrorRecord, RunRecord
from .doe import RunDescriptor
from .params import ScenarioParams
from .schelling import ITERATION_CAP, run_simulation


def simulate_descriptor(
    descriptor: RunDescriptor, max_iterations: int = ITERATION_CAP
) -> Union[RunRecord, ErrorRecord]:
    start = time.perf_counter()
    try:
        outcome = run_simulation(descriptor.params, descriptor.seed, max_iterations)
    except Exception as exc:
        print(
            f"run (design={descriptor.design_index}, rep={descriptor.repetition}) "
            f"failed: {exc}",
            file=sys.stderr,
        )
        return ErrorRecord(
            design_index=descriptor.design_index,
            tier=descriptor.tier,
            repetition=descriptor.repetition,
            seed=descriptor.seed,
            params=descriptor.params,
        )
    wall_ms = int(round((time.perf_counter() - start) * 1000))
    return RunRecord(
        design_index=descriptor.design_index,
        tier=descriptor.tier,
        repetition=descriptor.repetition,
        seed=descriptor.seed,
        params=descriptor.params,
        converged=outcome.converged,
        iterations=outcome.iterations,
        sparsity=outcome.final_sparsity,
        similarity=outcome.final_similarity,
        wall_time_ms=wall_ms,
    )


def _warmup() -> None:
    """Compile the jitted move kernel before forking workers."""
    params = ScenarioParams(
        num_types=2, density=0.5, intolerance=0.9, map_side=10, perception=1
    )
    run_simulation(params, seed=0, max_iterations=2)


def run_batch(
    descriptors: list[RunDescriptor],
    max_iterations: int = ITERATION_CAP,
    workers: int = 1,
    progress: Optional[Callable[[int, int], None]] = None,
) -> tuple[list[RunRecord], list[ErrorRecord]]:
    """Run every descriptor, in parallel when workers > 1; canonical ordering."""
    total = len(descriptors)
    results: list[Union[RunRecord, ErrorRecord]] = []
    if workers <= 1:
        for i, d in enumerate(descriptors):
            results.append(simulate_descriptor(d, max_iterations))
            if progress:
                progress(i + 1, total)
    else:
        _warmup()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(simulate_descriptor, d, max_iterations) for d in descriptors
            ]
            for i, fut in enumerate(futures):
                results.append(fut.result())
                if progress:
                    progress(i + 1, total)
    records = [r for r in results if isinstance(r, RunRecord)]
    errors = [r for r in results if isinstance(r, ErrorRecord)]
    records.sort(key=lambda r: (r.design_index, r.repetition))
    errors.sort(key=lambda r: (r.design_index, r.repetition))
    return records, errors
