"""Run records, flat-file persistence and the screening statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
import scipy.special

from .params import FEATURE_NAMES, ScenarioParams

RUNS_HEADER = (
    "design_index",
    "tier",
    "repetition",
    "seed",
) + FEATURE_NAMES + (
    "converged",
    "iterations",
    "sparsity",
    "similarity",
    "wall_time_ms",
)


@dataclass(frozen=True)
class RunRecord:
    design_index: int
    tier: int
    repetition: int
    seed: int
    params: ScenarioParams
    converged: bool
    iterations: int
    sparsity: float
    similarity: float
    wall_time_ms: int


@dataclass(frozen=True)
class ErrorRecord:
    """Marker for a run that failed; keeps the batch going and the file resumable."""

    design_index: int
    tier: int
    repetition: int
    seed: int
    params: ScenarioParams


class Dataset:
    """Simulation runs plus the train/validation split over design indices.

    By default the tier-0 design points train and everything else validates.
    """

    def __init__(
        self,
        records: list[RunRecord],
        train_design_indices: Optional[set[int]] = None,
    ):
        self.records = sorted(records, key=lambda r: (r.design_index, r.repetition))
        keys = [(r.design_index, r.repetition) for r in self.records]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate (design_index, repetition) in dataset")
        if train_design_indices is None:
            train_design_indices = {r.design_index for r in self.records if r.tier == 0}
        self.train_design_indices = train_design_indices

    def __len__(self) -> int:
        return len(self.records)

    @property
    def train_records(self) -> list[RunRecord]:
        return [r for r in self.records if r.design_index in self.train_design_indices]

    @property
    def validation_records(self) -> list[RunRecord]:
        return [
            r for r in self.records if r.design_index not in self.train_design_indices
        ]


def feature_matrix(records: Iterable[RunRecord]) -> np.ndarray:
    return np.array([r.params.to_vector() for r in records])


def pearson(x, y) -> float:
    """Product-moment correlation; raises on unequal lengths or zero variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two equally-sized vectors")
    if x.size < 2:
        raise ValueError("pearson needs at least two samples")
    dx = x - x.mean()
    dy = y - y.mean()
    ssx = float(dx @ dx)
    ssy = float(dy @ dy)
    if ssx == 0.0 or ssy == 0.0:
        raise ValueError("pearson undefined for zero-variance input")
    return float((dx @ dy) / np.sqrt(ssx * ssy))


def anova_f(feature, output, groups: int = 4) -> tuple[float, float]:
    """One-way F test of the output across bins of the feature.

    Features with at most ``groups`` distinct values get one group per level;
    otherwise the feature is cut at its quantiles into ``groups`` bins. The
    p-value comes from the regularized incomplete beta function.
    """
    feature = np.asarray(feature, dtype=float)
    output = np.asarray(output, dtype=float)
    if groups < 2:
        raise ValueError("need at least two groups")
    levels = np.unique(feature)
    if levels.size <= groups:
        labels = np.searchsorted(levels, feature)
        n_groups = levels.size
    else:
        edges = np.quantile(feature, np.linspace(0, 1, groups + 1)[1:-1])
        labels = np.searchsorted(edges, feature, side="right")
        n_groups = groups
    if n_groups < 2:
        raise ValueError("feature is constant, cannot form groups")
    counts = np.bincount(labels, minlength=n_groups)
    if np.any(counts == 0):
        raise ValueError("empty group in ANOVA binning")
    grand = output.mean()
    ss_between = 0.0
    ss_within = 0.0
    for g in range(n_groups):
        vals = output[labels == g]
        ss_between += len(vals) * (vals.mean() - grand) ** 2
        ss_within += float(((vals - vals.mean()) ** 2).sum())
    df1 = n_groups - 1
    df2 = output.size - n_groups
    if df2 <= 0:
        raise ValueError("not enough samples for within-group variance")
    if ss_within == 0.0:
        raise ValueError("zero within-group variance, F undefined")
    f_stat = (ss_between / df1) / (ss_within / df2)
    p = float(scipy.special.betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f_stat)))
    return float(f_stat), p


def _safe_pearson(x, y) -> Optional[float]:
    try:
        return pearson(x, y)
    except ValueError:
        return None


def summarize(dataset: Dataset) -> dict:
    """Counts, per-class sparsity means and the feature/output correlation matrix."""
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    records = dataset.records
    conv = np.array([1.0 if r.converged else 0.0 for r in records])
    spars = np.array([r.sparsity for r in records])
    X = feature_matrix(records)

    by_design: dict[int, list[bool]] = {}
    for r in records:
        by_design.setdefault(r.design_index, []).append(r.converged)
    partial = sum(1 for flags in by_design.values() if len(set(flags)) > 1)

    def class_mean(mask) -> Optional[float]:
        return float(spars[mask].mean()) if mask.any() else None

    correlations = {}
    for k, name in enumerate(FEATURE_NAMES):
        correlations[name] = {
            "sparsity": _safe_pearson(X[:, k], spars),
            "converged": _safe_pearson(X[:, k], conv),
        }
    return {
        "runs": len(records),
        "converged": int(conv.sum()),
        "not_converged": int(len(records) - conv.sum()),
        "converged_fraction": float(conv.mean()),
        "mean_sparsity_converged": class_mean(conv == 1.0),
        "mean_sparsity_not_converged": class_mean(conv == 0.0),
        "partially_converging_designs": partial,
        "pearson": correlations,
    }


def _fmt(x: float) -> str:
    return repr(float(x))


def write_runs_csv(records, errors, path) -> None:
    """Canonically ordered CSV; floats use shortest round-trip formatting."""
    rows = []
    for r in records:
        p = r.params
        rows.append(
            (
                (r.design_index, r.repetition),
                f"{r.design_index},{r.tier},{r.repetition},{r.seed},{p.num_types},"
                f"{_fmt(p.density)},{_fmt(p.intolerance)},{p.map_side},{p.perception},"
                f"{1 if r.converged else 0},{r.iterations},{_fmt(r.sparsity)},"
                f"{_fmt(r.similarity)},{r.wall_time_ms}",
            )
        )
    for e in errors:
        p = e.params
        rows.append(
            (
                (e.design_index, e.repetition),
                f"{e.design_index},{e.tier},{e.repetition},{e.seed},{p.num_types},"
                f"{_fmt(p.density)},{_fmt(p.intolerance)},{p.map_side},{p.perception},"
                f"error,,,,",
            )
        )
    rows.sort(key=lambda kv: kv[0])
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(RUNS_HEADER) + "\n")
        for _, line in rows:
            f.write(line + "\n")


def read_runs_csv(path) -> tuple[list[RunRecord], list[ErrorRecord]]:
    records: list[RunRecord] = []
    errors: list[ErrorRecord] = []
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        if tuple(header) != RUNS_HEADER:
            raise ValueError(f"unexpected runs header {header}")
        for line in f:
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(RUNS_HEADER):
                continue
            params = ScenarioParams(
                num_types=int(parts[4]),
                density=float(parts[5]),
                intolerance=float(parts[6]),
                map_side=int(parts[7]),
                perception=int(parts[8]),
            )
            common = dict(
                design_index=int(parts[0]),
                tier=int(parts[1]),
                repetition=int(parts[2]),
                seed=int(parts[3]),
                params=params,
            )
            if parts[9] == "error":
                errors.append(ErrorRecord(**common))
            else:
                records.append(
                    RunRecord(
                        converged=parts[9] == "1",
                        iterations=int(parts[10]),
                        sparsity=float(parts[11]),
                        similarity=float(parts[12]),
                        wall_time_ms=int(parts[13]),
                        **common,
                    )
                )
    return records, errors
