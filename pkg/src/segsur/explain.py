"""Model explainability: MDI importance, exact Shapley attributions, PDP/ICE.

Shapley values use interventional (marginal) expectations over a background
sample. With five inputs the 2^5 coalitions are enumerated outright, which
computes the usual kernel-approximated quantity without approximation error,
so the efficiency axiom holds to floating-point accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .surrogates.trees import DecisionTree, RandomForest

MAX_EXACT_FEATURES = 12


@dataclass
class Attribution:
    """Additive decomposition of one prediction: base + sum(phi) = f(x)."""

    base_value: float
    phi: np.ndarray
    x: np.ndarray
    prediction: float


@dataclass
class DependenceCurve:
    feature: int
    grid: np.ndarray
    pdp: np.ndarray
    ice: np.ndarray  # one row per background point


@dataclass
class MdiImportance:
    values: np.ndarray
    degenerate: bool  # no splits anywhere: uniform importances reported


def mdi_importance(model) -> MdiImportance:
    """Split-impurity importances of a fitted tree or forest, normalized to 1."""
    if not isinstance(model, (DecisionTree, RandomForest)):
        raise TypeError(f"MDI importance needs a tree model, got {type(model).__name__}")
    raw = model.mdi_raw()
    total = raw.sum()
    if total <= 0.0:
        return MdiImportance(values=np.full(raw.size, 1.0 / raw.size), degenerate=True)
    return MdiImportance(values=raw / total, degenerate=False)


def _coalition_masks(d: int) -> list[tuple[int, ...]]:
    masks = []
    for size in range(d + 1):
        masks.extend(combinations(range(d), size))
    return masks


def _shapley_weights(d: int) -> dict[int, float]:
    fact = math.factorial
    return {s: fact(s) * fact(d - 1 - s) / fact(d) for s in range(d)}


def _coalition_values(
    predict: Callable[[np.ndarray], np.ndarray],
    X: np.ndarray,
    background: np.ndarray,
    masks: Sequence[tuple[int, ...]],
) -> np.ndarray:
    """v[mask, row] = mean over background of f(x on mask, background off mask)."""
    n, d = X.shape
    b = background.shape[0]
    values = np.empty((len(masks), n))
    for m, mask in enumerate(masks):
        composite = np.broadcast_to(background, (n, b, d)).copy()
        if mask:
            composite[:, :, mask] = X[:, None, mask]
        preds = np.asarray(predict(composite.reshape(n * b, d)), dtype=float)
        values[m] = preds.reshape(n, b).mean(axis=1)
    return values


def _combine(values: np.ndarray, masks, d: int) -> np.ndarray:
    """phi[row, feature] from coalition values via the Shapley combination."""
    weights = _shapley_weights(d)
    index = {mask: m for m, mask in enumerate(masks)}
    phi = np.zeros((values.shape[1], d))
    for mask in masks:
        if len(mask) == d:
            continue
        w_gain = weights[len(mask)]
        v_without = values[index[mask]]
        present = set(mask)
        for i in range(d):
            if i in present:
                continue
            with_i = tuple(sorted(mask + (i,)))
            phi[:, i] += w_gain * (values[index[with_i]] - v_without)
    return phi


def exact_shap(
    predict: Callable[[np.ndarray], np.ndarray], x, background
) -> Attribution:
    """Exact interventional Shapley attribution of one prediction.

    ``predict`` must accept an (n, d) matrix and return n values. The base
    value is the background-mean prediction; efficiency (base + sum(phi) =
    f(x)) is exact up to float summation.
    """
    x = np.asarray(x, dtype=float).reshape(1, -1)
    attributions, _ = shap_batch(predict, x, background)
    return attributions[0]


def shap_batch(
    predict: Callable[[np.ndarray], np.ndarray],
    X,
    background,
    chunk_rows: int = 64,
) -> tuple[list[Attribution], np.ndarray]:
    """Attributions for every row plus the per-feature mean |phi| ranking vector."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    background = np.atleast_2d(np.asarray(background, dtype=float))
    if background.shape[0] == 0:
        raise ValueError("background must be nonempty")
    d = X.shape[1]
    if d > MAX_EXACT_FEATURES:
        raise ValueError(
            f"exact enumeration over {d} features would need 2^{d} coalitions; "
            f"limit is {MAX_EXACT_FEATURES}"
        )
    masks = _coalition_masks(d)
    full = masks.index(tuple(range(d)))
    empty = masks.index(())

    attributions: list[Attribution] = []
    for start in range(0, X.shape[0], chunk_rows):
        rows = X[start : start + chunk_rows]
        values = _coalition_values(predict, rows, background, masks)
        phi = _combine(values, masks, d)
        for r in range(rows.shape[0]):
            attributions.append(
                Attribution(
                    base_value=float(values[empty, r]),
                    phi=phi[r],
                    x=rows[r].copy(),
                    prediction=float(values[full, r]),
                )
            )
    mean_abs_phi = np.mean(np.abs(np.stack([a.phi for a in attributions])), axis=0)
    return attributions, mean_abs_phi


def pdp_ice(
    predict: Callable[[np.ndarray], np.ndarray],
    feature: int,
    background,
    grid_size: int = 20,
    feature_bounds=None,
    integer: bool = False,
) -> DependenceCurve:
    """Average and per-instance response while one feature sweeps its range.

    The grid spans ``feature_bounds`` when given, the background data range
    otherwise; integer features evaluate every integer level instead of a
    ``grid_size`` linspace. ICE row r at grid value g is the prediction for
    background row r with the feature forced to g; the PDP is the columnwise
    ICE mean.
    """
    background = np.atleast_2d(np.asarray(background, dtype=float))
    if feature_bounds is None:
        lo, hi = background[:, feature].min(), background[:, feature].max()
    else:
        lo, hi = feature_bounds
    if integer:
        grid = np.arange(int(lo), int(hi) + 1, dtype=float)
    else:
        if grid_size < 2:
            raise ValueError("grid_size must be >= 2")
        grid = np.linspace(lo, hi, grid_size)

    b = background.shape[0]
    ice = np.empty((b, grid.size))
    for g, value in enumerate(grid):
        points = background.copy()
        points[:, feature] = value
        ice[:, g] = np.asarray(predict(points), dtype=float)
    return DependenceCurve(feature=feature, grid=grid, pdp=ice.mean(axis=0), ice=ice)


# -- plot-ready CSV exports -----------------------------------------------


def write_shap_csv(attributions: list[Attribution], feature_names, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("row,feature,phi,base,prediction\n")
        for r, a in enumerate(attributions):
            for k, name in enumerate(feature_names):
                f.write(f"{r},{name},{a.phi[k]!r},{a.base_value!r},{a.prediction!r}\n")


def write_importance_csv(importance: MdiImportance, feature_names, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("feature,importance,degenerate\n")
        for k, name in enumerate(feature_names):
            f.write(f"{name},{importance.values[k]!r},{int(importance.degenerate)}\n")


def write_pdp_ice_csv(curve: DependenceCurve, path) -> None:
    ice_cols = [f"ice_{r}" for r in range(curve.ice.shape[0])]
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(["grid"] + ice_cols + ["pdp"]) + "\n")
        for g in range(curve.grid.size):
            row = [repr(float(curve.grid[g]))]
            row += [repr(float(v)) for v in curve.ice[:, g]]
            row.append(repr(float(curve.pdp[g])))
            f.write(",".join(row) + "\n")
