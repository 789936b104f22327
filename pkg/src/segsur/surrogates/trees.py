"""CART decision trees and bootstrap forests with split-impurity bookkeeping.

Regression splits maximize variance reduction, classification splits Gini
impurity reduction. Candidate thresholds are the midpoints between
consecutive distinct feature values; ties between equally good splits break
toward the lowest feature index then the lowest threshold, so a tree is a
pure function of its data (and of its feature-subset generator when used
inside a forest).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import ModelSpec, SurrogateModel, UnsupportedCapabilityError


@dataclass
class _FlatTree:
    feature: np.ndarray  # -1 for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # leaf mean (regression) or class-1 fraction
    mdi: np.ndarray  # per-feature accumulated weighted impurity decrease

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active[idx] = self.feature[node[idx]] >= 0
        return self.value[node]


def _impurity(y: np.ndarray, classification: bool) -> float:
    if classification:
        p = y.mean()
        return 2.0 * p * (1.0 - p)  # two-class Gini
    return float(y.var())


def _best_split(X, y, feature_ids, classification):
    """(feature, threshold, score) of the best impurity-weighted split, or None."""
    n = y.size
    parent = _impurity(y, classification)
    best = None
    for f in feature_ids:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        distinct = np.flatnonzero(xs[1:] > xs[:-1]) + 1
        if distinct.size == 0:
            continue
        csum = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        total, total_sq = csum[-1], csq[-1]
        nl = distinct.astype(float)
        nr = n - nl
        sl = csum[distinct - 1]
        if classification:
            pl = sl / nl
            pr = (total - sl) / nr
            child = nl / n * 2 * pl * (1 - pl) + nr / n * 2 * pr * (1 - pr)
        else:
            sql = csq[distinct - 1]
            varl = sql / nl - (sl / nl) ** 2
            varr = (total_sq - sql) / nr - ((total - sl) / nr) ** 2
            child = nl / n * varl + nr / n * varr
        k = int(np.argmin(child))
        decrease = parent - float(child[k])
        if decrease > 1e-15 and (best is None or decrease > best[2] + 1e-15):
            cut = distinct[k]
            threshold = 0.5 * (xs[cut - 1] + xs[cut])
            best = (f, float(threshold), decrease)
    return best


class _TreeBuilder:
    def __init__(self, classification, max_depth, min_samples_split, min_samples_leaf, mtry, rng):
        self.classification = classification
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.mtry = mtry
        self.rng = rng
        self.nodes: list[list] = []  # [feature, threshold, left, right, value]

    def build(self, X, y) -> _FlatTree:
        self.X, self.y = X, y
        self.n_root = y.size
        self.mdi = np.zeros(X.shape[1])
        self._grow(np.arange(y.size), depth=0)
        nodes = np.array(self.nodes, dtype=float)
        return _FlatTree(
            feature=nodes[:, 0].astype(np.int64),
            threshold=nodes[:, 1],
            left=nodes[:, 2].astype(np.int64),
            right=nodes[:, 3].astype(np.int64),
            value=nodes[:, 4],
            mdi=self.mdi,
        )

    def _leaf(self, idx) -> int:
        self.nodes.append([-1, 0.0, -1, -1, float(self.y[idx].mean())])
        return len(self.nodes) - 1

    def _grow(self, idx, depth) -> int:
        y = self.y[idx]
        if (
            idx.size < self.min_samples_split
            or (self.max_depth is not None and depth >= self.max_depth)
            or _impurity(y, self.classification) <= 1e-15
        ):
            return self._leaf(idx)
        d = self.X.shape[1]
        if self.mtry is not None and self.mtry < d:
            feature_ids = np.sort(self.rng.choice(d, size=self.mtry, replace=False))
        else:
            feature_ids = np.arange(d)
        split = _best_split(self.X[idx], y, feature_ids, self.classification)
        if split is None:
            return self._leaf(idx)
        f, threshold, decrease = split
        mask = self.X[idx, f] <= threshold
        if mask.sum() < self.min_samples_leaf or (~mask).sum() < self.min_samples_leaf:
            return self._leaf(idx)
        self.mdi[f] += idx.size / self.n_root * decrease
        pos = len(self.nodes)
        self.nodes.append([f, threshold, -1, -1, float(y.mean())])
        self.nodes[pos][2] = self._grow(idx[mask], depth + 1)
        self.nodes[pos][3] = self._grow(idx[~mask], depth + 1)
        return pos


class DecisionTree(SurrogateModel):
    def __init__(self, spec: ModelSpec, bounds=None):
        super().__init__(spec, bounds)
        hp = spec.hyperparameters
        self.max_depth = hp.get("max_depth")
        self.min_samples_split = int(hp.get("min_samples_split", 2))
        self.min_samples_leaf = int(hp.get("min_samples_leaf", 1))

    def fit(self, X, y, noise=None) -> "DecisionTree":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        self._check_training(X, y)
        builder = _TreeBuilder(
            classification=self.spec.task == "classification",
            max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            min_samples_leaf=self.min_samples_leaf,
            mtry=None,
            rng=None,
        )
        self.tree_ = builder.build(self._normalize(X), y)
        return self

    def predict_mean(self, X) -> np.ndarray:
        return self.tree_.predict(self._normalize(X, check=True))

    def mdi_raw(self) -> np.ndarray:
        """Per-feature weighted impurity decreases, unnormalized."""
        return self.tree_.mdi.copy()


class RandomForest(SurrogateModel):
    """Bootstrap CART ensemble with a random feature subset at every split.

    Subset sizes default to ceil(d/3) for regression and ceil(sqrt(d)) for
    classification. Regression predictions are the arithmetic mean of the
    trees (summed over sorted values, so tree order never matters);
    classification takes the majority vote, true on an exact tie.
    """

    def __init__(self, spec: ModelSpec, bounds=None):
        super().__init__(spec, bounds)
        hp = spec.hyperparameters
        self.n_trees = int(hp["n_trees"])
        self.max_depth = hp.get("max_depth")
        self.min_samples_split = int(hp.get("min_samples_split", 2))
        self.min_samples_leaf = int(hp.get("min_samples_leaf", 1))
        self.mtry = hp.get("mtry")
        self.seed = int(hp.get("seed", 0))

    def fit(self, X, y, noise=None) -> "RandomForest":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        self._check_training(X, y)
        Xn = self._normalize(X)
        d = X.shape[1]
        classification = self.spec.task == "classification"
        mtry = self.mtry
        if mtry is None:
            mtry = int(np.ceil(np.sqrt(d))) if classification else int(np.ceil(d / 3))
        root = np.random.SeedSequence(self.seed)
        self.trees_: list[_FlatTree] = []
        for child in root.spawn(self.n_trees):
            rng = np.random.default_rng(child)
            sample = rng.integers(0, y.size, size=y.size)
            builder = _TreeBuilder(
                classification=classification,
                max_depth=self.max_depth,
                min_samples_split=self.min_samples_split,
                min_samples_leaf=self.min_samples_leaf,
                mtry=mtry,
                rng=rng,
            )
            self.trees_.append(builder.build(Xn[sample], y[sample]))
        return self

    def _tree_predictions(self, X) -> np.ndarray:
        Xn = self._normalize(X, check=True)
        return np.stack([t.predict(Xn) for t in self.trees_])

    def predict_mean(self, X) -> np.ndarray:
        preds = self._tree_predictions(X)
        return np.sort(preds, axis=0).mean(axis=0)

    def predict_variance(self, X) -> np.ndarray:
        """Across-tree sample variance of the per-tree predictions."""
        preds = self._tree_predictions(X)
        if preds.shape[0] < 2:
            return np.zeros(preds.shape[1])
        return preds.var(axis=0, ddof=1)

    def classify(self, X) -> np.ndarray:
        if self.spec.task != "classification":
            raise UnsupportedCapabilityError(
                f"RF was fitted for {self.spec.task}, not classification"
            )
        votes = (self._tree_predictions(X) >= 0.5).mean(axis=0)
        return votes >= 0.5

    def mdi_raw(self) -> np.ndarray:
        """Mean over trees of the per-feature weighted impurity decreases."""
        return np.stack([t.mdi for t in self.trees_]).mean(axis=0)
