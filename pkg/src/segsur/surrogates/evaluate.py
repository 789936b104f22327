"""Benchmarking protocol: fit the roster, score it on held-out runs, rank it.

Most models train on the raw training rows, repetitions included. The GP is
the exception: it trains on one row per training design, targeting the
repetition mean, with a per-design nugget equal to the sample variance of
that mean; that is where its heteroscedastic noise estimate comes from.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..data import Dataset, feature_matrix
from ..params import bounds_arrays
from ..seeding import stable_seed
from .base import MODEL_KINDS, ModelSpec, SurrogateModel
from .kriging import GaussianProcess
from .linear import PolynomialLeastSquares
from .neighbors import InverseDistanceWeighting, KNearestNeighbors
from .rbf import RbfInterpolant
from .trees import DecisionTree, RandomForest

_MODEL_CLASSES = {
    "GP": GaussianProcess,
    "RBF": RbfInterpolant,
    "IDW": InverseDistanceWeighting,
    "LR": PolynomialLeastSquares,
    "QP": PolynomialLeastSquares,
    "KNN": KNearestNeighbors,
    "DT": DecisionTree,
    "RF": RandomForest,
}

DEFAULT_ROSTER = MODEL_KINDS


def make_model(spec: ModelSpec, bounds=None) -> SurrogateModel:
    return _MODEL_CLASSES[spec.kind](spec, bounds=bounds)


def fit(spec: ModelSpec, X, y, noise=None, bounds=None) -> SurrogateModel:
    """Build and fit a surrogate in one call."""
    return make_model(spec, bounds=bounds).fit(X, y, noise=noise)


def predict_mean(model: SurrogateModel, x) -> np.ndarray:
    return model.predict_mean(x)


def predict_variance(model: SurrogateModel, x) -> np.ndarray:
    return model.predict_variance(x)


def classify(model: SurrogateModel, x) -> np.ndarray:
    return model.classify(x)


def _grouped_training(records):
    """Per-design rows: inputs, mean target and variance-of-the-mean nuggets."""
    groups: dict[int, list] = {}
    for r in records:
        groups.setdefault(r.design_index, []).append(r)
    X, y_sp, n_sp, y_cv, n_cv = [], [], [], [], []
    for idx in sorted(groups):
        rows = groups[idx]
        X.append(rows[0].params.to_vector())
        sp = np.array([r.sparsity for r in rows])
        cv = np.array([1.0 if r.converged else 0.0 for r in rows])
        reps = len(rows)
        y_sp.append(sp.mean())
        y_cv.append(cv.mean())
        if reps > 1:
            n_sp.append(sp.var(ddof=1) / reps)
            n_cv.append(cv.var(ddof=1) / reps)
        else:
            n_sp.append(0.0)
            n_cv.append(0.0)
    return (
        np.array(X),
        np.array(y_sp),
        np.array(n_sp),
        np.array(y_cv),
        np.array(n_cv),
    )


def fit_roster(
    dataset: Dataset, roster=DEFAULT_ROSTER, seed: int = 0
) -> dict[tuple[str, str], SurrogateModel]:
    """Fit every (kind, task) pair of the roster on the dataset's training split."""
    train = dataset.train_records
    if not train:
        raise ValueError("dataset has no training rows")
    bounds = bounds_arrays()
    X_raw = feature_matrix(train)
    y_sp = np.array([r.sparsity for r in train])
    y_cv = np.array([1.0 if r.converged else 0.0 for r in train])
    Xg, yg_sp, ng_sp, yg_cv, ng_cv = _grouped_training(train)

    fitted: dict[tuple[str, str], SurrogateModel] = {}
    for k, kind in enumerate(roster):
        for t, task in enumerate(("regression", "classification")):
            hp = {}
            if kind in ("GP", "RF"):
                hp["seed"] = stable_seed(seed, k, t)
            spec = ModelSpec(kind=kind, task=task, hyperparameters=hp)
            model = make_model(spec, bounds=bounds)
            if kind == "GP":
                if task == "regression":
                    model.fit(Xg, yg_sp, noise=ng_sp)
                else:
                    model.fit(Xg, yg_cv, noise=ng_cv)
            else:
                model.fit(X_raw, y_sp if task == "regression" else y_cv)
            fitted[(kind, task)] = model
    return fitted


@dataclass
class ModelScore:
    kind: str
    rmse: Optional[float] = None
    class_errors: Optional[int] = None
    class_error_rate: Optional[float] = None
    rank_regression: Optional[int] = None
    rank_classification: Optional[int] = None


@dataclass
class EvaluationReport:
    scores: list[ModelScore]
    validation_rows: int

    def by_kind(self, kind: str) -> ModelScore:
        for s in self.scores:
            if s.kind == kind:
                return s
        raise KeyError(kind)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write("model,task,rmse,class_errors,rank_reg,rank_cls\n")
            for s in self.scores:
                rmse = "" if s.rmse is None else repr(s.rmse)
                errs = "" if s.class_errors is None else s.class_errors
                rr = "" if s.rank_regression is None else s.rank_regression
                rc = "" if s.rank_classification is None else s.rank_classification
                f.write(f"{s.kind},both,{rmse},{errs},{rr},{rc}\n")

    def render_table(self) -> str:
        lines = [
            "| Model | RMSE | Class. err. | Rank reg. | Rank cls. |",
            "|-------|------|-------------|-----------|-----------|",
        ]
        for s in self.scores:
            rmse = "-" if s.rmse is None else f"{s.rmse:.2f}"
            errs = "-" if s.class_errors is None else str(s.class_errors)
            rr = "-" if s.rank_regression is None else str(s.rank_regression)
            rc = "-" if s.rank_classification is None else str(s.rank_classification)
            lines.append(f"| {s.kind} | {rmse} | {errs} | {rr} | {rc} |")
        return "\n".join(lines)


def _competition_ranks(values: list[tuple[str, float]]) -> dict[str, int]:
    """Smaller is better; ties share the smallest applicable rank."""
    ranks = {}
    for kind, v in values:
        ranks[kind] = 1 + sum(1 for _, w in values if w < v)
    return ranks


def evaluate(
    models: dict[tuple[str, str], SurrogateModel], validation: Dataset
) -> EvaluationReport:
    """RMSE on sparsity and misclassification count on convergence, with ranks."""
    rows = validation.validation_records
    if not rows:
        raise ValueError("validation split is empty")
    X = feature_matrix(rows)
    y_sp = np.array([r.sparsity for r in rows])
    y_cv = np.array([r.converged for r in rows])

    kinds = sorted({k for k, _ in models}, key=lambda k: MODEL_KINDS.index(k))
    scores = {k: ModelScore(kind=k) for k in kinds}
    for (kind, task), model in models.items():
        if task == "regression":
            pred = model.predict_mean(X)
            scores[kind].rmse = float(np.sqrt(np.mean((pred - y_sp) ** 2)))
        else:
            errors = int(np.sum(model.classify(X) != y_cv))
            scores[kind].class_errors = errors
            scores[kind].class_error_rate = errors / len(rows)

    reg = [(k, s.rmse) for k, s in scores.items() if s.rmse is not None]
    cls = [(k, s.class_errors) for k, s in scores.items() if s.class_errors is not None]
    for k, r in _competition_ranks(reg).items():
        scores[k].rank_regression = r
    for k, r in _competition_ranks(cls).items():
        scores[k].rank_classification = r
    return EvaluationReport(scores=[scores[k] for k in kinds], validation_rows=len(rows))
