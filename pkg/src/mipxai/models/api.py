"""Model specs, training, accuracy and cross-validated tuning."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from ..core import FeatureId
from ..dataset import Dataset
from ..exceptions import (
    ConvergenceWarning,
    InputError,
    StratificationError,
    StructuralError,
    UnfitError,
)
from .boosting import BoostedStumps
from .linear import LinearSVC, LogisticRegression
from .tree import DecisionTree, RandomForest


@dataclass(frozen=True)
class _Family:
    estimator: type
    standardize: bool
    # "proba" explains P(y=1); "decision" explains the raw margin
    output: str
    seeded: bool


FAMILIES: dict[str, _Family] = {
    "logistic_regression": _Family(LogisticRegression, True, "proba", False),
    "linear_svc": _Family(LinearSVC, True, "decision", False),
    "decision_tree": _Family(DecisionTree, False, "proba", True),
    "random_forest": _Family(RandomForest, False, "proba", True),
    "boosted_stumps": _Family(BoostedStumps, False, "proba", False),
}

DEFAULT_GRIDS: dict[str, list[dict[str, Any]]] = {
    "logistic_regression": [{"C": c} for c in (0.01, 0.1, 1.0, 10.0)],
    "decision_tree": [{"max_depth": d} for d in (2, 3, 4, 6, 8)],
    "random_forest": [
        {"n_trees": t, "max_depth": d} for t in (50, 200) for d in (4, 8)
    ],
    "linear_svc": [{"C": c} for c in (0.01, 0.1, 1.0, 10.0)],
    "boosted_stumps": [
        {"n_rounds": r, "shrinkage": s} for r in (50, 200) for s in (0.05, 0.1)
    ],
}


@dataclass(frozen=True)
class ModelSpec:
    """A model family plus hyperparameters (validated on construction)."""

    family: str
    hyperparameters: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(
                f"unknown model family {self.family!r}; expected one of {sorted(FAMILIES)}"
            )
        hp = dict(self.hyperparameters)
        allowed = set(FAMILIES[self.family].estimator().get_params()) - {"random_state"}
        unknown = set(hp) - allowed
        if unknown:
            raise InputError(
                f"unknown hyperparameters for {self.family}: {sorted(unknown)}"
            )
        self.make_estimator()._check_params()
        object.__setattr__(self, "hyperparameters", hp)

    def make_estimator(self, seed=None):
        fam = FAMILIES[self.family]
        params = dict(self.hyperparameters)
        if fam.seeded:
            params["random_state"] = seed
        return fam.estimator(**params)


@dataclass(frozen=True, eq=False)
class FittedModel:
    """A trained classifier bound to the feature set it was fitted on."""

    spec: ModelSpec
    estimator: Any
    features: tuple[FeatureId, ...]
    mean: np.ndarray | None = None
    scale: np.ndarray | None = None
    warnings: tuple[str, ...] = ()

    @property
    def output_kind(self) -> str:
        return FAMILIES[self.spec.family].output

    def _prepare(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.features):
            raise StructuralError(
                f"model expects {len(self.features)} features, got {X.shape[1]}"
            )
        if self.mean is not None:
            X = (X - self.mean) / self.scale
        return X

    def output(self, X) -> np.ndarray:
        """The quantity explainers attribute: P(y=1) or the decision margin."""
        X = self._prepare(X)
        if self.output_kind == "proba":
            return self.estimator.predict_proba(X)[:, 1]
        return self.estimator.decision_function(X)

    def predict(self, X) -> np.ndarray:
        return self.estimator.predict(self._prepare(X))

    def check_features(self, data: Dataset):
        if data.features != self.features:
            raise StructuralError(
                f"dataset features {data.feature_names} do not match model features "
                f"{tuple(f.name for f in self.features)}"
            )


def train(spec: ModelSpec, data: Dataset, seed: int = 0) -> FittedModel:
    """Fit ``spec`` on ``data``; deterministic given (spec, data, seed)."""
    if not data.has_both_classes():
        raise UnfitError(f"training data holds a single class ({int(data.y[0])})")
    fam = FAMILIES[spec.family]
    X = data.X
    mean = scale = None
    if fam.standardize:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale = np.where(scale > 0, scale, 1.0)
        X = (X - mean) / scale
    est = spec.make_estimator(seed)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        est.fit(X, data.y)
    notes = tuple(str(w.message) for w in caught if issubclass(w.category, ConvergenceWarning))
    return FittedModel(spec, est, data.features, mean, scale, notes)


def accuracy(model: FittedModel, data: Dataset) -> float:
    model.check_features(data)
    return float(np.mean(model.predict(data.X) == data.y))


def stratified_folds(y, k: int, seed: int = 0) -> np.ndarray:
    """Fold id (0..k-1) per row; each class is shuffled then dealt round-robin."""
    y = np.asarray(y)
    if k < 2:
        raise InputError(f"k must be >= 2, got {k}")
    if y.size < k:
        raise InputError(f"need at least k={k} rows, got {y.size}")
    rng = np.random.default_rng(seed)
    folds = np.empty(y.size, dtype=np.int64)
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        if members.size < k:
            raise StratificationError(
                f"class {c} has {members.size} rows, fewer than k={k} folds"
            )
        folds[rng.permutation(members)] = np.arange(members.size) % k
    return folds


def cross_validate_grid(family: str, grid: Sequence[Mapping[str, Any]], data: Dataset,
                        k: int = 10, seed: int = 0, threads: int = 1) -> np.ndarray:
    """Accuracy matrix of shape (len(grid), k)."""
    specs = [ModelSpec(family, entry) for entry in grid]
    folds = stratified_folds(data.y, k, seed)

    def run(task):
        i, j = task
        held_out = folds == j
        fit_part = Dataset(data.features, data.X[~held_out], data.y[~held_out], data.classes)
        model = train(specs[i], fit_part, seed)
        return float(np.mean(model.predict(data.X[held_out]) == data.y[held_out]))

    tasks = [(i, j) for i in range(len(specs)) for j in range(k)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = list(pool.map(run, tasks))
    else:
        scores = [run(t) for t in tasks]
    return np.array(scores).reshape(len(specs), k)


def tune(family: str, grid: Sequence[Mapping[str, Any]] | None, data: Dataset,
         k: int = 10, seed: int = 0, threads: int = 1) -> ModelSpec:
    """Grid entry with the best mean k-fold accuracy; ties go to the earliest entry.

    A one-entry grid is returned after the fold checks without fitting anything.
    """
    if grid is None:
        grid = DEFAULT_GRIDS[family]
    grid = list(grid)
    if not grid:
        raise InputError("hyperparameter grid is empty")
    if len(grid) == 1:
        stratified_folds(data.y, k, seed)
        return ModelSpec(family, grid[0])
    scores = cross_validate_grid(family, grid, data, k, seed, threads)
    means = scores.mean(axis=1)
    return ModelSpec(family, grid[int(np.argmax(means))])
