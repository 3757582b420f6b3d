"""Labelled numeric tables and the stratified train/test split."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import FeatureId, make_features
from .exceptions import InputError, LabelError, SizeError, StructuralError


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix ``X`` (rows x features) with binary labels ``y``.

    ``classes`` keeps the original label values: ``classes[0]`` was mapped
    to 0 and ``classes[1]`` to 1.
    """

    features: tuple[FeatureId, ...]
    X: np.ndarray
    y: np.ndarray
    classes: tuple = field(default=(0, 1))

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y)
        if X.ndim != 2:
            raise StructuralError(f"X must be 2-dimensional, got shape {X.shape}")
        if X.shape[1] != len(self.features):
            raise StructuralError(
                f"X has {X.shape[1]} columns but {len(self.features)} feature names"
            )
        if y.shape != (X.shape[0],):
            raise StructuralError(f"y must have shape ({X.shape[0]},), got {y.shape}")
        if X.shape[0] < 2:
            raise SizeError(f"dataset needs at least 2 rows, got {X.shape[0]}")
        if not np.all(np.isfinite(X)):
            r, c = np.argwhere(~np.isfinite(X))[0]
            raise InputError(
                f"non-finite value at row {r + 1}, feature {self.features[c].name!r}"
            )
        if not np.all(np.isin(y, (0, 1))):
            raise LabelError("labels must be encoded as 0/1")
        X.setflags(write=False)
        y = y.astype(np.int64)
        y.setflags(write=False)
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_arrays(cls, X, y, feature_names: Sequence[str] | None = None) -> "Dataset":
        X = np.asarray(X, dtype=float)
        if feature_names is None:
            feature_names = [f"x{i + 1}" for i in range(X.shape[1])]
        return cls(make_features(feature_names), X, np.asarray(y))

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def has_both_classes(self) -> bool:
        return np.unique(self.y).size == 2

    def select(self, features: Sequence[FeatureId]) -> "Dataset":
        """Column subset in the given order."""
        index = {f: i for i, f in enumerate(self.features)}
        try:
            cols = [index[f] for f in features]
        except KeyError as exc:
            raise StructuralError(f"feature {exc.args[0]} not in dataset") from None
        return Dataset(tuple(features), self.X[:, cols], self.y, self.classes)

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.features, self.X[rows], self.y[rows], self.classes)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.features == other.features
            and self.classes == other.classes
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )

    __hash__ = None


def split(data: Dataset, test_fraction: float = 0.2, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Stratified, seeded partition into (train, test).

    The overall test size is ``round(test_fraction * n_rows)``; it is shared
    between the classes in proportion to their counts (largest remainder).
    """
    if not 0.0 < test_fraction < 1.0:
        raise InputError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    n = data.n_rows
    n_test = int(round(test_fraction * n))
    if n_test == 0 or n_test == n:
        raise SizeError(f"split of {n} rows at {test_fraction} leaves an empty side")

    labels = np.unique(data.y)
    members = [np.flatnonzero(data.y == c) for c in labels]
    quotas = np.array([len(m) * n_test / n for m in members])
    counts = np.floor(quotas).astype(int)
    short = n_test - counts.sum()
    # largest remainder, ties to the smaller label
    for j in sorted(range(len(labels)), key=lambda j: (-(quotas[j] - counts[j]), j))[:short]:
        counts[j] += 1

    test_rows = []
    for m, k in zip(members, counts):
        test_rows.append(rng.permutation(m)[:k])
    test_idx = np.sort(np.concatenate(test_rows))
    mask = np.zeros(n, dtype=bool)
    mask[test_idx] = True
    train_idx = np.flatnonzero(~mask)
    return data.take(train_idx), data.take(test_idx)
