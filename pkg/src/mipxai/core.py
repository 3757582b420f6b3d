"""Feature identifiers, rankings and rank-displacement algebra."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .exceptions import DomainError, InputError, StructuralError


@dataclass(frozen=True, order=True)
class FeatureId:
    """A named input column. ``ordinal`` is the original column position."""

    ordinal: int
    name: str

    def __post_init__(self):
        if self.ordinal < 0:
            raise InputError(f"feature ordinal must be >= 0, got {self.ordinal}")

    def __str__(self):
        return self.name


def make_features(names: Iterable[str]) -> tuple[FeatureId, ...]:
    names = [str(n) for n in names]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise InputError(f"duplicate feature names: {dupes}")
    return tuple(FeatureId(i, n) for i, n in enumerate(names))


@dataclass(frozen=True)
class Ranking:
    """Strict ordering of features, position 1 = most important."""

    features: tuple[FeatureId, ...]

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if len(set(self.features)) != len(self.features):
            raise StructuralError("ranking contains duplicate features")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise StructuralError("ranking contains duplicate feature names")

    def __len__(self):
        return len(self.features)

    def __iter__(self) -> Iterator[FeatureId]:
        return iter(self.features)

    def __getitem__(self, index):
        return self.features[index]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    @property
    def head(self) -> FeatureId:
        return self.features[0]

    def position(self, feature: FeatureId) -> int:
        """1-based position of ``feature``."""
        try:
            return self.features.index(feature) + 1
        except ValueError:
            raise StructuralError(f"feature {feature.name!r} not in ranking") from None

    def without_head(self) -> "Ranking":
        return Ranking(self.features[1:])

    def feature_set(self) -> frozenset[FeatureId]:
        return frozenset(self.features)


@dataclass(frozen=True)
class MovementRecord:
    """Rank churn between one ranking and the next, after removing the head."""

    n_before: int
    movement: int
    max_movement: int

    def __post_init__(self):
        if self.movement < 0 or self.max_movement <= 0 or self.movement > self.max_movement:
            raise DomainError(
                f"invalid movement record: M={self.movement}, MPM={self.max_movement}"
            )

    @property
    def movement_rate(self) -> float:
        return self.movement / self.max_movement


def ranking_from_importances(scores: Mapping[FeatureId, float]) -> Ranking:
    """Order features by descending score, ties broken by ascending ordinal."""
    if not scores:
        raise InputError("cannot rank an empty score map")
    for feature, value in scores.items():
        if not math.isfinite(value):
            raise InputError(f"non-finite importance for feature {feature.name!r}: {value}")
    ordered = sorted(scores, key=lambda f: (-float(scores[f]), f.ordinal))
    return Ranking(tuple(ordered))


def displacement(prev: Ranking, next_: Ranking) -> int:
    """Total absolute position change between ``prev`` minus its head and ``next_``.

    The expected position of each surviving feature is its position in
    ``prev`` shifted up by one, since the head was removed.
    """
    if len(prev) < 2:
        raise StructuralError("previous ranking must hold at least two features")
    if next_.feature_set() != frozenset(prev.features[1:]):
        raise StructuralError(
            "next ranking must contain exactly the previous features minus the head "
            f"({prev.head.name!r})"
        )
    expected = {f: i for i, f in enumerate(prev.features[1:], start=1)}
    return sum(abs(pos - expected[f]) for pos, f in enumerate(next_.features, start=1))


def max_possible_movement(n: int) -> int:
    """Largest achievable sum of |sigma(i) - i| over permutations of n items.

    Reached by the full reversal; equals floor(n^2 / 2).
    """
    if n < 2:
        raise DomainError(f"max_possible_movement needs n >= 2, got {n}")
    return (n * n) // 2
