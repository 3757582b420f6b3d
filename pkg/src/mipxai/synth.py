"""Seeded Gaussian classification data with a chosen correlation structure."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import make_features
from .dataset import Dataset
from .exceptions import DataWarning, InputError, MatrixDomainError, SizeError

_CLIP = 1e-10
_NEG_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SynthSpec:
    n_rows: int
    correlation: np.ndarray
    weights: np.ndarray
    intercept: float = 0.0
    seed: int = 0
    feature_names: Sequence[str] | None = None

    def __post_init__(self):
        corr = np.asarray(self.correlation, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if corr.ndim != 2 or corr.shape[0] != corr.shape[1]:
            raise MatrixDomainError(f"correlation must be square, got shape {corr.shape}")
        if not np.allclose(corr, corr.T, atol=1e-12):
            raise MatrixDomainError("correlation matrix is not symmetric")
        if not np.allclose(np.diag(corr), 1.0, atol=1e-12):
            raise MatrixDomainError("correlation matrix needs a unit diagonal")
        if w.shape != (corr.shape[0],):
            raise InputError(f"weights must have length {corr.shape[0]}, got {w.shape}")
        if self.n_rows < 2:
            raise SizeError("n_rows must be >= 2")
        object.__setattr__(self, "correlation", corr)
        object.__setattr__(self, "weights", w)

    @classmethod
    def blocks(cls, n_rows, weights, pairs=(), **kw) -> "SynthSpec":
        """Identity correlation with the listed ``(i, j, rho)`` entries set."""
        d = len(weights)
        corr = np.eye(d)
        for i, j, rho in pairs:
            corr[i, j] = corr[j, i] = rho
        return cls(n_rows, corr, np.asarray(weights, dtype=float), **kw)


def _factor(corr):
    """Symmetric square-root factor L with L @ L.T == corr (eigenvalues clipped)."""
    vals, vecs = np.linalg.eigh(corr)
    if vals.min() < -_NEG_TOL:
        raise MatrixDomainError(
            f"correlation matrix is not positive semi-definite (min eigenvalue {vals.min():.3g})"
        )
    if vals.min() < _CLIP:
        warnings.warn("near-singular correlation matrix; eigenvalues clipped at 1e-10",
                      DataWarning, stacklevel=3)
        vals = np.maximum(vals, _CLIP)
    return vecs * np.sqrt(vals)


def generate(spec: SynthSpec) -> Dataset:
    """Zero-mean Gaussian rows with ``spec.correlation``; labels ~ Bernoulli(sigmoid(w.x + b))."""
    d = spec.correlation.shape[0]
    L = _factor(spec.correlation)
    rng = np.random.default_rng(spec.seed)
    X = rng.standard_normal((spec.n_rows, d)) @ L.T
    p = 1.0 / (1.0 + np.exp(-(X @ spec.weights + spec.intercept)))
    y = (rng.random(spec.n_rows) < p).astype(np.int64)
    names = spec.feature_names or [f"x{i + 1}" for i in range(d)]
    return Dataset(make_features(names), X, y)


def correlation_matrix(data: Dataset | np.ndarray) -> np.ndarray:
    """Pairwise Pearson correlations; rows/columns of constant features are NaN."""
    X = data.X if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if X.shape[0] < 2:
        raise SizeError("correlation needs at least 2 rows")
    Xc = X - X.mean(axis=0)
    norms = np.sqrt((Xc**2).sum(axis=0))
    constant = norms == 0
    safe = np.where(constant, 1.0, norms)
    corr = (Xc.T @ Xc) / np.outer(safe, safe)
    corr = np.clip(corr, -1.0, 1.0)
    corr[constant, :] = np.nan
    corr[:, constant] = np.nan
    idx = np.flatnonzero(~constant)
    corr[idx, idx] = 1.0
    return corr
