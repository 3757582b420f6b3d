"""Correlation-matrix PCA used to decorrelate features before ranking."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DataWarning, InputError, SizeError, StructuralError


@dataclass(frozen=True)
class PcaModel:
    means: np.ndarray
    scales: np.ndarray
    components: np.ndarray  # k x d, orthonormal rows
    explained_variance_ratio: np.ndarray
    eigenvalues: np.ndarray  # full spectrum, descending

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


def fit_pca(X, variance_threshold: float = 0.95) -> PcaModel:
    """Standardise columns, eigendecompose the correlation matrix, keep enough components.

    ``k`` is the smallest count whose cumulative explained-variance ratio
    reaches ``variance_threshold``.  Each component is signed so its
    largest-magnitude loading is positive.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise StructuralError("X must be 2-dimensional")
    if X.shape[0] <= 1:
        raise SizeError(f"PCA needs more than one row, got {X.shape[0]}")
    if not 0 < variance_threshold <= 1:
        raise InputError(f"variance_threshold must be in (0, 1], got {variance_threshold}")
    means = X.mean(axis=0)
    scales = X.std(axis=0, ddof=1)
    constant = scales == 0
    if constant.any():
        warnings.warn(
            f"constant columns {np.flatnonzero(constant).tolist()} carry no variance; left unscaled",
            DataWarning,
            stacklevel=2,
        )
        scales = np.where(constant, 1.0, scales)
    Z = (X - means) / scales
    corr = Z.T @ Z / (X.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(corr)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]
    total = eigvals.sum()
    if total <= 0:
        raise InputError("all columns are constant")
    ratios = eigvals / total
    cumulative = np.cumsum(ratios)
    k = int(np.searchsorted(cumulative, variance_threshold - 1e-12) + 1)
    k = min(k, X.shape[1])
    components = eigvecs[:, :k].T.copy()
    flip = np.sign(components[np.arange(k), np.argmax(np.abs(components), axis=1)])
    components *= flip[:, None]
    return PcaModel(means, scales, components, ratios[:k], eigvals)


def transform(model: PcaModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.means.size:
        raise StructuralError(f"expected {model.means.size} columns, got {X.shape[1]}")
    return ((X - model.means) / model.scales) @ model.components.T


class PCA(TransformerMixin, BaseEstimator):
    """scikit-learn style wrapper around :func:`fit_pca` / :func:`transform`."""

    def __init__(self, variance_threshold=0.95):
        self.variance_threshold = variance_threshold

    def fit(self, X, y=None):
        X = check_array(X)
        self.model_ = fit_pca(X, self.variance_threshold)
        self.n_components_ = self.model_.n_components
        self.components_ = self.model_.components
        self.explained_variance_ratio_ = self.model_.explained_variance_ratio
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        return transform(self.model_, check_array(X))

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "model_")
        return np.array([f"PC{i + 1}" for i in range(self.n_components_)], dtype=object)
