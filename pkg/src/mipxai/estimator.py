"""scikit-learn style selector built on the elimination loop."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from .core import make_features
from .dataset import Dataset
from .explainers import ExplainerSpec
from .mip import stability_report
from .models import ModelSpec


class MIPRanker(SelectorMixin, BaseEstimator):
    """Rank features by MIP score and keep the most informative ones.

    Parameters
    ----------
    model : str or ModelSpec, default="logistic_regression"
        A family name (tuned by cross-validation over ``param_grid``) or a
        fixed :class:`ModelSpec`.
    explainer : str, default="kernel_shap"
        One of ``kernel_shap``, ``exact_shap``, ``permutation``, ``native``.
    n_features_to_select : int or None
        Number of features kept by :meth:`transform`; ``None`` keeps half.

    Attributes
    ----------
    report_ : StabilityReport
    mip_scores_ : ndarray of shape (n_features,)
        MIP score per input column (smaller means more informative).
    ranking_ : ndarray of shape (n_features,)
        1-based MIP rank per input column.
    nmr_, sd_ : float
    """

    def __init__(self, model="logistic_regression", explainer="kernel_shap", param_grid=None,
                 n_features_to_select=None, test_size=0.2, cv=10, n_coalition_samples=256,
                 background_size=100, n_permutation_repeats=10, random_state=0, n_jobs=1):
        self.model = model
        self.explainer = explainer
        self.param_grid = param_grid
        self.n_features_to_select = n_features_to_select
        self.test_size = test_size
        self.cv = cv
        self.n_coalition_samples = n_coalition_samples
        self.background_size = background_size
        self.n_permutation_repeats = n_permutation_repeats
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y):
        names = getattr(X, "columns", None)
        X, y = check_X_y(X, y)
        classes = np.unique(y)
        if classes.size != 2:
            raise ValueError(f"MIPRanker needs a binary target, got {classes.size} classes")
        self.classes_ = classes
        if names is None:
            names = [f"x{i}" for i in range(X.shape[1])]
        else:
            self.feature_names_in_ = np.asarray([str(n) for n in names], dtype=object)
        data = Dataset(make_features(names), X, (y == classes[1]).astype(np.int64),
                       tuple(classes.tolist()))
        spec = ExplainerSpec(
            kind=self.explainer,
            n_coalition_samples=self.n_coalition_samples,
            n_permutation_repeats=self.n_permutation_repeats,
            background_size=self.background_size,
            seed=self.random_state,
        )
        model = self.model
        if isinstance(model, dict):
            model = ModelSpec(**model)
        self.report_ = stability_report(
            model, spec, data, test_fraction=self.test_size, folds=self.cv,
            grid=self.param_grid, seed=self.random_state, threads=self.n_jobs,
        )
        features = data.features
        self.mip_scores_ = np.array([self.report_.scores.mip[f] for f in features])
        order = self.report_.scores.mip_ranking
        self.ranking_ = np.array([order.position(f) for f in features])
        self.nmr_ = self.report_.nmr
        self.sd_ = self.report_.sd
        self.n_features_in_ = X.shape[1]
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "ranking_")
        k = self.n_features_to_select
        if k is None:
            k = max(1, self.n_features_in_ // 2)
        return self.ranking_ <= k
