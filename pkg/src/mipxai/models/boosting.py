"""Gradient-boosted decision stumps with logistic loss.

Stands in for a LightGBM-style boosted tree model: each round fits one
depth-1 tree to the Newton step of the log-loss and adds it with shrinkage.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..exceptions import InputError


class BoostedStumps(ClassifierMixin, BaseEstimator):
    def __init__(self, n_rounds=100, shrinkage=0.1, l2=1.0, min_samples_leaf=1):
        self.n_rounds = n_rounds
        self.shrinkage = shrinkage
        self.l2 = l2
        self.min_samples_leaf = min_samples_leaf

    def _check_params(self):
        if int(self.n_rounds) < 1:
            raise InputError(f"n_rounds must be >= 1, got {self.n_rounds}")
        if not 0 < self.shrinkage <= 1:
            raise InputError(f"shrinkage must be in (0, 1], got {self.shrinkage}")
        if self.l2 < 0:
            raise InputError(f"l2 must be >= 0, got {self.l2}")
        if int(self.min_samples_leaf) < 1:
            raise InputError("min_samples_leaf must be >= 1")

    def fit(self, X, y):
        self._check_params()
        X, y = check_X_y(X, y)
        self.classes_ = np.array([0, 1])
        y = y.astype(float)
        n, d = X.shape
        lam = float(self.l2)
        eta = float(self.shrinkage)
        min_leaf = int(self.min_samples_leaf)

        orders = np.argsort(X, axis=0, kind="stable")
        xs = np.take_along_axis(X, orders, axis=0)
        n_left = np.arange(1, n)[:, None]
        valid = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)

        p0 = np.clip(y.mean(), 1e-12, 1 - 1e-12)
        self.init_score_ = float(np.log(p0 / (1 - p0)))
        F = np.full(n, self.init_score_)
        feats, thrs, lefts, rights = [], [], [], []
        gains = np.zeros(d)
        for _ in range(int(self.n_rounds)):
            p = 1.0 / (1.0 + np.exp(-F))
            g = p - y
            h = p * (1.0 - p)
            G, H = g.sum(), h.sum()
            GL = np.cumsum(g[orders], axis=0)[:-1]
            HL = np.cumsum(h[orders], axis=0)[:-1]
            gain = GL**2 / (HL + lam) + (G - GL) ** 2 / (H - HL + lam) - G**2 / (H + lam)
            gain = np.where(valid, gain, -np.inf)
            # feature-major argmax: earliest feature, then earliest cut
            flat = int(np.argmax(gain.T))
            f, k = divmod(flat, n - 1)
            if not np.isfinite(gain[k, f]):
                break
            lo, hi = xs[k, f], xs[k + 1, f]
            thr = lo + (hi - lo) / 2.0
            if not lo <= thr < hi:
                thr = lo
            wl = -GL[k, f] / (HL[k, f] + lam)
            wr = -(G - GL[k, f]) / (H - HL[k, f] + lam)
            F += eta * np.where(X[:, f] <= thr, wl, wr)
            feats.append(f)
            thrs.append(thr)
            lefts.append(wl)
            rights.append(wr)
            gains[f] += 0.5 * gain[k, f]

        self.stump_feature_ = np.array(feats, dtype=np.int64)
        self.stump_threshold_ = np.array(thrs, dtype=float)
        self.stump_left_ = np.array(lefts, dtype=float)
        self.stump_right_ = np.array(rights, dtype=float)
        self.feature_importances_ = gains
        self.n_features_in_ = d
        return self

    def decision_function(self, X):
        check_is_fitted(self, "stump_feature_")
        X = check_array(X)
        F = np.full(X.shape[0], self.init_score_)
        for f, thr, wl, wr in zip(self.stump_feature_, self.stump_threshold_,
                                  self.stump_left_, self.stump_right_):
            F += self.shrinkage * np.where(X[:, f] <= thr, wl, wr)
        return F

    def predict_proba(self, X):
        p = 1.0 / (1.0 + np.exp(-self.decision_function(X)))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(np.int64)
