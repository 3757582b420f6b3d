"""CART classification trees (Gini) and bagged random forests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..exceptions import InputError

LEAF = -1


@dataclass(frozen=True)
class TreeArrays:
    """Flat node arrays; ``feature[i] == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # fraction of class 1 among the node's training rows
    n_samples: np.ndarray
    impurity: np.ndarray
    depth: np.ndarray

    @property
    def node_count(self):
        return self.feature.size

    @property
    def max_depth(self):
        return int(self.depth.max())

    def apply(self, X):
        """Leaf index reached by every row of ``X``."""
        X = np.asfortranarray(X)
        out = np.zeros(X.shape[0], dtype=np.int64)
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            f = self.feature[node]
            if f == LEAF or idx.size == 0:
                out[idx] = node
                continue
            go_left = X[:, f][idx] <= self.threshold[node]
            stack.append((self.right[node], idx[~go_left]))
            stack.append((self.left[node], idx[go_left]))
        return out


def _gini(pos, n):
    p = pos / n
    return 2.0 * p * (1.0 - p)


def _resolve_max_features(max_features, d):
    if max_features is None:
        return d
    if max_features == "sqrt":
        return max(1, int(np.sqrt(d)))
    if isinstance(max_features, float) and 0 < max_features <= 1:
        return max(1, int(max_features * d))
    if isinstance(max_features, (int, np.integer)) and 1 <= max_features:
        return min(int(max_features), d)
    raise InputError(f"invalid max_features: {max_features!r}")


def _best_split(X, y, idx, candidates, min_samples_leaf, parent_impurity):
    """Best (gain, feature, threshold) over ``candidates``; ties go to the earlier candidate."""
    n = idx.size
    ys_all = y[idx]
    pos_total = ys_all.sum()
    n_left = np.arange(1, n)
    n_right = n - n_left
    size_ok = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
    best = (-np.inf, LEAF, 0.0)
    for f in candidates:
        x = X[idx, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        valid = (xs[:-1] < xs[1:]) & size_ok
        if not valid.any():
            continue
        pos_left = np.cumsum(ys_all[order])[:-1]
        child = (n_left * _gini(pos_left, n_left)
                 + n_right * _gini(pos_total - pos_left, n_right)) / n
        gain = np.where(valid, parent_impurity - child, -np.inf)
        k = int(np.argmax(gain))
        if gain[k] > best[0]:
            lo, hi = xs[k], xs[k + 1]
            thr = lo + (hi - lo) / 2.0
            if not lo <= thr < hi:
                thr = lo
            best = (float(gain[k]), int(f), float(thr))
    return best


def build_tree(X, y, max_depth=None, min_samples_split=2, min_samples_leaf=1,
               max_features=None, rng=None):
    n, d = X.shape
    n_candidates = _resolve_max_features(max_features, d)
    depth_cap = np.inf if max_depth is None else max_depth
    nodes = []  # [feature, threshold, left, right, value, n, impurity, depth]
    importances = np.zeros(d)

    stack = [(np.arange(n), 0, None, None)]
    while stack:
        idx, depth, parent, side = stack.pop()
        node_id = len(nodes)
        pos = y[idx].sum()
        impurity = _gini(pos, idx.size)
        nodes.append([LEAF, 0.0, LEAF, LEAF, pos / idx.size, idx.size, impurity, depth])
        if parent is not None:
            nodes[parent][2 if side == "left" else 3] = node_id

        if impurity == 0.0 or depth >= depth_cap or idx.size < min_samples_split:
            continue
        if n_candidates < d:
            candidates = np.sort(rng.choice(d, n_candidates, replace=False))
        else:
            candidates = range(d)
        gain, f, thr = _best_split(X, y, idx, candidates, min_samples_leaf, impurity)
        if f == LEAF:
            continue
        nodes[node_id][0] = f
        nodes[node_id][1] = thr
        importances[f] += idx.size / n * gain
        go_left = X[idx, f] <= thr
        # right pushed first so the left subtree is numbered first
        stack.append((idx[~go_left], depth + 1, node_id, "right"))
        stack.append((idx[go_left], depth + 1, node_id, "left"))

    cols = list(zip(*nodes))
    tree = TreeArrays(
        feature=np.array(cols[0], dtype=np.int64),
        threshold=np.array(cols[1], dtype=float),
        left=np.array(cols[2], dtype=np.int64),
        right=np.array(cols[3], dtype=np.int64),
        value=np.array(cols[4], dtype=float),
        n_samples=np.array(cols[5], dtype=np.int64),
        impurity=np.array(cols[6], dtype=float),
        depth=np.array(cols[7], dtype=np.int64),
    )
    return tree, importances


class DecisionTree(ClassifierMixin, BaseEstimator):
    """Binary CART tree with Gini impurity.

    A node becomes a leaf when it is pure, sits at ``max_depth``, holds fewer
    than ``min_samples_split`` rows, or has no split respecting
    ``min_samples_leaf``. Zero-gain splits are allowed, which is what lets a
    depth-2 tree solve XOR.
    """

    def __init__(self, max_depth=None, min_samples_split=2, min_samples_leaf=1,
                 max_features=None, random_state=None):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.random_state = random_state

    def _check_params(self):
        if self.max_depth is not None and int(self.max_depth) < 1:
            raise InputError(f"max_depth must be >= 1, got {self.max_depth}")
        if int(self.min_samples_split) < 2:
            raise InputError("min_samples_split must be >= 2")
        if int(self.min_samples_leaf) < 1:
            raise InputError("min_samples_leaf must be >= 1")
        _resolve_max_features(self.max_features, 2)

    def fit(self, X, y):
        self._check_params()
        X, y = check_X_y(X, y)
        self.classes_ = np.array([0, 1])
        rng = np.random.default_rng(self.random_state)
        self.tree_, self.feature_importances_ = build_tree(
            X, y.astype(np.int64),
            max_depth=None if self.max_depth is None else int(self.max_depth),
            min_samples_split=int(self.min_samples_split),
            min_samples_leaf=int(self.min_samples_leaf),
            max_features=self.max_features,
            rng=rng,
        )
        self.n_features_in_ = X.shape[1]
        return self

    def apply(self, X):
        check_is_fitted(self, "tree_")
        return self.tree_.apply(check_array(X))

    def predict_proba(self, X):
        p = self.tree_.value[self.apply(X)]
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] > 0.5).astype(np.int64)


class RandomForest(ClassifierMixin, BaseEstimator):
    """Bagged CART trees with per-node feature subsampling; probabilities are averaged."""

    def __init__(self, n_trees=100, max_depth=None, min_samples_leaf=1,
                 max_features="sqrt", bootstrap=True, random_state=None):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.random_state = random_state

    def _check_params(self):
        if int(self.n_trees) < 1:
            raise InputError(f"n_trees must be >= 1, got {self.n_trees}")
        self._tree(None)._check_params()

    def _tree(self, seed):
        return DecisionTree(max_depth=self.max_depth, min_samples_leaf=self.min_samples_leaf,
                            max_features=self.max_features, random_state=seed)

    def fit(self, X, y):
        self._check_params()
        X, y = check_X_y(X, y)
        self.classes_ = np.array([0, 1])
        rng = np.random.default_rng(self.random_state)
        n = X.shape[0]
        self.estimators_ = []
        for _ in range(int(self.n_trees)):
            seed = int(rng.integers(2**32))
            rows = rng.integers(0, n, n) if self.bootstrap else np.arange(n)
            self.estimators_.append(self._tree(seed).fit(X[rows], y[rows]))
        self.feature_importances_ = np.mean(
            [t.feature_importances_ for t in self.estimators_], axis=0)
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "estimators_")
        X = np.asfortranarray(check_array(X))
        p = np.zeros(X.shape[0])
        for tree in self.estimators_:
            p += tree.tree_.value[tree.tree_.apply(X)]
        p /= len(self.estimators_)
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] > 0.5).astype(np.int64)
