"""Per-feature importance producers.

Shapley-based explainers use the marginal (interventional) value function:
masked features are filled in from background rows and the model output is
averaged over the background.  That convention treats features as
independent, which is exactly the behaviour the elimination loop corrects
downstream.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import FeatureId
from .dataset import Dataset
from .exceptions import CapabilityError, CostGuardError, DegenerateDesignError, InputError

KINDS = ("kernel_shap", "exact_shap", "permutation", "native")
EXACT_MAX_FEATURES = 15
_EVAL_CHUNK = 400_000  # model evaluations materialised at once
_MAX_ESCALATIONS = 3


@dataclass(frozen=True)
class ExplainerSpec:
    kind: str = "kernel_shap"
    n_coalition_samples: int = 256
    n_permutation_repeats: int = 10
    background_size: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown explainer kind {self.kind!r}; expected one of {KINDS}")
        if self.n_coalition_samples < 1 or self.n_permutation_repeats < 1:
            raise InputError("sample counts must be >= 1")
        if self.background_size < 1:
            raise InputError("background_size must be >= 1")


@dataclass(frozen=True)
class Attribution:
    per_row: np.ndarray
    base_value: float


def _model_fn(model) -> Callable[[np.ndarray], np.ndarray]:
    if hasattr(model, "output"):
        return model.output
    if callable(model):
        return model
    raise CapabilityError(f"cannot evaluate model of type {type(model).__name__}")


def _matrix(data) -> np.ndarray:
    X = data.X if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    return X[None, :] if X.ndim == 1 else X


def select_background(train: Dataset, size: int, seed: int = 0) -> np.ndarray:
    """Row indices of a deterministic background subsample (all rows if fewer)."""
    if train.n_rows <= size:
        return np.arange(train.n_rows)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(train.n_rows, size, replace=False))


def shapley_kernel_weight(d: int, s: int) -> float:
    """Kernel SHAP weight of one coalition of size ``s`` (0 < s < d)."""
    return (d - 1) / (math.comb(d, s) * s * (d - s))


def _masks_of_size(d, s):
    out = np.zeros((math.comb(d, s), d), dtype=bool)
    for row, cols in enumerate(itertools.combinations(range(d), s)):
        out[row, list(cols)] = True
    return out


def coalition_design(d: int, budget: int, rng: np.random.Generator):
    """Non-trivial coalitions and their regression weights.

    Coalition sizes are grouped with their complements ({s, d-s}).  Groups
    are enumerated completely, smallest ``s`` first, while the budget covers
    their share of the kernel mass; the remaining mass is estimated by
    paired sampling (a random subset plus its complement).  A budget of at
    least ``2**d - 2`` enumerates everything with exact kernel weights.
    """
    groups = []
    for s in range(1, d // 2 + 1):
        sizes = (s,) if s == d - s else (s, d - s)
        mass = sum((d - 1) / (t * (d - t)) for t in sizes)
        count = sum(math.comb(d, t) for t in sizes)
        groups.append((s, sizes, mass, count))

    masks, weights = [], []
    left_budget = budget
    left_mass = sum(g[2] for g in groups)
    enumerate_all = budget >= 2**d - 2
    g = 0
    while g < len(groups):
        s, sizes, mass, count = groups[g]
        if not enumerate_all and left_budget * mass / left_mass < count - 1e-9:
            break
        for t in sizes:
            m = _masks_of_size(d, t)
            masks.append(m)
            weights.append(np.full(len(m), shapley_kernel_weight(d, t)))
        left_budget -= count
        left_mass -= mass
        g += 1

    rest = groups[g:]
    if rest:
        n_pairs = max(1, left_budget // 2)
        probs = np.array([r[2] for r in rest])
        probs /= probs.sum()
        picks = rng.choice(len(rest), size=n_pairs, p=probs)
        sampled = np.zeros((2 * n_pairs, d), dtype=bool)
        for k, gi in enumerate(picks):
            chosen = rng.choice(d, rest[gi][0], replace=False)
            sampled[2 * k, chosen] = True
            sampled[2 * k + 1] = ~sampled[2 * k]
        uniq, counts = np.unique(sampled, axis=0, return_counts=True)
        masks.append(uniq)
        weights.append(counts * (left_mass / (2 * n_pairs)))

    if not masks:
        return np.zeros((0, d), dtype=bool), np.zeros(0)
    return np.concatenate(masks), np.concatenate(weights)


def coalition_values(model, background, rows, masks, threads: int = 1) -> np.ndarray:
    """v(S) for every row and mask: mean model output with unmasked columns from the row.

    Returns an array of shape (n_rows, n_masks).
    """
    f = _model_fn(model)
    bg = _matrix(background)
    X = _matrix(rows)
    n_masks, d = masks.shape
    per_row = max(1, n_masks * bg.shape[0])
    step = max(1, _EVAL_CHUNK // per_row)

    def run(start):
        xs = X[start:start + step]
        filled = np.where(masks[None, :, None, :], xs[:, None, None, :], bg[None, None, :, :])
        out = f(filled.reshape(-1, d)).reshape(xs.shape[0], n_masks, bg.shape[0])
        return out.mean(axis=2)

    starts = range(0, X.shape[0], step)
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    return np.concatenate(parts) if parts else np.zeros((0, n_masks))


def _constrained_wls(masks, weights, values, base, fx):
    """Solve the kernel regression with sum(phi) = f(x) - base imposed exactly."""
    d = masks.shape[1]
    delta = fx - base
    Z = masks.astype(float)
    Zr = Z[:, :-1] - Z[:, [-1]]
    T = values - base - np.outer(delta, Z[:, -1])
    sw = np.sqrt(weights)
    A = sw[:, None] * Zr
    sol, *_ = np.linalg.lstsq(A, (sw[:, None] * T.T), rcond=None)
    phi = np.empty((values.shape[0], d))
    phi[:, :-1] = sol.T
    phi[:, -1] = delta - sol.sum(axis=0)
    return phi


def kernel_shap(model, background, rows, spec: ExplainerSpec | None = None,
                threads: int = 1) -> Attribution:
    """Kernel SHAP attributions for every row of ``rows`` (one shared coalition design)."""
    spec = spec or ExplainerSpec()
    f = _model_fn(model)
    bg = _matrix(background)
    X = _matrix(rows)
    if bg.shape[0] == 0:
        raise InputError("background must be non-empty")
    d = X.shape[1]
    base = float(np.mean(f(bg)))
    fx = np.asarray(f(X), dtype=float)
    if d == 1:
        return Attribution((fx - base)[:, None], base)

    rng = np.random.default_rng(spec.seed)
    budget = spec.n_coalition_samples
    for _ in range(_MAX_ESCALATIONS + 1):
        masks, weights = coalition_design(d, budget, rng)
        Zr = masks[:, :-1].astype(float) - masks[:, [-1]]
        if masks.shape[0] >= d - 1 and np.linalg.matrix_rank(Zr) == d - 1:
            break
        budget *= 2
    else:
        raise DegenerateDesignError(
            f"coalition design rank deficient after escalating to {budget // 2} samples"
        )
    values = coalition_values(f, bg, X, masks, threads)
    return Attribution(_constrained_wls(masks, weights, values, base, fx), base)


def kernel_shap_row(model, background, x, spec: ExplainerSpec | None = None):
    att = kernel_shap(model, background, np.asarray(x, dtype=float)[None, :], spec)
    return att.per_row[0], att.base_value


def exact_shap(model, background, rows, threads: int = 1) -> Attribution:
    """Exact Shapley values by enumerating all 2^d coalitions."""
    f = _model_fn(model)
    bg = _matrix(background)
    X = _matrix(rows)
    d = X.shape[1]
    if d > EXACT_MAX_FEATURES:
        raise CostGuardError(
            f"exact Shapley enumeration capped at {EXACT_MAX_FEATURES} features, got {d}"
        )
    codes = np.arange(2**d)
    masks = ((codes[:, None] >> np.arange(d)) & 1).astype(bool)
    v = coalition_values(f, bg, X, masks, threads)
    sizes = masks.sum(axis=1)
    fact = [math.factorial(k) for k in range(d + 1)]
    phi = np.zeros((X.shape[0], d))
    for i in range(d):
        without = codes[(codes >> i) & 1 == 0]
        s = sizes[without]
        w = np.array([fact[k] * fact[d - k - 1] / fact[d] for k in s])
        phi[:, i] = (v[:, without | (1 << i)] - v[:, without]) @ w
    return Attribution(phi, float(v[0, 0]))


def exact_shap_row(model, background, x):
    att = exact_shap(model, background, np.asarray(x, dtype=float)[None, :])
    return att.per_row[0], att.base_value


def permutation_importance(model, data: Dataset, repeats: int = 10, seed: int = 0):
    """Accuracy drop when each column is shuffled, averaged over ``repeats`` shuffles."""
    if repeats < 1:
        raise InputError("repeats must be >= 1")
    model.check_features(data)
    rng = np.random.default_rng(seed)
    baseline = float(np.mean(model.predict(data.X) == data.y))
    out = {}
    for j, feature in enumerate(data.features):
        drops = []
        for _ in range(repeats):
            Xp = data.X.copy()
            Xp[:, j] = Xp[rng.permutation(data.n_rows), j]
            drops.append(baseline - float(np.mean(model.predict(Xp) == data.y)))
        out[feature] = float(np.mean(drops))
    return out


def native_importance(model) -> dict[FeatureId, float]:
    """|coefficient| for linear families, impurity/gain totals for tree families."""
    est = getattr(model, "estimator", None)
    if hasattr(est, "coef_"):
        values = np.abs(est.coef_)
    elif hasattr(est, "feature_importances_"):
        values = np.asarray(est.feature_importances_)
    else:
        raise CapabilityError(
            f"native importance unavailable for {type(est).__name__ if est else type(model).__name__}"
        )
    return {f: float(v) for f, v in zip(model.features, values)}


def explain_global(model, background, test: Dataset, spec: ExplainerSpec,
                   threads: int = 1) -> dict[FeatureId, float]:
    """Global importance per feature: mean |phi| for Shapley kinds."""
    if test.n_rows == 0:
        raise InputError("test set is empty")
    if hasattr(model, "check_features"):
        model.check_features(test)
    if spec.kind == "permutation":
        return permutation_importance(model, test, spec.n_permutation_repeats, spec.seed)
    if spec.kind == "native":
        return native_importance(model)
    if spec.kind == "exact_shap":
        att = exact_shap(model, background, test.X, threads)
    else:
        att = kernel_shap(model, background, test.X, spec, threads)
    means = np.abs(att.per_row).mean(axis=0)
    return {f: float(v) for f, v in zip(test.features, means)}
