"""L2-regularised linear classifiers: logistic regression and a hinge-loss SVC."""

import warnings

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..exceptions import ConvergenceWarning, InputError


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def logistic_loss_and_grad(params, X, y, C):
    """Regularised mean log-loss and its gradient.

    ``params`` is ``[w_1..w_d, b]``. The objective is

        mean_i log(1 + exp(-t_i * z_i)) + ||w||^2 / (2 * C * n)

    with ``z = X @ w + b`` and ``t = 2y - 1``; the intercept is not penalised.
    """
    n = X.shape[0]
    w, b = params[:-1], params[-1]
    z = X @ w + b
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + w @ w / (2.0 * C * n)
    r = (_sigmoid(z) - y) / n
    grad = np.empty_like(params)
    grad[:-1] = X.T @ r + w / (C * n)
    grad[-1] = r.sum()
    return loss, grad


class LogisticRegression(ClassifierMixin, BaseEstimator):
    """Binary logistic regression fitted by L-BFGS on the regularised log-loss.

    Parameters
    ----------
    C : float, default=1.0
        Inverse regularisation strength, as in scikit-learn.
    max_iter : int, default=500
        Iteration cap. Hitting it emits a :class:`ConvergenceWarning`.
    tol : float, default=1e-10
        Gradient tolerance passed to the optimiser.
    """

    def __init__(self, C=1.0, max_iter=500, tol=1e-10):
        self.C = C
        self.max_iter = max_iter
        self.tol = tol

    def _check_params(self):
        if not self.C > 0:
            raise InputError(f"C must be > 0, got {self.C}")
        if int(self.max_iter) < 1:
            raise InputError(f"max_iter must be >= 1, got {self.max_iter}")

    def fit(self, X, y):
        self._check_params()
        X, y = check_X_y(X, y)
        self.classes_ = np.array([0, 1])
        y = y.astype(float)
        x0 = np.zeros(X.shape[1] + 1)
        res = minimize(
            logistic_loss_and_grad,
            x0,
            args=(X, y, float(self.C)),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": int(self.max_iter), "gtol": self.tol, "ftol": 1e-15},
        )
        self.n_iter_ = int(res.nit)
        self.converged_ = bool(res.success) or res.nit < int(self.max_iter)
        if not self.converged_:
            warnings.warn(
                f"logistic regression stopped after {res.nit} iterations: {res.message}",
                ConvergenceWarning,
                stacklevel=2,
            )
        self.coef_ = res.x[:-1].copy()
        self.intercept_ = float(res.x[-1])
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        p = _sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(np.int64)


class LinearSVC(ClassifierMixin, BaseEstimator):
    """Linear support vector classifier: hinge loss + L2, full-batch subgradient descent.

    Minimises ``lam/2 ||w||^2 + mean(max(0, 1 - t (w.x + b)))`` with
    ``lam = 1 / (C n)`` for a fixed number of iterations, keeping the iterate
    with the lowest objective.
    """

    def __init__(self, C=1.0, n_iter=1000, step=0.5):
        self.C = C
        self.n_iter = n_iter
        self.step = step

    def _check_params(self):
        if not self.C > 0:
            raise InputError(f"C must be > 0, got {self.C}")
        if int(self.n_iter) < 1:
            raise InputError(f"n_iter must be >= 1, got {self.n_iter}")
        if not self.step > 0:
            raise InputError(f"step must be > 0, got {self.step}")

    @staticmethod
    def _objective(w, b, X, t, lam):
        margin = t * (X @ w + b)
        return 0.5 * lam * (w @ w) + np.mean(np.maximum(0.0, 1.0 - margin)), margin

    def fit(self, X, y):
        self._check_params()
        X, y = check_X_y(X, y)
        self.classes_ = np.array([0, 1])
        n, d = X.shape
        t = np.where(y == 1, 1.0, -1.0)
        lam = 1.0 / (float(self.C) * n)
        w = np.zeros(d)
        b = 0.0
        best = (np.inf, w.copy(), b)
        for it in range(1, int(self.n_iter) + 1):
            obj, margin = self._objective(w, b, X, t, lam)
            if obj < best[0]:
                best = (obj, w.copy(), b)
            active = margin < 1.0
            gw = lam * w - (t[active] @ X[active]) / n
            gb = -t[active].sum() / n
            eta = self.step / np.sqrt(it)
            w = w - eta * gw
            b = b - eta * gb
        obj, _ = self._objective(w, b, X, t, lam)
        if obj < best[0]:
            best = (obj, w.copy(), b)
        self.objective_, self.coef_, self.intercept_ = best[0], best[1], float(best[2])
        self.n_features_in_ = d
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_ + self.intercept_

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(np.int64)
