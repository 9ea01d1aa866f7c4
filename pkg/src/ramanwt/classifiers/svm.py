"""C-SVM trained by sequential minimal optimization, one-vs-rest for
multi-class problems."""

from __future__ import annotations

import warnings

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import ConvergenceWarning
from ..serialization import register
from .base import Classifier, check_xy, softmax

TAU = 1e-12


def kernel_matrix(A, B, kernel="rbf", gamma=1.0) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if kernel == "linear":
        return A @ B.T
    if kernel == "rbf":
        return np.exp(-gamma * cdist(A, B, "sqeuclidean"))
    raise ValueError(f"unknown kernel {kernel!r}")


def dual_objective(alpha, y, K) -> float:
    """``sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij`` (to be maximized)."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def smo(K, y, C=10.0, tol=1e-3, max_iter=100_000):
    """Solve the binary C-SVM dual on a precomputed kernel.

    Working pairs are chosen by maximal violation for the first index and
    second-order gain for the second. Stops once the KKT violation
    ``max_{I_up} -y G - min_{I_low} -y G`` drops below ``tol``.

    Returns
    -------
    alpha : (n,) dual coefficients
    b : float, intercept of ``f(x) = sum alpha_i y_i K(x_i, x) + b``
    info : dict with ``iterations``, ``converged``, ``violation``
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij
    QD = np.diag(K).copy()
    it = 0
    converged = False
    violation = np.inf
    while it < max_iter:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        score = -y * G
        if not up.any() or not low.any():
            converged = True
            violation = 0.0
            break
        i = int(np.argmax(np.where(up, score, -np.inf)))
        m_up = score[i]
        m_low = np.min(np.where(low, score, np.inf))
        violation = m_up - m_low
        if violation < tol:
            converged = True
            break
        Ki = K[i]
        b_t = m_up - score
        cand = low & (b_t > 0)
        a_t = QD[i] + QD - 2.0 * Ki
        a_t = np.where(a_t > 0, a_t, TAU)
        j = int(np.argmin(np.where(cand, -(b_t * b_t) / a_t, np.inf)))

        Qi = y[i] * y * Ki
        Qj = y[j] * y * K[j]
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(QD[i] + QD[j] + 2.0 * Qi[j], TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, diff
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, C - diff
            elif alpha[j] > C:
                alpha[j], alpha[i] = C, C + diff
        else:
            quad = max(QD[i] + QD[j] - 2.0 * Qi[j], TAU)
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, total - C
                if alpha[j] > C:
                    alpha[j], alpha[i] = C, total - C
            else:
                if alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, total
                if alpha[i] < 0:
                    alpha[i], alpha[j] = 0.0, total
        G += Qi * (alpha[i] - ai) + Qj * (alpha[j] - aj)
        it += 1

    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yG[free].mean())
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        ub = np.min(yG[low]) if low.any() else np.inf
        lb = np.max(yG[up]) if up.any() else -np.inf
        rho = 0.5 * (ub + lb) if np.isfinite(ub) and np.isfinite(lb) else float(np.nan_to_num(ub if np.isfinite(ub) else lb))
    return alpha, -rho, {"iterations": it, "converged": converged, "violation": float(violation)}


class BinarySVM:
    """Two-class C-SVM on labels in {-1, +1}."""

    def __init__(self, C=10.0, kernel="rbf", gamma=None, tol=1e-3, max_iter=100_000):
        self.C, self.kernel, self.gamma, self.tol, self.max_iter = C, kernel, gamma, tol, max_iter

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        self.gamma_ = 1.0 / X.shape[1] if self.gamma is None else self.gamma
        K = kernel_matrix(X, X, self.kernel, self.gamma_)
        self.alpha_, self.b_, self.info_ = smo(K, y, self.C, self.tol, self.max_iter)
        self.objective_ = dual_objective(self.alpha_, np.asarray(y, float), K)
        sv = self.alpha_ > 0
        self.support_vectors_ = X[sv]
        self.dual_coef_ = (self.alpha_ * y)[sv]
        return self

    def decision_function(self, X):
        K = kernel_matrix(X, self.support_vectors_, self.kernel, self.gamma_)
        return K @ self.dual_coef_ + self.b_


@register("svm")
class SVM(Classifier):
    """One-vs-rest C-SVM. ``gamma=None`` means ``1 / n_features``.

    The predicted class has the largest decision value; ``predict_proba``
    is the softmax of the decision values. Sub-problems that hit
    ``max_iter`` keep their last iterate and are listed in
    ``unconverged_``.
    """

    def __init__(self, C=10.0, kernel="rbf", gamma=None, tol=1e-3, max_iter=100_000):
        self.C, self.kernel, self.gamma, self.tol, self.max_iter = C, kernel, gamma, tol, max_iter

    def fit(self, X, y, n_classes=None):
        X, y, C = check_xy(X, y, n_classes)
        self.n_classes = C
        self.gamma_ = 1.0 / X.shape[1] if self.gamma is None else float(self.gamma)
        K = kernel_matrix(X, X, self.kernel, self.gamma_)
        coef = np.zeros((C, X.shape[0]))
        self.intercept_ = np.zeros(C)
        self.info_ = []
        for c in range(C):
            yc = np.where(y == c, 1.0, -1.0)
            alpha, b, info = smo(K, yc, self.C, self.tol, self.max_iter)
            coef[c] = alpha * yc
            self.intercept_[c] = b
            self.info_.append(info)
        self.unconverged_ = [c for c, info in enumerate(self.info_) if not info["converged"]]
        if self.unconverged_:
            warnings.warn(
                f"SMO hit max_iter={self.max_iter} for classes {self.unconverged_}; using last iterate",
                ConvergenceWarning,
                stacklevel=2,
            )
        keep = np.any(coef != 0, axis=0)
        self.support_vectors_ = X[keep]
        self.dual_coef_ = coef[:, keep]
        return self

    @property
    def converged(self):
        return not self.unconverged_

    def decision_function(self, X):
        K = kernel_matrix(X, self.support_vectors_, self.kernel, self.gamma_)
        return K @ self.dual_coef_.T + self.intercept_

    def predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)

    def predict_proba(self, X):
        return softmax(self.decision_function(X), axis=1)

    def get_state(self):
        params = {
            "C": self.C,
            "kernel": self.kernel,
            "gamma": self.gamma,
            "gamma_": self.gamma_,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "n_classes": self.n_classes,
            "unconverged": self.unconverged_,
        }
        arrays = {"support_vectors": self.support_vectors_, "dual_coef": self.dual_coef_, "intercept": self.intercept_}
        return params, arrays

    @classmethod
    def from_state(cls, params, arrays):
        m = cls(params["C"], params["kernel"], params["gamma"], params["tol"], params["max_iter"])
        m.gamma_, m.n_classes, m.unconverged_ = params["gamma_"], params["n_classes"], params["unconverged"]
        m.support_vectors_, m.dual_coef_, m.intercept_ = arrays["support_vectors"], arrays["dual_coef"], arrays["intercept"]
        return m
