"""Lasso (coordinate descent) and ridge (cached SVD) solvers.

Both estimators use the scaling

    lasso:  (1/2n) ||y - X b||^2 + (lam / sqrt(n)) ||b||_1
    ridge:  (1/2n) ||y - X b||^2 + (lam / 2) ||b||^2
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numba
import numpy as np

from .errors import DimensionMismatch, NotConverged
from .model import DataSet, FitResult


@dataclass(frozen=True)
class LassoConfig:
    tol: float = 1e-7
    max_iters: int = 100_000
    warm_start: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@numba.njit(cache=True)
def _sweep(X, col_sq, beta, r, thresh, idx):
    max_change = 0.0
    n = X.shape[0]
    for j in idx:
        cj = col_sq[j]
        if cj <= 0.0:
            continue
        bj = beta[j]
        xj = X[:, j]
        z = 0.0
        for i in range(n):
            z += xj[i] * r[i]
        z += cj * bj
        if z > thresh:
            new = (z - thresh) / cj
        elif z < -thresh:
            new = (z + thresh) / cj
        else:
            new = 0.0
        d = new - bj
        if d != 0.0:
            for i in range(n):
                r[i] -= d * xj[i]
            beta[j] = new
            if abs(d) > max_change:
                max_change = abs(d)
    return max_change


@numba.njit(cache=True)
def _kkt_violation(X, y, beta, thresh, r):
    # recomputes r from scratch, returns the worst KKT violation of X'r
    n, p = X.shape
    for i in range(n):
        r[i] = y[i]
    for j in range(p):
        bj = beta[j]
        if bj != 0.0:
            for i in range(n):
                r[i] -= X[i, j] * bj
    worst = 0.0
    for j in range(p):
        g = 0.0
        for i in range(n):
            g += X[i, j] * r[i]
        if beta[j] == 0.0:
            v = abs(g) - thresh
        elif beta[j] > 0.0:
            v = abs(g - thresh)
        else:
            v = abs(g + thresh)
        if v > worst:
            worst = v
    return worst


@numba.njit(cache=True)
def _cd_lasso(X, y, col_sq, beta, thresh, tol, kkt_tol, max_iters):
    p = X.shape[1]
    r = np.empty(X.shape[0])
    _kkt_violation(X, y, beta, thresh, r)
    all_idx = np.arange(p)
    n_iter = 0
    worst = np.inf
    while n_iter < max_iters:
        change = _sweep(X, col_sq, beta, r, thresh, all_idx)
        n_iter += 1
        scale = max(1.0, np.max(np.abs(beta)))
        if change <= tol * scale:
            worst = _kkt_violation(X, y, beta, thresh, r)
            if worst <= kkt_tol:
                return n_iter, worst, True
            continue
        active = np.flatnonzero(beta)
        while n_iter < max_iters:
            change = _sweep(X, col_sq, beta, r, thresh, active)
            n_iter += 1
            if change <= tol * max(1.0, np.max(np.abs(beta))):
                break
    worst = _kkt_violation(X, y, beta, thresh, r)
    return n_iter, worst, worst <= kkt_tol


@numba.njit(cache=True)
def _sweep_gram(G, col_sq, beta, g, thresh, idx):
    # g holds X'(y - X beta); updates cost O(p) instead of O(n)
    max_change = 0.0
    p = G.shape[0]
    for j in idx:
        cj = col_sq[j]
        if cj <= 0.0:
            continue
        bj = beta[j]
        z = g[j] + cj * bj
        if z > thresh:
            new = (z - thresh) / cj
        elif z < -thresh:
            new = (z + thresh) / cj
        else:
            new = 0.0
        d = new - bj
        if d != 0.0:
            gj = G[j]  # symmetric: row j is column j, contiguous
            for k in range(p):
                g[k] -= d * gj[k]
            beta[j] = new
            if abs(d) > max_change:
                max_change = abs(d)
    return max_change


@numba.njit(cache=True)
def _kkt_violation_gram(G, xty, beta, thresh, g):
    p = G.shape[0]
    for k in range(p):
        g[k] = xty[k]
    for j in range(p):
        bj = beta[j]
        if bj != 0.0:
            for k in range(p):
                g[k] -= G[k, j] * bj
    worst = 0.0
    for j in range(p):
        if beta[j] == 0.0:
            v = abs(g[j]) - thresh
        elif beta[j] > 0.0:
            v = abs(g[j] - thresh)
        else:
            v = abs(g[j] + thresh)
        if v > worst:
            worst = v
    return worst


@numba.njit(cache=True)
def _cd_lasso_gram(G, xty, col_sq, beta, thresh, tol, kkt_tol, max_iters):
    p = G.shape[0]
    g = np.empty(p)
    _kkt_violation_gram(G, xty, beta, thresh, g)
    all_idx = np.arange(p)
    n_iter = 0
    worst = np.inf
    while n_iter < max_iters:
        change = _sweep_gram(G, col_sq, beta, g, thresh, all_idx)
        n_iter += 1
        if change <= tol * max(1.0, np.max(np.abs(beta))):
            worst = _kkt_violation_gram(G, xty, beta, thresh, g)
            if worst <= kkt_tol:
                return n_iter, worst, True
            continue
        active = np.flatnonzero(beta)
        while n_iter < max_iters:
            change = _sweep_gram(G, col_sq, beta, g, thresh, active)
            n_iter += 1
            if change <= tol * max(1.0, np.max(np.abs(beta))):
                break
    worst = _kkt_violation_gram(G, xty, beta, thresh, g)
    return n_iter, worst, worst <= kkt_tol


class _Design:
    """Column-major design plus, when n > p, its Gram matrix for
    covariance-update coordinate descent."""

    def __init__(self, X, y):
        self.X = np.asfortranarray(X)
        self.y = y
        self.col_sq = np.einsum("ij,ij->j", self.X, self.X)
        n, p = X.shape
        if n > p:
            self.G = np.ascontiguousarray(self.X.T @ self.X)
            self.xty = self.X.T @ y
        else:
            self.G = None


def lasso_objective(X, y, beta, lam):
    n = X.shape[0]
    r = y - X @ beta
    return 0.5 * (r @ r) / n + lam / np.sqrt(n) * np.abs(beta).sum()


def lasso_lambda_max(data: DataSet) -> float:
    """Smallest lambda for which the lasso solution is identically zero."""
    return float(np.max(np.abs(data.X.T @ data.y)) / np.sqrt(data.n))


def _lasso_core(design: _Design, lam, cfg, beta0):
    X, y = design.X, design.y
    n = X.shape[0]
    beta = np.zeros(X.shape[1]) if beta0 is None else np.array(beta0, dtype=float)
    thresh = np.sqrt(n) * lam
    kkt_tol = cfg.tol * np.sqrt(n)
    if design.G is not None:
        n_iter, worst, ok = _cd_lasso_gram(design.G, design.xty, design.col_sq, beta,
                                           thresh, cfg.tol, kkt_tol, cfg.max_iters)
    else:
        n_iter, worst, ok = _cd_lasso(X, y, design.col_sq, beta, thresh, cfg.tol,
                                      kkt_tol, cfg.max_iters)
    residual = y - X @ beta
    fit = FitResult(lam=float(lam), penalty_kind="L1", beta_hat=beta,
                    df_hat=float(np.count_nonzero(beta)), residual=residual,
                    n_iter=int(n_iter), converged=bool(ok))
    if not ok:
        raise NotConverged(
            f"lasso at lambda={lam:.6g} did not converge in {n_iter} sweeps",
            result=fit, diagnostics={"kkt_violation": worst / np.sqrt(n),
                                     "n_iter": n_iter})
    return fit


def fit_lasso(data: DataSet, lambda_L: float, cfg: LassoConfig = LassoConfig(),
              init: Optional[np.ndarray] = None) -> FitResult:
    """Lasso fit by cyclic coordinate descent with exact soft-thresholding.

    When n > p the sweeps update the gradient X'r through the Gram matrix
    rather than the residual. Converges when the largest coordinate move in
    a sweep is below
    ``tol * max(1, ||b||_inf)`` and a full KKT check passes with slack
    ``tol * sqrt(n)`` on ``X'(y - X b)``. Raises :class:`NotConverged`
    (with the last iterate attached) after ``cfg.max_iters`` sweeps.
    """
    if not lambda_L > 0:
        raise ValueError("lambda_L must be positive")
    if init is not None and len(init) != data.p:
        raise DimensionMismatch("init has the wrong length")
    return _lasso_core(_Design(data.X, data.y), lambda_L, cfg, init)


def lasso_path(data: DataSet, lambdas: Sequence[float],
               cfg: LassoConfig = LassoConfig(), stop_df: Optional[int] = None):
    """Solve along ``lambdas`` sorted from largest to smallest.

    With ``cfg.warm_start`` each solve starts from the previous solution.
    If ``stop_df`` is given the path stops after the first fit whose support
    size exceeds it, or whose support is saturated (``df == min(n, p)``).
    Returns fits in decreasing-lambda order.
    """
    lambdas = np.sort(np.asarray(lambdas, dtype=float))[::-1]
    design = _Design(data.X, data.y)
    full = min(data.n, data.p)
    fits = []
    prev = None
    for lam in lambdas:
        fit = _lasso_core(design, lam, cfg, prev if cfg.warm_start else None)
        fits.append(fit)
        prev = fit.beta_hat
        if stop_df is not None and (fit.df_hat > stop_df or fit.df_hat >= full):
            break
    return fits


@dataclass(frozen=True)
class RidgePathCache:
    """Thin SVD of ``X / sqrt(n)`` and the response projected on its left
    singular vectors."""

    singular_values: np.ndarray
    left_factors: np.ndarray
    right_factors: np.ndarray  # p x r, columns are right singular vectors
    projected_response: np.ndarray  # U' y
    n: int
    p: int

    def df(self, lambda_R) -> np.ndarray:
        """Ridge degrees of freedom Tr((X'X/n + lam I)^{-1} X'X/n)."""
        s2 = self.singular_values**2
        lam = np.atleast_1d(np.asarray(lambda_R, dtype=float))
        out = (s2[None, :] / (s2[None, :] + lam[:, None])).sum(axis=1)
        return out if np.ndim(lambda_R) else float(out[0])


def build_ridge_cache(data: DataSet) -> RidgePathCache:
    U, s, Vt = np.linalg.svd(data.X / np.sqrt(data.n), full_matrices=False)
    return RidgePathCache(singular_values=s, left_factors=U,
                          right_factors=Vt.T, projected_response=U.T @ data.y,
                          n=data.n, p=data.p)


def fit_ridge(data: DataSet, lambda_R: float, cache: RidgePathCache) -> FitResult:
    """Closed-form ridge solution of (X'X/n + lam I) b = X'y/n via the cache."""
    if not lambda_R > 0:
        raise ValueError("lambda_R must be positive")
    if cache.n != data.n or cache.p != data.p:
        raise DimensionMismatch("ridge cache was built for a different design")
    s = cache.singular_values
    uty = cache.projected_response
    s2 = s**2
    coef = s / (s2 + lambda_R) * uty / np.sqrt(data.n)
    beta = cache.right_factors @ coef
    fitted = cache.left_factors @ (s2 / (s2 + lambda_R) * uty)
    return FitResult(lam=float(lambda_R), penalty_kind="L2", beta_hat=beta,
                     df_hat=float((s2 / (s2 + lambda_R)).sum()),
                     residual=data.y - fitted)
