"""Grid construction, ensemble weighting and the end-to-end heritability
estimator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .debias import DF_FLOOR, debias_fit
from .errors import DegenerateResponse, EmptyGrid
from .model import (DataSet, EnsembleChoice, FitResult, HeritabilityEstimate,
                    TauEstimates, sample_variance)
from .solvers import (LassoConfig, RidgePathCache, build_ridge_cache,
                      fit_ridge, lasso_lambda_max, lasso_path)
from .tau import tau_matrices

ALPHA_EPS = 1e-12
# lambda grids extend at most this many log-steps below their anchor
MAX_GRID_STEPS = 400


@dataclass(frozen=True)
class GridConfig:
    t_min: float = 0.01
    t_max: float = 0.5
    log_step: float = 0.1
    lambda_seed_range: Optional[Tuple[float, float]] = None
    lasso: LassoConfig = field(default_factory=LassoConfig)

    def __post_init__(self):
        if not 0 < self.t_min < self.t_max < 1:
            raise ValueError("need 0 < t_min < t_max < 1")
        if not self.log_step > 0:
            raise ValueError("log_step must be positive")
        if self.lambda_seed_range is not None:
            lo, hi = self.lambda_seed_range
            if not 0 < lo <= hi:
                raise ValueError("lambda_seed_range must be 0 < low <= high")


@dataclass
class LambdaGrid:
    """Retained tuning parameters (ascending) with their fits, plus the
    degrees of freedom of every candidate that was tried."""

    lambda_L: np.ndarray
    lambda_R: np.ndarray
    lasso_fits: List[FitResult]
    ridge_fits: List[FitResult]
    candidates_L: np.ndarray
    candidates_df_L: np.ndarray
    candidates_R: np.ndarray
    candidates_df_R: np.ndarray

    @property
    def n_dropped_L(self):
        return len(self.candidates_L) - len(self.lambda_L)

    @property
    def n_dropped_R(self):
        return len(self.candidates_R) - len(self.lambda_R)


def _log_grid(high, low, step):
    k = int(np.floor(np.log(high / low) / step + 1e-9))
    return high * np.exp(-step * np.arange(min(k, MAX_GRID_STEPS) + 1))


def ridge_lambda_range(cache: RidgePathCache, t_min, t_max):
    """Ridge penalties at which df/n equals t_min and t_max.

    Returns ``(low, high)``; ``low`` falls back to ``high * exp(-40)`` when
    the design cannot reach ``t_max`` and ``None`` when it cannot reach
    ``t_min`` either.
    """
    n = cache.n
    s2 = cache.singular_values**2
    rank_frac = np.count_nonzero(s2 > s2.max() * 1e-12) / n if s2.size and s2.max() > 0 else 0.0
    if rank_frac <= t_min:
        return None

    def gap(loglam, t):
        return cache.df(np.exp(loglam)) / n - t

    hi_bound = np.log(s2.max()) + np.log(rank_frac / t_min) + 5.0
    lo_bound = np.log(s2.max()) - 60.0
    high = np.exp(brentq(gap, lo_bound, hi_bound, args=(t_min,), xtol=1e-12))
    if gap(lo_bound, t_max) > 0:
        low = np.exp(brentq(gap, lo_bound, np.log(high), args=(t_max,), xtol=1e-12))
    else:
        low = high * np.exp(-40.0)
    return low, high


def build_grid(data: DataSet, cfg: GridConfig = GridConfig(),
               cache: Optional[RidgePathCache] = None) -> LambdaGrid:
    """Log-spaced lambda grids filtered so that df/n lies in [t_min, t_max].

    The two filters act per margin: every retained lasso penalty pairs with
    every retained ridge penalty.
    """
    n = data.n
    if cache is None:
        cache = build_ridge_cache(data)
    df_lo, df_hi = cfg.t_min * n, cfg.t_max * n

    def keep(df):
        return (df >= df_lo) & (df <= df_hi) & (n - df >= DF_FLOOR * n)

    # lasso margin: walk down from the null threshold with warm starts
    if cfg.lambda_seed_range is not None:
        low, high = cfg.lambda_seed_range
        cand_L = _log_grid(high, low, cfg.log_step)
    else:
        lam_max = lasso_lambda_max(data)
        if lam_max > 0:
            cand_L = _log_grid(lam_max, lam_max * 1e-6, cfg.log_step)
        else:
            cand_L = np.array([])
    fits_L = lasso_path(data, cand_L, cfg.lasso, stop_df=int(np.floor(df_hi))) if cand_L.size else []
    cand_L = cand_L[:len(fits_L)]
    df_L = np.array([f.df_hat for f in fits_L])
    kept_L = [f for f in fits_L if keep(f.df_hat)]

    if cfg.lambda_seed_range is not None:
        low, high = cfg.lambda_seed_range
        cand_R = _log_grid(high, low, cfg.log_step)
    else:
        rng = ridge_lambda_range(cache, cfg.t_min, cfg.t_max)
        cand_R = np.array([]) if rng is None else _log_grid(rng[1], rng[0], cfg.log_step)
    df_R = np.asarray(cache.df(cand_R)) if cand_R.size else np.array([])
    kept_R = [fit_ridge(data, lam, cache) for lam, df in zip(cand_R, df_R) if keep(df)]

    def frac_range(df):
        return (float(df.min() / n), float(df.max() / n)) if df.size else None

    if not kept_L or not kept_R:
        raise EmptyGrid(
            f"no admissible {'lasso' if not kept_L else 'ridge'} penalty with "
            f"df/n in [{cfg.t_min}, {cfg.t_max}]; lasso df/n range "
            f"{frac_range(df_L)}, ridge df/n range {frac_range(df_R)}",
            df_range_lasso=frac_range(df_L), df_range_ridge=frac_range(df_R))

    kept_L = kept_L[::-1]
    kept_R = kept_R[::-1]
    return LambdaGrid(lambda_L=np.array([f.lam for f in kept_L]),
                      lambda_R=np.array([f.lam for f in kept_R]),
                      lasso_fits=kept_L, ridge_fits=kept_R,
                      candidates_L=cand_L, candidates_df_L=df_L,
                      candidates_R=cand_R, candidates_df_R=df_R)


def select_alpha(taus: TauEstimates) -> float:
    """Ensemble weight on the debiased lasso minimizing the ensemble variance,
    clipped to [0, 1]. A vanishing denominator selects the pure ridge."""
    return float(_alpha(taus.tau_L2, taus.tau_R2, taus.tau_LR))


def _alpha(tau_L2, tau_R2, tau_LR):
    denom = tau_R2 - 2.0 * tau_LR + tau_L2
    num = tau_R2 - tau_LR
    safe = np.where(denom < ALPHA_EPS, 1.0, denom)
    alpha = np.clip(num / safe, 0.0, 1.0)
    return np.where(denom < ALPHA_EPS, 0.0, alpha)


def ensemble_tau(taus: TauEstimates, alpha: float) -> float:
    return float(_ensemble_tau(taus.tau_L2, taus.tau_R2, taus.tau_LR, alpha))


def _ensemble_tau(tau_L2, tau_R2, tau_LR, alpha):
    return (alpha**2 * tau_L2 + 2.0 * alpha * (1.0 - alpha) * tau_LR
            + (1.0 - alpha)**2 * tau_R2)


def run_hede(data: DataSet, cfg: GridConfig = GridConfig(),
             grid: Optional[LambdaGrid] = None) -> HeritabilityEstimate:
    """Heritability estimate from the variance-minimizing lasso/ridge ensemble.

    For every admissible pair the debiased lasso and ridge are combined with
    the optimal weight; the pair with the smallest ensemble variance wins
    (ties go to the smaller lasso, then ridge, penalty). The estimate is
    ``(||b_C||^2 - p tau_C^2) / Var(y)`` clipped to [0, 1].
    """
    var_y = sample_variance(data.y)
    # variance below the rounding resolution of y counts as constant
    resolution = 64 * np.finfo(float).eps * float(np.max(np.abs(data.y)))
    if not np.isfinite(var_y) or var_y <= resolution**2:
        raise DegenerateResponse("response has zero or non-finite variance")
    if grid is None:
        grid = build_grid(data, cfg)
    n, p = data.n, data.p

    res_L = np.column_stack([f.residual for f in grid.lasso_fits])
    res_R = np.column_stack([f.residual for f in grid.ridge_fits])
    df_L = np.array([f.df_hat for f in grid.lasso_fits])
    df_R = np.array([f.df_hat for f in grid.ridge_fits])
    tL, tR, tLR = tau_matrices(res_L, df_L, res_R, df_R, n)
    tL_m = np.broadcast_to(tL[:, None], tLR.shape)
    tR_m = np.broadcast_to(tR[None, :], tLR.shape)
    alpha = _alpha(tL_m, tR_m, tLR)
    tau_C2 = _ensemble_tau(tL_m, tR_m, tLR, alpha)

    # row-major argmin on ascending grids gives the tie-break order
    i, j = np.unravel_index(int(np.argmin(tau_C2)), tau_C2.shape)
    a = float(alpha[i, j])
    fit_L = debias_fit(data, grid.lasso_fits[i])
    fit_R = debias_fit(data, grid.ridge_fits[j])
    beta_C = a * fit_L.beta_debiased + (1.0 - a) * fit_R.beta_debiased
    tau_min = float(tau_C2[i, j])
    raw = float(beta_C @ beta_C - p * tau_min)
    h2 = float(min(1.0, max(0.0, raw / var_y)))
    if not np.isfinite(h2):
        h2 = 0.0 if not raw > 0 else 1.0
    choice = EnsembleChoice(alpha_L=a, lambda_L=float(grid.lambda_L[i]),
                            lambda_R=float(grid.lambda_R[j]),
                            tau_C2_min=tau_min, beta_C_debiased=beta_C,
                            df_L=float(df_L[i]), df_R=float(df_R[j]))
    diagnostics = {
        "n_lambda_L": len(grid.lambda_L),
        "n_lambda_R": len(grid.lambda_R),
        "n_dropped_L": grid.n_dropped_L,
        "n_dropped_R": grid.n_dropped_R,
        "df_frac_L": [float(d / n) for d in df_L],
        "df_frac_R": [float(d / n) for d in df_R],
    }
    return HeritabilityEstimate(h2=h2, raw_numerator=raw, sample_var_y=var_y,
                                choice=choice, diagnostics=diagnostics)
