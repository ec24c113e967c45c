"""Variance and covariance estimates of the debiased lasso and ridge."""

import numpy as np

from .debias import check_df
from .model import FitResult, TauEstimates


def estimate_taus(fit_L: FitResult, fit_R: FitResult, n: int) -> TauEstimates:
    """Residual-based estimates of (tau_L^2, tau_R^2, tau_LR).

    The cross term is normalized by the product ``(n - df_L)(n - df_R)``.
    """
    dL = check_df(n, fit_L.df_hat)
    dR = check_df(n, fit_R.df_hat)
    rL, rR = fit_L.residual, fit_R.residual
    return TauEstimates(tau_L2=float(rL @ rL) / dL**2,
                        tau_R2=float(rR @ rR) / dR**2,
                        tau_LR=float(rL @ rR) / (dL * dR))


def tau_matrices(res_L, df_L, res_R, df_R, n):
    """Vectorized taus for every (lasso, ridge) pair.

    ``res_L`` is n x m_L (one residual per column), ``res_R`` n x m_R.
    Returns ``tau_L2`` (m_L,), ``tau_R2`` (m_R,) and ``tau_LR`` (m_L, m_R).
    """
    dL = n - np.asarray(df_L, dtype=float)
    dR = n - np.asarray(df_R, dtype=float)
    tau_L2 = np.einsum("ij,ij->j", res_L, res_L) / dL**2
    tau_R2 = np.einsum("ij,ij->j", res_R, res_R) / dR**2
    tau_LR = (res_L.T @ res_R) / np.outer(dL, dR)
    return tau_L2, tau_R2, tau_LR
