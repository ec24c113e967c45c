"""Degrees-of-freedom corrected debiasing."""

from dataclasses import replace

import numpy as np

from .errors import DegenerateDf
from .model import DataSet, FitResult

# n - df must stay above this fraction of n
DF_FLOOR = 0.005


def check_df(n, df):
    if not (n - df) >= DF_FLOOR * n:
        raise DegenerateDf(n, df)
    return n - df


def debias_fit(data: DataSet, fit: FitResult) -> FitResult:
    """Return ``fit`` with ``beta_debiased = b + X'(y - X b) / (n - df)``.

    ``df`` is the support size for lasso fits and the ridge trace for ridge
    fits, both already stored in ``fit.df_hat``.
    """
    denom = check_df(data.n, fit.df_hat)
    correction = data.X.T @ fit.residual / denom
    return replace(fit, beta_debiased=fit.beta_hat + correction)
