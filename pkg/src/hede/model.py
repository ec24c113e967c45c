"""Shared data containers and genotype preprocessing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConstantColumn, DimensionMismatch, NonFiniteInput, TooFewSamples


@dataclass(frozen=True)
class DataSet:
    """Response vector ``y`` and design ``X`` (rows are samples)."""

    y: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if y.ndim != 1 or X.ndim != 2:
            raise DimensionMismatch("y must be a vector and X a matrix")
        if X.shape[0] != y.shape[0]:
            raise DimensionMismatch(
                f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if X.shape[0] < 2:
            raise TooFewSamples("need at least two samples")
        if X.shape[1] < 1:
            raise DimensionMismatch("X needs at least one column")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise NonFiniteInput("y and X must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def delta(self) -> float:
        return self.p / self.n

    def with_response(self, y) -> "DataSet":
        return DataSet(y=y, X=self.X)


@dataclass(frozen=True)
class GroundTruth:
    """Simulation truth. ``h2_true`` is the population target; ``h2_realized``
    uses the empirical covariance of the drawn design."""

    beta: np.ndarray
    sigma2: float
    h2_true: float
    Sigma: Optional[np.ndarray] = None
    h2_realized: Optional[float] = None

    def signal_variance(self, Sigma=None) -> float:
        S = self.Sigma if Sigma is None else Sigma
        if S is None:
            return float(self.beta @ self.beta)
        return float(self.beta @ S @ self.beta)

    def heritability(self, Sigma=None) -> float:
        """beta' S beta / (beta' S beta + sigma2), S = identity if absent."""
        v = self.signal_variance(Sigma)
        total = v + self.sigma2
        return 0.0 if total == 0 else v / total


@dataclass(frozen=True)
class FitResult:
    lam: float
    penalty_kind: str  # "L1" or "L2"
    beta_hat: np.ndarray
    df_hat: float
    residual: np.ndarray
    beta_debiased: Optional[np.ndarray] = None
    n_iter: int = 0
    converged: bool = True


@dataclass(frozen=True)
class TauEstimates:
    tau_L2: float
    tau_R2: float
    tau_LR: float


@dataclass(frozen=True)
class EnsembleChoice:
    alpha_L: float
    lambda_L: float
    lambda_R: float
    tau_C2_min: float
    beta_C_debiased: np.ndarray
    df_L: float = float("nan")
    df_R: float = float("nan")


@dataclass(frozen=True)
class HeritabilityEstimate:
    h2: float
    raw_numerator: float
    sample_var_y: float
    choice: EnsembleChoice
    diagnostics: dict = field(default_factory=dict)


def sample_variance(y) -> float:
    """Unbiased (n - 1) sample variance."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size < 2:
        raise TooFewSamples(f"sample variance needs n >= 2, got {y.size}")
    return float(np.var(y, ddof=1))


def normalize_genotypes(G, y=None) -> DataSet:
    """Center and scale a 0/1/2 minor-allele count matrix.

    Each column is mapped to ``(G - 2 f) / sqrt(2 f (1 - f))`` with
    ``f = sum(G[:, j]) / (2 n)`` the sample allele frequency, then rescaled to
    unit (1/n) sample variance so that ``diag(X'X / n) = 1``. Missing entries
    (NaN) are left out of ``f`` and set to 0 after centering, i.e. mean
    imputed.

    Parameters
    ----------
    G : array, shape (n, p)
        Genotype counts in {0, 1, 2}, NaN for missing.
    y : array, shape (n,), optional
        Response; zeros if omitted.

    Raises
    ------
    ConstantColumn
        If any column has zero variance.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2:
        raise DimensionMismatch("G must be a 2-D matrix")
    missing = np.isnan(G)
    if not np.all(np.isin(G[~missing], (0.0, 1.0, 2.0))):
        raise ValueError("genotype entries must be 0, 1 or 2")
    n = G.shape[0]
    if missing.any():
        observed = (~missing).sum(axis=0)
        if np.any(observed == 0):
            raise ConstantColumn(int(np.flatnonzero(observed == 0)[0]))
        freq = np.where(missing, 0.0, G).sum(axis=0) / (2.0 * observed)
        centered = np.where(missing, 0.0, G - 2.0 * freq)
    else:
        freq = G.sum(axis=0) / (2.0 * n)
        centered = G - 2.0 * freq
    col_var = np.mean(centered**2, axis=0)
    bad = np.flatnonzero((col_var <= 0) | (freq <= 0) | (freq >= 1))
    if bad.size:
        raise ConstantColumn(int(bad[0]))
    X = centered / np.sqrt(2.0 * freq * (1.0 - freq))
    X = X / np.sqrt(np.mean(X**2, axis=0))
    if y is None:
        y = np.zeros(n)
    return DataSet(y=y, X=X)
