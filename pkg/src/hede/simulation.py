"""Synthetic GWAS-style data: binomial genotypes, sparse signals, optional
block AR(r) correlation.

Randomness comes from counter-based Philox streams keyed by
``(seed, stream, index)`` so that every column of G, every signal
coordinate and the noise vector can be regenerated independently of the
order in which they are produced.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import NoNonzeros
from .model import DataSet, GroundTruth, normalize_genotypes

ZERO_INFLATED_NORMAL = "zero_inflated_normal"
STRATIFIED_MIXTURE = "stratified_mixture"

_STREAM_GENOTYPE = 1
_STREAM_SIGNAL = 2
_STREAM_NOISE = 3
_STREAM_LOCATIONS = 4
_STREAM_GAUSS = 5


@dataclass(frozen=True)
class SimConfig:
    n: int = 500
    p: int = 1000
    h2: float = 0.5
    kappa: float = 1.0
    maf_low: float = 0.01
    maf_high: float = 0.5
    noise_sigma2: float = 1.0
    seed: int = 0
    signal_kind: str = ZERO_INFLATED_NORMAL
    # stratified mixture: number of contiguous strata and their concentrations
    n_strata: int = 1
    c_low: float = 0.05
    c_high: float = 0.5
    # correlated design: AR(ar_rho) blocks of size block_size (0 = independent)
    ar_rho: float = 0.0
    block_size: int = 0
    design: str = "genotype"  # or "gaussian"
    resample_empty: bool = False

    def __post_init__(self):
        if self.n < 2 or self.p < 1:
            raise ValueError("need n >= 2 and p >= 1")
        if not 0 <= self.h2 < 1:
            raise ValueError("h2 must lie in [0, 1)")
        if not 0 < self.kappa <= 1:
            raise ValueError("kappa must lie in (0, 1]")
        if not 0.005 <= self.maf_low <= self.maf_high <= 0.5:
            raise ValueError("maf range must satisfy 0.005 <= low <= high <= 0.5")
        if self.noise_sigma2 < 0:
            raise ValueError("noise_sigma2 must be >= 0")
        if self.signal_kind not in (ZERO_INFLATED_NORMAL, STRATIFIED_MIXTURE):
            raise ValueError(f"unknown signal_kind {self.signal_kind!r}")
        if self.design not in ("genotype", "gaussian"):
            raise ValueError(f"unknown design {self.design!r}")
        if self.ar_rho != 0 and self.block_size < 1:
            raise ValueError("ar_rho requires block_size >= 1")
        if not -1 < self.ar_rho < 1:
            raise ValueError("ar_rho must lie in (-1, 1)")

    @property
    def maf_range(self) -> Tuple[float, float]:
        return (self.maf_low, self.maf_high)


def substream(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Independent Philox generator for ``(seed, stream, index)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(index)))
    return np.random.Generator(np.random.Philox(ss))


def simulate_genotypes(cfg: SimConfig, return_freq: bool = False):
    """Draw G[i, j] ~ Binomial(2, pi_j) with pi_j ~ Uniform(maf_range).

    A monomorphic column is redrawn from the same substream, so the output
    always normalizes.
    """
    G = np.empty((cfg.n, cfg.p), dtype=np.int8)
    freq = np.empty(cfg.p)
    for j in range(cfg.p):
        rng = substream(cfg.seed, _STREAM_GENOTYPE, j)
        pi = rng.uniform(cfg.maf_low, cfg.maf_high)
        col = rng.binomial(2, pi, size=cfg.n)
        while np.all(col == col[0]):
            col = rng.binomial(2, pi, size=cfg.n)
        G[:, j] = col
        freq[j] = pi
    return (G, freq) if return_freq else G


def _signal_scale(cfg: SimConfig) -> float:
    # expected ||beta||^2; gives population heritability h2 at unit noise
    return cfg.h2 / (1.0 - cfg.h2)


def simulate_signal(cfg: SimConfig, Sigma=None) -> GroundTruth:
    """Draw the coefficient vector.

    ``zero_inflated_normal``: each coordinate is nonzero with probability
    kappa, nonzero values N(0, h2 / (p kappa (1 - h2))), which targets
    heritability h2 when ``noise_sigma2 == 1``.

    ``stratified_mixture``: columns split into ``n_strata`` contiguous strata
    with concentrations alternating c_low, c_high, ...; nonzero values come
    from the equal mixture N(+-s/sqrt(10), 9 s^2/10) with s^2 the total
    signal variance divided by the number of nonzeros.
    """
    p = cfg.p
    beta = np.zeros(p)
    if cfg.h2 == 0:
        return GroundTruth(beta=beta, sigma2=cfg.noise_sigma2, h2_true=0.0, Sigma=Sigma)
    if cfg.signal_kind == ZERO_INFLATED_NORMAL:
        if round(cfg.kappa * p) == 0 and not cfg.resample_empty:
            raise NoNonzeros(f"kappa * p = {cfg.kappa * p:.3g} rounds to zero")
        sd = np.sqrt(_signal_scale(cfg) / (p * cfg.kappa))
        attempt = 0
        while True:
            for j in range(p):
                rng = substream(cfg.seed, _STREAM_SIGNAL, j + attempt * p)
                if rng.random() < cfg.kappa:
                    beta[j] = rng.normal(0.0, sd)
            if np.any(beta) or not cfg.resample_empty:
                break
            attempt += 1
    else:
        beta = _stratified_mixture(cfg)
    truth = GroundTruth(beta=beta, sigma2=cfg.noise_sigma2, h2_true=0.0, Sigma=Sigma)
    return GroundTruth(beta=beta, sigma2=cfg.noise_sigma2,
                       h2_true=truth.heritability(), Sigma=Sigma)


def _stratified_mixture(cfg: SimConfig) -> np.ndarray:
    p = cfg.p
    bounds = np.linspace(0, p, cfg.n_strata + 1).round().astype(int)
    attempt = 0
    while True:
        rng = substream(cfg.seed, _STREAM_LOCATIONS, attempt)
        mask = np.zeros(p, dtype=bool)
        for s in range(cfg.n_strata):
            conc = cfg.c_low if s % 2 == 0 else cfg.c_high
            lo, hi = bounds[s], bounds[s + 1]
            mask[lo:hi] = rng.random(hi - lo) < conc
        K = int(mask.sum())
        if K > 0:
            break
        if not cfg.resample_empty:
            raise NoNonzeros("stratified draw produced no nonzero coordinates")
        attempt += 1
    s2 = _signal_scale(cfg) / K
    vals = substream(cfg.seed, _STREAM_SIGNAL, 0)
    signs = np.where(vals.random(K) < 0.5, -1.0, 1.0)
    beta = np.zeros(p)
    beta[mask] = signs * np.sqrt(s2 / 10.0) + vals.normal(0.0, np.sqrt(0.9 * s2), size=K)
    return beta


def ar_block_covariance(size: int, rho: float) -> np.ndarray:
    idx = np.arange(size)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def block_ar_sqrt(p: int, block_size: int, rho: float):
    """Symmetric square roots of the AR(rho) blocks covering p columns."""
    out = []
    for start in range(0, p, block_size):
        size = min(block_size, p - start)
        w, V = np.linalg.eigh(ar_block_covariance(size, rho))
        out.append((start, start + size, (V * np.sqrt(w)) @ V.T))
    return out


def block_ar_covariance(p: int, block_size: int, rho: float) -> np.ndarray:
    Sigma = np.zeros((p, p))
    for start in range(0, p, block_size):
        size = min(block_size, p - start)
        Sigma[start:start + size, start:start + size] = ar_block_covariance(size, rho)
    return Sigma


def simulate_design(cfg: SimConfig) -> np.ndarray:
    if cfg.design == "gaussian":
        Z = np.empty((cfg.n, cfg.p))
        for j in range(cfg.p):
            Z[:, j] = substream(cfg.seed, _STREAM_GAUSS, j).standard_normal(cfg.n)
    else:
        Z = normalize_genotypes(simulate_genotypes(cfg)).X.copy()
    if cfg.ar_rho != 0:
        for lo, hi, root in block_ar_sqrt(cfg.p, cfg.block_size, cfg.ar_rho):
            Z[:, lo:hi] = Z[:, lo:hi] @ root
    return Z


def simulate_dataset(cfg: SimConfig, truth: Optional[GroundTruth] = None):
    """Draw ``y = X beta + eps`` and return ``(DataSet, GroundTruth)``.

    The returned truth carries both the population heritability
    ``h2_true`` (w.r.t. the design covariance) and ``h2_realized``, which
    uses the empirical covariance X'X/n of the drawn design.
    """
    X = simulate_design(cfg)
    Sigma = None
    if cfg.ar_rho != 0:
        Sigma = block_ar_covariance(cfg.p, cfg.block_size, cfg.ar_rho)
    if truth is None:
        truth = simulate_signal(cfg, Sigma=Sigma)
    beta = np.asarray(truth.beta, dtype=float)
    signal = X @ beta
    eps = np.sqrt(cfg.noise_sigma2) * substream(cfg.seed, _STREAM_NOISE).standard_normal(cfg.n)
    y = signal + eps
    emp = float(signal @ signal) / cfg.n
    total = emp + truth.sigma2
    realized = 0.0 if total == 0 else emp / total
    truth = GroundTruth(beta=beta, sigma2=truth.sigma2,
                        h2_true=truth.heritability(Sigma if truth.Sigma is None else None),
                        Sigma=truth.Sigma if truth.Sigma is not None else Sigma,
                        h2_realized=realized)
    return DataSet(y=y, X=X), truth
