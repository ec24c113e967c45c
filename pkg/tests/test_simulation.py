import numpy as np
import pytest

from hede.errors import NoNonzeros
from hede.model import GroundTruth
from hede.simulation import (SimConfig, simulate_dataset, simulate_genotypes,
                             simulate_signal, substream)


def test_symmetric_binomial_mean():
    G = simulate_genotypes(SimConfig(n=100_000, p=1, maf_low=0.5, maf_high=0.5, seed=1))
    assert abs(G.mean() - 1.0) < 0.01


def test_genotypes_deterministic():
    cfg = SimConfig(n=50, p=40, seed=123)
    assert np.array_equal(simulate_genotypes(cfg), simulate_genotypes(cfg))
    assert not np.array_equal(simulate_genotypes(cfg),
                              simulate_genotypes(SimConfig(n=50, p=40, seed=124)))


def test_columns_do_not_depend_on_width():
    # per-column substreams: the first columns are the same for any p
    a = simulate_genotypes(SimConfig(n=30, p=5, seed=9))
    b = simulate_genotypes(SimConfig(n=30, p=50, seed=9))
    assert np.array_equal(a, b[:, :5])


def test_binomial_column_variance():
    G, freq = simulate_genotypes(SimConfig(n=100_000, p=5, seed=2), return_freq=True)
    np.testing.assert_allclose(G.var(axis=0), 2 * freq * (1 - freq), rtol=0.05)
    assert np.all((freq >= 0.01) & (freq <= 0.5))


def test_dense_signal_norm():
    norms = [np.sum(simulate_signal(SimConfig(p=1000, kappa=1.0, h2=0.5, seed=s)).beta**2)
             for s in range(50)]
    assert abs(np.mean(norms) - 1.0) < 0.1


def test_sparse_signal_support():
    beta = simulate_signal(SimConfig(p=5000, kappa=0.1, seed=3)).beta
    assert abs(np.count_nonzero(beta) / 5000 - 0.1) < 0.015


def test_zero_heritability_gives_zero_signal():
    t = simulate_signal(SimConfig(h2=0.0, seed=4))
    assert np.all(t.beta == 0) and t.h2_true == 0


def test_mixture_variance_identity():
    s = 1.7
    assert (s / np.sqrt(10))**2 + 9 * s**2 / 10 == pytest.approx(s**2, rel=1e-15)


def test_stratified_signal():
    cfg = SimConfig(p=4000, h2=0.5, seed=5, signal_kind="stratified_mixture", n_strata=4)
    beta = simulate_signal(cfg).beta
    frac = [np.count_nonzero(beta[i * 1000:(i + 1) * 1000]) / 1000 for i in range(4)]
    np.testing.assert_allclose(frac, [0.05, 0.5, 0.05, 0.5], atol=0.04)
    assert abs(np.sum(beta**2) - 1.0) < 0.15


def test_empty_support_error():
    with pytest.raises(NoNonzeros):
        simulate_signal(SimConfig(p=10, kappa=0.01, seed=0))
    t = simulate_signal(SimConfig(p=10, kappa=0.01, seed=0, resample_empty=True))
    assert np.any(t.beta)


def test_noiseless_response():
    d, t = simulate_dataset(SimConfig(n=50, p=80, kappa=0.5, noise_sigma2=0.0, seed=6))
    np.testing.assert_array_equal(d.y, d.X @ t.beta)
    assert t.h2_realized == 1.0


def test_null_signal_realized_zero():
    cfg = SimConfig(n=50, p=80, seed=7)
    d, t = simulate_dataset(cfg, GroundTruth(beta=np.zeros(80), sigma2=1.0, h2_true=0.0))
    assert t.h2_realized == 0.0 and t.h2_true == 0.0


def test_dataset_deterministic_and_normalized():
    cfg = SimConfig(n=200, p=100, kappa=0.2, seed=8)
    (d1, t1), (d2, t2) = simulate_dataset(cfg), simulate_dataset(cfg)
    assert np.array_equal(d1.X, d2.X) and np.array_equal(d1.y, d2.y)
    assert np.array_equal(t1.beta, t2.beta)
    assert np.all(np.abs(d1.X.mean(axis=0)) < 1e-10)
    np.testing.assert_allclose(d1.X.var(axis=0), 1.0, atol=1e-8)


def test_realized_heritability_concentrates():
    vals = [simulate_dataset(SimConfig(n=500, p=1000, kappa=0.1, h2=0.5, seed=s))[1].h2_realized
            for s in range(50)]
    assert abs(np.mean(vals) - 0.5) < 0.02


def test_correlated_design_population_heritability():
    _, t = simulate_dataset(SimConfig(n=100, p=40, kappa=0.5, seed=9, ar_rho=0.5,
                                      block_size=10, design="gaussian"))
    S = t.Sigma
    assert S is not None and S[0, 1] == 0.5
    v = t.beta @ S @ t.beta
    assert t.h2_true == pytest.approx(v / (v + 1.0))


def test_substreams_are_distinct():
    a = substream(1, 2, 3).random(4)
    assert np.array_equal(a, substream(1, 2, 3).random(4))
    assert not np.array_equal(a, substream(1, 2, 4).random(4))
    assert not np.array_equal(a, substream(1, 3, 3).random(4))


def test_config_validation():
    for bad in (dict(h2=1.0), dict(kappa=0.0), dict(maf_low=0.001),
                dict(signal_kind="x"), dict(ar_rho=0.3)):
        with pytest.raises(ValueError):
            SimConfig(**bad)
