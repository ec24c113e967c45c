import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from hypothesis.extra import numpy as hnp
from scipy import stats

from hede.errors import ConstantColumn, DimensionMismatch, NonFiniteInput, TooFewSamples
from hede.model import DataSet, GroundTruth, normalize_genotypes, sample_variance


def test_two_sample_column_maps_to_plus_minus_one():
    d = normalize_genotypes(np.array([[0], [2]]))
    np.testing.assert_allclose(d.X[:, 0], [-1.0, 1.0])


def test_constant_column_is_rejected():
    G = np.column_stack([[0, 1, 2, 1], [1, 1, 1, 1]])
    with pytest.raises(ConstantColumn) as exc:
        normalize_genotypes(G)
    assert exc.value.column == 1


def test_monomorphic_zero_column_is_rejected():
    with pytest.raises(ConstantColumn):
        normalize_genotypes(np.zeros((5, 1)))


def _normalize_by_hand(col):
    # straight-line re-evaluation, one entry at a time
    n = len(col)
    f = sum(col) / (2.0 * n)
    raw = [(g - 2 * f) / (2 * f * (1 - f)) ** 0.5 for g in col]
    sd = (sum(v * v for v in raw) / n) ** 0.5
    return [v / sd for v in raw]


def test_0121_column_matches_second_implementation():
    col = [0, 1, 2, 1]
    d = normalize_genotypes(np.array(col)[:, None])
    np.testing.assert_allclose(d.X[:, 0], _normalize_by_hand(col), rtol=0, atol=1e-14)
    # frequency is 0.5, so the binomial scale sqrt(0.5) is the sample sd
    np.testing.assert_allclose(d.X[:, 0], np.array([-1, 0, 1, 0]) / np.sqrt(0.5))


def test_non_genotype_values_rejected():
    with pytest.raises(ValueError):
        normalize_genotypes(np.array([[0.0], [3.0]]))


def test_missing_entries_are_mean_imputed():
    G = np.array([[0, 2], [2, np.nan], [1, 0], [np.nan, 1]], dtype=float)
    d = normalize_genotypes(G)
    assert d.X[3, 0] == 0.0 and d.X[1, 1] == 0.0
    assert np.all(np.isfinite(d.X))


@given(hnp.arrays(np.int8, st.tuples(st.integers(2, 40), st.integers(1, 8)),
                  elements=st.integers(0, 2)))
def test_normalized_columns_are_standardized(G):
    try:
        d = normalize_genotypes(G)
    except ConstantColumn:
        assert any(np.all(G[:, j] == G[0, j]) for j in range(G.shape[1]))
        return
    assert np.all(np.abs(d.X.mean(axis=0)) <= 1e-10)
    np.testing.assert_allclose(d.X.var(axis=0), 1.0, atol=1e-8)


def test_sample_variance_examples():
    assert sample_variance([1, 1, 1]) == 0.0
    assert sample_variance([0, 2]) == 2.0
    with pytest.raises(TooFewSamples):
        sample_variance([3.0])


def test_sample_variance_of_normal_draw_in_chi_square_band():
    # P(0.5 < s^2 < 1.7) for n = 100, computed from the chi-square law
    prob = stats.chi2.cdf(1.7 * 99, 99) - stats.chi2.cdf(0.5 * 99, 99)
    assert prob > 0.999
    y = np.random.default_rng(5).standard_normal(100)
    assert 0.5 < sample_variance(y) < 1.7


@given(hnp.arrays(float, st.integers(2, 50), elements=st.floats(-10, 10)),
       st.floats(-100, 100))
def test_sample_variance_translation_invariant(y, c):
    v = sample_variance(y)
    assume(v > 0.1)
    assert abs(sample_variance(y + c) - v) <= 1e-12 * v


def test_dataset_validation():
    with pytest.raises(DimensionMismatch):
        DataSet(y=np.zeros(3), X=np.zeros((4, 2)))
    with pytest.raises(TooFewSamples):
        DataSet(y=np.zeros(1), X=np.zeros((1, 2)))
    d = DataSet(y=np.zeros(4), X=np.zeros((4, 10)))
    assert (d.n, d.p, d.delta) == (4, 10, 2.5)


def test_ground_truth_heritability():
    t = GroundTruth(beta=np.array([1.0, 1.0]), sigma2=2.0, h2_true=0.5)
    assert t.heritability() == 0.5
    S = np.array([[1.0, 0.5], [0.5, 1.0]])
    assert t.heritability(S) == pytest.approx(3.0 / 5.0)


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_dataset_rejects_non_finite(bad):
    X = np.ones((4, 2)) * np.arange(4)[:, None]
    y = np.arange(4.0)
    with pytest.raises(NonFiniteInput):
        DataSet(y=np.where(y == 2, bad, y), X=X)
    X[1, 1] = bad
    with pytest.raises(NonFiniteInput):
        DataSet(y=y, X=X)
