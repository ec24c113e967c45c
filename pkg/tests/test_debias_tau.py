import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import orthonormal_design
from hede.debias import debias_fit
from hede.errors import DegenerateDf
from hede.model import DataSet, FitResult
from hede.solvers import build_ridge_cache, fit_lasso, fit_ridge, lasso_lambda_max
from hede.tau import estimate_taus, tau_matrices


def _data(seed, n, p):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    return DataSet(y=X[:, 0] + rng.standard_normal(n), X=X)


def test_zero_fit_debiases_to_marginal_regression():
    d = _data(0, 30, 50)
    fit = debias_fit(d, fit_lasso(d, 2 * lasso_lambda_max(d)))
    assert fit.df_hat == 0
    np.testing.assert_allclose(fit.beta_debiased, d.X.T @ d.y / d.n, rtol=1e-14)


def test_isotropic_ridge_debiasing_matches_direct_formula(rng):
    n, p, lam = 50, 20, 0.7
    X = orthonormal_design(n, p, rng)
    y = rng.standard_normal(n)
    d = DataSet(y=y, X=X)
    fit = debias_fit(d, fit_ridge(d, lam, build_ridge_cache(d)))
    # second implementation: dense normal equations, explicit trace
    A = X.T @ X / n + lam * np.eye(p)
    b = np.linalg.solve(A, X.T @ y / n)
    df = np.trace(np.linalg.solve(A, X.T @ X / n))
    direct = b + X.T @ (y - X @ b) / (n - df)
    np.testing.assert_allclose(fit.beta_debiased, direct, rtol=1e-12)
    # and the isotropic closed form
    xty = X.T @ y
    closed = xty / (n * (1 + lam)) + xty * lam / ((1 + lam) * (n - p / (1 + lam)))
    np.testing.assert_allclose(fit.beta_debiased, closed, rtol=1e-12)


def test_small_lasso_by_hand():
    d = _data(3, 8, 4)
    lams = lasso_lambda_max(d) * np.linspace(0.99, 0.01, 99)
    fit = next(f for f in (fit_lasso(d, l) for l in lams) if f.df_hat == 2)
    out = debias_fit(d, fit)
    r = [d.y[i] - sum(d.X[i, j] * fit.beta_hat[j] for j in range(4)) for i in range(8)]
    by_hand = [fit.beta_hat[j] + sum(d.X[i, j] * r[i] for i in range(8)) / 6.0
               for j in range(4)]
    np.testing.assert_allclose(out.beta_debiased, by_hand, rtol=1e-12)


@given(st.integers(0, 10_000), st.floats(0.05, 0.9), st.booleans())
def test_debiasing_is_invertible(seed, frac, ridge):
    d = _data(seed, 25, 40)
    if ridge:
        fit = fit_ridge(d, frac * 5, build_ridge_cache(d))
    else:
        fit = fit_lasso(d, frac * lasso_lambda_max(d))
    try:
        out = debias_fit(d, fit)
    except DegenerateDf:
        assert d.n - fit.df_hat < 0.005 * d.n
        return
    lhs = (out.beta_debiased - out.beta_hat) * (d.n - fit.df_hat)
    rhs = d.X.T @ fit.residual
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * np.abs(rhs).max())


def test_large_ridge_penalty_limit():
    d = _data(1, 30, 20)
    out = debias_fit(d, fit_ridge(d, 1e8, build_ridge_cache(d)))
    np.testing.assert_allclose(out.beta_debiased, d.X.T @ d.y / d.n, atol=1e-4)


def test_degenerate_df_raises():
    d = _data(0, 10, 20)
    fit = FitResult(lam=1.0, penalty_kind="L1", beta_hat=np.zeros(20), df_hat=10.0,
                    residual=d.y)
    with pytest.raises(DegenerateDf):
        debias_fit(d, fit)
    with pytest.raises(DegenerateDf):
        debias_fit(d, FitResult(lam=1.0, penalty_kind="L1", beta_hat=np.zeros(20),
                                df_hat=9.99, residual=d.y))


# tau estimates

def test_identical_residuals_saturate_cauchy_schwarz():
    d = _data(2, 40, 30)
    fit = fit_lasso(d, 0.3 * lasso_lambda_max(d))
    t = estimate_taus(fit, fit, d.n)
    assert t.tau_LR**2 == pytest.approx(t.tau_L2 * t.tau_R2, rel=1e-12)


def test_interpolating_fit_gives_zero_taus():
    d = _data(4, 10, 40)
    ridge = fit_ridge(d, 1e-13, build_ridge_cache(d))
    assert np.abs(ridge.residual).max() < 1e-9
    zero = FitResult(lam=1.0, penalty_kind="L1", beta_hat=np.zeros(40), df_hat=0.0,
                     residual=np.zeros(10))
    # the interpolating ridge has df = n, so pair two zero-residual fits below the floor
    t = estimate_taus(zero, zero, 10)
    assert (t.tau_L2, t.tau_R2, t.tau_LR) == (0.0, 0.0, 0.0)


def test_tau_formulas_and_matrix_version_agree():
    d = _data(6, 60, 90)
    cache = build_ridge_cache(d)
    fl = [fit_lasso(d, f * lasso_lambda_max(d)) for f in (0.8, 0.5, 0.3)]
    fr = [fit_ridge(d, l, cache) for l in (0.3, 1.0, 4.0, 9.0)]
    tL, tR, tLR = tau_matrices(np.column_stack([f.residual for f in fl]),
                               [f.df_hat for f in fl],
                               np.column_stack([f.residual for f in fr]),
                               [f.df_hat for f in fr], d.n)
    for i, a in enumerate(fl):
        for j, b in enumerate(fr):
            t = estimate_taus(a, b, d.n)
            n = d.n
            assert t.tau_L2 == pytest.approx(a.residual @ a.residual / (n - a.df_hat)**2, rel=1e-13)
            assert t.tau_LR == pytest.approx(
                a.residual @ b.residual / ((n - a.df_hat) * (n - b.df_hat)), rel=1e-13)
            assert tL[i] == pytest.approx(t.tau_L2, rel=1e-12)
            assert tR[j] == pytest.approx(t.tau_R2, rel=1e-12)
            assert tLR[i, j] == pytest.approx(t.tau_LR, rel=1e-12)


@given(st.integers(0, 10_000), st.floats(0.05, 0.95), st.floats(0.01, 20))
def test_cauchy_schwarz_and_nonnegativity(seed, frac, lam_R):
    d = _data(seed, 30, 45)
    fl = fit_lasso(d, frac * lasso_lambda_max(d))
    fr = fit_ridge(d, lam_R, build_ridge_cache(d))
    try:
        t = estimate_taus(fl, fr, d.n)
    except DegenerateDf:
        return
    assert t.tau_L2 >= 0 and t.tau_R2 >= 0
    assert t.tau_LR**2 <= t.tau_L2 * t.tau_R2 + 1e-10
