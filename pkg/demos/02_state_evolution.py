"""What the fixed-point system predicts, and how a finite sample compares.

For a Gaussian design the debiased lasso and ridge behave, coordinate by
coordinate, like the truth plus Gaussian noise with variance tau^2. The
fixed-point solver gives tau^2, the correlation between the two noises and
the degrees of freedom; here we check them against repeated fits.
"""

import numpy as np

from hede import (DataSet, build_ridge_cache, estimate_taus, fit_lasso, fit_ridge,
                  solve_joint_fixed_point, SignalPrior)

# a dense signal: every SNP carries a small effect, ||beta||^2 = 1
n, p, lam_L, lam_R = 2000, 1000, 0.5, 1.0
beta = np.random.default_rng(7).standard_normal(p)
beta /= np.linalg.norm(beta)

# %% Prediction from the fixed-point system (normalized units: n * tau^2)
sol = solve_joint_fixed_point(p / n, 1.0, SignalPrior.from_vector(beta, n), lam_L, lam_R)
print(f"predicted  n tau_L^2={sol.tau_L**2:.4f}  n tau_R^2={sol.tau_R**2:.4f}  "
      f"rho={sol.rho:.4f}  df_L/n={sol.df_L:.4f}  df_R/n={sol.df_R:.4f}")

# %% Empirical averages over 5 design draws
rows = []
for r in range(5):
    g = np.random.default_rng(100 + r)
    X = g.standard_normal((n, p))
    d = DataSet(y=X @ beta + g.standard_normal(n), X=X)
    fl, fr = fit_lasso(d, lam_L), fit_ridge(d, lam_R, build_ridge_cache(d))
    t = estimate_taus(fl, fr, n)
    rows.append((n * t.tau_L2, n * t.tau_R2, t.tau_LR / np.sqrt(t.tau_L2 * t.tau_R2),
                 fl.df_hat / n, fr.df_hat / n))
m = np.mean(rows, axis=0)
print(f"empirical  n tau_L^2={m[0]:.4f}  n tau_R^2={m[1]:.4f}  "
      f"rho={m[2]:.4f}  df_L/n={m[3]:.4f}  df_R/n={m[4]:.4f}")

# %% With rho < 1 and a dense signal, a mix of the two beats either one alone
a = (sol.tau_R**2 - sol.rho * sol.tau_L * sol.tau_R) / (
    sol.tau_L**2 + sol.tau_R**2 - 2 * sol.rho * sol.tau_L * sol.tau_R)
a = min(1.0, max(0.0, a))
mix = (a**2 * sol.tau_L**2 + (1 - a)**2 * sol.tau_R**2
       + 2 * a * (1 - a) * sol.rho * sol.tau_L * sol.tau_R)
print(f"optimal lasso weight {a:.3f}: ensemble n tau^2 = {mix:.4f} "
      f"vs min single {min(sol.tau_L**2, sol.tau_R**2):.4f}")
