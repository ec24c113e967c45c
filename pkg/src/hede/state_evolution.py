"""Fixed-point characterization of the debiased lasso and ridge under
Gaussian designs.

All quantities are in the normalized scale where ``theta = sqrt(n) beta``
and ``t_k = sqrt(n) tau_k``, so that ``t_k**2 = n tau_k**2`` is O(1). For a
coordinate theta the proximal maps are

    lasso:  soft(theta + t Z; lam_L / zeta_L)
    ridge:  zeta_R (theta + t Z) / (zeta_R + lam_R)

and the system reads

    t_k**2   = sigma2 + delta * E[(prox_k - theta)**2]
    df_k / n = delta * E[d prox_k / d input]
    zeta_k   = 1 - df_k / n
    t_L t_R rho = sigma2 + delta * E[(prox_L - theta)(prox_R - theta)]

with E over the empirical distribution of theta and Gaussian noise
(Z_L, Z_R) of correlation rho.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import NoBracket, NotConverged

# |z| beyond this carries < 1e-30 Gaussian mass
_Z_LIMIT = 12.0


@dataclass(frozen=True)
class SignalPrior:
    """Discrete distribution of ``theta = sqrt(n) beta`` (atoms and weights)."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.atoms, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if a.shape != w.shape or np.any(w < 0) or not np.isclose(w.sum(), 1.0):
            raise ValueError("weights must be nonnegative, sum to one and match atoms")
        object.__setattr__(self, "atoms", a)
        object.__setattr__(self, "weights", w)

    @property
    def second_moment(self) -> float:
        return float(self.weights @ self.atoms**2)

    def signal_norm2(self, delta: float) -> float:
        """Implied ||beta||^2 = delta * E[theta^2]."""
        return delta * self.second_moment

    @classmethod
    def from_vector(cls, beta, n: int) -> "SignalPrior":
        beta = np.asarray(beta, dtype=float)
        return cls(np.sqrt(n) * beta, np.full(beta.size, 1.0 / beta.size))

    @classmethod
    def point_mass(cls, value: float = 0.0) -> "SignalPrior":
        return cls(np.array([value]), np.array([1.0]))

    @classmethod
    def zero_inflated_normal(cls, kappa: float, signal_norm2: float, delta: float,
                             nodes: int = 61) -> "SignalPrior":
        """kappa * N(0, s^2) + (1 - kappa) * point mass at 0, with s chosen so
        that ``delta * E[theta^2] = signal_norm2``. The normal part is
        discretized by Gauss-Hermite nodes."""
        if kappa <= 0 or kappa > 1:
            raise ValueError("kappa must lie in (0, 1]")
        s = np.sqrt(signal_norm2 / (delta * kappa))
        x, w = np.polynomial.hermite.hermgauss(nodes)
        atoms = np.concatenate([[0.0], np.sqrt(2.0) * s * x])
        weights = np.concatenate([[1.0 - kappa], kappa * w / np.sqrt(np.pi)])
        weights /= weights.sum()
        return cls(atoms, weights)


@dataclass(frozen=True)
class FixedPointSolution:
    """Solution of the joint system.

    ``tau_L``/``tau_R`` are normalized (``tau_L**2 == n * tau_L_raw**2``);
    ``df_L``/``df_R`` are degrees of freedom per sample (df / n), so
    ``zeta_k == 1 - df_k``.
    """

    tau_L: float
    tau_R: float
    rho: float
    zeta_L: float
    zeta_R: float
    df_L: float
    df_R: float
    delta: float
    sigma2: float
    n_iter: int = 0

    def raw_taus(self, n: int):
        """Unnormalized (tau_L^2, tau_R^2, tau_LR) for sample size n."""
        return (self.tau_L**2 / n, self.tau_R**2 / n,
                self.rho * self.tau_L * self.tau_R / n)

    def df_per_feature(self):
        return self.df_L / self.delta, self.df_R / self.delta


@lru_cache(maxsize=16)
def _legendre(m):
    return np.polynomial.legendre.leggauss(m)


def _segments(theta, t, thr, m):
    """Gauss-Legendre nodes/weights in z covering [-L, L], split where
    theta + t z = +-thr. Returns z, w of shape (len(theta), 3 m) with the
    standard normal density folded into w."""
    x, wx = _legendre(m)
    k1 = np.clip((-thr - theta) / t, -_Z_LIMIT, _Z_LIMIT)
    k2 = np.clip((thr - theta) / t, -_Z_LIMIT, _Z_LIMIT)
    edges = np.stack([np.full_like(k1, -_Z_LIMIT), k1, k2,
                      np.full_like(k1, _Z_LIMIT)], axis=1)
    lo, hi = edges[:, :-1, None], edges[:, 1:, None]
    half = 0.5 * (hi - lo)
    z = (lo + hi) * 0.5 + half * x
    w = half * wx * np.exp(-0.5 * z**2) / np.sqrt(2.0 * np.pi)
    A = theta.size
    return z.reshape(A, -1), w.reshape(A, -1)


def soft_threshold(v, thr):
    return np.sign(v) * np.maximum(np.abs(v) - thr, 0.0)


def lasso_moments(prior: SignalPrior, t: float, thr: float, m: int = 61):
    """Prior-averaged moments of the lasso prox error e = soft(theta + tZ) - theta.

    Returns ``(E[e^2], P(|theta + tZ| > thr), E[e Z], E[theta e])``.
    """
    theta = prior.atoms
    z, w = _segments(theta, t, thr, m)
    v = theta[:, None] + t * z
    err = soft_threshold(v, thr) - theta[:, None]
    active = (np.abs(v) > thr).astype(float)
    mse = (w * err**2).sum(axis=1)
    prob = (w * active).sum(axis=1)
    ez = (w * err * z).sum(axis=1)
    eth = theta * (w * err).sum(axis=1)
    pw = prior.weights
    return float(pw @ mse), float(pw @ prob), float(pw @ ez), float(pw @ eth)


def ridge_moments(prior: SignalPrior, t: float, zeta: float, lam: float):
    """Exact E[e^2] for the ridge prox error e = (zeta t Z - lam theta)/(zeta + lam)."""
    return (zeta**2 * t**2 + lam**2 * prior.second_moment) / (zeta + lam)**2


def _lasso_t_given_a(delta, sigma2, prior, a, m):
    """Noise level t solving t^2 = sigma2 + delta E[e^2] at threshold a t,
    or None when the map has no finite fixed point (a too small)."""
    def f(t):
        return sigma2 + delta * lasso_moments(prior, t, a * t, m)[0] - t * t

    lo = np.sqrt(sigma2)
    hi = max(2.0 * lo, np.sqrt(sigma2 + prior.signal_norm2(delta)) * 2.0, 1.0)
    while f(hi) > 0:
        hi *= 4.0
        if hi > 1e8:
            return None
    if f(lo) <= 0:
        return lo
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def solve_lasso_margin(delta, sigma2, prior, lambda_L, quad_nodes=61,
                       a_max=40.0, max_iter=10_000):
    """Return ``(t_L, zeta_L, df_L / n, n_evals)``.

    Parametrized by the normalized threshold ``a = thr / t``: for each a the
    noise level t solves a one-dimensional monotone equation, and the
    penalty it corresponds to is ``lambda(a) = zeta(a) a t(a)``, increasing
    in a wherever zeta > 0. A bracketing search on a then matches
    ``lambda(a) = lambda_L``.
    """
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    evals = [0]

    def state(a):
        evals[0] += 1
        t = _lasso_t_given_a(delta, sigma2, prior, a, quad_nodes)
        if t is None:
            return None, None, None
        prob = lasso_moments(prior, t, a * t, quad_nodes)[1]
        return t, 1.0 - delta * prob, prob

    def gap(a):
        t, zeta, _ = state(a)
        if t is None or zeta <= 0:
            return -lambda_L
        return zeta * a * t - lambda_L

    hi = a_max
    if gap(hi) < 0:
        raise NotConverged(f"lasso penalty {lambda_L} exceeds the reachable range",
                           diagnostics={"a_max": a_max})
    lo = hi
    while gap(lo) >= 0:
        lo *= 0.5
        if lo < 1e-12:
            raise NotConverged("no lower bracket for the lasso threshold",
                               diagnostics={"lambda_L": lambda_L})
    a = brentq(gap, lo, min(2.0 * lo, hi), xtol=1e-15, rtol=4 * np.finfo(float).eps,
               maxiter=max_iter)
    t, zeta, prob = state(a)
    return float(t), float(zeta), float(delta * prob), evals[0]


def ridge_zeta(delta, lambda_R):
    """Positive root of zeta^2 + (lam + delta - 1) zeta - lam = 0."""
    b = lambda_R + delta - 1.0
    return 0.5 * (-b + np.sqrt(b * b + 4.0 * lambda_R))


def solve_ridge_margin(delta, sigma2, prior, lambda_R):
    """Return ``(t_R, zeta_R, df_R / n, 0)`` in closed form.

    zeta_R is the positive root of the df equation, and the variance
    equation is linear in t^2 once zeta_R is known:
    ``t^2 (1 - delta g^2) = sigma2 + delta (lam / (zeta + lam))^2 E[theta^2]``
    with ``g = zeta / (zeta + lam)``.
    """
    zeta = ridge_zeta(delta, lambda_R)
    c = zeta + lambda_R
    gain = 1.0 - delta * (zeta / c) ** 2
    if not gain > 0:
        raise NotConverged("ridge variance equation has no positive solution",
                           diagnostics={"delta": delta, "lambda_R": lambda_R})
    t2 = (sigma2 + delta * (lambda_R / c) ** 2 * prior.second_moment) / gain
    return float(np.sqrt(t2)), float(zeta), float(delta * zeta / c), 0


def solve_joint_fixed_point(delta, sigma2, prior: SignalPrior, lambda_L, lambda_R,
                            quad_nodes: int = 61) -> FixedPointSolution:
    """Solve the joint lasso/ridge system.

    The marginals do not involve rho and are solved first (the lasso by a
    bracketing search over its normalized threshold, the ridge in closed
    form). The cross equation is
    linear in rho once the ridge error is written in terms of Z_L, so rho
    is obtained in closed form from lasso moments.
    """
    if not (lambda_L > 0 and lambda_R > 0):
        raise ValueError("penalties must be positive")
    if quad_nodes < 20:
        raise ValueError("quad_nodes must be >= 20")
    tL, zL, dfL, itL = solve_lasso_margin(delta, sigma2, prior, lambda_L, quad_nodes)
    tR, zR, dfR, itR = solve_ridge_margin(delta, sigma2, prior, lambda_R)
    _, _, ez, eth = lasso_moments(prior, tL, lambda_L / zL, quad_nodes)
    c = zR + lambda_R
    rho = (sigma2 - delta * lambda_R * eth / c) / (tL * tR - delta * zR * tR * ez / c)
    return FixedPointSolution(tau_L=tL, tau_R=tR, rho=float(rho), zeta_L=zL,
                              zeta_R=zR, df_L=dfL, df_R=dfR, delta=float(delta),
                              sigma2=float(sigma2), n_iter=max(itL, itR))


def fixed_point_residuals(sol: FixedPointSolution, prior: SignalPrior,
                          lambda_L, lambda_R, quad_nodes=61):
    """Residuals of the five equations at ``sol`` (all zero at a solution)."""
    d, s2 = sol.delta, sol.sigma2
    mse, prob, ez, eth = lasso_moments(prior, sol.tau_L, lambda_L / sol.zeta_L, quad_nodes)
    c = sol.zeta_R + lambda_R
    cross = (sol.zeta_R * sol.tau_R * sol.rho * ez - lambda_R * eth) / c
    return np.array([
        sol.tau_L**2 - s2 - d * mse,
        sol.tau_R**2 - s2 - d * ridge_moments(prior, sol.tau_R, sol.zeta_R, lambda_R),
        sol.zeta_L - 1.0 + d * prob,
        sol.zeta_R - 1.0 + d * sol.zeta_R / c,
        sol.tau_L * sol.tau_R * sol.rho - s2 - d * cross,
    ])


# scalar saddle-point problem for the ridge

def ridge_scalar_objective(alpha, tau, delta, sigma2, sigma_beta2, lam):
    q = alpha + tau * lam
    return (alpha * sigma2 / (2 * tau) + alpha * tau / 2 - alpha**2 / 2
            - alpha**2 * tau * delta / (2 * q) + alpha * lam * sigma_beta2 / (2 * q))


def _dpsi_dtau(alpha, tau, delta, sigma2, sigma_beta2, lam):
    q = alpha + tau * lam
    return (alpha / 2 - alpha * sigma2 / (2 * tau**2)
            - (alpha**3 * delta + alpha * lam**2 * sigma_beta2) / (2 * q**2))


def _dpsi_dalpha(alpha, tau, delta, sigma2, sigma_beta2, lam):
    q = alpha + tau * lam
    return (sigma2 / (2 * tau) + tau / 2 - alpha
            - tau * delta * (alpha**2 + 2 * alpha * tau * lam) / (2 * q**2)
            + lam * sigma_beta2 * tau * lam / (2 * q**2))


def ridge_scalar_gradient(alpha, tau, delta, sigma2, sigma_beta2, lam):
    args = (delta, sigma2, sigma_beta2, lam)
    return (_dpsi_dalpha(alpha, tau, *args), _dpsi_dtau(alpha, tau, *args))


def solve_ridge_scalar(delta, sigma2, sigma_beta2, lambda_R, bracket=(1e-6, 1e3)):
    """Saddle point ``(alpha_*, tau_*)`` of the scalar ridge problem
    (max over alpha of min over tau) by nested bracketing root searches.

    ``tau_*`` equals the normalized ridge ``t_R`` of the joint system and
    ``alpha_* = tau_* * zeta_R``.
    """
    if min(delta, sigma2, lambda_R) <= 0 or sigma_beta2 < 0:
        raise ValueError("delta, sigma2, lambda_R must be positive, sigma_beta2 >= 0")
    lo, hi = bracket
    args = (delta, sigma2, sigma_beta2, lambda_R)

    def inner(alpha):
        f = lambda tau: _dpsi_dtau(alpha, tau, *args)
        if f(lo) * f(hi) > 0:
            raise NoBracket(f"no sign change in d/dtau on {bracket} for alpha={alpha:.6g}, "
                            f"inputs delta={delta}, sigma2={sigma2}, "
                            f"sigma_beta2={sigma_beta2}, lambda={lambda_R}")
        return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)

    def outer(alpha):
        return _dpsi_dalpha(alpha, inner(alpha), *args)

    def usable(alpha):
        try:
            return outer(alpha)
        except NoBracket:
            return None

    # the inner problem may be unbracketed near the ends of the alpha range;
    # pull each end inwards by factors of two until it is
    a_lo, a_hi = lo, hi
    g_lo, g_hi = usable(a_lo), usable(a_hi)
    while g_hi is None and a_hi > 2.0 * a_lo:
        a_hi *= 0.5
        g_hi = usable(a_hi)
    while g_lo is None and a_lo < 0.5 * a_hi:
        a_lo *= 2.0
        g_lo = usable(a_lo)
    if g_lo is None or g_hi is None or g_lo * g_hi > 0:
        raise NoBracket(f"no sign change in d/dalpha on {bracket}; inputs delta={delta}, "
                        f"sigma2={sigma2}, sigma_beta2={sigma_beta2}, lambda={lambda_R}")
    alpha = brentq(outer, a_lo, a_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return float(alpha), float(inner(alpha))
