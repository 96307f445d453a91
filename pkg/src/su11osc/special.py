"""Laguerre radial functions and log-gamma helpers."""
from __future__ import annotations

import numpy as np
from scipy.special import gammaln


def genlaguerre(n, a, x):
    """Generalized Laguerre polynomial L_n^(a)(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = 1.0 + a - x
    for m in range(1, n):
        prev, cur = cur, ((2 * m + 1 + a - x) * cur - (m + a) * prev) / (m + 1)
    return cur


def radial_log_norm(n, k0, omega0):
    """log of the analytic normalisation sqrt(2 sqrt(omega0) n! / Gamma(n + 2 k0))."""
    return 0.5 * (np.log(2.0) + 0.5 * np.log(omega0) + gammaln(n + 1) - gammaln(n + 2 * k0))


def radial_function(n, k0, omega0, q):
    """exp(-w q^2/2) (w q^2)^(k0-1/4) L_n^(2k0-1)(w q^2), normalised on (0, inf).

    Sign convention: the Laguerre polynomial keeps its standard sign, so
    the function is positive near q = 0.
    """
    q = np.asarray(q, dtype=float)
    x = omega0 * q * q
    with np.errstate(divide="ignore", invalid="ignore"):
        log_env = -0.5 * x + (k0 - 0.25) * np.log(x)
    env = np.exp(log_env + radial_log_norm(n, k0, omega0))
    if k0 == 0.25:
        env = np.where(x == 0, np.exp(radial_log_norm(n, k0, omega0)), env)
    return env * genlaguerre(n, 2 * k0 - 1, x)


def radial_value_at_zero(n, k0, omega0):
    """Limit of radial_function as q -> 0+ (0, finite, or inf)."""
    if k0 > 0.25:
        return 0.0
    if k0 < 0.25:
        return np.inf
    # L_n^(a)(0) = Gamma(n+a+1) / (n! Gamma(a+1))
    a = 2 * k0 - 1
    log_l0 = gammaln(n + a + 1) - gammaln(n + 1) - gammaln(a + 1)
    return float(np.exp(radial_log_norm(n, k0, omega0) + log_l0))


def log_pochhammer_ratio(n, k0):
    """log sqrt(Gamma(n + 2k0) / (n! Gamma(2k0))) for array n."""
    n = np.asarray(n, dtype=float)
    return 0.5 * (gammaln(n + 2 * k0) - gammaln(n + 1) - gammaln(2 * k0))
