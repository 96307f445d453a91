"""The generalized invariant I(t) = g- L- + g0 L0 + g+ L+ and its coefficient routes.

Four independent ways to obtain (g-, g0, g+)(t):

* integrate the linear system  g-' = -2 g0,  g0' = w^2 g- - g+,  g+' = 2 w^2 g0;
* the Ermakov substitution g = (rho^2, -rho rho', rho'^2 + 1/rho^2);
* propagation of the initial triple by the classical transition matrix of
  x'' + w^2 x = 0;
* the closed Bessel-function family for w^2 = w0^2 t^alpha.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import jv, yv, gamma

from .odeint import solve_piecewise
from .errors import DomainError, IntegrationError, SingularInvariantError

METHOD = "DOP853"


def _check_tol(tol):
    if not 1e-13 <= tol <= 1e-4:
        raise DomainError(f"tolerance {tol} outside [1e-13, 1e-4]")


def _sample_times(t0, t1, times, n=201):
    if times is None:
        return np.linspace(t0, t1, n)
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or times[0] < min(t0, t1) - 1e-12 or times[-1] > max(t0, t1) + 1e-12:
        raise DomainError("output times must be sorted and lie inside [t0, t1]")
    return times


@dataclass(frozen=True, eq=False)
class InvariantTrajectory:
    times: np.ndarray
    gminus: np.ndarray
    g0: np.ndarray
    gplus: np.ndarray
    dense: Callable | None = None

    def __post_init__(self):
        if np.any(self.gminus <= 0):
            i = int(np.argmax(self.gminus <= 0))
            raise SingularInvariantError(
                f"g_minus <= 0 at t = {self.times[i]}", time=float(self.times[i])
            )

    @property
    def omega0_sq(self):
        """g+ g- - g0^2, a constant of motion."""
        return self.gplus * self.gminus - self.g0**2

    @property
    def array(self):
        return np.vstack([self.gminus, self.g0, self.gplus])

    def at(self, t):
        """Coefficients at arbitrary t (needs a dense interpolant)."""
        if self.dense is None:
            raise ValueError("trajectory carries no dense interpolant")
        return np.asarray(self.dense(t))

    def max_deviation(self, other):
        """Pointwise max |difference| against another trajectory on the same times."""
        if not np.allclose(self.times, other.times, rtol=0, atol=1e-12):
            raise ValueError("trajectories are sampled on different times")
        return float(np.abs(self.array - other.array).max())

    def conservation_drift(self):
        """max relative change of g+ g- - g0^2 along the trajectory."""
        w = self.omega0_sq
        return float(np.abs(w - w[0]).max() / abs(w[0]))


def default_initial_triple(profile, t0):
    """(1, 0, w^2(t0)): the invariant starts out as the instantaneous Hamiltonian."""
    return np.array([1.0, 0.0, float(profile.omega_sq(t0))])


def invariant_rhs(profile):
    def rhs(t, g):
        w2 = float(profile.omega_sq(t))
        return [-2.0 * g[1], w2 * g[0] - g[2], 2.0 * w2 * g[1]]

    return rhs


def integrate_invariant_ode(profile, g_init=None, t0=0.0, t1=1.0, tol=1e-10, times=None):
    """Adaptive DOP853 integration of the invariant equation."""
    _check_tol(tol)
    if not t1 > t0:
        raise DomainError("need t1 > t0")
    profile.check_span(t0, t1)
    g_init = default_initial_triple(profile, t0) if g_init is None else np.asarray(g_init, float)
    if not g_init[0] > 0:
        raise DomainError("initial g_minus must be positive")

    def hit_zero(t, g):
        return g[0]

    hit_zero.terminal = True
    hit_zero.direction = -1

    times = _sample_times(t0, t1, times)
    sol = solve_piecewise(
        invariant_rhs(profile), t0, t1, g_init, profile.breakpoints(t0, t1),
        method=METHOD, rtol=tol, atol=tol, t_eval=times, dense_output=True, events=hit_zero,
    )
    if sol.status == 1:
        tc = float(sol.t_events[0][0])
        raise SingularInvariantError(f"g_minus reaches zero at t = {tc}", time=tc)
    if not sol.success:
        raise IntegrationError(sol.message)
    return InvariantTrajectory(sol.t, sol.y[0], sol.y[1], sol.y[2], dense=sol.sol)


# ---------------------------------------------------------------------------
# Ermakov route


@dataclass(frozen=True, eq=False)
class ErmakovSolution:
    """rho(t) = sqrt(x1^2 + x2^2) built from two solutions of x'' + w^2 x = 0."""

    times: np.ndarray
    rho: np.ndarray
    rhodot: np.ndarray
    rhoddot: np.ndarray
    omega_sq: np.ndarray
    _x: Callable | None = None

    def residual(self):
        """max |rho'' + w^2 rho - 1/rho^3|."""
        return float(np.abs(self.rhoddot + self.omega_sq * self.rho - self.rho**-3).max())

    def __call__(self, t):
        """(rho, rhodot) at arbitrary t."""
        x1, v1, x2, v2 = self._x(t)
        rho = np.hypot(x1, x2)
        return rho, (x1 * v1 + x2 * v2) / rho


def _linear_rhs(profile):
    def rhs(t, y):
        w2 = float(profile.omega_sq(t))
        return [y[1], -w2 * y[0], y[3], -w2 * y[2]]

    return rhs


def solve_ermakov(profile, rho0, rhodot0, t0, t1, tol=1e-10, times=None):
    """Solve rho'' + w^2 rho = 1/rho^3 through the unit-Wronskian pair construction.

    x1(t0) = rho0, x1'(t0) = rhodot0, x2(t0) = 0, x2'(t0) = 1/rho0 so that
    x1 x2' - x1' x2 = 1 and rho^2 = x1^2 + x2^2.
    """
    if not rho0 > 0:
        raise DomainError("rho0 must be positive")
    _check_tol(tol)
    profile.check_span(t0, t1)
    times = _sample_times(t0, t1, times)
    y0 = [rho0, rhodot0, 0.0, 1.0 / rho0]
    sol = solve_piecewise(_linear_rhs(profile), t0, t1, y0, profile.breakpoints(t0, t1),
                          method=METHOD, rtol=tol, atol=tol, t_eval=times, dense_output=True)
    if not sol.success:
        raise IntegrationError(sol.message)
    x1, v1, x2, v2 = sol.y
    w2 = profile.omega_sq(sol.t)
    rho = np.hypot(x1, x2)
    rhodot = (x1 * v1 + x2 * v2) / rho
    # rho rho'' = x1'^2 + x2'^2 - w^2 rho^2 - rho'^2
    rhoddot = (v1**2 + v2**2 - w2 * rho**2 - rhodot**2) / rho
    return ErmakovSolution(sol.t, rho, rhodot, rhoddot, w2, sol.sol)


def g_from_ermakov(sol, omega0=1.0):
    """omega0 * (rho^2, -rho rho', rho'^2 + 1/rho^2); g+ g- - g0^2 = omega0^2."""
    r, rd = sol.rho, sol.rhodot
    def _dense(t):
        rr, rrd = sol(t)
        return omega0 * np.array([rr**2, -rr * rrd, rrd**2 + rr**-2])

    dense = _dense if sol._x is not None else None
    return InvariantTrajectory(sol.times, omega0 * r**2, -omega0 * r * rd,
                               omega0 * (rd**2 + r**-2), dense=dense)


def ermakov_seed(g_init):
    """(rho0, rhodot0, omega0) reproducing a triple with positive g+ g- - g0^2."""
    gm, g0, gp = map(float, g_init)
    w2 = gp * gm - g0**2
    if not (gm > 0 and w2 > 0):
        raise DomainError("Ermakov route needs g_minus > 0 and g+ g- - g0^2 > 0")
    w = np.sqrt(w2)
    rho0 = np.sqrt(gm / w)
    return rho0, -g0 / (w * rho0), w


def invariant_via_ermakov(profile, g_init=None, t0=0.0, t1=1.0, tol=1e-10, times=None):
    g_init = default_initial_triple(profile, t0) if g_init is None else g_init
    rho0, rhodot0, w = ermakov_seed(g_init)
    return g_from_ermakov(solve_ermakov(profile, rho0, rhodot0, t0, t1, tol, times), omega0=w)


# ---------------------------------------------------------------------------
# classical-integral route


@dataclass(frozen=True, eq=False)
class ClassicalTransition:
    """(p, q)(t) = [[P0, P1], [Q1, Q0]] (p, q)(t0) for x'' + w^2 x = 0."""

    t0: float
    times: np.ndarray
    P0: np.ndarray
    P1: np.ndarray
    Q0: np.ndarray
    Q1: np.ndarray

    def determinant(self):
        return self.P0 * self.Q0 - self.P1 * self.Q1


def classical_transition(profile, t0, t1, tol=1e-10, times=None):
    """Propagate the two canonical initial conditions (p, q) = (1, 0) and (0, 1)."""
    _check_tol(tol)
    profile.check_span(t0, t1)
    times = np.array([t1], float) if times is None else _sample_times(t0, t1, times)
    if t1 == t0:
        one, zero = np.ones_like(times), np.zeros_like(times)
        return ClassicalTransition(t0, times, one, zero, one.copy(), zero.copy())
    # state (q_a, p_a, q_b, p_b): a starts at (p, q) = (1, 0), b at (0, 1)
    y0 = [0.0, 1.0, 1.0, 0.0]
    sol = solve_piecewise(_linear_rhs(profile), t0, t1, y0, profile.breakpoints(t0, t1),
                          method=METHOD, rtol=tol, atol=tol, t_eval=times)
    if not sol.success:
        raise IntegrationError(sol.message)
    qa, pa, qb, pb = sol.y
    return ClassicalTransition(t0, sol.t, P0=pa, P1=pb, Q0=qb, Q1=qa)


def propagation_matrix(trans):
    """3x3 matrices (stacked on the last axis) mapping g(t0) to g(t)."""
    P0, P1, Q0, Q1 = trans.P0, trans.P1, trans.Q0, trans.Q1
    return np.array([
        [Q0**2, -2 * Q1 * Q0, Q1**2],
        [-P1 * Q0, P0 * Q0 + P1 * Q1, -P0 * Q1],
        [P1**2, -2 * P1 * P0, P0**2],
    ])


def propagate_invariant(trans, g_init):
    """g(t) for every time in ``trans``; shape (3, len(times))."""
    M = propagation_matrix(trans)
    return np.einsum("ijt,j->it", M, np.asarray(g_init, float))


def invariant_via_propagation(profile, g_init=None, t0=0.0, t1=1.0, tol=1e-10, times=None):
    g_init = default_initial_triple(profile, t0) if g_init is None else g_init
    trans = classical_transition(profile, t0, t1, tol, times=_sample_times(t0, t1, times))
    g = propagate_invariant(trans, g_init)
    return InvariantTrajectory(trans.times, g[0], g[1], g[2])


# ---------------------------------------------------------------------------
# closed form for w^2 = w0^2 t^alpha


def _bessel_pair(nu, z):
    """J_nu, Y_nu and the combinations nu Z_nu + z Z_nu' = z Z_{nu-1}."""
    J, Y = jv(nu, z), yv(nu, z)
    dJ = z * jv(nu - 1, z)
    dY = z * yv(nu - 1, z)
    return J, Y, dJ, dY


def power_law_invariant(omega0, alpha, c1, t):
    """Bessel-function invariant for w^2 = w0^2 t^alpha; returns (g-, g0, g+).

    nu = 1/(2+alpha), z = 2 w0 t^((2+alpha)/2) / (2+alpha). The triple has
    g+ g- - g0^2 = c1^2 w0^2.
    """
    if not omega0 > 0:
        raise DomainError("omega0 must be positive")
    if not alpha > -2:
        raise DomainError("alpha must exceed -2")
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("power-law invariant needs t > 0")
    nu = 1.0 / (2.0 + alpha)
    z = 2.0 * omega0 * t ** ((2.0 + alpha) / 2.0) / (2.0 + alpha)
    a = 2.0 * omega0 / (2.0 + alpha)

    with np.errstate(all="ignore"):
        J, Y, dJ, dY = _bessel_pair(nu, z)
        s_minus = z ** (2 * nu) * (J**2 + Y**2)
        s_zero = dJ * J + dY * Y
        s_plus = z ** (-2 * nu) * (dJ**2 + dY**2)

    bad = ~(np.isfinite(s_minus) & np.isfinite(s_zero) & np.isfinite(s_plus))
    if np.any(bad) and nu < 1:
        # z -> 0 limits (Y_nu dominates; finite only for nu < 1)
        lead_minus = (gamma(nu) * 2**nu / np.pi) ** 2
        lead_zero = -2.0 / (np.pi * np.tan(nu * np.pi))
        lead_plus = (np.cos(nu * np.pi) * gamma(1 - nu) * 2 ** (1 - nu) / np.pi) ** 2 \
            + (2 ** (1 - nu) / gamma(nu)) ** 2
        s_minus = np.where(bad, lead_minus, s_minus)
        s_zero = np.where(bad, lead_zero, s_zero)
        s_plus = np.where(bad, lead_plus, s_plus)

    g_minus = 0.5 * np.pi * a ** (alpha * nu) * c1 * s_minus
    g_zero = -0.5 * np.pi * omega0 * c1 * s_zero
    g_plus = 0.5 * np.pi * omega0 ** (2 * nu + 1) * (2.0 / (2.0 + alpha)) ** (-alpha * nu) * c1 * s_plus
    return np.array([g_minus, g_zero, g_plus])


def power_law_c1(omega0, alpha, t0, g_minus_t0=1.0):
    """The c1 for which the closed-form g_minus(t0) equals ``g_minus_t0``."""
    return g_minus_t0 / float(power_law_invariant(omega0, alpha, 1.0, t0)[0])


def classical_invariant_value(g, q, p, c):
    """g-(p^2/2 + c/q^2) + g0 p q + g+ q^2/2 for a classical phase-space point."""
    gm, g0, gp = g
    return gm * (0.5 * p**2 + c / q**2) + g0 * p * q + 0.5 * gp * q**2
