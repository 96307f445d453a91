"""Brute-force references: classical trajectories and grid Schrodinger evolution."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .odeint import solve_piecewise
from .errors import ClassicalCollisionError, DomainError, IntegrationError, TruncationError
from .invariant import _check_tol, _sample_times
from .special import radial_function, radial_value_at_zero


@dataclass(frozen=True)
class ClassicalState:
    t: float
    q: float
    p: float


@dataclass(frozen=True, eq=False)
class ClassicalTrajectory:
    times: np.ndarray
    q: np.ndarray
    p: np.ndarray

    def __len__(self):
        return len(self.times)

    def __getitem__(self, i):
        return ClassicalState(float(self.times[i]), float(self.q[i]), float(self.p[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def energy(self, profile, c):
        w2 = profile.omega_sq(self.times)
        return 0.5 * self.p**2 + 0.5 * w2 * self.q**2 + c / self.q**2


def classical_trajectory(profile, c, q0, p0, t0=0.0, t1=1.0, tol=1e-10, times=None, q_floor=1e-6):
    """Integrate q'' + omega^2 q - 2c/q^3 = 0 from (q0, p0).

    Raises ClassicalCollisionError when q drops to ``q_floor`` (possible
    for c <= 0), reporting the time of closest approach.
    """
    _check_tol(tol)
    if not q0 > 0:
        raise DomainError("q0 must be positive")
    profile.check_span(t0, t1)
    times = _sample_times(t0, t1, times)
    if t1 == t0:
        return ClassicalTrajectory(times, np.full_like(times, q0), np.full_like(times, p0))

    def rhs(t, s):
        q, p = s
        return [p, -profile.omega_sq(t) * q + 2.0 * c / q**3]

    def collide(t, s):
        return s[0] - q_floor

    collide.terminal = True
    sol = solve_piecewise(rhs, t0, t1, [q0, p0], profile.breakpoints(t0, t1), method="DOP853",
                          rtol=tol, atol=tol * 1e-2, t_eval=times, events=collide)
    if sol.status == 1:
        tc = float(sol.t_events[0][0])
        raise ClassicalCollisionError(f"trajectory reaches q = {q_floor:g} at t = {tc:.10g}", tc)
    if not sol.success:
        raise IntegrationError(sol.message)
    return ClassicalTrajectory(sol.t, sol.y[0], sol.y[1])


# ---------------------------------------------------------------------------
# grid Schrodinger evolution


def _banded(ops, omega_sq, scale):
    """Banded (1,1) storage of I + scale * H(omega^2)."""
    H = ops.hamiltonian(omega_sq)
    n = ops.grid.n_points
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = scale * H.diagonal(1)
    ab[1, :] = 1.0 + scale * H.diagonal()
    ab[2, :-1] = scale * H.diagonal(-1)
    return ab, H


def schrodinger_grid_evolution(ops, profile, psi0, t0, t1, dt, record_times=None, observer=None):
    """Crank-Nicolson steps of i dpsi/dt = (P2/2 + omega^2 Q2/2 + SING) psi.

    The Hamiltonian is frozen at each step midpoint. The step count is
    ceil(|t1 - t0| / dt). If ``record_times`` is given, the states closest
    to those times (on the step lattice) are returned as a list along with
    the final state; ``observer(t, psi)`` is called after every step.
    """
    if not dt > 0:
        raise DomainError("dt must be positive")
    profile.check_span(t0, t1)
    psi = np.asarray(psi0, dtype=complex).copy()
    if psi.shape != (ops.grid.n_points,):
        raise DomainError("psi0 must be sampled on the operator grid")
    n_steps = int(np.ceil(abs(t1 - t0) / dt - 1e-12))
    if n_steps == 0:
        return (psi, [psi.copy() for _ in record_times]) if record_times is not None else psi
    step = (t1 - t0) / n_steps
    marks = {}
    if record_times is not None:
        for j, tr in enumerate(record_times):
            marks.setdefault(int(round((tr - t0) / step)), []).append(j)
    snaps = [None] * (len(record_times) if record_times is not None else 0)
    for j in marks.get(0, []):
        snaps[j] = psi.copy()
    cached = None
    for k in range(n_steps):
        w2 = float(profile.omega_sq(t0 + (k + 0.5) * step))
        if cached is None or cached[0] != w2:
            ab, H = _banded(ops, w2, 0.5j * step)
            cached = (w2, ab, H)
        _, ab, H = cached
        rhs = psi - 0.5j * step * (H @ psi)
        try:
            psi = solve_banded((1, 1), ab, rhs, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise IntegrationError(f"Crank-Nicolson solve failed at step {k}") from exc
        t = t0 + (k + 1) * step
        for j in marks.get(k + 1, []):
            snaps[j] = psi.copy()
        if observer is not None:
            observer(t, psi)
    if not np.all(np.isfinite(psi)):
        raise IntegrationError("grid evolution produced non-finite values")
    return (psi, snaps) if record_times is not None else psi


def expectation(ops, matrix, psi):
    """<psi|M|psi> with the grid measure (real part)."""
    return float(np.real(np.vdot(psi, matrix @ psi)) * ops.grid.h)


def invariant_expectation(ops, g, psi):
    """<psi| g- L- + g0 L0 + g+ L+ |psi> on the grid."""
    return expectation(ops, ops.combination(*g), psi)


# ---------------------------------------------------------------------------
# grid <-> discrete series


def series_basis(grid, k0, omega0, N):
    """Rows (-1)^n Phi_n(q) for n < N; the sign matches the ladder convention of K+."""
    rows = np.array([(-1) ** n * radial_function(n, k0, omega0, grid.q) for n in range(N)])
    at0 = np.array([(-1) ** n * radial_value_at_zero(n, k0, omega0) for n in range(N)])
    if not np.all(np.isfinite(at0)):
        raise DomainError("k0 < 1/4 eigenfunctions are singular at q = 0")
    return rows, at0


def project_to_series(grid, psi, k0, omega0, N, psi_at_zero=0.0, tail_tol=1e-6):
    """Amplitudes <n|psi> for n < N by trapezoidal overlaps.

    Raises TruncationError if the weight of psi outside the first N/2
    levels exceeds ``tail_tol``.
    """
    rows, at0 = series_basis(grid, k0, omega0, N)
    w = np.full(grid.n_points, grid.h)
    w[-1] *= 0.5
    amps = rows @ (w * psi) + 0.5 * grid.h * at0 * psi_at_zero
    norm2 = grid.integrate(np.abs(psi) ** 2, abs(psi_at_zero) ** 2)
    tail = norm2 - np.sum(np.abs(amps[: N // 2]) ** 2)
    if tail > tail_tol:
        raise TruncationError(
            f"weight {tail:.3g} beyond n = {N // 2} exceeds {tail_tol:g}; increase N or the grid"
        )
    return amps


def series_to_grid(grid, amps, k0, omega0):
    rows, _ = series_basis(grid, k0, omega0, len(amps))
    return np.asarray(amps) @ rows


def populations(grid, psi, k0, omega0, n_levels, psi_at_zero=0.0, tail_tol=1e-6):
    """|<n|psi>|^2 for n < n_levels (the tail check uses 2 n_levels levels)."""
    amps = project_to_series(grid, psi, k0, omega0, 2 * n_levels, psi_at_zero, tail_tol)
    return np.abs(amps[:n_levels]) ** 2
