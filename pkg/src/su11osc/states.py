"""Number-type, coherent and squeezed states; radial eigenfunctions and phases."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import gammaln

from .algebra import C_MIN
from .errors import DomainError, ResolutionError, TruncationError
from .special import log_pochhammer_ratio, radial_function, radial_value_at_zero

TAIL_TOL = 1e-10
NORM_TOL = 1e-8


def bargmann_indices(c):
    """(k_minus or None, k_plus) with k = (1 +- sqrt(1/4 + 2c))/2.

    The minus branch is dropped unless it is strictly positive.
    """
    if not c > C_MIN:
        raise DomainError(f"coupling c = {c} violates c > -1/8 (fall to the centre)")
    root = np.sqrt(0.25 + 2.0 * c)
    k_minus = 0.5 * (1.0 - root)
    k_plus = 0.5 * (1.0 + root)
    return (float(k_minus) if k_minus > 1e-14 else None), float(k_plus)


def casimir_eigenvalue(c):
    """k0(k0 - 1) = -(3 - 8c)/16, the same on both branches."""
    return -(3.0 - 8.0 * c) / 16.0


@dataclass(frozen=True, eq=False)
class StateVector:
    bargmann_index: float
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    @property
    def populations(self):
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other):
        other = getattr(other, "amplitudes", other)
        return complex(np.vdot(self.amplitudes, other))


def _from_log_coefficients(rep, log_mag, z, normalise=True):
    n = np.arange(rep.dim)
    phase = np.exp(1j * n * np.angle(z)) if z != 0 else (n == 0).astype(complex)
    mag = np.exp(log_mag - np.max(log_mag)) if normalise else np.exp(log_mag)
    c = mag * phase
    if normalise:
        c = c / np.linalg.norm(c)
    tail = abs(c[-1]) ** 2
    if tail > TAIL_TOL:
        raise TruncationError(
            f"|c_(N-1)|^2 = {tail:.3g} exceeds {TAIL_TOL:g} for |z| = {abs(z):g}, N = {rep.dim}; "
            "increase N"
        )
    return StateVector(rep.bargmann_index, c)


def barut_girardello_state(rep, z):
    """Eigenstate of K- with eigenvalue z: c_n ~ z^n / sqrt(n! Gamma(n + 2k0))."""
    z = complex(z)
    k0 = rep.bargmann_index
    n = np.arange(rep.dim, dtype=float)
    if z == 0:
        return _from_log_coefficients(rep, np.where(n == 0, 0.0, -np.inf), z)
    log_mag = n * np.log(abs(z)) - 0.5 * (gammaln(n + 1) + gammaln(n + 2 * k0))
    return _from_log_coefficients(rep, log_mag, z)


def perelomov_state(rep, z):
    """S(zeta)|0> with z = (zeta/|zeta|) tanh|zeta|.

    c_n = (1 - |z|^2)^k0 sqrt(Gamma(n + 2k0)/(n! Gamma(2k0))) z^n.
    """
    z = complex(z)
    if not abs(z) < 1:
        raise DomainError(f"|z| = {abs(z):g} >= 1: the state is not normalisable")
    k0 = rep.bargmann_index
    n = np.arange(rep.dim, dtype=float)
    if z == 0:
        return _from_log_coefficients(rep, np.where(n == 0, 0.0, -np.inf), z, normalise=False)
    log_mag = k0 * np.log1p(-abs(z) ** 2) + log_pochhammer_ratio(n, k0) + n * np.log(abs(z))
    return _from_log_coefficients(rep, log_mag, z, normalise=False)


def zeta_from_z(z):
    """Squeeze parameter zeta with tanh|zeta| = |z| and the phase of z."""
    z = complex(z)
    if not abs(z) < 1:
        raise DomainError("|z| must be < 1")
    return 0j if z == 0 else z / abs(z) * np.arctanh(abs(z))


# ---------------------------------------------------------------------------
# radial eigenfunctions


def _sampled(n, k0, w, grid):
    if n < 0 or int(n) != n:
        raise DomainError("n must be a non-negative integer")
    if not k0 > 0:
        raise DomainError("Bargmann index must be positive")
    if not w > 0:
        raise DomainError("frequency scale must be positive")
    f = radial_function(int(n), k0, w, grid.q)
    f0 = radial_value_at_zero(int(n), k0, w)
    if not np.isfinite(f0):
        raise ResolutionError(
            f"k0 = {k0} < 1/4: the eigenfunction diverges at q = 0 and cannot be "
            "sampled on a grid that needs its value there"
        )
    mass = grid.integrate(f * f, f0 * f0)
    if abs(mass - 1.0) > NORM_TOL:
        raise ResolutionError(
            f"grid (q_max={grid.q_max}, n_points={grid.n_points}) does not resolve "
            f"Phi_{n} (k0={k0}, scale={w}): quadrature mass {mass:.12g}"
        )
    s = 1.0 / np.sqrt(mass)
    return f * s, f0 * s


def eigenfunction(n, k0, omega0, grid):
    """Static radial eigenfunction on the grid, normalised by trapezoidal quadrature.

    exp(-w q^2/2) (w q^2)^(k0-1/4) L_n^(2k0-1)(w q^2) with w = omega0.
    Raises ResolutionError when the grid loses more than 1e-8 of the mass.
    """
    return _sampled(n, k0, omega0, grid)[0]


def eigenfunction_at_zero(n, k0, omega0, grid):
    """Value of the grid-normalised eigenfunction at q = 0 (non-zero only for k0 = 1/4)."""
    return _sampled(n, k0, omega0, grid)[1]


def time_dependent_eigenfunction(n, k0, omega0, g_minus, grid):
    """Real part of the invariant eigenfunction: omega0 q^2 replaced by omega0 q^2 / g_minus."""
    if not g_minus > 0:
        raise DomainError("g_minus must be positive")
    return _sampled(n, k0, omega0 / g_minus, grid)[0]


def momentum_shift_phase(g, q):
    """exp(-i g0 q^2 / (2 g_minus)), the factor carrying the p -> p + (g0/g-) q shift."""
    gm, g0 = float(g[0]), float(g[1])
    if not gm > 0:
        raise DomainError("g_minus must be positive")
    return np.exp(-0.5j * g0 / gm * np.asarray(q) ** 2)


def invariant_eigenstate(n, k0, omega0, g, grid):
    """Complex grid eigenfunction of g- L- + g0 L0 + g+ L+ with eigenvalue 2 omega0 (n + k0)."""
    f, f0 = _sampled(n, k0, omega0 / float(g[0]), grid)
    return momentum_shift_phase(g, grid.q) * f, complex(f0)


def time_dependent_state(state, omega0, g, grid, phases=None):
    """Grid wave function sum_n c_n exp(i alpha_n) |n, t> for a discrete-series state.

    |n, t> is (-1)^n Phi_n with omega0 q^2 -> omega0 q^2 / g-, times the
    momentum-shift phase; the sign matches the ladder convention of K+.
    ``phases`` holds alpha_n per level (zero when omitted). Applied to the
    Barut-Girardello coefficients this is the time-dependent coherent state.
    """
    gm = float(g[0])
    if not gm > 0:
        raise DomainError("g_minus must be positive")
    c = np.asarray(getattr(state, "amplitudes", state), dtype=complex)
    k0 = state.bargmann_index
    if phases is not None:
        c = c * np.exp(1j * np.asarray(phases, dtype=float))
    psi = np.zeros(grid.n_points, dtype=complex)
    for n in np.flatnonzero(np.abs(c) > 0):
        psi += c[n] * (-1) ** n * radial_function(int(n), k0, omega0 / gm, grid.q)
    return momentum_shift_phase(g, grid.q) * psi


def eigen_residual(matrix, psi, energy, psi_at_zero=0.0, h=None):
    """||(M - E) psi|| / ||psi|| on the grid.

    For k0 = 1/4 the wave function does not vanish at q = 0 and the
    three-point Laplacian needs the boundary value: the term
    -psi(0) / (2 h^2) is added to the first row.
    """
    r = matrix @ psi - energy * psi
    if psi_at_zero != 0:
        if h is None:
            raise DomainError("grid spacing h is needed for a non-zero boundary value")
        r = r.astype(complex) if np.iscomplexobj(psi) else r.copy()
        r[0] -= 0.5 * psi_at_zero / h**2
    return float(np.linalg.norm(r) / np.linalg.norm(psi))


# ---------------------------------------------------------------------------
# phases and expectation values


def phase_rate(g, omega_sq, omega0):
    """h(t) = (omega0^2 + g0^2 + omega^2 g-^2) / (omega0 g-)."""
    gm, g0 = np.asarray(g[0], float), np.asarray(g[1], float)
    return (omega0**2 + g0**2 + omega_sq * gm**2) / (omega0 * gm)


def hamiltonian_expectation(n, k0, g, omega_sq, omega0):
    """<n, t| H(t) |n, t> = h(t) (n + k0) in the invariant eigenstate."""
    if not float(g[0]) > 0:
        raise DomainError("g_minus must be positive")
    return float(phase_rate(g, omega_sq, omega0) * (n + k0))


@dataclass(frozen=True, eq=False)
class PhaseFactors:
    """Phase data along an invariant trajectory.

    ``eps`` is the real quantity (g-/2 omega0) d/dt(g0/g-) as published.
    The Schrodinger equation needs twice that: the dynamical phase of
    level n is  -(n + k0) * integral(h - 2 eps) dt = -2 omega0 (n + k0) integral dt/g-.
    """

    times: np.ndarray
    h: np.ndarray
    eps: np.ndarray
    int_h: np.ndarray
    int_eps: np.ndarray

    def phase(self, n, k0):
        """Dynamical phase alpha_n(t); the exact state is exp(i alpha_n) |n, t>."""
        return -(n + k0) * (self.int_h - 2.0 * self.int_eps)

    def phase_published_imaginary(self, n, k0):
        """exp of -i(n+k0) integral(h - i eps) with eps taken real (complex exponent)."""
        return -(n + k0) * (self.int_h - 1j * self.int_eps)

    def phase_published_real(self, n, k0):
        """-(n+k0) integral(h - eps): the published rate with eps = -i * (real eps)."""
        return -(n + k0) * (self.int_h - self.int_eps)


def phase_factors(trajectory, profile, omega0=None):
    """h, eps and their running integrals on the trajectory's sample times.

    d/dt(g0/g-) is evaluated from the invariant equation, not by
    differencing. The integrals use the trapezoid rule on the samples, so
    the trajectory should be densely sampled.
    """
    gm, g0, gp = trajectory.gminus, trajectory.g0, trajectory.gplus
    if omega0 is None:
        omega0 = float(np.sqrt(trajectory.omega0_sq[0]))
    t = trajectory.times
    w2 = profile.omega_sq(t)
    h = phase_rate((gm, g0), w2, omega0)
    ratio_dot = ((w2 * gm - gp) * gm + 2.0 * g0**2) / gm**2
    eps = gm / (2.0 * omega0) * ratio_dot
    return PhaseFactors(t, h, eps,
                        cumulative_trapezoid(h, t, initial=0.0),
                        cumulative_trapezoid(eps, t, initial=0.0))
