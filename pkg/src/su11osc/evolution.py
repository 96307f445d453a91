"""Evolution operator of H(t) = L- + omega^2(t) L+ and the squeeze operator.

Two disentangled (Wei-Norman) product forms are integrated:

L-basis:  U = exp(i l+ L+) exp(l0 (i/2) L0) exp(i l- L-)
K-basis:  U = exp(i k+ K+) exp(k0 K0) exp(i k- K-)

with all coordinates zero at t0. The coordinate equations follow from
i dU/dt = H U. In the L-basis, with x'' + omega^2 x = 0, x(t0) = 1, x'(t0) = 0,

    l+ = x'/x,   l0 = -2 ln x,   l-' = -exp(l0).

In the K-basis (rep scale omega0), with a = (omega^2 + omega0^2)/omega0 and
b = (omega^2 - omega0^2)/(2 omega0),

    k+' = b k+^2 - i a k+ - b,   k0' = 2 b k+ - i a,   k-' = -b exp(k0),

and k+ = -y'/(b y) linearises the Riccati equation to
y'' + (i a - b'/b) y' - b^2 y = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal, expm
from scipy.sparse.linalg import expm_multiply

from .odeint import solve_piecewise
from .errors import (
    CoordinateSingularityError,
    DegenerateCoefficientError,
    DomainError,
    IntegrationError,
    RangeError,
)
from .invariant import _check_tol, _sample_times

X_ZERO = 1e-8
DEGENERACY = 1e-6
EXP_LIMIT = 700.0


# ---------------------------------------------------------------------------
# Wei-Norman, L-basis


@dataclass(frozen=True, eq=False)
class WeiNormanL:
    times: np.ndarray
    lplus: np.ndarray
    l0: np.ndarray
    lminus: np.ndarray
    x: np.ndarray
    residual: float
    _dense: Callable = field(repr=False, default=None)

    def coefficients(self, t):
        """(l+, l0, l-) at time t inside the integrated span."""
        x, xd, l0, lm = self._dense(t)
        return xd / x, l0, lm


def integrate_wei_norman_L(profile, t0=0.0, t1=1.0, tol=1e-10, times=None):
    """Integrate the L-basis coordinates on [t0, t1].

    Raises CoordinateSingularityError if x(t) reaches |x| < 1e-8; the
    product form diverges there and the span must be split.
    """
    _check_tol(tol)
    profile.check_span(t0, t1)
    times = _sample_times(t0, t1, times)
    if t1 == t0:
        z = np.zeros_like(times)
        return WeiNormanL(times, z, z.copy(), z.copy(), np.ones_like(times), 0.0,
                          lambda t: (1.0, 0.0, 0.0, 0.0))

    def rhs(t, s):
        x, xd, l0, lm = s
        return [xd, -profile.omega_sq(t) * x, -2.0 * xd / x, -np.exp(l0)]

    def near_zero(t, s):
        return abs(s[0]) - X_ZERO

    near_zero.terminal = True
    sol = solve_piecewise(rhs, t0, t1, [1.0, 0.0, 0.0, 0.0], profile.breakpoints(t0, t1),
                          method="DOP853", rtol=tol, atol=tol * 1e-2, t_eval=times,
                          dense_output=True, events=near_zero)
    if sol.status == 1:
        tc = float(sol.t_events[0][0])
        raise CoordinateSingularityError(
            f"x(t) crosses zero near t = {tc:.10g}; split the span or use direct evolution", tc
        )
    if not sol.success:
        raise IntegrationError(sol.message)
    x, xd, l0, lm = sol.y
    residual = float(np.max(np.abs(l0 + 2.0 * np.log(np.abs(x)))))
    return WeiNormanL(times, xd / x, l0, lm, x, residual, sol.sol)


def apply_wei_norman_L_grid(ops, wn, t, psi, lam_cut=200.0):
    """Apply exp(i l+ L+) exp(l0 (i/2) L0) exp(i l- L-) to a grid vector.

    The L- factor uses the eigenpairs of the tridiagonal grid L- below
    ``lam_cut`` (raised until the discarded spectral weight of ``psi`` is
    below 1e-12); the dilation factor uses a Krylov exponential of the
    real antisymmetric dilation matrix; the L+ factor is diagonal.
    """
    lp, l0, lm = wn.coefficients(t)
    psi = np.asarray(psi, dtype=complex)
    Lm = ops.L_minus.tocsr()
    d, e = np.real(Lm.diagonal()), np.real(Lm.diagonal(1))
    total = np.vdot(psi, psi).real
    for _ in range(6):
        w, v = eigh_tridiagonal(d, e, select="v", select_range=(-np.inf, lam_cut))
        coef = v.T @ psi
        tail = total - np.vdot(coef, coef).real
        if tail <= 1e-12 * total:
            break
        lam_cut *= 2.0
    else:
        raise IntegrationError("spectral cut-off for exp(i l- L-) did not converge")
    phi = v @ (np.exp(1j * lm * w) * coef)
    # (i/2) L0 is a real antisymmetric matrix on the grid
    B = (0.5j * ops.D).real.tocsc()
    phi = expm_multiply(l0 * B, phi)
    return np.exp(0.5j * lp * ops.grid.q**2) * phi


# ---------------------------------------------------------------------------
# Wei-Norman, K-basis


@dataclass(frozen=True, eq=False)
class WeiNormanK:
    times: np.ndarray
    kplus: np.ndarray
    k0: np.ndarray
    kminus: np.ndarray
    omega0: float
    method: str
    residual: float
    _dense: Callable = field(repr=False, default=None)

    def coefficients(self, t):
        """(k+, k0, k-) at time t inside the integrated span."""
        return self._dense(t)


def _coefficients_ab(profile, omega0, t):
    w2 = profile.omega_sq(t)
    return (w2 + omega0**2) / omega0, (w2 - omega0**2) / (2.0 * omega0)


def _check_degeneracy(profile, omega0, t0, t1, n=2001):
    ts = np.linspace(t0, t1, n)
    gap = np.abs(profile.omega_sq(ts) - omega0**2)
    i = int(np.argmin(gap))
    if gap[i] < DEGENERACY:
        raise DegenerateCoefficientError(
            f"omega^2(t) = omega0^2 = {omega0**2:g} near t = {ts[i]:.10g}; "
            "the linearised K-basis equations are singular there",
            float(ts[i]),
        )


def integrate_wei_norman_K(profile, t0=0.0, t1=1.0, tol=1e-10, omega0=1.0,
                           times=None, allow_direct=False):
    """Integrate the K-basis coordinates on [t0, t1].

    The linearised second-order equation is used by default. Where
    |omega^2 - omega0^2| < 1e-6 somewhere on the span it is singular: a
    DegenerateCoefficientError is raised unless ``allow_direct`` is set,
    in which case the Riccati system is integrated directly.
    """
    _check_tol(tol)
    if not omega0 > 0:
        raise DomainError("omega0 must be positive")
    profile.check_span(t0, t1)
    times = _sample_times(t0, t1, times)
    if t1 == t0:
        z = np.zeros_like(times, dtype=complex)
        return WeiNormanK(times, z, z.copy(), z.copy(), omega0, "trivial", 0.0,
                          lambda t: (0j, 0j, 0j))
    try:
        _check_degeneracy(profile, omega0, t0, t1)
    except DegenerateCoefficientError:
        if not allow_direct:
            raise
        return _wei_norman_K_direct(profile, t0, t1, tol, omega0, times)
    return _wei_norman_K_linear(profile, t0, t1, tol, omega0, times)


def _wei_norman_K_direct(profile, t0, t1, tol, omega0, times):
    def rhs(t, s):
        kp, k0, km = s
        a, b = _coefficients_ab(profile, omega0, t)
        return [b * kp * kp - 1j * a * kp - b, 2.0 * b * kp - 1j * a, -b * np.exp(k0)]

    sol = solve_piecewise(rhs, t0, t1, np.zeros(3, complex), profile.breakpoints(t0, t1),
                          method="DOP853", rtol=tol, atol=tol * 1e-2, t_eval=times,
                          dense_output=True)
    if not sol.success:
        raise IntegrationError(sol.message)
    kp, k0, km = sol.y
    return WeiNormanK(times, kp, k0, km, omega0, "direct", 0.0,
                      lambda t: tuple(sol.sol(t)))


def _wei_norman_K_linear(profile, t0, t1, tol, omega0, times):
    def rhs(t, s):
        y, yd, k0, km, _phase = s
        a, b = _coefficients_ab(profile, omega0, t)
        bdot_over_b = profile.omega_sq_dot(t) / (profile.omega_sq(t) - omega0**2)
        ydd = -(1j * a - bdot_over_b) * yd + b * b * y
        return [yd, ydd, -2.0 * yd / y - 1j * a, -b * np.exp(k0), a]

    sol = solve_piecewise(rhs, t0, t1, np.zeros(5, complex) + np.array([1, 0, 0, 0, 0]),
                          profile.breakpoints(t0, t1), method="DOP853", rtol=tol,
                          atol=tol * 1e-2, t_eval=times, dense_output=True)
    if not sol.success:
        raise IntegrationError(sol.message)
    y, yd, k0, km, phase = sol.y
    _, b = _coefficients_ab(profile, omega0, times)
    kp = -yd / (b * y)
    logy = np.log(np.abs(y)) + 1j * np.unwrap(np.angle(y))
    residual = float(np.max(np.abs(k0 - (-2.0 * logy - 1j * phase.real))))

    def dense(t):
        yv, ydv, k0v, kmv, _ = sol.sol(t)
        _, bv = _coefficients_ab(profile, omega0, t)
        return -ydv / (bv * yv), k0v, kmv

    return WeiNormanK(times, kp, k0, km, omega0, "linear", residual, dense)


def hamiltonian_in_rep(rep, omega_sq, omega0):
    """(omega0 + w2/omega0) K0 + (w2/omega0 - omega0)(K+ + K-)/2."""
    if not omega0 > 0:
        raise DomainError("omega0 must be positive")
    return ((omega0 + omega_sq / omega0) * rep.K0
            + 0.5 * (omega_sq / omega0 - omega0) * (rep.Kplus + rep.Kminus))


def assemble_U_K(rep, wn, t):
    """exp(i k+ K+) exp(k0 K0) exp(i k- K-) in the truncated representation.

    K+ and K- are nilpotent in the truncation and the middle factor is
    diagonal, so each entry (m, n) only involves levels <= min(m, n): the
    truncated product coincides with the corresponding block of the
    infinite-dimensional operator.
    """
    kp, k0, km = (complex(v) for v in wn.coefficients(t))
    levels = np.real(np.diag(rep.K0))
    expo = k0.real * levels
    if np.max(np.abs(expo)) > EXP_LIMIT:
        raise RangeError(f"exp(k0 K0) overflows: Re k0 = {k0.real:g}")
    with np.errstate(over="raise", invalid="raise"):
        try:
            left = expm(1j * kp * rep.Kplus)
            right = expm(1j * km * rep.Kminus)
            U = left @ np.diag(np.exp(k0 * levels)) @ right
        except FloatingPointError as exc:
            raise RangeError(f"matrix exponential overflow at t = {t}") from exc
    if not np.all(np.isfinite(U)):
        raise RangeError(f"matrix exponential overflow at t = {t}")
    return U


# ---------------------------------------------------------------------------
# direct integration of i dU/dt = H U


def _expm_hermitian(H, dt):
    """exp(-i H dt) via the Hermitian eigendecomposition."""
    w, v = eigh(H)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def _expm_tridiagonal(d, e, dt):
    """exp(-i H dt) for real symmetric tridiagonal H (diagonal d, off-diagonal e)."""
    w, v = eigh_tridiagonal(d, e)
    return (v * np.exp(-1j * w * dt)) @ v.T


_SQ3 = np.sqrt(3.0)
_CF4_NODES = (0.5 - _SQ3 / 6.0, 0.5 + _SQ3 / 6.0)
_CF4_A1 = 0.25 + _SQ3 / 6.0
_CF4_A2 = 0.25 - _SQ3 / 6.0


def _propagate(rep, profile, omega0, t0, t1, n_steps, order):
    # H is real tridiagonal in the number basis: diagonal from K0, off-diagonal
    # from (K+ + K-)/2
    dt = (t1 - t0) / n_steps
    U = np.eye(rep.dim, dtype=complex)
    levels = np.real(np.diag(rep.K0))
    ladder = np.real(np.diag(rep.Kplus, -1))

    def step(w2, tau):
        d = (omega0 + w2 / omega0) * levels
        e = 0.5 * (w2 / omega0 - omega0) * ladder
        return _expm_tridiagonal(d, e, tau)

    if order == 2:
        mids = t0 + (np.arange(n_steps) + 0.5) * dt
        for w in profile.omega_sq(mids):
            U = step(w, dt) @ U
        return U
    starts = t0 + np.arange(n_steps) * dt
    w2a = profile.omega_sq(starts + _CF4_NODES[0] * dt)
    w2b = profile.omega_sq(starts + _CF4_NODES[1] * dt)
    for wa, wb in zip(w2a, w2b):
        # H is affine in omega^2 and the weights sum to 1/2, so each factor is
        # exp(-i H(w_eff) dt/2) at an effective omega^2
        early = step(2.0 * (_CF4_A1 * wa + _CF4_A2 * wb), 0.5 * dt)
        late = step(2.0 * (_CF4_A2 * wa + _CF4_A1 * wb), 0.5 * dt)
        U = late @ (early @ U)
    return U


def interior_norm(A, m):
    """Spectral norm of the leading m x m block."""
    return float(np.linalg.norm(np.asarray(A)[:m, :m], 2))


def unitarity_defect(U, m=None):
    """||U^dag U - I|| on the leading m x m block (whole matrix by default)."""
    U = np.asarray(U)
    m = U.shape[0] if m is None else m
    return interior_norm(U.conj().T @ U - np.eye(U.shape[0]), m)


def direct_evolution(rep, profile, omega0, t0, t1, tol=1e-8, order=4,
                     n_interior=None, n_start=8, max_halvings=18):
    """Integrate i dU/dt = H(t) U in the truncated representation.

    Each step is an exact exponential of a Hermitian matrix, so U is
    unitary to rounding. ``order=4`` (default) is a two-exponential
    commutator-free scheme on the Gauss nodes; ``order=2`` is the midpoint
    exponential. The step is halved until two successive results differ by at
    most ``tol`` on the leading ``n_interior`` levels (default N/4).
    """
    if order not in (2, 4):
        raise DomainError("order must be 2 or 4")
    if not omega0 > 0:
        raise DomainError("omega0 must be positive")
    profile.check_span(t0, t1)
    if t1 == t0:
        return np.eye(rep.dim, dtype=complex)
    m = rep.dim // 4 if n_interior is None else int(n_interior)
    if profile.kind == "constant":
        return _propagate(rep, profile, omega0, t0, t1, 1, 2)
    n = int(n_start)
    prev = _propagate(rep, profile, omega0, t0, t1, n, order)
    for _ in range(max_halvings):
        n *= 2
        cur = _propagate(rep, profile, omega0, t0, t1, n, order)
        if interior_norm(cur - prev, m) <= tol:
            return cur
        prev = cur
    raise IntegrationError(
        f"direct evolution did not reach tol={tol:g} with {n} steps (step size underflow)"
    )


def evolution_operator(rep, profile, omega0, t0, t1, tol=1e-8):
    """Wei-Norman K-basis operator, or direct integration where it is degenerate."""
    try:
        wn = integrate_wei_norman_K(profile, t0, t1, min(tol, 1e-10), omega0, times=[t0, t1])
    except DegenerateCoefficientError:
        return direct_evolution(rep, profile, omega0, t0, t1, tol)
    return assemble_U_K(rep, wn, t1)


# ---------------------------------------------------------------------------
# squeeze operator


class SqueezeCoefficients(NamedTuple):
    u0: float
    uplus: complex
    uminus: complex
    nu0: complex
    nuplus: complex
    numinus: complex
    printed_nu_residual: float


@dataclass(frozen=True)
class SqueezeParameter:
    xi: complex

    def __post_init__(self):
        if not np.isfinite(self.xi):
            raise DomainError("squeeze parameter must be finite")

    @property
    def r(self):
        return abs(self.xi)

    @property
    def phase(self):
        return float(np.angle(self.xi)) if self.xi != 0 else 0.0


# faithful two-dimensional (non-unitary) representation of su(1,1)
_K0_2 = np.diag([0.5, -0.5]).astype(complex)
_KP_2 = np.array([[0, 1], [0, 0]], dtype=complex)
_KM_2 = np.array([[0, 0], [-1, 0]], dtype=complex)


def _squeeze_2(xi):
    return expm(xi * _KP_2 - np.conj(xi) * _KM_2)


def _decompose_2(M):
    """Coefficients (c0, c+, c-) with M = c0 K0 + c+ K+ + c- K- (M traceless)."""
    return M[0, 0] - M[1, 1], M[0, 1], -M[1, 0]


def conjugated_generators(xi):
    """S^dag X S for X = K0 and X = K+, as coefficient triples.

    Evaluated in the two-dimensional representation, where S^dag is the
    group inverse; the adjoint action is representation independent.
    """
    S = _squeeze_2(xi)
    Sinv = np.linalg.inv(S)
    return _decompose_2(Sinv @ _K0_2 @ S), _decompose_2(Sinv @ _KP_2 @ S)


def u_coefficients(g, omega0):
    """Coefficients of I/(2 omega0) = u0 K0 + u+ K+ + u- K-."""
    gm, g0, gp = (float(v) for v in g)
    if not gm > 0:
        raise DomainError("g_minus must be positive")
    u0 = 0.5 * (gm + gp / omega0**2)
    up = 0.25 * (gp / omega0**2 - gm) + 0.5j * g0 / omega0
    return u0, up, np.conj(up)


def printed_nu_coefficients(g, omega0):
    """The closed-form nu coefficients in their published form (diagnostic only)."""
    gm, g0, _ = (float(v) for v in g)
    w = omega0
    nu0 = 0.5 * (-gm + 1 / gm - 1j * g0 / (w * gm) - g0**2 / (w**2 * gm))

    def nu(s):
        return 0.5 * (gm + s / gm - s * 1j * g0 / (2 * w * gm) - s * 1j * g0 / w
                      - s * g0**2 / (2 * w**2 * gm))

    return nu0, nu(1.0), nu(-1.0)


def squeeze_parameter(u0, uplus):
    """xi with |xi| = atanh(2|u+|/u0)/2 and arg xi = arg u+."""
    if not u0 > 0:
        raise DomainError("u0 must be positive")
    ratio = 2.0 * abs(uplus) / u0
    if ratio >= 1.0:
        raise DomainError(f"2|u+|/u0 = {ratio:.17g} >= 1: squeeze is not normalisable")
    r = 0.5 * np.arctanh(ratio)
    return SqueezeParameter(complex(r * np.exp(1j * np.angle(uplus))) if r > 0 else 0j)


def squeeze_coefficients(g, omega0):
    """u-coefficients in closed form and nu-coefficients by conjugation.

    ``printed_nu_residual`` is the largest deviation of the published
    closed-form nu coefficients from the conjugation route.
    """
    u0, up, um = u_coefficients(g, omega0)
    xi = squeeze_parameter(u0, up).xi
    _, (n0, npl, nmi) = conjugated_generators(xi)
    printed = printed_nu_coefficients(g, omega0)
    resid = max(abs(a - b) for a, b in zip(printed, (n0, npl, nmi)))
    return SqueezeCoefficients(u0, up, um, n0, npl, nmi, float(resid))


def squeeze_operator(rep, xi):
    """S(xi) = exp(xi K+ - xi* K-) via the Hermitian generator i(xi K+ - xi* K-)."""
    xi = complex(getattr(xi, "xi", xi))
    if not np.isfinite(xi):
        raise DomainError("squeeze parameter must be finite")
    G = 1j * (xi * rep.Kplus - np.conj(xi) * rep.Kminus)
    return _expm_hermitian(G, 1.0)


def disentangled_squeeze(rep, zeta):
    """exp(z K+) exp(ln(1-|z|^2) K0) exp(-z* K-) with z = (zeta/|zeta|) tanh|zeta|."""
    zeta = complex(zeta)
    if zeta == 0:
        return np.eye(rep.dim, dtype=complex)
    z = zeta / abs(zeta) * np.tanh(abs(zeta))
    levels = np.real(np.diag(rep.K0))
    mid = np.diag(np.exp(np.log1p(-abs(z) ** 2) * levels))
    return expm(z * rep.Kplus) @ mid @ expm(-np.conj(z) * rep.Kminus)


def squeeze_duality_residual(rep, U, xi, n_interior=None):
    """|| U K0 U^dag - S^dag(xi) K0 S(xi) || on the leading block."""
    m = rep.dim // 4 if n_interior is None else n_interior
    S = squeeze_operator(rep, xi)
    lhs = U @ rep.K0 @ U.conj().T
    rhs = S.conj().T @ rep.K0 @ S
    return interior_norm(lhs - rhs, m)


def conjugation_residual(rep, g, omega0, n_interior=None):
    """|| S^dag K0 S - (u0 K0 + u+ K+ + u- K-) || on the leading block."""
    m = rep.dim // 4 if n_interior is None else n_interior
    u0, up, um = u_coefficients(g, omega0)
    S = squeeze_operator(rep, squeeze_parameter(u0, up))
    lhs = S.conj().T @ rep.K0 @ S
    return interior_norm(lhs - (u0 * rep.K0 + up * rep.Kplus + um * rep.Kminus), m)


def residual_phases(rep, U, xi, n_interior=None):
    """Diagonal of S(xi) U and the size of its off-diagonal part.

    The conjugation identity only fixes U up to a factor commuting with
    K0; this returns that factor's diagonal (leading block) and the norm
    of whatever is not diagonal.
    """
    m = rep.dim // 4 if n_interior is None else n_interior
    D = squeeze_operator(rep, xi) @ U
    block = D[:m, :m]
    diag = np.diag(block).copy()
    off = float(np.linalg.norm(block - np.diag(diag), 2))
    return diag, off
