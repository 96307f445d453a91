"""Matrix representations of the SU(2) / SU(1,1) bases of the singular oscillator.

Two representations are built here:

* the positive discrete series D+(k0), truncated to N levels, where K0 is
  diagonal and K+ / K- are the ladder operators;
* a uniform radial finite-difference grid on (0, q_max], where the
  L-basis  L- = p^2/2 + c/q^2,  L0 = (pq + qp)/2,  L+ = q^2/2  is realised
  by sparse tridiagonal matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError
from .special import radial_function

C_MIN = -0.125


@dataclass(frozen=True, eq=False)
class DiscreteSeriesRep:
    bargmann_index: float
    dim: int
    K0: np.ndarray
    Kplus: np.ndarray
    Kminus: np.ndarray

    @property
    def levels(self):
        return np.arange(self.dim)


def build_discrete_series(k0, N):
    """Truncated D+(k0): K0|n> = (n+k0)|n>, K+|n> = sqrt((n+1)(n+2k0))|n+1>."""
    if not k0 > 0:
        raise DomainError(f"Bargmann index must be positive, got {k0}")
    if int(N) != N or N < 2:
        raise DomainError(f"truncation N must be an integer >= 2, got {N}")
    N = int(N)
    n = np.arange(N, dtype=float)
    K0 = np.diag(n + k0).astype(complex)
    ladder = np.sqrt((n[:-1] + 1.0) * (n[:-1] + 2.0 * k0))
    Kp = np.diag(ladder, -1).astype(complex)
    Km = Kp.conj().T.copy()
    for m in (K0, Kp, Km):
        m.setflags(write=False)
    return DiscreteSeriesRep(float(k0), N, K0, Kp, Km)


def _comm(a, b):
    return a @ b - b @ a


def verify_su11_structure(rep, edge_buffer=2):
    """Largest entry of [K0,K+]-K+, [K0,K-]+K-, [K+,K-]+2K0 on indices < N - edge_buffer."""
    if not 0 <= edge_buffer < rep.dim:
        raise DomainError("edge_buffer must satisfy 0 <= edge_buffer < N")
    m = rep.dim - edge_buffer
    K0, Kp, Km = rep.K0, rep.Kplus, rep.Kminus
    residuals = (
        _comm(K0, Kp) - Kp,
        _comm(K0, Km) + Km,
        _comm(Kp, Km) + 2 * K0,
    )
    return float(max(np.abs(r[:m, :m]).max() for r in residuals))


def casimir_matrix(K0, Kp, Km):
    """K0^2 - (K+K- + K-K+)/2, equal to k0(k0-1) on D+(k0)."""
    return K0 @ K0 - 0.5 * (Kp @ Km + Km @ Kp)


# ---------------------------------------------------------------------------
# radial grid


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid q_i = i h, i = 1..n_points, h = q_max / n_points.

    q = 0 and q = q_max + h are Dirichlet ghost points.
    """

    q_max: float
    n_points: int

    def __post_init__(self):
        if not self.q_max > 0:
            raise DomainError("q_max must be positive")
        if int(self.n_points) != self.n_points or self.n_points < 64:
            raise DomainError("n_points must be an integer >= 64")

    @property
    def h(self):
        return self.q_max / self.n_points

    @property
    def q_min(self):
        return self.h

    @property
    def q(self):
        return self.h * np.arange(1, self.n_points + 1)

    def integrate(self, f, f_at_zero=0.0):
        """Trapezoidal rule over [0, q_max]; f is sampled on ``q``."""
        f = np.asarray(f)
        return self.h * (np.sum(f[:-1]) + 0.5 * f[-1] + 0.5 * f_at_zero)

    def inner(self, f, g, f0=0.0, g0=0.0):
        """<f, g> = integral of conj(f) g."""
        return self.integrate(np.conj(f) * g, np.conj(f0) * g0)

    def norm(self, f, f0=0.0):
        return float(np.sqrt(np.real(self.inner(f, f, f0, f0))))


@dataclass(frozen=True, eq=False)
class GridOperators:
    """Sparse finite-difference matrices of q^2, p^2, c/q^2 and (pq+qp)/2."""

    grid: RadialGrid
    c: float
    Q2: sp.csr_matrix
    P2: sp.csr_matrix
    SING: sp.csr_matrix
    D: sp.csr_matrix

    @property
    def L_minus(self):
        return 0.5 * self.P2 + self.SING

    @property
    def L_zero(self):
        return self.D

    @property
    def L_plus(self):
        return 0.5 * self.Q2

    def combination(self, g_minus, g0, g_plus):
        """g- L- + g0 L0 + g+ L+ (the invariant, or H with g = (1, 0, omega^2))."""
        return g_minus * self.L_minus + g0 * self.D + g_plus * self.L_plus

    def hamiltonian(self, omega_sq):
        return (0.5 * self.P2 + 0.5 * omega_sq * self.Q2 + self.SING).tocsr()


def _check_coupling(c):
    if not c > C_MIN:
        raise DomainError(
            f"coupling c = {c} violates c > -1/8 (the wave function falls into the centre)"
        )


def build_grid_operators(grid, c):
    """Three-point Laplacian with Dirichlet ends; central-difference dilation."""
    _check_coupling(c)
    n, h, q = grid.n_points, grid.h, grid.q
    Q2 = sp.diags(q * q, format="csr")
    off = np.ones(n - 1)
    P2 = sp.diags([-off, 2.0 * np.ones(n), -off], [-1, 0, 1], format="csr") / h**2
    SING = sp.diags(c / (q * q), format="csr")
    # (pq + qp)/2 = -i A, A real antisymmetric with A[i,i+1] = (q_i + q_{i+1}) / 4h
    upper = (q[:-1] + q[1:]) / (4.0 * h)
    D = sp.diags([1j * upper, -1j * upper], [-1, 1], format="csr")
    return GridOperators(grid, float(c), Q2, P2, SING, D)


class GridKBasis(NamedTuple):
    K0: sp.csr_matrix
    Kplus: sp.csr_matrix
    Kminus: sp.csr_matrix


def k_basis_from_grid(ops, omega0):
    """Rescaled SU(1,1) basis on the grid; 2 omega0 K0 is the static Hamiltonian."""
    if not omega0 > 0:
        raise DomainError("omega0 must be positive")
    A = 0.5 * omega0 * ops.Q2 - 0.5 * ops.P2 / omega0 - ops.SING / omega0
    K0 = 0.5 * (0.5 * omega0 * ops.Q2 + 0.5 * ops.P2 / omega0 + ops.SING / omega0)
    Kp = 0.5 * (A - 1j * ops.D)
    Km = Kp.conj().T
    return GridKBasis(K0.tocsr(), Kp.tocsr(), Km.tocsr())


def lowest_eigenpairs(matrix, count):
    """Lowest eigenpairs of a real symmetric tridiagonal sparse matrix."""
    m = sp.csr_matrix(matrix)
    d = np.real(m.diagonal())
    e = np.real(m.diagonal(1))
    w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1))
    # fix the sign so that each vector is positive next to q = 0
    signs = np.sign(v[0])
    signs[signs == 0] = 1.0
    return w, v * signs


def casimir_value(basis, n_probe=3):
    """Common value of the Casimir K0^2 - (K+K- + K-K+)/2.

    For a DiscreteSeriesRep the value is read off the diagonal of the
    interior block. For a grid basis it is the mean expectation value in
    the ``n_probe`` lowest eigenvectors of K0 (smooth grid states).
    """
    if isinstance(basis, DiscreteSeriesRep):
        C = casimir_matrix(basis.K0, basis.Kplus, basis.Kminus)
        interior = np.real(np.diag(C))[: max(1, basis.dim - 2)]
        return float(np.mean(interior))
    K0, Kp, Km = basis
    _, vecs = lowest_eigenpairs(K0, n_probe)
    vals = []
    for v in vecs.T:
        Cv = K0 @ (K0 @ v) - 0.5 * (Kp @ (Km @ v) + Km @ (Kp @ v))
        vals.append(np.real(np.vdot(v, Cv)) / np.real(np.vdot(v, v)))
    return float(np.mean(vals))


def _plus_index(c):
    return 0.5 * (1.0 + np.sqrt(0.25 + 2.0 * c))


def smooth_probes(grid, c, count=3):
    """Smooth test vectors (analytic radial eigenfunctions) for operator identities."""
    omega_p = max(1.0, (8.0 / grid.q_max) ** 2)
    k0 = _plus_index(c)
    return [radial_function(n, k0, omega_p, grid.q) for n in range(count)]


def commutator_residual(A, B, target, probes):
    """max over probes of ||([A, B] - target) v|| / ||v||."""
    worst = 0.0
    for v in probes:
        r = A @ (B @ v) - B @ (A @ v) - target @ v
        worst = max(worst, np.linalg.norm(r) / np.linalg.norm(v))
    return float(worst)


def l_basis_residuals(ops, probes=None):
    """Residuals of [(i/2)L0, L+-] = +-L+- and [L+, L-] = i L0 on smooth probes."""
    if probes is None:
        probes = smooth_probes(ops.grid, ops.c)
    B0 = 0.5j * ops.D
    Lp, Lm = ops.L_plus, ops.L_minus
    return {
        "[iL0/2,L+]-L+": commutator_residual(B0, Lp, Lp, probes),
        "[iL0/2,L-]+L-": commutator_residual(B0, Lm, -Lm, probes),
        "[L+,L-]-iL0": commutator_residual(Lp, Lm, 1j * ops.D, probes),
    }


def k_basis_residuals(basis, probes):
    """Residuals of [K0,K+-] = +-K+- and [K+,K-] = -2K0 on smooth probes."""
    K0, Kp, Km = basis
    return {
        "[K0,K+]-K+": commutator_residual(K0, Kp, Kp, probes),
        "[K0,K-]+K-": commutator_residual(K0, Km, -Km, probes),
        "[K+,K-]+2K0": commutator_residual(Kp, Km, -2 * K0, probes),
    }


def gamma_basis_residual(ops, probes=None):
    """Residual of the SU(1,1) relations for G0 = L0/2, G+- = -2 L- +- L+/8.

    Diagnostic only: the basis is taken exactly as printed and no
    threshold is implied.
    """
    if probes is None:
        probes = smooth_probes(ops.grid, ops.c)
    G0 = 0.5 * ops.D
    Gp = -2.0 * ops.L_minus + ops.L_plus / 8.0
    Gm = -2.0 * ops.L_minus - ops.L_plus / 8.0
    return max(
        commutator_residual(G0, Gp, Gp, probes),
        commutator_residual(G0, Gm, -Gm, probes),
        commutator_residual(Gp, Gm, -2.0 * G0, probes),
    )
