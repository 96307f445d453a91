"""Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances.

Conventions used throughout: the truncated representation has N = 128 levels
(N = 256 for the structure relations) and operator comparisons are taken on
the leading N/8 levels ("interior").
"""
import numpy as np
import pytest

from su11osc.algebra import (
    RadialGrid,
    build_discrete_series,
    build_grid_operators,
    casimir_matrix,
    lowest_eigenpairs,
    verify_su11_structure,
)
from su11osc.evolution import (
    apply_wei_norman_L_grid,
    assemble_U_K,
    direct_evolution,
    integrate_wei_norman_K,
    integrate_wei_norman_L,
    interior_norm,
    squeeze_coefficients,
    squeeze_duality_residual,
    squeeze_operator,
    squeeze_parameter,
    unitarity_defect,
)
from su11osc.invariant import (
    integrate_invariant_ode,
    invariant_via_ermakov,
    invariant_via_propagation,
    power_law_c1,
    power_law_invariant,
)
from su11osc.oracle import (
    invariant_expectation,
    project_to_series,
    schrodinger_grid_evolution,
)
from su11osc.profiles import FrequencyProfile
from su11osc.states import (
    bargmann_indices,
    barut_girardello_state,
    casimir_eigenvalue,
    eigen_residual,
    eigenfunction,
    invariant_eigenstate,
    perelomov_state,
    phase_factors,
    zeta_from_z,
)

N = 128
INTERIOR = N // 8
COUPLINGS = (0.0, 0.5, 1.0, 2.0)


def _indices(c):
    return [k for k in bargmann_indices(c) if k is not None]


def _sampled_profile():
    t = np.linspace(-0.5, 11.0, 461)
    return FrequencyProfile.sampled(t, 1.5 + 0.5 * np.sin(t))


def _g_at(profile, g_init, t0, t1):
    return integrate_invariant_ode(profile, g_init, t0, t1, 1e-12, times=[t0, t1]).array[:, -1]


def _xi(g, omega0):
    sc = squeeze_coefficients(g, omega0)
    return squeeze_parameter(sc.u0, sc.uplus)


# ---------------------------------------------------------------------------
# 1. algebra


def test_1a_structure_relations(acceptance_report):
    worst = max(
        verify_su11_structure(build_discrete_series(k, 256), edge_buffer=2)
        for c in COUPLINGS for k in _indices(c)
    )
    assert acceptance_report("1a structure residual, N=256 interior, both branches", worst, 1e-12)


def test_1a_structure_relations_relative(acceptance_report):
    # diagnostic: entries of K+K- reach (N+k0)^2, so rounding alone leaves ~eps (N+k0)^2
    worst = 0.0
    for c in COUPLINGS:
        for k in _indices(c):
            rep = build_discrete_series(k, 256)
            scale = float(np.abs(rep.Kplus @ rep.Kminus).max())
            worst = max(worst, verify_su11_structure(rep, edge_buffer=2) / scale)
    assert acceptance_report("1a structure residual relative to largest K+K- entry (diagnostic)", worst, 1e-15)


def test_1b_casimir_identity(acceptance_report):
    cs = np.concatenate([np.linspace(-0.125 + 1e-9, 4.0, 2001), [0.0, 0.5, 1.0, 2.0, 4.0]])
    worst = 0.0
    for c in cs:
        for k in _indices(c):
            worst = max(worst, abs(k * (k - 1) - casimir_eigenvalue(c)))
    assert acceptance_report("1b Casimir k0(k0-1) = -(3-8c)/16, both branches", worst, 1e-14)


def test_1b_casimir_matrix_diagonal(acceptance_report):
    # K0^2 and K+K- each grow like (n+k0)^2, so the cancellation is judged relative to that
    worst = 0.0
    for c in COUPLINGS:
        for k in _indices(c):
            rep = build_discrete_series(k, 256)
            C = np.real(np.diag(casimir_matrix(rep.K0, rep.Kplus, rep.Kminus)))[:8]
            scale = (np.arange(8) + k) ** 2
            worst = max(worst, float(np.max(np.abs(C - casimir_eigenvalue(c)) / scale)))
    assert acceptance_report("1b Casimir matrix diagonal, relative to (n+k0)^2, n<8", worst, 1e-14)


# ---------------------------------------------------------------------------
# 2. invariant routes


ROUTE_CASES = [
    ("constant", FrequencyProfile.constant(1.3), 0.0, 10.0),
    ("power_law a=1", FrequencyProfile.power_law(1.0, 1.0), 1.0, 11.0),
    ("power_law a=2", FrequencyProfile.power_law(1.0, 2.0), 1.0, 11.0),
    ("sampled", _sampled_profile(), 0.0, 10.0),
]


@pytest.mark.parametrize("label,profile,t0,t1", ROUTE_CASES, ids=[c[0] for c in ROUTE_CASES])
def test_2_invariant_routes(acceptance_report, label, profile, t0, t1):
    times = np.linspace(t0, t1, 501)
    ode = integrate_invariant_ode(profile, None, t0, t1, 1e-12, times)
    erm = invariant_via_ermakov(profile, None, t0, t1, 1e-12, times)
    prop = invariant_via_propagation(profile, None, t0, t1, 1e-12, times)
    dev = max(ode.max_deviation(erm), ode.max_deviation(prop), erm.max_deviation(prop))
    ok = acceptance_report(f"2 routes agree pointwise ({label})", dev, 1e-7)
    drift = max(ode.conservation_drift(), erm.conservation_drift(), prop.conservation_drift())
    ok &= acceptance_report(f"2 g+g- - g0^2 drift ({label})", drift, 1e-8)
    assert ok


# ---------------------------------------------------------------------------
# 3. closed form


@pytest.mark.parametrize("alpha,omega0", [(1.0, 1.0), (2.0, 1.0), (2.0, 2.0)])
def test_3_closed_form_solves_invariant_equation(acceptance_report, alpha, omega0):
    t = np.linspace(0.5, 10.0, 400)
    c1 = power_law_c1(omega0, alpha, 1.0)
    h = 1e-4 * t

    def g(s):
        return power_law_invariant(omega0, alpha, c1, s)

    gt = g(t)
    dg = (g(t - 2 * h) - 8 * g(t - h) + 8 * g(t + h) - g(t + 2 * h)) / (12 * h)
    w2 = omega0**2 * t**alpha
    rhs = np.array([-2 * gt[1], w2 * gt[0] - gt[2], 2 * w2 * gt[1]])
    res = float(np.max(np.abs(dg - rhs) / np.maximum(1.0, np.abs(gt).max(axis=0))))
    assert acceptance_report(f"3 closed form ODE residual (alpha={alpha}, omega0={omega0})", res, 1e-6)


def test_3_closed_form_alpha_zero(acceptance_report):
    t = np.linspace(0.01, 20.0, 2000)
    worst = 0.0
    for omega0 in (0.5, 1.0, 2.0):
        gm = power_law_invariant(omega0, 0.0, 1.0, t)[0]
        worst = max(worst, float(np.max(np.abs(gm - gm[0]))))
    assert acceptance_report("3 alpha=0 gives constant g-", worst, 1e-10)


# ---------------------------------------------------------------------------
# 4. evolution equivalence


EVOLUTION_CASES = [
    ("quench 1->2", FrequencyProfile.constant(2.0), 1.0, 0.0, 0.5),
    ("power_law a=2", FrequencyProfile.power_law(1.0, 2.0), 0.8, 1.0, 1.5),
    ("sampled", _sampled_profile(), 1.0, 0.2, 0.8),
]


@pytest.mark.parametrize("label,profile,omega0,t0,t1", EVOLUTION_CASES, ids=[c[0] for c in EVOLUTION_CASES])
def test_4_wei_norman_matches_direct(acceptance_report, label, profile, omega0, t0, t1):
    rep = build_discrete_series(0.75, N)
    wn = integrate_wei_norman_K(profile, t0, t1, 1e-12, omega0)
    UK = assemble_U_K(rep, wn, t1)
    UD = direct_evolution(rep, profile, omega0, t0, t1, 1e-9, n_interior=INTERIOR)
    ok = acceptance_report(f"4 K-basis product vs direct ({label})", interior_norm(UK - UD, INTERIOR), 1e-6)
    ok &= acceptance_report(f"4 unitarity of product ({label})", unitarity_defect(UK, INTERIOR), 1e-8)
    ok &= acceptance_report(f"4 unitarity of direct ({label})", unitarity_defect(UD, INTERIOR), 1e-8)
    assert ok


def test_4_l_basis_grid_route_populations(acceptance_report):
    profile, t1 = FrequencyProfile.constant(2.0), 0.5
    rep = build_discrete_series(0.75, N)
    UK = assemble_U_K(rep, integrate_wei_norman_K(profile, 0.0, t1, 1e-12, 1.0), t1)
    grid = RadialGrid(12.0, 8000)
    ops = build_grid_operators(grid, 0.0)
    psi0 = eigenfunction(0, 0.75, 1.0, grid)
    psi = apply_wei_norman_L_grid(ops, integrate_wei_norman_L(profile, 0.0, t1, 1e-12), t1, psi0)
    pops_grid = np.abs(project_to_series(grid, psi, 0.75, 1.0, 40)[:20]) ** 2
    dev = float(np.max(np.abs(pops_grid - np.abs(UK[:20, 0]) ** 2)))
    assert acceptance_report("4 L-basis (grid) vs K-basis populations", dev, 1e-6)


# ---------------------------------------------------------------------------
# 5. squeeze duality


def test_5_squeeze_duality_quench(acceptance_report):
    profile, t1 = FrequencyProfile.constant(2.0), 0.5
    rep = build_discrete_series(0.75, N)
    U = assemble_U_K(rep, integrate_wei_norman_K(profile, 0.0, t1, 1e-12, 1.0), t1)
    xi = _xi(_g_at(profile, (1.0, 0.0, 1.0), 0.0, t1), 1.0)
    res = squeeze_duality_residual(rep, U, xi, INTERIOR)
    assert acceptance_report(f"5 U K0 U^dag = S^dag K0 S, quench (|xi|={xi.r:.3f})", res, 1e-6)


def test_5_squeeze_duality_power_law(acceptance_report):
    profile = FrequencyProfile.power_law(1.0, 2.0)
    rep = build_discrete_series(0.75, N)
    worst, rs = 0.0, []
    for t1 in (1.5, 2.0):
        U = direct_evolution(rep, profile, 1.0, 1.0, t1, 1e-10, n_interior=INTERIOR)
        xi = _xi(_g_at(profile, None, 1.0, t1), 1.0)
        rs.append(xi.r)
        worst = max(worst, squeeze_duality_residual(rep, U, xi, INTERIOR))
    assert acceptance_report(f"5 U K0 U^dag = S^dag K0 S, power law a=2 (|xi| up to {max(rs):.3f})", worst, 1e-6)


# ---------------------------------------------------------------------------
# 6. spectrum


@pytest.mark.parametrize("c", [0.0, 1.0])
def test_6_spectrum(acceptance_report, c):
    k = bargmann_indices(c)[1]
    grid = RadialGrid(12.0, 40000)
    ops = build_grid_operators(grid, c)
    H = ops.hamiltonian(1.0)
    exact = 2.0 * (np.arange(11) + k)
    evals, _ = lowest_eigenpairs(H, 11)
    ok = acceptance_report(f"6 grid eigenvalues n<=10 (c={c}, relative)", float(np.max(np.abs(evals - exact) / exact)), 1e-5)
    F = np.array([eigenfunction(n, k, 1.0, grid) for n in range(11)])
    ok &= acceptance_report(f"6 orthonormality n<=10 (c={c})", float(np.max(np.abs(grid.h * F @ F.T - np.eye(11)))), 1e-8)
    res = max(eigen_residual(H, F[n], exact[n]) for n in range(11))
    ok &= acceptance_report(f"6 eigenvalue residual n<=10 (c={c})", res, 1e-5)
    assert ok


# ---------------------------------------------------------------------------
# 7. coherent states


Z_VALUES = [0.1, 0.4, 0.5, 0.3 + 0.3j, -0.45j, 0.5 * np.exp(2.5j)]


def test_7_barut_girardello_eigenstates(acceptance_report):
    worst = 0.0
    for k in (0.25, 0.75, 1.25):
        rep = build_discrete_series(k, N)
        for z in Z_VALUES:
            a = barut_girardello_state(rep, z).amplitudes
            worst = max(worst, float(np.max(np.abs((rep.Kminus @ a - z * a)[:-1]))))
    assert acceptance_report("7 K- psi = z psi coefficient-wise (|z|<=0.5)", worst, 1e-10)


def test_7_perelomov_equals_squeezed_vacuum(acceptance_report):
    worst = 0.0
    for k in (0.25, 0.75, 1.25):
        rep = build_discrete_series(k, N)
        for z in Z_VALUES:
            p = perelomov_state(rep, z).amplitudes
            S = squeeze_operator(rep, zeta_from_z(z))
            worst = max(worst, abs(1.0 - abs(np.vdot(p, S[:, 0])) ** 2))
    assert acceptance_report("7 Perelomov vs S(zeta)|0> infidelity", worst, 1e-8)


# ---------------------------------------------------------------------------
# 8. end to end


def test_8_quench_populations(acceptance_report):
    profile, t1 = FrequencyProfile.constant(2.0), 1.0
    rep = build_discrete_series(0.75, N)
    S = squeeze_operator(rep, _xi(_g_at(profile, (1.0, 0.0, 1.0), 0.0, t1), 1.0))
    predicted = np.abs(S.conj().T[:20, 0]) ** 2
    grid = RadialGrid(12.0, 8000)
    ops = build_grid_operators(grid, 0.0)
    psi = schrodinger_grid_evolution(ops, profile, eigenfunction(0, 0.75, 1.0, grid), 0.0, t1, 5e-4)
    pops = np.abs(project_to_series(grid, psi, 0.75, 1.0, 40)[:20]) ** 2
    assert acceptance_report("8 quench: grid populations vs |<n|S^dag|0>|^2", float(np.max(np.abs(pops - predicted))), 1e-4)


PHASE_CASES = [
    ("constant", FrequencyProfile.constant(1.0), (1.0, 0.0, 1.0), 0.0, 2.0),
    ("quench 1->2", FrequencyProfile.constant(2.0), (1.0, 0.0, 1.0), 0.0, 1.0),
    ("power_law a=2", FrequencyProfile.power_law(1.0, 2.0), None, 1.0, 2.0),
]


@pytest.mark.parametrize("label,profile,g_init,t0,t1", PHASE_CASES, ids=[c[0] for c in PHASE_CASES])
def test_8_exact_state_phases(acceptance_report, label, profile, g_init, t0, t1):
    rep = build_discrete_series(0.75, N)
    U = direct_evolution(rep, profile, 1.0, t0, t1, 1e-10, n_interior=INTERIOR)
    traj = integrate_invariant_ode(profile, g_init, t0, t1, 1e-12, times=np.linspace(t0, t1, 4001))
    pf = phase_factors(traj, profile, 1.0)
    grid = RadialGrid(16.0, 6000)
    worst = 0.0
    for n in range(4):
        u = project_to_series(grid, invariant_eigenstate(n, 0.75, 1.0, traj.array[:, 0], grid)[0], 0.75, 1.0, N)
        w = project_to_series(grid, invariant_eigenstate(n, 0.75, 1.0, traj.array[:, -1], grid)[0], 0.75, 1.0, N)
        amp = np.vdot(w, U @ u)
        worst = max(worst, abs(np.exp(1j * pf.phase(n, 0.75)[-1]) - amp))
    assert acceptance_report(f"8 exact-state phases vs direct evolution ({label})", worst, 1e-4)


# ---------------------------------------------------------------------------
# 9. quantum invariant


@pytest.mark.parametrize("label,profile,t0,t1", [
    ("power_law a=2", FrequencyProfile.power_law(1.0, 2.0), 1.0, 2.0),
    ("sampled", _sampled_profile(), 0.0, 1.0),
], ids=["power_law", "sampled"])
def test_9_quantum_invariant_conservation(acceptance_report, label, profile, t0, t1):
    grid = RadialGrid(12.0, 8000)
    ops = build_grid_operators(grid, 0.0)
    w0 = float(np.sqrt(profile.omega_sq(t0)))
    psi0 = (eigenfunction(0, 0.75, w0, grid) + eigenfunction(1, 0.75, w0, grid)) / np.sqrt(2)
    traj = integrate_invariant_ode(profile, None, t0, t1, 1e-12, times=np.linspace(t0, t1, 21))
    _, snaps = schrodinger_grid_evolution(ops, profile, psi0, t0, t1, 5e-4, record_times=traj.times)
    vals = np.array([invariant_expectation(ops, traj.array[:, i], s) for i, s in enumerate(snaps)])
    drift = float(np.max(np.abs(vals - vals[0])) / abs(vals[0]))
    assert acceptance_report(f"9 <I> constant along grid evolution ({label})", drift, 1e-5)
