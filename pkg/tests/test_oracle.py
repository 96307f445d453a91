import numpy as np
import pytest

from su11osc.algebra import RadialGrid, build_grid_operators
from su11osc.errors import ClassicalCollisionError, DomainError, TruncationError
from su11osc.invariant import classical_invariant_value, integrate_invariant_ode
from su11osc.oracle import (
    classical_trajectory,
    expectation,
    invariant_expectation,
    populations,
    project_to_series,
    schrodinger_grid_evolution,
    series_basis,
    series_to_grid,
)
from su11osc.profiles import FrequencyProfile
from su11osc.states import eigenfunction

GRID = RadialGrid(12.0, 4000)
OPS = build_grid_operators(GRID, 0.0)


# ---------------------------------------------------------------------------
# classical oracle


@pytest.mark.parametrize("c", [0.5, 2.0])
def test_classical_energy_conserved(c):
    profile = FrequencyProfile.constant(1.3)
    traj = classical_trajectory(profile, c, 1.2, 0.4, 0.0, 10.0, 1e-12)
    e = traj.energy(profile, c)
    assert np.abs(e - e[0]).max() / e[0] < 1e-8
    assert len(traj) == 201 and traj[0].q == 1.2
    assert all(s.q > 0 for s in traj)


def test_classical_collision_without_barrier():
    with pytest.raises(ClassicalCollisionError) as info:
        classical_trajectory(FrequencyProfile.constant(1.0), 0.0, 1.0, 0.0, 0.0, 3.0, 1e-10)
    assert info.value.time == pytest.approx(np.pi / 2, abs=1e-5)


def test_classical_initial_position_must_be_positive():
    with pytest.raises(DomainError):
        classical_trajectory(FrequencyProfile.constant(1.0), 1.0, 0.0, 1.0)


@pytest.mark.parametrize("profile,t0,t1", [
    (FrequencyProfile.power_law(1.0, 2.0), 1.0, 4.0),
    (FrequencyProfile.sampled(np.linspace(0, 5, 26), 1 + 0.4 * np.sin(np.linspace(0, 5, 26))), 0.0, 5.0),
])
def test_classical_invariant_is_conserved(profile, t0, t1):
    c = 0.7
    times = np.linspace(t0, t1, 50)
    traj = classical_trajectory(profile, c, 1.0, 0.3, t0, t1, 1e-12, times)
    g = integrate_invariant_ode(profile, None, t0, t1, 1e-12, times).array
    vals = classical_invariant_value(g, traj.q, traj.p, c)
    assert np.abs(vals - vals[0]).max() / abs(vals[0]) < 1e-8


# ---------------------------------------------------------------------------
# grid Schrodinger evolution


def test_crank_nicolson_preserves_norm_and_stationary_states():
    psi0 = eigenfunction(1, 0.75, 1.0, GRID).astype(complex)
    psi = schrodinger_grid_evolution(OPS, FrequencyProfile.constant(1.0), psi0, 0.0, 1.0, 1e-3)
    assert GRID.norm(psi) == pytest.approx(1.0, abs=1e-10)
    assert abs(GRID.inner(psi0, psi) - np.exp(-2j * 1.75)) < 1e-4


def test_record_times_and_observer():
    psi0 = eigenfunction(0, 0.75, 1.0, GRID).astype(complex)
    seen = []
    psi, snaps = schrodinger_grid_evolution(
        OPS, FrequencyProfile.constant(2.0), psi0, 0.0, 0.1, 0.01,
        record_times=[0.0, 0.05, 0.1], observer=lambda t, p: seen.append(t))
    assert len(snaps) == 3 and np.array_equal(snaps[0], psi0) and np.array_equal(snaps[-1], psi)
    assert len(seen) == 10 and seen[-1] == pytest.approx(0.1)


def test_grid_evolution_argument_checks():
    psi0 = eigenfunction(0, 0.75, 1.0, GRID)
    with pytest.raises(DomainError):
        schrodinger_grid_evolution(OPS, FrequencyProfile.constant(1.0), psi0, 0.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        schrodinger_grid_evolution(OPS, FrequencyProfile.constant(1.0), psi0[:-1], 0.0, 1.0, 0.1)
    same = schrodinger_grid_evolution(OPS, FrequencyProfile.constant(1.0), psi0, 0.5, 0.5, 0.1)
    assert np.array_equal(same, psi0)


def test_invariant_expectation_constant_for_quench():
    profile = FrequencyProfile.constant(2.0)
    psi0 = eigenfunction(0, 0.75, 1.0, GRID).astype(complex)
    times = np.linspace(0, 0.5, 6)
    _, snaps = schrodinger_grid_evolution(OPS, profile, psi0, 0.0, 0.5, 5e-4, record_times=times)
    g = integrate_invariant_ode(profile, (1.0, 0.0, 1.0), 0.0, 0.5, 1e-12, times).array
    vals = [invariant_expectation(OPS, g[:, i], s) for i, s in enumerate(snaps)]
    # <I> = 2 omega0 k0 in the ground state
    assert np.allclose(vals, 1.5, rtol=1e-5)
    assert expectation(OPS, OPS.hamiltonian(1.0), psi0) == pytest.approx(1.5, rel=1e-5)


# ---------------------------------------------------------------------------
# grid <-> discrete series


def test_series_basis_sign_convention():
    rows, at0 = series_basis(GRID, 0.75, 1.0, 4)
    assert np.allclose(rows[1], -eigenfunction(1, 0.75, 1.0, GRID), atol=1e-12)
    assert np.all(at0 == 0)
    with pytest.raises(DomainError):
        series_basis(GRID, 0.2, 1.0, 4)


def test_projection_round_trip():
    amps = np.zeros(16, complex)
    amps[:3] = [0.6, 0.48j, -0.64]
    psi = series_to_grid(GRID, amps, 0.75, 1.0)
    back = project_to_series(GRID, psi, 0.75, 1.0, 16)
    assert np.abs(back - amps).max() < 1e-10
    assert np.allclose(populations(GRID, psi, 0.75, 1.0, 4), [0.36, 0.2304, 0.4096, 0.0], atol=1e-10)


def test_projection_reports_truncation():
    wide = eigenfunction(0, 0.75, 30.0, GRID)
    with pytest.raises(TruncationError, match="increase N"):
        project_to_series(GRID, wide, 0.75, 1.0, 8)
