import numpy as np
import pytest

from qbohm import qcalc, well
from qbohm.errors import DomainError, ResolutionError, SingularityError
from qbohm.fields import ComplexField, RealField, SpatialGrid, psi_to_phi
from qbohm.qcalc import DeformationParams
from qbohm.solver import PotentialSpec, mass_profile, propagate, solve_direct, solve_pct

WELL = PotentialSpec.infinite_well(1.0)


def test_mass_profile_examples():
    g0 = SpatialGrid(0, 1, 11)
    np.testing.assert_array_equal(mass_profile(g0, 2.0).values, 2.0)
    g = SpatialGrid(0, 1, 11, "physical_x", DeformationParams(1.0))
    m = mass_profile(g, 1.0).values
    assert m[0] == 1.0 and m[-1] == pytest.approx(0.25)


def test_well_requires_matching_domain():
    g = SpatialGrid(0, 2, 101)
    with pytest.raises(DomainError):
        solve_pct(WELL, g, 1)


def test_infinite_well_width_positive():
    with pytest.raises(DomainError):
        PotentialSpec.infinite_well(0.0)


def test_resolution_error():
    g = well.WellSpec().grid(21)
    with pytest.raises(ResolutionError):
        solve_pct(WELL, g, 10)
    with pytest.raises(DomainError):
        solve_direct(WELL, g, 0)


def test_potential_evaluation():
    assert np.isinf(WELL(1.5)) and WELL(0.5) == 0.0
    g = SpatialGrid(0, 1, 11)
    tab = PotentialSpec.tabulated(RealField(g, g.x ** 2, "potential_V"))
    assert tab(0.55) == pytest.approx(0.3025, rel=1e-12)
    assert tab.gradient(0.5) == pytest.approx(1.0, rel=1e-12)
    cb = PotentialSpec.callback(lambda x: 3 * x)
    assert cb.gradient(0.2) == pytest.approx(3.0, rel=1e-8)


@pytest.mark.parametrize("route", [solve_pct, solve_direct])
def test_standard_box(route):
    sol = route(WELL, well.WellSpec().grid(2000), 3)
    exact = np.pi ** 2 * np.arange(1, 4) ** 2 / 2
    np.testing.assert_allclose(sol.energies, exact, rtol=1e-5)


def test_pct_gamma_one_ground_state():
    sol = solve_pct(WELL, well.WellSpec(gamma=1.0).grid(2000), 1)
    assert sol.energies[0] == pytest.approx(np.pi ** 2 / (2 * np.log(2) ** 2), rel=1e-4)


@pytest.mark.parametrize("gammaL", [-0.5, 1.0, 5.0])
def test_states_match_closed_form(gammaL):
    spec = well.WellSpec.from_gammaL(gammaL)
    for route in (solve_pct, solve_direct):
        sol = route(WELL, spec.grid(2000), 3)
        for n in range(1, 4):
            psi = sol.psi_states[n - 1].values.real
            np.testing.assert_allclose(psi, well.eigenfunction_psi(spec, n, spec.grid(2000).x), atol=1e-4)


def test_solution_invariants():
    spec = well.WellSpec.from_gammaL(2.0)
    sol = solve_pct(WELL, spec.grid(1500), 4)
    assert np.all(np.diff(sol.energies) > 0)
    gram = np.array([[qcalc.q_integral(a, np.conj(a.values) * b.values).real for b in sol.phi_states]
                     for a in sol.phi_states])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-8)
    for psi, phi in zip(sol.psi_states, sol.phi_states):
        assert psi.norm() == pytest.approx(1.0, rel=1e-12)
        np.testing.assert_allclose(psi_to_phi(psi).values, phi.values, atol=1e-8)
        # positive slope at the left wall
        assert psi.values[1].real > 0


def test_pct_on_deformed_grid_needs_no_resampling():
    spec = well.WellSpec.from_gammaL(3.0)
    g = spec.grid(1001, "deformed_u")
    sol = solve_pct(WELL, g, 2)
    np.testing.assert_allclose(sol.phi_states[0].values.real, well.eigenfunction_phi(spec, 1, g.x), atol=1e-5)


@pytest.mark.parametrize("gammaL", [-0.5, 0.0, 1.0, 5.0])
def test_isospectral_five_states(gammaL):
    g = well.WellSpec.from_gammaL(gammaL).grid(2000)
    a = solve_pct(WELL, g, 5).energies
    b = solve_direct(WELL, g, 5).energies
    np.testing.assert_allclose(a, b, rtol=1e-4)


def test_isospectral_with_smooth_potential():
    # V(x) = 40 x^2 inside the deformed box; both routes see the same V(x)
    p = DeformationParams(1.5)
    V = PotentialSpec.callback(lambda x: 40.0 * x ** 2, lambda x: 80.0 * x)
    g = SpatialGrid(0, 1, 3000, "physical_x", p)
    a = solve_pct(V, g, 3).energies
    b = solve_direct(V, g, 3).energies
    np.testing.assert_allclose(a, b, rtol=1e-4)


def test_harmonic_oscillator_in_large_box():
    V = PotentialSpec.callback(lambda x: 0.5 * x ** 2)
    g = SpatialGrid(-12, 12, 3001)
    sol = solve_pct(V, g, 4)
    np.testing.assert_allclose(sol.energies, np.arange(4) + 0.5, rtol=1e-4)


def test_singular_domain():
    with pytest.raises(SingularityError):
        well.WellSpec(gamma=-1.0)
    with pytest.raises(SingularityError):
        WELL.check_domain(SpatialGrid(0, 0.4, 11, "physical_x", DeformationParams(-2.0)))


# -- propagation ---------------------------------------------------------------

def _superposition(spec, n_points, weights=(1.0, 1.0)):
    g = spec.grid(n_points, "deformed_u")
    v = sum(w * well.eigenfunction_phi(spec, n + 1, g.x) for n, w in enumerate(weights))
    return ComplexField(g, v, "phi_q").normalized()


def test_propagate_stationary_state():
    spec = well.WellSpec.from_gammaL(1.0)
    g = spec.grid(801, "deformed_u")
    sol = solve_pct(WELL, g, 1)
    phi0 = sol.phi_states[0]
    dt, steps = 1e-3, 200
    ser = propagate(phi0, WELL, dt, steps, store_every=50)
    assert len(ser) == 5 and ser.dt == pytest.approx(50 * dt)
    E = sol.energies[0]
    for t, f in zip(ser.times, ser.frames):
        np.testing.assert_allclose(np.abs(f.values), np.abs(phi0.values), atol=1e-10)
        # Crank-Nicolson phase: 2 arctan(E dt/2)/dt per unit time
        w = 2 * np.arctan(E * dt / 2) / dt
        np.testing.assert_allclose(f.values, phi0.values * np.exp(-1j * w * t), atol=1e-9)


def test_propagate_norm_and_beat_period():
    spec = well.WellSpec.from_gammaL(1.0)
    phi0 = _superposition(spec, 401)
    sol = solve_pct(WELL, phi0.grid, 2)
    period = 2 * np.pi / (sol.energies[1] - sol.energies[0])
    steps = 1000
    ser = propagate(phi0, WELL, period / steps, steps, store_every=10)
    norms = np.array([f.norm() for f in ser.frames])
    assert np.max(np.abs(norms - 1.0)) < 1e-7
    # density returns after one beat period (CN phase error is O(dt^2))
    np.testing.assert_allclose(ser.frames[-1].density().values, phi0.density().values, atol=1e-3)
    mid = ser.frames[len(ser) // 2].density().values
    assert np.max(np.abs(mid - phi0.density().values)) > 0.5


def test_propagate_physical_grid_round_trip():
    spec = well.WellSpec.from_gammaL(2.0)
    g = spec.grid(801)
    phi0 = ComplexField(g, well.eigenfunction_phi(spec, 1, g.x), "phi_q")
    ser = propagate(phi0, WELL, 1e-3, 20)
    assert ser.frames[-1].grid == g
    np.testing.assert_allclose(np.abs(ser.frames[-1].values), np.abs(phi0.values), atol=1e-6)


def test_propagate_rejects_bad_input():
    spec = well.WellSpec()
    phi0 = _superposition(spec, 101)
    with pytest.raises(DomainError):
        propagate(phi0, WELL, 0.0, 10)
    with pytest.raises(DomainError):
        propagate(phi0, WELL, 1e-3, 0)
    tiny = ComplexField(spec.grid(4, "deformed_u"), np.zeros(4), "phi_q")
    with pytest.raises(ResolutionError):
        propagate(tiny, WELL, 1e-3, 1)
