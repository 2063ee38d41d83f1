import io

import numpy as np
import pytest

from qbohm import fields as F, qcalc, well
from qbohm.errors import DomainError, GridSizeError, SingularityError
from qbohm.fields import ComplexField, RealField, SpatialGrid
from qbohm.qcalc import DeformationParams


def test_grid_validation():
    with pytest.raises(GridSizeError):
        SpatialGrid(0, 1, 2)
    with pytest.raises(DomainError):
        SpatialGrid(1, 0, 10)
    with pytest.raises(SingularityError):
        SpatialGrid(0, 2, 10, "physical_x", DeformationParams(-1.0))
    with pytest.raises(ValueError):
        SpatialGrid(0, 1, 10, "polar")


def test_grid_spacing_and_readonly_nodes():
    g = SpatialGrid(0, 1, 11)
    assert g.spacing == pytest.approx(0.1)
    with pytest.raises(ValueError):
        g.nodes[0] = 5.0


def test_deformed_grid_round_trip():
    p = DeformationParams(3.0)
    gx = SpatialGrid(0, 2, 101, "physical_x", p)
    gu = gx.to_deformed()
    assert gu.kind == "deformed_u"
    assert gu.physical_bounds == pytest.approx((0.0, 2.0), abs=1e-14)
    np.testing.assert_allclose(gu.factor, 1 + 3.0 * gu.x, rtol=1e-13)
    back = gu.to_physical()
    assert (back.x_min, back.x_max) == pytest.approx((0.0, 2.0), abs=1e-14)


def test_field_kind_validation():
    g = SpatialGrid(0, 1, 5)
    with pytest.raises(ValueError):
        ComplexField(g, np.zeros(5), "rho")
    with pytest.raises(ValueError):
        RealField(g, np.zeros(5), "psi")
    with pytest.raises(DomainError):
        RealField(g, [0, -1, 0, 0, 0], "rho")
    with pytest.raises(ValueError):
        RealField(g, np.zeros(4))


def test_fields_are_immutable():
    g = SpatialGrid(0, 1, 5)
    f = RealField(g, np.ones(5))
    with pytest.raises(ValueError):
        f.values[0] = 2.0


@pytest.mark.parametrize("gammaL", [-0.5, 0.0, 1.0, 5.0])
def test_psi_phi_map_matches_closed_form(gammaL):
    spec = well.WellSpec.from_gammaL(gammaL)
    psi, phi = well.sample_state(spec, 1, 1001)
    np.testing.assert_allclose(F.psi_to_phi(psi).values, phi.values, atol=1e-12)
    np.testing.assert_allclose(F.phi_to_psi(F.psi_to_phi(psi)).values, psi.values, atol=1e-12)


def test_psi_phi_identity_at_gamma_zero():
    g = SpatialGrid(0, 1, 11)
    psi = ComplexField(g, np.exp(1j * g.x), "psi")
    np.testing.assert_array_equal(F.psi_to_phi(psi).values, psi.values)


def test_transform_kind_checks():
    g = SpatialGrid(0, 1, 11)
    psi = ComplexField(g, np.ones(11), "psi")
    with pytest.raises(ValueError):
        F.phi_to_psi(psi)
    with pytest.raises(ValueError):
        F.density_relation(RealField(g, np.ones(11), "varrho_q"))


def test_norm_is_measure_consistent(rng):
    g = SpatialGrid(0, 1, 2001, "physical_x", DeformationParams(2.0))
    c = rng.normal(size=4) + 1j * rng.normal(size=4)
    vals = sum(ck * np.sin((k + 1) * np.pi * g.x) for k, ck in enumerate(c))
    psi = ComplexField(g, vals, "psi").normalized()
    assert psi.norm() == pytest.approx(1.0, rel=1e-12)
    assert F.psi_to_phi(psi).norm() == pytest.approx(1.0, rel=1e-12)
    rho = psi.density()
    varrho = F.density_relation(rho)
    assert qcalc.integral(rho) == pytest.approx(qcalc.q_integral(varrho), rel=1e-12)
    np.testing.assert_allclose(F.density_relation_inverse(varrho).values, rho.values, rtol=1e-12)


def test_well_densities_related_by_factor():
    spec = well.WellSpec.from_gammaL(1.0)
    psi, phi = well.sample_state(spec, 1, 501)
    np.testing.assert_allclose(F.density_relation(psi.density()).values, phi.density().values, atol=1e-14)


def test_as_helpers():
    spec = well.WellSpec.from_gammaL(1.0)
    psi, phi = well.sample_state(spec, 2, 201)
    np.testing.assert_allclose(F.as_rho(phi).values, psi.density().values, atol=1e-14)
    np.testing.assert_allclose(F.as_varrho(psi).values, phi.density().values, atol=1e-14)
    assert F.as_phi(phi) is phi and F.as_psi(psi) is psi


# -- polar decomposition -------------------------------------------------------

def test_polar_real_positive_field():
    g = SpatialGrid(0, 1, 101)
    dens, S = F.polar_decompose(ComplexField(g, 1 + g.x, "phi_q"))
    np.testing.assert_allclose(dens.values, (1 + g.x) ** 2)
    np.testing.assert_array_equal(S.values, 0.0)
    assert dens.kind == "varrho_q" and S.kind == "phase_S"


def test_polar_global_phase_covariance():
    g = SpatialGrid(0, 1, 201)
    base = ComplexField(g, (1 + g.x) * np.exp(2j * g.x), "psi")
    alpha, hbar = 0.7, 1.3
    _, S0 = F.polar_decompose(base, hbar)
    _, S1 = F.polar_decompose(base.with_values(base.values * np.exp(1j * alpha)), hbar)
    np.testing.assert_allclose(S1.values - S0.values, hbar * alpha, atol=1e-12)


def test_polar_plane_wave_on_u_grid():
    p = DeformationParams(1.5)
    g = SpatialGrid.deformed(0, 2, 801, p)
    k, hbar = 25.0, 0.5
    phi = ComplexField(g, np.exp(1j * k * g.u), "phi_q")
    _, S = F.polar_decompose(phi, hbar)
    np.testing.assert_allclose(S.values, hbar * k * g.u, atol=1e-10)


def test_polar_reconstruction_away_from_nodes():
    spec = well.WellSpec.from_gammaL(2.0)
    _, phi = well.sample_state(spec, 3, 1001)
    phi = phi.with_values(phi.values * np.exp(1j * 5 * phi.grid.u))
    dens, S = F.polar_decompose(phi)
    rec = np.sqrt(dens.values) * np.exp(1j * S.values)
    keep = ~F.node_mask(dens)
    np.testing.assert_allclose(rec[keep], phi.values[keep], atol=1e-10)
    # unwrapped: neighbouring jumps below pi away from nodes
    assert np.all(np.abs(np.diff(S.values[keep])) < np.pi)


def test_phase_gradient_ignores_sign_flips():
    spec = well.WellSpec.from_gammaL(1.0)
    _, phi = well.sample_state(spec, 3, 2001)
    _, S = F.polar_decompose(phi)
    np.testing.assert_allclose(F.phase_gradient(S).values, 0.0, atol=1e-12)


# -- nodes and signed amplitude ------------------------------------------------

def test_node_mask_covers_walls_and_interior_nodes():
    spec = well.WellSpec.from_gammaL(1.0)
    psi, _ = well.sample_state(spec, 2, 1001)
    m = F.node_mask(psi.density())
    assert m[:3].all() and m[-3:].all()
    node_x = np.expm1(spec.gamma * spec.L_q / 2) / spec.gamma
    i = int(np.argmin(np.abs(psi.grid.x - node_x)))
    assert m[i - 2: i + 3].all()
    assert m.sum() < 20


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_signed_amplitude_recovers_sine(n):
    x = np.linspace(0, 1, 1001)
    a = np.sin(n * np.pi * x)
    rec = F.signed_amplitude(a * a)
    np.testing.assert_allclose(rec, a, atol=1e-12)


def test_signed_amplitude_grid_point_on_node():
    x = np.linspace(0, 1, 1001)   # n=2 node exactly at x=0.5 (index 500)
    a = np.sin(2 * np.pi * x)
    np.testing.assert_allclose(F.signed_amplitude(a * a), a, atol=1e-12)


def test_density_derivatives_match_analytic():
    x = np.linspace(0, 1, 2001)
    g = SpatialGrid(0, 1, 2001)
    rho = RealField(g, np.sin(2 * np.pi * x) ** 2, "rho")
    v, d1, d2 = F.density_derivatives(rho, qcalc.x_derivative)
    np.testing.assert_allclose(d1, 2 * np.pi * np.sin(4 * np.pi * x), atol=1e-9)
    np.testing.assert_allclose(d2, 8 * np.pi ** 2 * np.cos(4 * np.pi * x), atol=1e-6)


# -- CSV -----------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["physical_x", "deformed_u"])
def test_csv_round_trip(kind, tmp_path):
    spec = well.WellSpec.from_gammaL(0.7)
    psi, phi = well.sample_state(spec, 2, 51, kind)
    phi = phi.with_values(phi.values * np.exp(0.3j))
    path = tmp_path / "phi.csv"
    F.write_field_csv(phi, path)
    back = F.read_field_csv(path)
    assert back.kind == "phi_q" and back.grid == phi.grid
    np.testing.assert_array_equal(back.values, phi.values)
    buf = io.StringIO()
    F.write_field_csv(psi.density(), buf)
    text = buf.getvalue()
    assert text.startswith("# kind=rho\n") and "x,value\n" in text
    back = F.read_field_csv(io.StringIO(text))
    np.testing.assert_array_equal(back.values, psi.density().values)
