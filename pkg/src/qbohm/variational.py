"""
Lagrangian and Hamiltonian densities of the deformed and PDM pictures.

Both pictures describe the same dynamics: integrated densities give the
same action and energy once the ``-hbar^2 gamma^2 / 8 m0`` shift of the
position-dependent-mass picture is included.  The Fisher terms are the
functionals of :mod:`qbohm.fisher` with the same quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy.integrate import simpson

from . import qcalc
from .bohmian import check_series, phase_series, time_derivative
from .fields import (
    ComplexField,
    RealField,
    as_phi,
    as_psi,
    as_rho,
    as_varrho,
    phase_gradient,
    polar_decompose,
    signed_amplitude,
)
from .fisher import euler_lagrange_fisher
from .solver import TimeSeries, mass_profile, potential_values

Scalar = Union[float, np.ndarray, RealField]


def _arr(v: Scalar, n: int) -> np.ndarray:
    if isinstance(v, RealField):
        return np.asarray(v.values)
    return np.asarray(v, dtype=float) * np.ones(n)


def _fisher_density_q(varrho: RealField) -> np.ndarray:
    """``(D varrho)^2 / varrho`` as ``4 (D b)^2``."""
    b = varrho.with_values(signed_amplitude(varrho))
    return 4.0 * qcalc.deformed_derivative(b).values ** 2


def _fisher_density_pdm(rho: RealField, mass: Optional[RealField], m0: float) -> np.ndarray:
    """``(m0/m) rho'^2 / rho`` as ``4 (m0/m) a'^2``."""
    a = rho.with_values(signed_amplitude(rho))
    w = rho.grid.factor ** 2 if mass is None else m0 / mass.values
    return 4.0 * w * qcalc.x_derivative(a).values ** 2


# ---------------------------------------------------------------------------
# Lagrangian densities and actions
# ---------------------------------------------------------------------------

def lagrangian_density_q(varrho: RealField, S: RealField, dS_dt: Scalar, V=None,
                         hbar: float = 1.0, m0: float = 1.0) -> RealField:
    """``[dS/dt + (D S)^2/2m0 + V] varrho + (hbar^2/8m0) (D varrho)^2/varrho``."""
    varrho = as_varrho(varrho)
    g = varrho.grid
    ds = phase_gradient(S, hbar).values
    bracket = _arr(dS_dt, g.n_points) + ds * ds / (2.0 * m0) + potential_values(V, g)
    dens = bracket * varrho.values + hbar ** 2 / (8.0 * m0) * _fisher_density_q(varrho)
    return RealField(g, dens)


def lagrangian_density_std(rho: RealField, S: RealField, dS_dt: Scalar, V=None,
                           hbar: float = 1.0, m0: float = 1.0,
                           mass: Optional[RealField] = None) -> RealField:
    """``[dS/dt + (S')^2/2m + V] rho + (hbar^2/8m0)(m0/m) rho'^2/rho - hbar^2 gamma^2 rho / 8m0``."""
    rho = as_rho(rho)
    g = rho.grid
    m = mass_profile(g, m0).values if mass is None else mass.values
    ds = phase_gradient(S, hbar, deformed=False).values
    bracket = _arr(dS_dt, g.n_points) + ds * ds / (2.0 * m) + potential_values(V, g)
    shift = hbar ** 2 * g.params.gamma ** 2 / (8.0 * m0)
    dens = ((bracket - shift) * rho.values
            + hbar ** 2 / (8.0 * m0) * _fisher_density_pdm(rho, mass, m0))
    return RealField(g, dens)


def _stationary(state: ComplexField, hbar: float):
    phi = as_phi(state)
    varrho, S = polar_decompose(phi, hbar)
    return phi, varrho, S


def action_q(state: Union[ComplexField, TimeSeries], V=None, hbar: float = 1.0, m0: float = 1.0,
             energy: Optional[float] = None, duration: float = 1.0) -> float:
    """Deformed action ``int dt int L_q d_q x``.

    A single field is treated as stationary with ``dS/dt = -energy`` over
    ``duration``; a ``TimeSeries`` uses the numerical phase derivative on
    its interior slices and integrates in time with Simpson's rule.
    """
    if isinstance(state, TimeSeries):
        return _series_action(state, V, hbar, m0, picture="q")
    if energy is None:
        raise ValueError("a stationary action needs the energy")
    phi, varrho, S = _stationary(state, hbar)
    lag = lagrangian_density_q(varrho, S, -energy, V, hbar, m0)
    return duration * qcalc.q_integral(lag)


def action_std(state: Union[ComplexField, TimeSeries], V=None, hbar: float = 1.0, m0: float = 1.0,
               energy: Optional[float] = None, duration: float = 1.0,
               mass: Optional[RealField] = None) -> float:
    """Action of the PDM picture, ``int dt int L dx``; see :func:`action_q`."""
    if isinstance(state, TimeSeries):
        return _series_action(state, V, hbar, m0, picture="std", mass=mass)
    if energy is None:
        raise ValueError("a stationary action needs the energy")
    psi = as_psi(state)
    rho, S = polar_decompose(psi, hbar)
    lag = lagrangian_density_std(rho, S, -energy, V, hbar, m0, mass)
    return duration * qcalc.integral(lag)


def _series_action(series: TimeSeries, V, hbar, m0, picture, mass=None) -> float:
    check_series(series)
    grid = series.frames[0].grid
    S_all = phase_series(series, hbar)
    dS = time_derivative(S_all, series.dt)
    vals = []
    for k, f in enumerate(series.frames[1:-1]):
        S = RealField(grid, S_all[k + 1], "phase_S")
        if picture == "q":
            lag = lagrangian_density_q(as_varrho(f), S, dS[k], V, hbar, m0)
            vals.append(qcalc.q_integral(lag))
        else:
            lag = lagrangian_density_std(as_rho(f), S, dS[k], V, hbar, m0, mass)
            vals.append(qcalc.integral(lag))
    return float(simpson(np.asarray(vals), dx=series.dt))


# ---------------------------------------------------------------------------
# Hamiltonian densities and energies
# ---------------------------------------------------------------------------

def hamiltonian_density_q(varrho: RealField, S: RealField, V=None,
                          hbar: float = 1.0, m0: float = 1.0) -> RealField:
    """``varrho (D S)^2/2m0 + V varrho + (hbar^2/8m0)(D varrho)^2/varrho``."""
    varrho = as_varrho(varrho)
    g = varrho.grid
    ds = phase_gradient(S, hbar).values
    dens = (varrho.values * (ds * ds / (2.0 * m0) + potential_values(V, g))
            + hbar ** 2 / (8.0 * m0) * _fisher_density_q(varrho))
    return RealField(g, dens)


def hamiltonian_density_std(rho: RealField, S: RealField, V=None, hbar: float = 1.0,
                            m0: float = 1.0, mass: Optional[RealField] = None) -> RealField:
    """``rho (S')^2/2m + V rho + (hbar^2/8m0)(m0/m) rho'^2/rho - hbar^2 gamma^2 rho/8m0``."""
    rho = as_rho(rho)
    g = rho.grid
    m = mass_profile(g, m0).values if mass is None else mass.values
    ds = phase_gradient(S, hbar, deformed=False).values
    shift = hbar ** 2 * g.params.gamma ** 2 / (8.0 * m0)
    dens = (rho.values * (ds * ds / (2.0 * m) + potential_values(V, g) - shift)
            + hbar ** 2 / (8.0 * m0) * _fisher_density_pdm(rho, mass, m0))
    return RealField(g, dens)


def energy_q_forms(phi: ComplexField, V=None, hbar: float = 1.0, m0: float = 1.0) -> Dict[str, float]:
    """Energy of a normalized state from the three deformed-picture forms.

    ``sandwich``: ``int Phi* H Phi d_q x`` with ``H = -hbar^2/2m0 D^2 + V``;
    ``gradient``: ``int [hbar^2/2m0 |D Phi|^2 + V |Phi|^2] d_q x``;
    ``polar``:    ``int [varrho (D S)^2/2m0 + V varrho] d_q x + hbar^2 I_q / 8m0``.
    """
    phi = as_phi(phi)
    g = phi.grid
    Vv = potential_values(V, g)
    d1 = qcalc.deformed_derivative(phi)
    d2 = qcalc.deformed_derivative(d1).values
    c = hbar ** 2 / (2.0 * m0)
    sandwich = qcalc.q_integral(phi, np.real(np.conj(phi.values) * (-c * d2 + Vv * phi.values)))
    dens = np.abs(phi.values) ** 2
    gradient = qcalc.q_integral(phi, c * np.abs(d1.values) ** 2 + Vv * dens)
    varrho, S = polar_decompose(phi, hbar)
    polar = qcalc.q_integral(hamiltonian_density_q(varrho, S, V, hbar, m0))
    return {"sandwich": float(np.real(sandwich)), "gradient": float(gradient), "polar": float(polar)}


def energy_q(phi: ComplexField, V=None, hbar: float = 1.0, m0: float = 1.0) -> float:
    """Polar-form deformed energy (see :func:`energy_q_forms`)."""
    return energy_q_forms(phi, V, hbar, m0)["polar"]


def energy_std_forms(psi: ComplexField, V=None, hbar: float = 1.0, m0: float = 1.0,
                     mass: Optional[RealField] = None) -> Dict[str, float]:
    """Energy in the PDM picture.

    ``gradient``: ``int [hbar^2/2m |Psi'|^2 + V |Psi|^2] dx - hbar^2 gamma^2/8m0``;
    ``polar``:    ``int H dx`` with :func:`hamiltonian_density_std`.
    """
    psi = as_psi(psi)
    g = psi.grid
    m = mass_profile(g, m0).values if mass is None else mass.values
    d1 = qcalc.x_derivative(psi).values
    dens = np.abs(psi.values) ** 2
    shift = hbar ** 2 * g.params.gamma ** 2 / (8.0 * m0) * qcalc.integral(psi, dens)
    gradient = qcalc.integral(psi, hbar ** 2 / (2.0 * m) * np.abs(d1) ** 2
                              + potential_values(V, g) * dens) - shift
    rho, S = polar_decompose(psi, hbar)
    polar = qcalc.integral(hamiltonian_density_std(rho, S, V, hbar, m0, mass))
    return {"gradient": float(gradient), "polar": float(polar)}


def energy_std(psi: ComplexField, V=None, hbar: float = 1.0, m0: float = 1.0,
               mass: Optional[RealField] = None) -> float:
    """Polar-form PDM energy (see :func:`energy_std_forms`)."""
    return energy_std_forms(psi, V, hbar, m0, mass)["polar"]


@dataclass(frozen=True, eq=False)
class DensityFields:
    lagrangian_q: RealField
    lagrangian_std: RealField
    hamiltonian_q: RealField
    hamiltonian_std: RealField


def density_fields(state: ComplexField, energy: float, V=None, hbar: float = 1.0,
                   m0: float = 1.0, mass: Optional[RealField] = None) -> DensityFields:
    """All four densities of a stationary state with ``dS/dt = -energy``."""
    varrho, Sq = polar_decompose(as_phi(state), hbar)
    rho, S = polar_decompose(as_psi(state), hbar)
    return DensityFields(
        lagrangian_q=lagrangian_density_q(varrho, Sq, -energy, V, hbar, m0),
        lagrangian_std=lagrangian_density_std(rho, S, -energy, V, hbar, m0, mass),
        hamiltonian_q=hamiltonian_density_q(varrho, Sq, V, hbar, m0),
        hamiltonian_std=hamiltonian_density_std(rho, S, V, hbar, m0, mass),
    )


# ---------------------------------------------------------------------------
# Hamilton's field equations
# ---------------------------------------------------------------------------

def hamilton_field_residuals(series: TimeSeries, V=None, hbar: float = 1.0,
                             m0: float = 1.0) -> Tuple[RealField, RealField]:
    """Residuals of ``d varrho/dt = dH_q/dS`` and ``dS/dt = -dH_q/d varrho``.

    ``dH_q/dS = -D(varrho D S)/m0`` with ``varrho D S = hbar Im(Phi* D Phi)``,
    ``dH_q/d varrho = (D S)^2/2m0 + V + (hbar^2/8m0) dI_q/d varrho``.
    Each is returned as the pointwise max over interior time slices; the
    second is NaN on node neighbourhoods.
    """
    check_series(series)
    grid = series.frames[0].grid
    Vv = potential_values(V, grid)
    S_all = phase_series(series, hbar)
    dS = time_derivative(S_all, series.dt)
    dens = np.stack([np.abs(as_phi(f).values) ** 2 for f in series.frames])
    drho = time_derivative(dens, series.dt)
    cont, hj = [], []
    for k, f in enumerate(series.frames[1:-1]):
        phi = as_phi(f)
        flux = hbar * np.imag(np.conj(phi.values) * qcalc.deformed_derivative(phi).values)
        dH_dS = -qcalc.deformed_derivative(RealField(grid, flux / m0)).values
        cont.append(drho[k] - dH_dS)
        Sk = RealField(grid, S_all[k + 1], "phase_S")
        ds = phase_gradient(Sk, hbar).values
        el = euler_lagrange_fisher(phi).values
        dH_drho = ds * ds / (2.0 * m0) + Vv + hbar ** 2 / (8.0 * m0) * el
        hj.append(dS[k] + dH_drho)
    res_c = np.max(np.abs(np.stack(cont)), axis=0)
    h = np.abs(np.stack(hj))
    with np.errstate(invalid="ignore"):
        res_h = np.where(np.all(np.isnan(h), axis=0), np.nan,
                         np.max(np.where(np.isnan(h), -np.inf, h), axis=0))
    return RealField(grid, res_c), RealField(grid, res_h)
