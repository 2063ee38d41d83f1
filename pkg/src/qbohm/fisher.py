"""
Fisher-information functionals, score function and Cramer-Rao checks.

Three functionals of the same state are compared:

* ``I_F[rho]``      standard Fisher information ``int (rho')^2/rho dx``
* ``I[rho]``        mass-weighted ``int (m0/m)(rho')^2/rho dx``
* ``I_q[varrho_q]`` deformed ``int (D varrho)^2/varrho d_q x``

Gradient-squared-over-density integrands are evaluated as
``4 (a')^2`` with ``a`` the sign-restored square root of the density, which
is smooth through nodes and walls where ``rho'^2/rho`` is 0/0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from . import qcalc
from .fields import (
    ComplexField,
    RealField,
    as_phi,
    as_psi,
    as_rho,
    as_varrho,
    density_derivatives,
    node_mask,
    signed_amplitude,
)

log = logging.getLogger(__name__)

BOUND_TOL = 1e-10

FISHER_COLUMNS = (
    "gamma_L", "n", "I_pdm", "I_q", "I_F", "mean_x", "var_x",
    "cr_q_lhs", "cr_q_rhs", "cr_pdm", "cr_std", "margin_q",
)

State = Union[ComplexField, RealField]


def _mass_weight(rho: RealField, mass: Optional[RealField], m0: float) -> np.ndarray:
    """``m0 / m(x)`` on the grid; defaults to ``(1 + gamma x)^2``."""
    if mass is None:
        return rho.grid.factor ** 2
    return m0 / mass.values


def fisher_pdm(rho: State, mass: Optional[RealField] = None, m0: float = 1.0) -> float:
    """Mass-weighted Fisher information ``int (m0/m) (rho')^2 / rho dx``."""
    rho = as_rho(rho)
    a = rho.with_values(signed_amplitude(rho))
    da = qcalc.x_derivative(a).values
    return 4.0 * qcalc.integral(rho, _mass_weight(rho, mass, m0) * da * da)


def fisher_deformed(varrho: State) -> float:
    """Deformed Fisher information ``int (D varrho)^2 / varrho d_q x``."""
    varrho = as_varrho(varrho)
    b = varrho.with_values(signed_amplitude(varrho))
    db = qcalc.deformed_derivative(b).values
    return 4.0 * qcalc.q_integral(varrho, db * db)


def fisher_standard(rho: State) -> float:
    """Standard Fisher information ``int (rho')^2 / rho dx`` (mass locality ignored)."""
    rho = as_rho(rho)
    a = rho.with_values(signed_amplitude(rho))
    da = qcalc.x_derivative(a).values
    return 4.0 * qcalc.integral(rho, da * da)


def expectation_p2(psi: ComplexField, hbar: float = 1.0) -> float:
    """``<p^2> = hbar^2 int |psi'|^2 dx``."""
    psi = as_psi(psi)
    d = qcalc.x_derivative(psi).values
    return hbar ** 2 * qcalc.integral(psi, np.abs(d) ** 2)


def expectation_x(rho: State, power: int = 1, measure: str = "standard") -> float:
    """``<x^power>`` as ``int x^p rho dx`` or, with ``measure='q'``, ``int x^p varrho d_q x``."""
    if measure == "q":
        v = as_varrho(rho)
        return qcalc.q_integral(v, v.grid.x ** power * v.values)
    r = as_rho(rho)
    return qcalc.integral(r, r.grid.x ** power * r.values)


# ---------------------------------------------------------------------------
# Score function and functional derivatives
# ---------------------------------------------------------------------------

def score_function(varrho: State) -> RealField:
    """``Omega_q = D ln varrho``; NaN on node neighbourhoods."""
    varrho = as_varrho(varrho)
    d = qcalc.deformed_derivative(varrho).values
    mask = node_mask(varrho)
    with np.errstate(divide="ignore", invalid="ignore"):
        om = np.where(mask, np.nan, d / varrho.values)
    return varrho.with_values(om)


def score_second_moment(varrho: State) -> float:
    """``<Omega_q^2>`` under the q-measure.

    Masked samples use the regular limit ``4 (D sqrt varrho)^2`` of
    ``Omega^2 varrho``.
    """
    varrho = as_varrho(varrho)
    om = score_function(varrho).values
    b = varrho.with_values(signed_amplitude(varrho))
    reg = 4.0 * qcalc.deformed_derivative(b).values ** 2
    integrand = np.where(np.isnan(om), reg, om * om * varrho.values)
    return qcalc.q_integral(varrho, integrand)


def euler_lagrange_fisher(varrho: State) -> RealField:
    """``delta I_q / delta varrho = (D varrho / varrho)^2 - 2 D^2 varrho / varrho``.

    Multiplied by ``hbar^2 / 8 m0`` this is the deformed quantum potential.
    NaN on node neighbourhoods.
    """
    varrho = as_varrho(varrho)
    v, d1, d2 = density_derivatives(varrho, qcalc.deformed_derivative)
    mask = node_mask(varrho)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (d1 / v) ** 2 - 2.0 * d2 / v
    return varrho.with_values(np.where(mask, np.nan, out))


def functional_derivative_pdm(rho: State, mass: Optional[RealField] = None, m0: float = 1.0) -> RealField:
    """``delta I / delta rho = w (rho'/rho)^2 - 2 (w rho')' / rho`` with ``w = m0/m``."""
    rho = as_rho(rho)
    w = _mass_weight(rho, mass, m0)
    v, d1, d2 = density_derivatives(rho, qcalc.x_derivative)
    # (w rho')' = w' rho' + w rho''
    dw = qcalc.x_derivative(rho.with_values(w)).values
    d2 = dw * d1 + w * d2
    mask = node_mask(rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = w * (d1 / v) ** 2 - 2.0 * d2 / v
    return rho.with_values(np.where(mask, np.nan, out))


def invariance_fields(state: State, mass: Optional[RealField] = None, m0: float = 1.0):
    """Both sides of ``I_q - dI_q/dvarrho = I - dI/drho``, as arrays (NaN at nodes)."""
    lhs = fisher_deformed(state) - euler_lagrange_fisher(state).values
    rhs = fisher_pdm(state, mass, m0) - functional_derivative_pdm(state, mass, m0).values
    return lhs, rhs


# ---------------------------------------------------------------------------
# Kinetic identities
# ---------------------------------------------------------------------------

class KineticIdentities(NamedTuple):
    I_pdm: float
    I_pdm_from_T_prime: float
    I_q: float
    I_q_from_T: float
    T: float
    T_prime: float


def kinetic_terms(state: ComplexField, hbar: float = 1.0, m0: float = 1.0,
                  mass: Optional[RealField] = None) -> KineticIdentities:
    """Fisher values next to ``8 m0/hbar^2`` times the two kinetic expectations.

    ``<T>  = hbar^2/(2 m0) int |D phi|^2 d_q x`` (von Roos / deformed picture)
    ``<T'> = hbar^2/2 int |psi'|^2 / m dx``       (``p (1/m) p / 2`` ordering)
    """
    phi = as_phi(state)
    psi = as_psi(state)
    dphi = qcalc.deformed_derivative(phi).values
    t = hbar ** 2 / (2.0 * m0) * qcalc.q_integral(phi, np.abs(dphi) ** 2)
    dpsi = qcalc.x_derivative(psi).values
    inv_m = (psi.grid.factor ** 2 / m0) if mass is None else 1.0 / mass.values
    t_prime = hbar ** 2 / 2.0 * qcalc.integral(psi, inv_m * np.abs(dpsi) ** 2)
    scale = 8.0 * m0 / hbar ** 2
    return KineticIdentities(
        I_pdm=fisher_pdm(psi, mass, m0),
        I_pdm_from_T_prime=scale * t_prime,
        I_q=fisher_deformed(phi),
        I_q_from_T=scale * t,
        T=t,
        T_prime=t_prime,
    )


def kinetic_identities(solution, n: int, mass: Optional[RealField] = None) -> KineticIdentities:
    """:func:`kinetic_terms` for state ``n`` (1-based) of an ``EigenSolution``."""
    return kinetic_terms(solution.psi_states[n - 1], solution.hbar, solution.m0, mass)


# ---------------------------------------------------------------------------
# Cramer-Rao
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FisherReport:
    """Fisher values and Cramer-Rao products for one state."""

    I_pdm: float
    I_q: float
    I_F: float
    mean_x: float
    var_x: float
    gamma: float
    gamma_L: Optional[float] = None
    n: Optional[int] = None

    @property
    def cr_deformed_lhs(self) -> float:
        return self.I_q * self.var_x

    @property
    def cr_deformed_rhs(self) -> float:
        return 1.0 + 2.0 * self.gamma * self.mean_x

    @property
    def cr_standard(self) -> float:
        return self.I_F * self.var_x

    @property
    def cr_pdm(self) -> float:
        return self.I_pdm * self.var_x

    @property
    def margin_q(self) -> float:
        return self.cr_deformed_lhs - self.cr_deformed_rhs

    @property
    def deformed_bound_violated(self) -> bool:
        return self.margin_q < -BOUND_TOL

    @property
    def pdm_bound_holds(self) -> bool:
        return self.cr_pdm >= 1.0

    @property
    def standard_bound_holds(self) -> bool:
        return self.cr_standard >= 1.0

    @property
    def identity_gap(self) -> float:
        """``I_q - (I - gamma^2)``; zero for densities vanishing at the ends."""
        return self.I_q - (self.I_pdm - self.gamma ** 2)

    def as_row(self) -> dict:
        return {
            "gamma_L": self.gamma_L, "n": self.n,
            "I_pdm": self.I_pdm, "I_q": self.I_q, "I_F": self.I_F,
            "mean_x": self.mean_x, "var_x": self.var_x,
            "cr_q_lhs": self.cr_deformed_lhs, "cr_q_rhs": self.cr_deformed_rhs,
            "cr_pdm": self.cr_pdm, "cr_std": self.cr_standard, "margin_q": self.margin_q,
        }


def cramer_rao_check(state: State, mass: Optional[RealField] = None, m0: float = 1.0,
                     gamma_L: Optional[float] = None, n: Optional[int] = None) -> FisherReport:
    """Evaluate all three Fisher functionals and the moments of ``state`` by quadrature.

    A violation of the deformed bound ``I_q (dx)^2 >= 1 + 2 gamma <x>`` is
    logged at error level; it cannot happen for a valid normalized state.
    """
    rho = as_rho(state)
    mean = expectation_x(rho, 1)
    var = expectation_x(rho, 2) - mean ** 2
    rep = FisherReport(
        I_pdm=fisher_pdm(rho, mass, m0),
        I_q=fisher_deformed(rho),
        I_F=fisher_standard(rho),
        mean_x=mean,
        var_x=var,
        gamma=rho.grid.params.gamma,
        gamma_L=gamma_L,
        n=n,
    )
    if rep.deformed_bound_violated:
        log.error("deformed Cramer-Rao bound violated: margin %.3e (gamma_L=%s, n=%s)",
                  rep.margin_q, gamma_L, n)
    return rep
