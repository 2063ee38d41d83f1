"""
Pilot-wave quantities for the deformed equation.

Current densities, the deformed continuity and Hamilton-Jacobi residuals,
the quantum potential in both pictures, and the classical-limit
characteristic function and trajectories.  Quantities that divide by the
density are NaN on node neighbourhoods (see ``fields.node_mask``).
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Optional, TextIO, Union

import numpy as np
from scipy.integrate import quad

from . import qcalc
from .errors import DomainError, SingularityError
from .fields import (
    ComplexField,
    RealField,
    as_phi,
    as_psi,
    as_rho,
    as_varrho,
    node_mask,
    phase_gradient,
    polar_decompose,
    density_derivatives,
    signed_amplitude,
)
from .qcalc import DeformationParams
from .solver import PotentialSpec, TimeSeries, mass_profile, potential_values


# ---------------------------------------------------------------------------
# Currents and continuity
# ---------------------------------------------------------------------------

def current_density_deformed(phi: ComplexField, hbar: float = 1.0, m0: float = 1.0) -> RealField:
    """``J_q = Re[Phi* (hbar/i) D (Phi/m0)]``."""
    phi = as_phi(phi)
    d = qcalc.deformed_derivative(phi).values
    j = hbar / m0 * np.imag(np.conj(phi.values) * d)
    return RealField(phi.grid, j, "current")


def current_density_standard(psi: ComplexField, hbar: float = 1.0, m0: float = 1.0,
                             mass: Optional[RealField] = None) -> RealField:
    """``J = Re{Psi* (hbar/i) d/dx [Psi/m(x)]}``."""
    psi = as_psi(psi)
    m = mass_profile(psi.grid, m0).values if mass is None else mass.values
    d = qcalc.x_derivative(psi.with_values(psi.values / m)).values
    j = hbar * np.imag(np.conj(psi.values) * d)
    return RealField(psi.grid, j, "current")


def time_derivative(stack: np.ndarray, dt: float) -> np.ndarray:
    """Central difference along axis 0, interior frames only."""
    return (stack[2:] - stack[:-2]) / (2.0 * dt)


def check_series(series: TimeSeries):
    if len(series) < 3:
        raise DomainError("need at least 3 time slices")
    steps = np.diff(series.times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise DomainError("time slices must be uniformly spaced")


def continuity_residual(series: TimeSeries, hbar: float = 1.0, m0: float = 1.0,
                        form: str = "deformed") -> RealField:
    """Pointwise max over interior time slices of the continuity residual.

    ``form='deformed'``: ``d varrho/dt + D J_q``;
    ``form='standard'``: ``d rho/dt + dJ/dx`` with the standard current.
    """
    check_series(series)
    grid = series.frames[0].grid
    dens, divs = [], []
    for f in series.frames:
        if form == "deformed":
            phi = as_phi(f)
            dens.append(np.abs(phi.values) ** 2)
            divs.append(qcalc.deformed_derivative(current_density_deformed(phi, hbar, m0)).values)
        elif form == "standard":
            psi = as_psi(f)
            dens.append(np.abs(psi.values) ** 2)
            divs.append(qcalc.x_derivative(current_density_standard(psi, hbar, m0)).values)
        else:
            raise ValueError(f"form must be 'deformed' or 'standard', got {form!r}")
    res = time_derivative(np.stack(dens), series.dt) + np.stack(divs)[1:-1]
    return RealField(grid, np.max(np.abs(res), axis=0))


# ---------------------------------------------------------------------------
# Quantum potential
# ---------------------------------------------------------------------------

def quantum_potential(state: Union[ComplexField, RealField], hbar: float = 1.0, m0: float = 1.0,
                      form: str = "amplitude") -> RealField:
    """Deformed quantum potential.

    ``form='amplitude'``: ``-hbar^2/(2 m0) D^2 sqrt(varrho) / sqrt(varrho)``
    ``form='density'``:   ``hbar^2/(2 m0) [(D varrho/varrho)^2/4 - D^2 varrho/(2 varrho)]``
    """
    varrho = as_varrho(state)
    mask = node_mask(varrho)
    with np.errstate(divide="ignore", invalid="ignore"):
        if form == "amplitude":
            b = varrho.with_values(signed_amplitude(varrho))
            d2 = qcalc.deformed_derivative(qcalc.deformed_derivative(b)).values
            q = -hbar ** 2 / (2.0 * m0) * d2 / b.values
        elif form == "density":
            v, d1, d2 = density_derivatives(varrho, qcalc.deformed_derivative)
            q = hbar ** 2 / (2.0 * m0) * (0.25 * (d1 / v) ** 2 - d2 / (2.0 * v))
        else:
            raise ValueError(f"form must be 'amplitude' or 'density', got {form!r}")
    return RealField(varrho.grid, np.where(mask, np.nan, q), "quantum_potential")


def quantum_potential_decomposition(rho: Union[ComplexField, RealField],
                                    mass: Optional[RealField] = None,
                                    hbar: float = 1.0, m0: float = 1.0):
    """``(Q1, Q2, Q3)`` in the standard picture.

    ``Q1 = hbar^2/(2m) [rho'^2/(4 rho^2) - rho''/(2 rho)]``
    ``Q2 = -hbar^2/(4 rho) rho' (1/m)'``
    ``Q3 = -hbar^2 gamma^2 / (8 m0)``
    """
    rho = as_rho(rho)
    grid = rho.grid
    m = mass_profile(grid, m0) if mass is None else mass
    v, d1, d2 = density_derivatives(rho, qcalc.x_derivative)
    dinv_m = qcalc.x_derivative(m.with_values(1.0 / m.values)).values
    mask = node_mask(rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        q1 = hbar ** 2 / (2.0 * m.values) * (d1 ** 2 / (4.0 * v * v) - d2 / (2.0 * v))
        q2 = -hbar ** 2 / (4.0 * v) * d1 * dinv_m
    q3 = np.full(grid.n_points, -hbar ** 2 * grid.params.gamma ** 2 / (8.0 * m0))

    def masked(a):
        return RealField(grid, np.where(mask, np.nan, a), "quantum_potential")

    return masked(q1), masked(q2), RealField(grid, q3, "quantum_potential")


# ---------------------------------------------------------------------------
# Snapshot
# ---------------------------------------------------------------------------

SNAPSHOT_COLUMNS = ("x", "varrho_q", "S_q", "J", "Q1", "Q2", "Q3", "Q_total", "node_mask")


@dataclass(frozen=True, eq=False)
class BohmianSnapshot:
    varrho_q: RealField
    S_q: RealField
    current_Jq: RealField
    current_J: RealField
    Qq_total: RealField
    Q1: RealField
    Q2: RealField
    Q3: RealField
    node_mask: np.ndarray

    def write_csv(self, dest: Union[str, os.PathLike, TextIO]) -> None:
        own = isinstance(dest, (str, os.PathLike))
        fh = open(dest, "w", newline="") if own else dest
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SNAPSHOT_COLUMNS)
            cols = (self.varrho_q.x, self.varrho_q.values, self.S_q.values, self.current_J.values,
                    self.Q1.values, self.Q2.values, self.Q3.values, self.Qq_total.values)
            for i in range(self.varrho_q.grid.n_points):
                w.writerow([repr(float(c[i])) for c in cols] + [int(self.node_mask[i])])
        finally:
            if own:
                fh.close()


def snapshot(state: ComplexField, hbar: float = 1.0, m0: float = 1.0,
             mass: Optional[RealField] = None) -> BohmianSnapshot:
    """All pilot-wave fields of one state."""
    phi = as_phi(state)
    psi = as_psi(state)
    varrho, S = polar_decompose(phi, hbar)
    q1, q2, q3 = quantum_potential_decomposition(psi, mass, hbar, m0)
    return BohmianSnapshot(
        varrho_q=varrho,
        S_q=S,
        current_Jq=current_density_deformed(phi, hbar, m0),
        current_J=current_density_standard(psi, hbar, m0, mass),
        Qq_total=quantum_potential(phi, hbar, m0),
        Q1=q1, Q2=q2, Q3=q3,
        node_mask=node_mask(varrho),
    )


# ---------------------------------------------------------------------------
# Hamilton-Jacobi
# ---------------------------------------------------------------------------

def hamilton_jacobi_residual(state: ComplexField, V=None, energy: float = 0.0,
                             hbar: float = 1.0, m0: float = 1.0, form: str = "deformed") -> RealField:
    """Stationary residual ``(D S)^2/2m0 + V + Q_q - E`` (``dS/dt = -E``).

    ``form='mass'`` uses ``(dS/dx)^2 / 2m(x)`` for the kinetic term.
    NaN on node neighbourhoods.
    """
    phi = as_phi(state)
    _, S = polar_decompose(phi, hbar)
    Vv = potential_values(V, phi.grid)
    q = quantum_potential(phi, hbar, m0).values
    res = _kinetic_phase(S, hbar, m0, form) + Vv + q - energy
    return RealField(phi.grid, res)


def _kinetic_phase(S: RealField, hbar: float, m0: float, form: str) -> np.ndarray:
    if form == "deformed":
        return phase_gradient(S, hbar).values ** 2 / (2.0 * m0)
    if form == "mass":
        m = mass_profile(S.grid, m0).values
        return phase_gradient(S, hbar, deformed=False).values ** 2 / (2.0 * m)
    raise ValueError(f"form must be 'deformed' or 'mass', got {form!r}")


def phase_series(series: TimeSeries, hbar: float) -> np.ndarray:
    """``S(t, x)`` unwrapped in space per frame and then along time."""
    S = np.stack([polar_decompose(as_phi(f), hbar)[1].values for f in series.frames])
    return np.unwrap(S / hbar, axis=0) * hbar


def hamilton_jacobi_residual_series(series: TimeSeries, V=None, hbar: float = 1.0, m0: float = 1.0,
                                    form: str = "deformed") -> RealField:
    """Max over interior slices of ``|(D S)^2/2m0 + V + Q_q + dS/dt|`` (NaN at nodes)."""
    check_series(series)
    grid = series.frames[0].grid
    S = phase_series(series, hbar)
    dSdt = time_derivative(S, series.dt)
    Vv = potential_values(V, grid)
    out = []
    for k, f in enumerate(series.frames[1:-1]):
        Sk = RealField(grid, S[k + 1], "phase_S")
        q = quantum_potential(as_phi(f), hbar, m0).values
        out.append(_kinetic_phase(Sk, hbar, m0, form) + Vv + q + dSdt[k])
    res = np.abs(np.stack(out))
    allnan = np.all(np.isnan(res), axis=0)
    with np.errstate(invalid="ignore"):
        mx = np.where(allnan, np.nan, np.nanmax(np.where(np.isnan(res), -np.inf, res), axis=0))
    return RealField(grid, mx)


# ---------------------------------------------------------------------------
# Classical limit
# ---------------------------------------------------------------------------

def classical_momentum(potential, E: float, x, params: DeformationParams, m0: float = 1.0):
    """``p(x) = sqrt(2 m(x) [E - V(x)])``."""
    x = np.asarray(x, dtype=float)
    kin = E - _V(potential, x)
    if np.any(kin < 0):
        raise DomainError("classically forbidden region: E < V(x)")
    return np.sqrt(2.0 * m0 * kin) / params.factor(x)


def _V(potential, x):
    """Potential at ``x``; ``None`` is free motion, walls are ``inf``."""
    x = np.asarray(x, dtype=float)
    if potential is None:
        return np.zeros_like(x)
    return np.asarray(potential(x), dtype=float) * np.ones_like(x)


def classical_W(potential, E: float, x, params: DeformationParams, m0: float = 1.0,
                x0: float = 0.0, form: str = "mass") -> np.ndarray:
    """Hamilton characteristic function, + branch, oriented from ``x0``.

    ``form='mass'``:  ``int sqrt(2 m(x') [E - V]) dx'``
    ``form='q'``:     ``int sqrt(2 m0 [E - V]) d_q x'``
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    g = params.gamma

    if form == "mass":
        def integrand(s):
            kin = E - _V(potential, s)
            if kin < 0:
                raise DomainError(f"classically forbidden at x={s}: E < V")
            return np.sqrt(2.0 * m0 / (1.0 + g * s) ** 2 * kin)
    elif form == "q":
        def integrand(s):
            kin = E - _V(potential, s)
            if kin < 0:
                raise DomainError(f"classically forbidden at x={s}: E < V")
            return np.sqrt(2.0 * m0 * kin) / (1.0 + g * s)
    else:
        raise ValueError(f"form must be 'mass' or 'q', got {form!r}")
    if np.any(1.0 + g * np.append(x, x0) <= 0):
        raise SingularityError(g, "classical_W")
    out = np.array([quad(lambda s: float(integrand(s)), x0, xi, epsabs=0, epsrel=1e-13, limit=200)[0]
                    for xi in x])
    return out


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    action: np.ndarray
    energy: np.ndarray


def classical_trajectory(x0: float, v0: float, potential, dt: float, n_steps: int,
                         m0: float = 1.0, params: DeformationParams = DeformationParams()) -> Trajectory:
    """RK4 integration of ``m(x) x'' + m'(x) x'^2 / 2 = -V'(x)``.

    The Lagrangian ``m(x) x'^2/2 - V`` is integrated alongside, so
    ``action[k]`` is the accumulated classical action up to ``t[k]``.
    """
    g = params.gamma

    def mass(x):
        return m0 / (1.0 + g * x) ** 2

    def dmass(x):
        return -2.0 * g * m0 / (1.0 + g * x) ** 3

    def V(x):
        return 0.0 if potential is None else float(_V(potential, np.array(x)))

    def dV(x):
        if potential is None:
            return 0.0
        if isinstance(potential, PotentialSpec):
            return float(potential.gradient(np.array(x)))
        h = 1e-6 * max(1.0, abs(x))
        return (V(x + h) - V(x - h)) / (2 * h)

    def rhs(s):
        x, v, _ = s
        if 1.0 + g * x <= 0:
                raise SingularityError(g, "classical_trajectory")
        acc = (-dV(x) - 0.5 * dmass(x) * v * v) / mass(x)
        lag = 0.5 * mass(x) * v * v - V(x)
        return np.array([v, acc, lag])

    state = np.array([x0, v0, 0.0], dtype=float)
    out = np.empty((n_steps + 1, 3))
    out[0] = state
    for k in range(n_steps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * dt * k1)
        k3 = rhs(state + 0.5 * dt * k2)
        k4 = rhs(state + dt * k3)
        state = state + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = state
    t = dt * np.arange(n_steps + 1)
    xs, vs = out[:, 0], out[:, 1]
    en = 0.5 * mass(xs) * vs ** 2 + np.array([V(xi) for xi in xs])
    return Trajectory(t, xs, vs, out[:, 2], en)
