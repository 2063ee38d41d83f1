"""
Stationary and time-dependent solvers.

Two stationary routes are provided:

``solve_pct``
    Works in the deformed coordinate ``u``, where the deformed derivative
    is ``d/du`` and the problem is a constant-mass Schrodinger equation.
    The Hamiltonian is a symmetric tridiagonal matrix.

``solve_direct``
    Discretizes the von Roos kinetic operator
    ``m^-1/4 p m^-1/2 p m^-1/4 / 2`` on the physical grid with the inner
    mass factor on the half-grid, which keeps the matrix symmetric.

Both use Dirichlet ends (infinite walls, or a large box for general
potentials).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal
from scipy.sparse import diags
from scipy.sparse.linalg import splu

from .errors import DomainError, ResolutionError, SingularityError
from .fields import ComplexField, RealField, SpatialGrid, phi_to_psi, psi_to_phi

# minimum grid points per requested eigenstate
POINTS_PER_STATE = 4


@dataclass(frozen=True)
class PotentialSpec:
    """Potential energy ``V(x)``.

    Build with :meth:`infinite_well`, :meth:`tabulated` or :meth:`callback`.
    """

    kind: str
    L: Optional[float] = None
    table: Optional[RealField] = None
    func: Optional[Callable] = None
    derivative: Optional[Callable] = None

    @classmethod
    def infinite_well(cls, L: float) -> "PotentialSpec":
        if not L > 0:
            raise DomainError("well width must be positive")
        return cls("infinite_well", L=float(L))

    @classmethod
    def tabulated(cls, values: RealField) -> "PotentialSpec":
        return cls("tabulated", table=values)

    @classmethod
    def callback(cls, func: Callable, derivative: Optional[Callable] = None) -> "PotentialSpec":
        return cls("callback", func=func, derivative=derivative)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "infinite_well":
            inside = (x >= 0) & (x <= self.L)
            return np.where(inside, 0.0, np.inf)
        if self.kind == "tabulated":
            t = self.table
            return CubicSpline(t.grid.x, t.values)(x)
        return np.asarray(self.func(x), dtype=float) * np.ones_like(x)

    def gradient(self, x) -> np.ndarray:
        """``dV/dx``; central differences when no derivative was supplied."""
        x = np.asarray(x, dtype=float)
        if self.kind == "infinite_well":
            return np.zeros_like(x)
        if self.kind == "callback" and self.derivative is not None:
            return np.asarray(self.derivative(x), dtype=float) * np.ones_like(x)
        if self.kind == "tabulated":
            t = self.table
            return CubicSpline(t.grid.x, t.values)(x, 1)
        h = 1e-5 * np.maximum(1.0, np.abs(x))
        return (self(x + h) - self(x - h)) / (2 * h)

    def check_domain(self, grid: SpatialGrid):
        if self.kind != "infinite_well":
            return
        if 1.0 + grid.params.gamma * self.L <= 0:
            raise SingularityError(grid.params.gamma, "infinite_well")
        a, b = grid.physical_bounds
        if not (np.isclose(a, 0.0, atol=1e-12) and np.isclose(b, self.L, rtol=1e-12, atol=1e-12)):
            raise DomainError(f"infinite well needs the grid to span [0, {self.L}], got [{a}, {b}]")

    def sample(self, grid: SpatialGrid) -> RealField:
        """Potential on the grid nodes (walls of an infinite well give 0)."""
        v = self(grid.x)
        if self.kind == "infinite_well":
            v = np.where(np.isfinite(v), v, 0.0)
        return RealField(grid, v, "potential_V")


def potential_values(V, grid: SpatialGrid) -> np.ndarray:
    """Potential samples from a ``PotentialSpec``, ``RealField``, callable or ``None``."""
    if V is None:
        return np.zeros(grid.n_points)
    if isinstance(V, PotentialSpec):
        return V.sample(grid).values
    if isinstance(V, RealField):
        return np.asarray(V.values)
    return np.asarray(V(grid.x), dtype=float) * np.ones(grid.n_points)


def mass_profile(grid: SpatialGrid, m0: float = 1.0) -> RealField:
    """``m(x) = m0 / (1 + gamma x)^2`` on the grid."""
    if np.any(grid.factor <= 0):
        raise SingularityError(grid.params.gamma, "mass_profile")
    return RealField(grid, m0 / grid.factor ** 2, "mass_profile")


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """Lowest eigenpairs from one route; states are normalized and sign-fixed."""

    energies: np.ndarray
    psi_states: Tuple[ComplexField, ...]
    phi_states: Tuple[ComplexField, ...]
    route: str
    hbar: float = 1.0
    m0: float = 1.0

    def __len__(self):
        return len(self.energies)


def _check_request(grid: SpatialGrid, n_states: int):
    if n_states < 1:
        raise DomainError(f"n_states must be >= 1, got {n_states}")
    if POINTS_PER_STATE * n_states > grid.n_points:
        raise ResolutionError(
            f"{n_states} states need at least {POINTS_PER_STATE * n_states} grid points, got {grid.n_points}")


def _fix_sign(v: np.ndarray) -> np.ndarray:
    # positive slope at the left wall: first significant sample is positive
    thresh = 1e-3 * np.max(np.abs(v))
    i = int(np.argmax(np.abs(v) > thresh))
    return -v if v[i] < 0 else v


def _u_potential(potential: PotentialSpec, u_grid: SpatialGrid) -> np.ndarray:
    return potential_values(potential, u_grid)


def constant_mass_hamiltonian(u_grid: SpatialGrid, V: np.ndarray, hbar: float, m0: float):
    """Diagonal and off-diagonal of ``-hbar^2/2m0 d2/du2 + V`` on interior nodes."""
    h = u_grid.spacing
    t = hbar ** 2 / (2.0 * m0 * h * h)
    n_int = u_grid.n_points - 2
    d = 2.0 * t + V[1:-1]
    e = -t * np.ones(n_int - 1)
    return d, e


def solve_pct(potential: PotentialSpec, grid: SpatialGrid, n_states: int,
              hbar: float = 1.0, m0: float = 1.0) -> EigenSolution:
    """Lowest eigenpairs through the deformed coordinate.

    If ``grid`` is physical, the problem is solved on a ``u``-grid with the
    same number of points and ``Phi_q`` is resampled onto ``grid`` with a
    cubic spline; on a ``deformed_u`` grid no resampling happens.
    """
    potential.check_domain(grid)
    _check_request(grid, n_states)
    u_grid = grid.to_deformed()
    V = _u_potential(potential, u_grid)
    d, e = constant_mass_hamiltonian(u_grid, V, hbar, m0)
    w, vec = eigh_tridiagonal(d, e, select="i", select_range=(0, n_states - 1))
    phis, psis = [], []
    for j in range(n_states):
        full = np.zeros(u_grid.n_points)
        full[1:-1] = _fix_sign(vec[:, j])
        if grid.coordinate_kind == "physical_x":
            full = CubicSpline(u_grid.nodes, full)(grid.u)
            full[0] = full[-1] = 0.0
        phi = ComplexField(grid, full, "phi_q").normalized()
        phis.append(phi)
        psis.append(phi_to_psi(phi))
    return EigenSolution(np.asarray(w), tuple(psis), tuple(phis), "pct", hbar, m0)


def von_roos_hamiltonian(x_grid: SpatialGrid, V: np.ndarray, hbar: float, m0: float):
    """Symmetric tridiagonal form of ``A D^T B D A hbar^2/2 + V`` on interior nodes.

    ``A = m^-1/4`` on nodes, ``B = m^-1/2`` on half-grid midpoints and ``D``
    the forward difference from nodes to midpoints.
    """
    g = x_grid.params.gamma
    x = x_grid.nodes
    h = x_grid.spacing
    a = (m0 / (1.0 + g * x) ** 2) ** -0.25
    xm = 0.5 * (x[:-1] + x[1:])
    b = (m0 / (1.0 + g * xm) ** 2) ** -0.5
    c = hbar ** 2 / (2.0 * h * h)
    ai = a[1:-1]
    diag = c * ai * ai * (b[:-1] + b[1:]) + V[1:-1]
    off = -c * a[1:-2] * a[2:-1] * b[1:-1]
    return diag, off


def solve_direct(potential: PotentialSpec, grid: SpatialGrid, n_states: int,
                 hbar: float = 1.0, m0: float = 1.0) -> EigenSolution:
    """Lowest eigenpairs of the position-dependent-mass Hamiltonian on the physical grid."""
    potential.check_domain(grid)
    _check_request(grid, n_states)
    x_grid = grid.to_physical()
    V = potential_values(potential, x_grid)
    d, e = von_roos_hamiltonian(x_grid, V, hbar, m0)
    w, vec = eigh_tridiagonal(d, e, select="i", select_range=(0, n_states - 1))
    phis, psis = [], []
    for j in range(n_states):
        full = np.zeros(x_grid.n_points)
        full[1:-1] = _fix_sign(vec[:, j])
        psi = ComplexField(x_grid, full, "psi").normalized()
        psis.append(psi)
        phis.append(psi_to_phi(psi))
    return EigenSolution(np.asarray(w), tuple(psis), tuple(phis), "direct", hbar, m0)


# ---------------------------------------------------------------------------
# Time propagation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Frames of a field sampled at uniform times."""

    times: np.ndarray
    frames: Tuple[ComplexField, ...]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def __len__(self):
        return len(self.frames)

    def __getitem__(self, i):
        return self.frames[i]

    def values(self) -> np.ndarray:
        """Frames stacked as a ``(n_frames, n_points)`` complex array."""
        return np.stack([f.values for f in self.frames])


def propagate(phi0: ComplexField, potential: PotentialSpec, dt: float, n_steps: int,
              hbar: float = 1.0, m0: float = 1.0, store_every: int = 1) -> TimeSeries:
    """Crank-Nicolson evolution of the deformed equation on a ``u``-grid.

    The scheme is unitary for the discrete ``u``-measure, which is the
    q-measure, so the q-norm is conserved to rounding.  A physical-grid
    input is resampled to ``u`` and every stored frame back again.
    """
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    if n_steps < 1 or store_every < 1:
        raise DomainError("n_steps and store_every must be >= 1")
    if phi0.kind != "phi_q":
        phi0 = psi_to_phi(phi0)
    grid = phi0.grid
    potential.check_domain(grid)
    u_grid = grid.to_deformed()
    if u_grid.n_points < 5:
        raise ResolutionError("propagation needs at least 5 grid points")
    V = _u_potential(potential, u_grid)
    if grid.coordinate_kind == "physical_x":
        re = CubicSpline(grid.u, phi0.values.real)(u_grid.nodes)
        im = CubicSpline(grid.u, phi0.values.imag)(u_grid.nodes)
        psi = re + 1j * im
    else:
        psi = np.array(phi0.values)
    d, e = constant_mass_hamiltonian(u_grid, V, hbar, m0)
    z = 0.5j * dt / hbar
    n_int = d.size
    lhs = diags([z * e, 1.0 + z * d, z * e], [-1, 0, 1], shape=(n_int, n_int), format="csc")
    rhs = diags([-z * e, 1.0 - z * d, -z * e], [-1, 0, 1], shape=(n_int, n_int), format="csr")
    lu = splu(lhs)

    def to_field(vals):
        if grid.coordinate_kind == "physical_x":
            vals = CubicSpline(u_grid.nodes, vals)(grid.u)
        return ComplexField(grid, vals, "phi_q")

    inner = psi[1:-1].copy()
    frames = [to_field(psi)]
    times = [0.0]
    buf = np.zeros_like(psi)
    for step in range(1, n_steps + 1):
        inner = lu.solve(rhs @ inner)
        if step % store_every == 0:
            buf = np.zeros_like(psi)
            buf[1:-1] = inner
            frames.append(to_field(buf))
            times.append(step * dt)
    return TimeSeries(np.asarray(times), tuple(frames))
