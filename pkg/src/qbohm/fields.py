"""
Grids and sampled fields.

Fields are immutable: every transform returns a new object.  A grid is
uniform either in the physical coordinate ``x`` or in the deformed
coordinate ``u = ln(1 + gamma x)/gamma``; the deformed derivative and the
q-integral are exact coordinate changes on the latter.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, TextIO, Tuple, Union

import numpy as np

from . import qcalc
from .errors import DomainError, GridSizeError, SingularityError
from .qcalc import DeformationParams

COORDINATE_KINDS = ("physical_x", "deformed_u")
COMPLEX_KINDS = ("psi", "phi_q")
REAL_KINDS = (
    "rho",
    "varrho_q",
    "phase_S",
    "potential_V",
    "quantum_potential",
    "current",
    "mass_profile",
    "generic",
)

# density below EPS_NODE * max is a node
EPS_NODE = 1e-8
# interior local minima below NODE_FLOOR * max are treated as nodes lying between samples
NODE_FLOOR = 1e-2
NODE_RADIUS = 2


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform one-dimensional grid.

    ``x_min``/``x_max`` are in the grid's own coordinate, so a
    ``deformed_u`` grid stores ``u`` bounds.
    """

    x_min: float
    x_max: float
    n_points: int
    coordinate_kind: str = "physical_x"
    params: DeformationParams = field(default_factory=DeformationParams)

    def __post_init__(self):
        if self.coordinate_kind not in COORDINATE_KINDS:
            raise ValueError(f"coordinate_kind must be one of {COORDINATE_KINDS}")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise GridSizeError(f"n_points must be an integer >= 3, got {self.n_points!r}")
        object.__setattr__(self, "n_points", int(self.n_points))
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max) and self.x_max > self.x_min):
            raise DomainError(f"need finite x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if self.coordinate_kind == "physical_x":
            g = self.params.gamma
            if 1.0 + g * self.x_min <= 0 or 1.0 + g * self.x_max <= 0:
                raise SingularityError(g, "SpatialGrid")

    @classmethod
    def deformed(cls, x_min: float, x_max: float, n_points: int, params: DeformationParams) -> "SpatialGrid":
        """Grid uniform in ``u`` spanning the physical interval [x_min, x_max]."""
        u0, u1 = qcalc.deformed_coordinate(np.array([x_min, x_max]), params)
        return cls(float(u0), float(u1), n_points, "deformed_u", params)

    @property
    def kind(self) -> str:
        return self.coordinate_kind

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        return _readonly(np.linspace(self.x_min, self.x_max, self.n_points))

    @cached_property
    def x(self) -> np.ndarray:
        """Physical positions of the nodes."""
        if self.coordinate_kind == "physical_x":
            return self.nodes
        return _readonly(np.asarray(qcalc.inverse_coordinate(self.nodes, self.params)))

    @cached_property
    def u(self) -> np.ndarray:
        """Deformed-coordinate positions of the nodes."""
        if self.coordinate_kind == "deformed_u":
            return self.nodes
        return _readonly(np.asarray(qcalc.deformed_coordinate(self.nodes, self.params)))

    @cached_property
    def factor(self) -> np.ndarray:
        """``1 + gamma x`` at every node."""
        if self.coordinate_kind == "deformed_u":
            # exp(gamma u) is exact and avoids the round trip through x
            return _readonly(np.exp(self.params.gamma * self.nodes))
        return _readonly(1.0 + self.params.gamma * self.nodes)

    @property
    def physical_bounds(self) -> Tuple[float, float]:
        if self.coordinate_kind == "physical_x":
            return self.x_min, self.x_max
        return float(self.x[0]), float(self.x[-1])

    def to_physical(self) -> "SpatialGrid":
        if self.coordinate_kind == "physical_x":
            return self
        a, b = self.physical_bounds
        return SpatialGrid(a, b, self.n_points, "physical_x", self.params)

    def to_deformed(self) -> "SpatialGrid":
        if self.coordinate_kind == "deformed_u":
            return self
        return SpatialGrid.deformed(self.x_min, self.x_max, self.n_points, self.params)


class _Field:
    grid: SpatialGrid
    values: np.ndarray
    kind: str

    def __len__(self):
        return self.grid.n_points

    @property
    def x(self) -> np.ndarray:
        return self.grid.x


@dataclass(frozen=True, eq=False)
class ComplexField(_Field):
    """Complex samples of ``Psi`` (kind ``psi``) or ``Phi_q`` (kind ``phi_q``)."""

    grid: SpatialGrid
    values: np.ndarray
    kind: str = "psi"

    def __post_init__(self):
        if self.kind not in COMPLEX_KINDS:
            raise ValueError(f"complex field kind must be one of {COMPLEX_KINDS}, got {self.kind!r}")
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.n_points,):
            raise ValueError(f"values shape {v.shape} does not match grid size {self.grid.n_points}")
        object.__setattr__(self, "values", _readonly(v))

    def with_values(self, values, kind: Optional[str] = None) -> "ComplexField":
        return ComplexField(self.grid, values, kind or self.kind)

    def density(self) -> "RealField":
        """``|field|^2`` as ``rho`` (from psi) or ``varrho_q`` (from phi_q)."""
        kind = "rho" if self.kind == "psi" else "varrho_q"
        return RealField(self.grid, np.abs(self.values) ** 2, kind)

    def norm(self) -> float:
        """Norm under the measure matching the kind (standard for psi, q for phi_q)."""
        d = np.abs(self.values) ** 2
        return qcalc.integral(self, d) if self.kind == "psi" else qcalc.q_integral(self, d)

    def normalized(self) -> "ComplexField":
        n = self.norm()
        if not n > 0:
            raise DomainError("cannot normalize a zero field")
        return self.with_values(self.values / np.sqrt(n))


@dataclass(frozen=True, eq=False)
class RealField(_Field):
    """Real samples on a grid (densities, phases, potentials, currents, ...)."""

    grid: SpatialGrid
    values: np.ndarray
    kind: str = "generic"

    def __post_init__(self):
        if self.kind not in REAL_KINDS:
            raise ValueError(f"real field kind must be one of {REAL_KINDS}, got {self.kind!r}")
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_points,):
            raise ValueError(f"values shape {v.shape} does not match grid size {self.grid.n_points}")
        if self.kind in ("rho", "varrho_q") and np.any(v < 0):
            raise DomainError(f"{self.kind} must be non-negative")
        object.__setattr__(self, "values", _readonly(v))

    def with_values(self, values, kind: Optional[str] = None) -> "RealField":
        if np.iscomplexobj(values):
            return ComplexField(self.grid, values, kind or "psi")
        return RealField(self.grid, values, kind or "generic")


Field = Union[ComplexField, RealField]


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

def _check_kind(f: Field, kind: str):
    if f.kind != kind:
        raise ValueError(f"expected a field of kind {kind!r}, got {f.kind!r}")


def psi_to_phi(psi: ComplexField) -> ComplexField:
    """``Phi_q = sqrt(1 + gamma x) Psi``."""
    _check_kind(psi, "psi")
    return ComplexField(psi.grid, np.sqrt(psi.grid.factor) * psi.values, "phi_q")


def phi_to_psi(phi: ComplexField) -> ComplexField:
    """``Psi = Phi_q / sqrt(1 + gamma x)``."""
    _check_kind(phi, "phi_q")
    return ComplexField(phi.grid, phi.values / np.sqrt(phi.grid.factor), "psi")


def density_relation(rho: RealField) -> RealField:
    """``varrho_q = (1 + gamma x) rho``."""
    _check_kind(rho, "rho")
    return RealField(rho.grid, rho.grid.factor * rho.values, "varrho_q")


def density_relation_inverse(varrho: RealField) -> RealField:
    """``rho = varrho_q / (1 + gamma x)``."""
    _check_kind(varrho, "varrho_q")
    return RealField(varrho.grid, varrho.values / varrho.grid.factor, "rho")


def as_rho(f: Field) -> RealField:
    """Standard density from any of psi, phi_q, rho, varrho_q."""
    if isinstance(f, ComplexField):
        f = f.density()
    return density_relation_inverse(f) if f.kind == "varrho_q" else _ensure(f, "rho")


def as_varrho(f: Field) -> RealField:
    """Deformed density from any of psi, phi_q, rho, varrho_q."""
    if isinstance(f, ComplexField):
        f = f.density()
    return density_relation(f) if f.kind == "rho" else _ensure(f, "varrho_q")


def as_phi(f: ComplexField) -> ComplexField:
    return psi_to_phi(f) if f.kind == "psi" else f


def as_psi(f: ComplexField) -> ComplexField:
    return phi_to_psi(f) if f.kind == "phi_q" else f


def _ensure(f: RealField, kind: str) -> RealField:
    _check_kind(f, kind)
    return f


# ---------------------------------------------------------------------------
# Nodes, amplitudes and phases
# ---------------------------------------------------------------------------

def node_indices(density: np.ndarray, eps: float = EPS_NODE, floor: float = NODE_FLOOR) -> np.ndarray:
    """Indices that sit on (or next to) zeros of a sampled density.

    A zero between two samples shows up as an interior local minimum that
    is small compared with the peak, so those are reported as well.
    """
    d = np.asarray(density, dtype=float)
    dmax = d.max()
    if not dmax > 0:
        return np.arange(d.size)
    tiny = d <= eps * dmax
    locmin = np.zeros_like(tiny)
    locmin[1:-1] = (d[1:-1] <= d[:-2]) & (d[1:-1] <= d[2:]) & (d[1:-1] < floor * dmax)
    return np.flatnonzero(tiny | locmin)


def node_mask(density, radius: int = NODE_RADIUS, eps: float = EPS_NODE) -> np.ndarray:
    """Boolean mask of nodes dilated by ``radius`` samples on each side."""
    d = density.values if isinstance(density, RealField) else np.asarray(density)
    mask = np.zeros(d.size, dtype=bool)
    for i in node_indices(d, eps):
        mask[max(0, i - radius): i + radius + 1] = True
    return mask


def signed_amplitude(density) -> np.ndarray:
    """Square root of a density with the sign restored across simple zeros.

    ``sqrt(rho)`` has a kink wherever the underlying real amplitude changes
    sign; flipping the sign past each such zero gives back a smooth
    function whose derivatives can be taken with finite differences.  At
    every candidate zero the choice (no flip / flip after / flip at) with
    the smallest local second difference wins.
    """
    d = density.values if isinstance(density, RealField) else np.asarray(density, dtype=float)
    a = np.sqrt(np.clip(d, 0.0, None))
    amax = a.max()
    if not amax > 0:
        return a
    n = a.size
    cand = np.zeros(n, dtype=bool)
    cand[1:-1] = (a[1:-1] <= a[:-2]) & (a[1:-1] <= a[2:]) & (d[1:-1] < NODE_FLOOR * d.max())
    sign = np.ones(n)
    s = 1.0
    i = 0
    out = a.copy()
    while i < n:
        if cand[i]:
            lo, mid, hi = sign[i - 1] * a[i - 1], a[i], a[i + 1]
            keep = abs(lo - 2 * s * mid + s * hi)
            after = abs(lo - 2 * s * mid - s * hi)
            at = abs(lo + 2 * s * mid - s * hi)
            best = min(keep, after, at)
            if best == keep:
                sign[i] = s
            elif best == after:
                sign[i] = s
                s = -s
            else:
                s = -s
                sign[i] = s
        else:
            sign[i] = s
        i += 1
    out *= sign
    return out


def density_derivatives(density: RealField, deriv):
    """``(rho, rho', rho'')`` with derivatives taken through the signed amplitude.

    ``rho' = 2 a a'`` and ``rho'' = 2 a'^2 + 2 a a''`` are smooth where
    differencing ``rho`` itself loses accuracy next to zeros.
    """
    a = density.with_values(signed_amplitude(density))
    d1 = deriv(a)
    d2 = deriv(d1).values
    av, d1 = a.values, d1.values
    return av * av, 2.0 * av * d1, 2.0 * d1 * d1 + 2.0 * av * d2


def polar_decompose(f: ComplexField, hbar: float = 1.0) -> Tuple[RealField, RealField]:
    """Split a field into ``|f|^2`` and the phase ``S = hbar * arg f``.

    The phase is unwrapped over non-node samples so neighbouring jumps stay
    below ``pi hbar``; its additive constant is fixed by taking the
    principal value of ``arg f`` at the leftmost non-node sample.  Node
    samples carry the phase of the nearest preceding valid sample.
    """
    dens = np.abs(f.values) ** 2
    dmax = dens.max()
    valid = dens > EPS_NODE * dmax if dmax > 0 else np.zeros(dens.size, dtype=bool)
    ang = np.angle(f.values)
    phase = np.zeros(dens.size)
    idx = np.flatnonzero(valid)
    if idx.size:
        phase[idx] = np.unwrap(ang[idx])
        # forward fill, then back fill the leading block
        fill = np.maximum.accumulate(np.where(valid, np.arange(dens.size), -1))
        lead = fill < 0
        fill[lead] = idx[0]
        phase = phase[fill]
    amp_kind = "rho" if f.kind == "psi" else "varrho_q"
    return RealField(f.grid, dens, amp_kind), RealField(f.grid, hbar * phase, "phase_S")


def phase_gradient(S: RealField, hbar: float = 1.0, *, deformed: bool = True,
                   order: int = qcalc.DEFAULT_FD_ORDER) -> RealField:
    """``D S`` (or ``dS/dx`` with ``deformed=False``) robust to sign flips.

    Real amplitudes that change sign put jumps of ``pi hbar`` into ``S``.
    The phase is unwrapped modulo ``pi hbar`` before differencing, which
    absorbs those jumps into the amplitude and leaves genuine phase
    gradients untouched wherever the grid resolves them.
    """
    s = np.unwrap(2.0 * S.values / hbar) * (hbar / 2.0)
    g = S.with_values(s)
    return qcalc.deformed_derivative(g, order) if deformed else qcalc.x_derivative(g, order)


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def write_field_csv(f: Field, dest: Union[str, os.PathLike, TextIO]) -> None:
    """Write ``x,value_re,value_im`` (complex) or ``x,value`` (real) with '#' metadata."""
    own = isinstance(dest, (str, os.PathLike))
    fh = open(dest, "w", newline="") if own else dest
    try:
        g = f.grid
        fh.write(f"# kind={f.kind}\n")
        fh.write(f"# coordinate_kind={g.coordinate_kind}\n")
        fh.write(f"# x_min={_fmt(g.x_min)}\n# x_max={_fmt(g.x_max)}\n# n_points={g.n_points}\n")
        fh.write(f"# gamma={_fmt(g.params.gamma)}\n")
        w = csv.writer(fh, lineterminator="\n")
        if isinstance(f, ComplexField):
            w.writerow(["x", "value_re", "value_im"])
            for xi, v in zip(g.nodes, f.values):
                w.writerow([_fmt(xi), _fmt(v.real), _fmt(v.imag)])
        else:
            w.writerow(["x", "value"])
            for xi, v in zip(g.nodes, f.values):
                w.writerow([_fmt(xi), _fmt(v)])
    finally:
        if own:
            fh.close()


def read_field_csv(src: Union[str, os.PathLike, TextIO]) -> Field:
    """Inverse of :func:`write_field_csv`."""
    text = open(src).read() if isinstance(src, (str, os.PathLike)) else src.read()
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k.strip()] = v.strip()
        elif line.strip():
            body.append(line)
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    header, data = rows[0], np.array(rows[1:], dtype=float)
    grid = SpatialGrid(float(meta["x_min"]), float(meta["x_max"]), int(meta["n_points"]),
                       meta["coordinate_kind"], DeformationParams(float(meta["gamma"])))
    if header == ["x", "value_re", "value_im"]:
        return ComplexField(grid, data[:, 1] + 1j * data[:, 2], meta["kind"])
    return RealField(grid, data[:, 1], meta["kind"])
