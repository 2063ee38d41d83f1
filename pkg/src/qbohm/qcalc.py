"""
Deformed algebra and calculus kernel.

The q-exponential family and the spatial deformation share one affine
factor: ``1 + (1-q) u`` in the abstract variable and ``1 + gamma x`` in
space, identified through ``gamma = (1 - q) / xi``.  Everything here is a
pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError, GridSizeError, SingularityError

if TYPE_CHECKING:  # pragma: no cover
    from .fields import ComplexField, RealField

# |1-q| below this is treated as the undeformed case
Q_LIMIT_EPS = 1e-8
# |gamma| * max|x| below this is treated as gamma = 0
GAMMA_LIMIT_EPS = 1e-12

DEFAULT_FD_ORDER = 4


@dataclass(frozen=True)
class DeformationParams:
    """Deformation of the spatial algebra.

    Parameters
    ----------
    gamma : float
        Deformation parameter (inverse length).  ``gamma = 0`` is the
        undeformed, constant-mass case.
    q : float, optional
        Entropic index.  Informational unless ``xi`` is also given.
    xi : float, optional
        Characteristic length.  With both ``q`` and ``xi`` set,
        ``gamma * xi == 1 - q`` must hold.
    """

    gamma: float = 0.0
    q: Optional[float] = None
    xi: Optional[float] = None

    def __post_init__(self):
        g = float(self.gamma)
        if not math.isfinite(g):
            raise DomainError(f"gamma must be finite, got {self.gamma!r}")
        object.__setattr__(self, "gamma", g)
        if self.xi is not None:
            if not (math.isfinite(self.xi) and self.xi != 0):
                raise DomainError(f"xi must be finite and non-zero, got {self.xi!r}")
            if self.q is not None and not math.isclose(g * self.xi, 1.0 - self.q, rel_tol=1e-12, abs_tol=1e-15):
                raise DomainError(f"inconsistent deformation: gamma*xi={g * self.xi!r} but 1-q={1.0 - self.q!r}")

    @classmethod
    def from_q(cls, q: float, xi: float) -> "DeformationParams":
        """Build from entropic index and characteristic length."""
        return cls(gamma=(1.0 - q) / xi, q=q, xi=xi)

    @property
    def is_undeformed(self) -> bool:
        return self.gamma == 0.0

    def factor(self, x):
        """Affine deformation factor ``1 + gamma x``."""
        return 1.0 + self.gamma * np.asarray(x, dtype=float)


def _undeformed(gamma: float, x) -> bool:
    if gamma == 0.0:
        return True
    xmax = float(np.max(np.abs(x))) if np.size(x) else 0.0
    return abs(gamma) * xmax < GAMMA_LIMIT_EPS


# ---------------------------------------------------------------------------
# q-exponential algebra
# ---------------------------------------------------------------------------

def q_exp(u, q):
    """q-exponential ``[1 + (1-q) u]_+ ** (1/(1-q))``; zero past the cutoff."""
    u = np.asarray(u, dtype=float)
    one_minus_q = 1.0 - float(q)
    if abs(one_minus_q) < Q_LIMIT_EPS:
        out = np.exp(u)
    else:
        arg = one_minus_q * u
        pos = arg > -1.0
        out = np.zeros_like(arg)
        # log1p avoids amplifying the rounding of 1 + (1-q)u when q is near 1
        out[pos] = np.exp(np.log1p(arg[pos]) / one_minus_q)
    return out[()] if out.ndim == 0 else out


def q_log(y, q):
    """Inverse of :func:`q_exp` on the positive axis: ``(y**(1-q) - 1)/(1-q)``."""
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)):
        raise DomainError("q_log requires y > 0")
    one_minus_q = 1.0 - float(q)
    if abs(one_minus_q) < Q_LIMIT_EPS:
        out = np.log(y)
    else:
        # expm1 keeps accuracy when (1-q) ln y is small
        out = np.expm1(one_minus_q * np.log(y)) / one_minus_q
    return out[()] if out.ndim == 0 else out


def q_add(a, b, q):
    """q-addition ``a + b + (1-q) a b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = a + b + (1.0 - q) * a * b
    return out[()] if out.ndim == 0 else out


def q_sub(a, b, q):
    """q-subtraction ``(a - b) / (1 + (1-q) b)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    den = 1.0 + (1.0 - q) * b
    if np.any(den == 0):
        raise DomainError(f"q_sub pole: b = 1/(q-1) = {1.0 / (q - 1.0)!r}")
    out = (a - b) / den
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Coordinate map
# ---------------------------------------------------------------------------

def deformed_coordinate(x, params: DeformationParams):
    """Map physical ``x`` to ``u = ln(1 + gamma x) / gamma``."""
    x = np.asarray(x, dtype=float)
    g = params.gamma
    if _undeformed(g, x):
        out = x.copy()
    else:
        fac = 1.0 + g * x
        if np.any(fac <= 0):
            raise SingularityError(g, "deformed_coordinate")
        out = np.log1p(g * x) / g
    return out[()] if out.ndim == 0 else out


def inverse_coordinate(u, params: DeformationParams):
    """Map deformed ``u`` back to ``x = (exp(gamma u) - 1) / gamma``."""
    u = np.asarray(u, dtype=float)
    g = params.gamma
    if _undeformed(g, u):
        out = u.copy()
    else:
        out = np.expm1(g * u) / g
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Finite differences and quadrature
# ---------------------------------------------------------------------------

def fd_derivative(values: np.ndarray, h: float, order: int = DEFAULT_FD_ORDER) -> np.ndarray:
    """First derivative on a uniform grid.

    Central differences in the interior and one-sided stencils of the same
    order at the ends.  ``order`` is 2 or 4.
    """
    f = np.asarray(values)
    n = f.shape[0]
    if order == 2:
        if n < 3:
            raise GridSizeError(f"order-2 derivative needs >= 3 points, got {n}")
        return np.gradient(f, h, edge_order=2)
    if order != 4:
        raise ValueError(f"order must be 2 or 4, got {order}")
    if n < 5:
        raise GridSizeError(f"order-4 derivative needs >= 5 points, got {n}")
    d = np.empty_like(f, dtype=np.result_type(f, float))
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h)
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h)
    d[-1] = (25.0 * f[-1] - 48.0 * f[-2] + 36.0 * f[-3] - 16.0 * f[-4] + 3.0 * f[-5]) / (12.0 * h)
    d[-2] = (3.0 * f[-1] + 10.0 * f[-2] - 18.0 * f[-3] + 6.0 * f[-4] - f[-5]) / (12.0 * h)
    return d


def deformed_derivative(f: "RealField | ComplexField", order: int = DEFAULT_FD_ORDER):
    """Deformed derivative ``D f = (1 + gamma x) df/dx``.

    On a deformed-coordinate grid this is the plain derivative in ``u``.
    Returns a field of the same class on the same grid.
    """
    grid = f.grid
    d = fd_derivative(f.values, grid.spacing, order)
    if grid.kind == "physical_x":
        d = grid.factor * d
    return f.with_values(d)


def x_derivative(f: "RealField | ComplexField", order: int = DEFAULT_FD_ORDER):
    """Ordinary derivative ``df/dx`` regardless of the grid coordinate."""
    grid = f.grid
    d = fd_derivative(f.values, grid.spacing, order)
    if grid.kind == "deformed_u":
        d = d / grid.factor
    return f.with_values(d)


def q_integral(f: "RealField", values: Optional[np.ndarray] = None) -> float:
    """q-integral ``int f dx / (1 + gamma x)`` over the whole grid.

    ``values`` overrides the field samples (same grid).  Composite Simpson;
    scipy's rule handles an even point count with an end correction.
    """
    grid = f.grid
    v = f.values if values is None else np.asarray(values)
    if grid.kind == "physical_x":
        if np.any(grid.factor <= 0):
            raise SingularityError(grid.params.gamma, "q_integral")
        v = v / grid.factor
    return _scalar(simpson(v, x=grid.nodes))


def integral(f: "RealField", values: Optional[np.ndarray] = None) -> float:
    """Standard integral ``int f dx`` over the whole grid."""
    grid = f.grid
    v = f.values if values is None else np.asarray(values)
    if grid.kind == "deformed_u":
        v = v * grid.factor
    return _scalar(simpson(v, x=grid.nodes))


def _scalar(r):
    return complex(r) if np.iscomplexobj(r) else float(r)
