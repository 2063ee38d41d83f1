"""
Infinite square well of width L with mass m0/(1 + gamma x)^2.

Closed forms for eigenstates, energies, position/momentum moments and the
three Fisher informations, written so that they stay accurate as
``gamma -> 0`` (the printed expressions are 0/0 there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence

import numpy as np

from .errors import DomainError, SingularityError
from .fields import ComplexField, SpatialGrid
from .qcalc import DeformationParams

_SERIES_SWITCH = 1e-2


def _h(z: float) -> float:
    """(z - log1p z) / z**2, smooth through z = 0."""
    if abs(z) < _SERIES_SWITCH:
        return sum((-1) ** k * z ** k / (k + 2) for k in range(12))
    return (z - math.log1p(z)) / (z * z)


def _j(z: float) -> float:
    """(z**2/2 - z + log1p z) / z**3, smooth through z = 0."""
    if abs(z) < _SERIES_SWITCH:
        return sum((-1) ** k * z ** k / (k + 3) for k in range(12))
    return (0.5 * z * z - z + math.log1p(z)) / z ** 3


def _log1p_over(z: float) -> float:
    """log1p(z) / z, smooth through z = 0."""
    if z == 0.0:
        return 1.0
    return math.log1p(z) / z


@dataclass(frozen=True)
class WellSpec:
    """Box [0, L] with deformation ``gamma``; requires ``1 + gamma L > 0``."""

    L: float = 1.0
    gamma: float = 0.0
    hbar: float = 1.0
    m0: float = 1.0

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError(f"L must be positive, got {self.L!r}")
        if not 1.0 + self.gamma * self.L > 0:
            raise SingularityError(self.gamma, "WellSpec")

    @classmethod
    def from_gammaL(cls, gammaL: float, L: float = 1.0, hbar: float = 1.0, m0: float = 1.0) -> "WellSpec":
        return cls(L=L, gamma=gammaL / L, hbar=hbar, m0=m0)

    @property
    def gammaL(self) -> float:
        return self.gamma * self.L

    @property
    def params(self) -> DeformationParams:
        return DeformationParams(self.gamma)

    @property
    def L_q(self) -> float:
        """Box length in the deformed coordinate, ``ln(1 + gamma L)/gamma``."""
        return self.L * _log1p_over(self.gammaL)

    @property
    def A_q2(self) -> float:
        return 2.0 / self.L_q

    def k(self, n: int) -> float:
        return n * math.pi / self.L_q

    def grid(self, n_points: int, coordinate_kind: str = "physical_x") -> SpatialGrid:
        if coordinate_kind == "deformed_u":
            return SpatialGrid(0.0, self.L_q, n_points, "deformed_u", self.params)
        return SpatialGrid(0.0, self.L, n_points, "physical_x", self.params)


def _check_n(n: int):
    if int(n) != n or n < 1:
        raise DomainError(f"quantum number must be a positive integer, got {n!r}")


def eigenfunction_phi(spec: WellSpec, n: int, x) -> np.ndarray:
    """``A_q sin(k_n ln(1 + gamma x)/gamma)`` on [0, L], zero outside."""
    _check_n(n)
    x = np.asarray(x, dtype=float)
    inside = (x >= 0) & (x <= spec.L)
    xi = np.where(inside, x, 0.0)
    if spec.gamma == 0.0:
        u = xi
    else:
        u = np.log1p(spec.gamma * xi) / spec.gamma
    out = np.sqrt(spec.A_q2) * np.sin(spec.k(n) * u)
    return np.where(inside, out, 0.0)


def eigenfunction_psi(spec: WellSpec, n: int, x) -> np.ndarray:
    """``phi_n(x) / sqrt(1 + gamma x)`` on [0, L], zero outside."""
    x = np.asarray(x, dtype=float)
    inside = (x >= 0) & (x <= spec.L)
    fac = np.where(inside, 1.0 + spec.gamma * np.where(inside, x, 0.0), 1.0)
    return eigenfunction_phi(spec, n, x) / np.sqrt(fac)


def energy(spec: WellSpec, n: int) -> float:
    """``hbar^2 pi^2 gamma^2 n^2 / (2 m0 ln^2(1 + gamma L))`` = hbar^2 k_n^2 / 2 m0."""
    _check_n(n)
    return spec.hbar ** 2 * spec.k(n) ** 2 / (2.0 * spec.m0)


class Moments(NamedTuple):
    mean_x: float
    mean_x2: float
    mean_p: float
    mean_p2: float

    @property
    def var_x(self) -> float:
        return self.mean_x2 - self.mean_x ** 2

    @property
    def var_p(self) -> float:
        return self.mean_p2 - self.mean_p ** 2


def moments(spec: WellSpec, n: int) -> Moments:
    """Closed-form ``<x>, <x^2>, <p>, <p^2>`` of the n-th eigenstate."""
    _check_n(n)
    L, g, z, Lq = spec.L, spec.gamma, spec.gammaL, spec.L_q
    k = spec.k(n)
    mean_x = L * L * _h(z) / Lq - g * L / (Lq * (g * g + 4 * k * k))
    mean_x2 = (L ** 3 * _j(z) / Lq
               - L * (2.0 + z) / (2.0 * Lq * (g * g + k * k))
               + 2.0 * L / (Lq * (g * g + 4 * k * k)))
    mean_p2 = (spec.hbar ** 2 * k * k * L * (2.0 + z) / (2.0 * (1.0 + z) ** 2 * Lq)
               * (1.0 + g * g / (4.0 * (k * k + g * g))))
    return Moments(mean_x, mean_x2, 0.0, mean_p2)


class FisherValues(NamedTuple):
    I_q: float
    I_pdm: float
    I_F: float


def fisher_values(spec: WellSpec, n: int) -> FisherValues:
    """``I_q = 4k^2``, ``I = 4k^2 + gamma^2`` and ``I_F = <p^2>/(hbar/2)^2``."""
    k = spec.k(n)
    i_q = 4.0 * k * k
    i_f = moments(spec, n).mean_p2 / (spec.hbar / 2.0) ** 2
    return FisherValues(i_q, i_q + spec.gamma ** 2, i_f)


def sample_state(spec: WellSpec, n: int, n_points: int, coordinate_kind: str = "physical_x"):
    """Eigenstate ``n`` sampled on a grid: returns ``(psi, phi)`` fields."""
    grid = spec.grid(n_points, coordinate_kind)
    x = grid.x
    psi = ComplexField(grid, eigenfunction_psi(spec, n, x), "psi")
    phi = ComplexField(grid, eigenfunction_phi(spec, n, x), "phi_q")
    return psi, phi


# ---------------------------------------------------------------------------
# Cramer-Rao sweep over gamma L
# ---------------------------------------------------------------------------

def default_gammaL_values(n_points: int = 41, lo: float = -0.95, hi: float = 10.0,
                          log_min: float = 1e-2) -> np.ndarray:
    """Linear on [lo, 0), the point 0, then geometric on [log_min, hi]."""
    if n_points < 3:
        raise DomainError("need at least 3 sweep points")
    if not (-1.0 < lo < 0.0 < log_min < hi):
        raise DomainError(f"need -1 < lo < 0 < log_min < hi, got {lo}, {log_min}, {hi}")
    n_neg = (n_points - 1) // 2
    n_pos = n_points - 1 - n_neg
    neg = np.linspace(lo, 0.0, n_neg, endpoint=False)
    pos = np.geomspace(log_min, hi, n_pos)
    return np.concatenate([neg, [0.0], pos])


FIG1_COLUMNS = (
    "gamma_L", "n", "I_pdm", "I_q", "I_F", "mean_x", "var_x",
    "cr_q_lhs", "cr_q_rhs", "cr_pdm", "cr_std", "margin_q",
    "E_n", "L_q", "k_qn",
    "ratio_q", "log10_cr_pdm", "log10_cr_q", "log10_cr_std",
)


def figure1_row(gammaL: float, n: int, L: float = 1.0, hbar: float = 1.0, m0: float = 1.0) -> dict:
    """One sweep row from closed forms; column names as in ``FIG1_COLUMNS``."""
    from .fisher import FisherReport

    spec = WellSpec.from_gammaL(gammaL, L=L, hbar=hbar, m0=m0)
    mo = moments(spec, n)
    fv = fisher_values(spec, n)
    rep = FisherReport(I_pdm=fv.I_pdm, I_q=fv.I_q, I_F=fv.I_F, mean_x=mo.mean_x, var_x=mo.var_x,
                       gamma=spec.gamma, gamma_L=gammaL, n=n)
    row = rep.as_row()
    row.update(E_n=energy(spec, n), L_q=spec.L_q, k_qn=spec.k(n))
    # panel (b) as "I_q dx^2 - 2 gamma <x> >= 1", so all three panels compare with log10 = 0;
    # the plain ratio changes sign when 1 + 2 gamma <x> < 0
    shifted = rep.cr_deformed_lhs - 2.0 * spec.gamma * mo.mean_x
    row.update(ratio_q=rep.cr_deformed_lhs / rep.cr_deformed_rhs,
               log10_cr_pdm=math.log10(rep.cr_pdm),
               log10_cr_q=math.log10(shifted),
               log10_cr_std=math.log10(rep.cr_standard))
    return {c: row[c] for c in FIG1_COLUMNS}


def figure1_sweep(gammaL_values: Iterable[float], n_values: Sequence[int] = (1, 2, 3),
                  L: float = 1.0, hbar: float = 1.0, m0: float = 1.0,
                  max_workers: Optional[int] = None) -> List[dict]:
    """Rows for every (gammaL, n) pair, in input order (gammaL outer, n inner).

    Rows are computed on a thread pool; ``executor.map`` keeps the output
    order equal to the input order.
    """
    from concurrent.futures import ThreadPoolExecutor

    tasks = [(float(g), int(n)) for g in gammaL_values for n in n_values]
    if max_workers is not None and max_workers <= 1:
        return [figure1_row(g, n, L, hbar, m0) for g, n in tasks]
    with ThreadPoolExecutor(max_workers=max_workers) as ex:
        return list(ex.map(lambda t: figure1_row(t[0], t[1], L, hbar, m0), tasks))
