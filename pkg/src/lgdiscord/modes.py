"""Laguerre-Gauss mode synthesis on a square sampled grid.

Modes are evaluated at the beam waist only (no propagation phase), with
radial index p and azimuthal index ell restricted to {0, 1} for the
two-mode-pair superpositions used elsewhere. Fields carry their grid so
inner products and pointwise operations can check compatibility.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial, pi, sqrt

import numpy as np
from scipy.special import eval_genlaguerre

from .errors import EmptyTermList, GridMismatch, GridTooCoarse

NORM_TOL = 1e-3  # discretization tolerance on unit field norms


@dataclass(frozen=True)
class GridSpec:
    """Square sampling grid: n pixels per side, half-width half_extent * waist.

    Pixel centers sit at (i + 1/2 - n/2) * pitch with pitch = 2 * half_extent
    * waist / n, so the grid is symmetric about the beam axis. half_extent is
    expressed in units of the waist; keeping it >= 3 makes boundary leakage
    of the supported modes negligible.
    """

    n: int = 512
    half_extent: float = 4.0
    waist: float = 1.0

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"grid needs at least 16 pixels per side, got {self.n}")
        if self.half_extent < 3.0:
            raise ValueError(f"half_extent must be >= 3 waists, got {self.half_extent}")
        if self.waist <= 0.0:
            raise ValueError(f"waist must be positive, got {self.waist}")

    @property
    def pitch(self) -> float:
        return 2.0 * self.half_extent * self.waist / self.n

    @property
    def cell_area(self) -> float:
        return self.pitch**2

    def axis(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5 - self.n / 2.0) * self.pitch

    def meshgrid(self):
        c = self.axis()
        return np.meshgrid(c, c)


@dataclass(frozen=True)
class ScalarField:
    """Complex amplitude samples on a grid. Treated as immutable."""

    values: np.ndarray
    grid: GridSpec

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.cell_area)


@dataclass(frozen=True)
class IntensityMap:
    """Non-negative real intensity samples on a grid."""

    values: np.ndarray
    grid: GridSpec

    @property
    def total(self) -> float:
        return float(np.sum(self.values) * self.grid.cell_area)


def _require_same_grid(*objs):
    first = objs[0].grid
    for o in objs[1:]:
        if o.grid != first:
            raise GridMismatch(f"grids differ: {first} vs {o.grid}")
    return first


def lg_mode(p: int, ell: int, grid: GridSpec) -> ScalarField:
    """Waist-plane Laguerre-Gauss mode LG_{p, ell}, unit continuum norm.

    Uses the analytic normalization constant and verifies that the discrete
    norm agrees with 1 to within NORM_TOL, raising GridTooCoarse otherwise.
    """
    if p < 0:
        raise ValueError(f"radial index must be non-negative, got {p}")
    w = grid.waist
    x, y = grid.meshgrid()
    r2 = x**2 + y**2
    a = abs(ell)
    norm = sqrt(2.0 * factorial(p) / (pi * factorial(p + a))) / w
    radial = (np.sqrt(2.0 * r2) / w) ** a * eval_genlaguerre(p, a, 2.0 * r2 / w**2)
    values = norm * radial * np.exp(-r2 / w**2) * np.exp(1.0j * ell * np.arctan2(y, x))
    field = ScalarField(values, grid)
    if abs(field.norm_squared - 1.0) > NORM_TOL:
        raise GridTooCoarse(
            f"LG({p},{ell}) discrete norm^2 = {field.norm_squared!r} on {grid}"
        )
    return field


def inner_product(f: ScalarField, g: ScalarField) -> complex:
    """Discrete overlap sum(conj(f) * g) * cell_area."""
    grid = _require_same_grid(f, g)
    return complex(np.sum(np.conj(f.values) * g.values) * grid.cell_area)


def superpose(terms) -> ScalarField:
    """Pointwise sum of coefficient * field terms; no renormalization."""
    terms = list(terms)
    if not terms:
        raise EmptyTermList("superpose needs at least one (coefficient, field) term")
    grid = _require_same_grid(*(f for _, f in terms))
    values = np.zeros((grid.n, grid.n), dtype=complex)
    for coeff, field in terms:
        values += coeff * field.values
    return ScalarField(values, grid)


@lru_cache(maxsize=4)
def bell_modes(grid: GridSpec):
    """The two orthogonal mode-pair superpositions used by the virtual bench.

    Returns (psi_plus, phi_plus) with
        psi_plus = (LG_00 + LG_11) / sqrt(2)
        phi_plus = (LG_01 + LG_10) / sqrt(2)
    where the first index is radial and the second azimuthal. Results are
    cached per grid; fields are shared and must not be mutated.
    """
    inv_sqrt2 = 1.0 / sqrt(2.0)
    psi_plus = superpose([(inv_sqrt2, lg_mode(0, 0, grid)), (inv_sqrt2, lg_mode(1, 1, grid))])
    phi_plus = superpose([(inv_sqrt2, lg_mode(0, 1, grid)), (inv_sqrt2, lg_mode(1, 0, grid))])
    return psi_plus, phi_plus


def intensity(f: ScalarField) -> IntensityMap:
    """Pointwise |f|^2."""
    return IntensityMap(np.abs(f.values) ** 2, f.grid)


def gram_matrix(fields) -> np.ndarray:
    """Matrix of pairwise inner products; identity for orthonormal fields."""
    fields = list(fields)
    k = len(fields)
    g = np.zeros((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            g[i, j] = inner_product(fields[i], fields[j])
    return g
