"""Mixture-weight recovery from measured intensity profiles.

recover_fraction solves the two-component least-squares problem in closed
form; recover_simplex handles any number of basis profiles with projected
gradient descent on the probability simplex; brute_force_fraction is a slow
grid search over the same objective, kept around as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bell import BellSpectrum, analytic_discord
from .errors import DegenerateBasis, GridMismatch
from .modes import IntensityMap

DEGENERACY_TOL = 1e-9
SIMPLEX_OBJECTIVE_TOL = 1e-12
SIMPLEX_MAX_ITER = 100_000


@dataclass(frozen=True)
class RecoveryResult:
    """Recovered two-component weights and the discord they imply."""

    lambda0_rec: float
    lambda1_rec: float
    residual: float
    discord_measured: float


@dataclass(frozen=True)
class SimplexResult:
    """Weights from the simplex-constrained fit, with a degeneracy flag."""

    weights: np.ndarray
    degenerate: bool
    objective: float
    iterations: int


def _flat(m: IntensityMap, mask: np.ndarray | None) -> np.ndarray:
    if mask is None:
        return m.values.ravel()
    return m.values[mask]


def recover_fraction(
    measured: IntensityMap,
    basis_psi: IntensityMap,
    basis_phi: IntensityMap,
    mask: np.ndarray | None = None,
) -> RecoveryResult:
    """Best x in [0, 1] with measured ~ x * basis_psi + (1-x) * basis_phi.

    Minimizes the integrated squared profile mismatch; the unconstrained
    minimizer of the 1-D quadratic is computed exactly and clamped to [0, 1].
    Raises DegenerateBasis when the basis maps are too alike for x to be
    identifiable. `mask` optionally restricts all integrals to a pixel subset.
    """
    if measured.grid != basis_psi.grid or measured.grid != basis_phi.grid:
        raise GridMismatch("measured and basis maps sampled on different grids")
    area = measured.grid.cell_area
    m = _flat(measured, mask)
    bp = _flat(basis_psi, mask)
    bf = _flat(basis_phi, mask)

    d = bp - bf
    denom = float(np.sum(d * d)) * area
    if denom < DEGENERACY_TOL:
        raise DegenerateBasis(f"basis separation {denom!r} below {DEGENERACY_TOL}")
    x = float(np.sum((m - bf) * d)) * area / denom
    x = min(1.0, max(0.0, x))

    resid_field = m - x * bp - (1.0 - x) * bf
    residual = float(np.sum(resid_field**2)) * area
    discord = analytic_discord(BellSpectrum(x, 1.0 - x, 0.0, 0.0))
    return RecoveryResult(x, 1.0 - x, residual, discord)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum w = 1} (sort-based, exact)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(v) + 1)
    valid = u - css / idx > 0
    rho = int(idx[valid][-1])
    theta = css[rho - 1] / rho
    return np.clip(v - theta, 0.0, None)


def recover_simplex(
    measured: IntensityMap,
    bases,
    mask: np.ndarray | None = None,
) -> SimplexResult:
    """Simplex-constrained least-squares weights for any number of bases.

    Projected gradient descent with a fixed 1/L step, stopping when the
    objective improves by less than SIMPLEX_OBJECTIVE_TOL or the iteration
    cap is hit. A near-singular difference Gram matrix does not abort the
    fit; the best-effort weights come back with degenerate=True.
    """
    bases = list(bases)
    if len(bases) < 2:
        raise ValueError(f"need at least 2 basis maps, got {len(bases)}")
    for b in bases:
        if b.grid != measured.grid:
            raise GridMismatch("measured and basis maps sampled on different grids")
    area = measured.grid.cell_area
    m = _flat(measured, mask)
    b_mat = np.stack([_flat(b, mask) for b in bases])  # (k, npix)

    gram = (b_mat @ b_mat.T) * area
    corr = (b_mat @ m) * area
    m_power = float(np.sum(m * m)) * area

    diff = b_mat[:-1] - b_mat[-1]
    diff_gram = (diff @ diff.T) * area
    min_eig = float(np.linalg.eigvalsh(diff_gram)[0]) if len(bases) > 1 else 0.0
    degenerate = min_eig < DEGENERACY_TOL

    def objective(w: np.ndarray) -> float:
        return m_power - 2.0 * float(w @ corr) + float(w @ gram @ w)

    lipschitz = 2.0 * float(np.linalg.eigvalsh(gram)[-1])
    step = 1.0 / lipschitz if lipschitz > 0 else 1.0
    w = np.full(len(bases), 1.0 / len(bases))
    f_prev = objective(w)
    iterations = 0
    for iterations in range(1, SIMPLEX_MAX_ITER + 1):
        grad = 2.0 * (gram @ w - corr)
        direction = project_simplex(w - step * grad) - w
        if float(np.abs(direction).max()) < 1e-14:
            break  # fixed point of the projected step: constrained optimum
        # exact minimization along the feasible ray through the projected
        # point; sum(direction) = 0, so only non-negativity bounds the step
        shrinking = direction < -1e-300
        alpha_max = float(np.min(w[shrinking] / -direction[shrinking])) if shrinking.any() else 1.0
        curvature = float(direction @ gram @ direction)
        if curvature > 0.0:
            alpha = min(alpha_max, max(0.0, -float(direction @ grad) / (2.0 * curvature)))
        else:
            alpha = alpha_max
        w = project_simplex(w + alpha * direction)
        f_cur = objective(w)
        if abs(f_prev - f_cur) < SIMPLEX_OBJECTIVE_TOL:
            break
        f_prev = f_cur
    w = project_simplex(w)
    return SimplexResult(w, degenerate, objective(w), iterations)


def brute_force_fraction(
    measured: IntensityMap,
    basis_psi: IntensityMap,
    basis_phi: IntensityMap,
    steps: int,
    mask: np.ndarray | None = None,
) -> float:
    """Grid-search minimizer of the two-component objective; test oracle only.

    Evaluates the integrated squared mismatch literally at `steps` uniform
    points of x in [0, 1] and returns the argmin.
    """
    if steps < 1000:
        raise ValueError(f"steps must be >= 1000, got {steps}")
    area = measured.grid.cell_area
    m = _flat(measured, mask)
    bp = _flat(basis_psi, mask)
    bf = _flat(basis_phi, mask)

    xs = np.linspace(0.0, 1.0, steps)
    base = m - bf
    diff = bp - bf
    best_x, best_f = 0.0, np.inf
    chunk = max(1, 8_388_608 // max(len(m), 1))  # cap working set near 64 MB
    buf = np.empty((min(chunk, steps), len(m)))
    for start in range(0, steps, chunk):
        x_chunk = xs[start : start + chunk]
        resid = buf[: len(x_chunk)]
        np.multiply(x_chunk[:, None], diff[None, :], out=resid)
        np.subtract(base[None, :], resid, out=resid)
        f_chunk = np.einsum("ij,ij->i", resid, resid) * area
        k = int(np.argmin(f_chunk))
        if f_chunk[k] < best_f:
            best_f = float(f_chunk[k])
            best_x = float(x_chunk[k])
    return best_x


def objective_range(
    measured: IntensityMap,
    basis_psi: IntensityMap,
    basis_phi: IntensityMap,
    steps: int,
    mask: np.ndarray | None = None,
):
    """(min, max) of the grid-sampled objective; degenerate bases give a flat range."""
    area = measured.grid.cell_area
    m = _flat(measured, mask)
    bp = _flat(basis_psi, mask)
    bf = _flat(basis_phi, mask)
    xs = np.linspace(0.0, 1.0, steps)
    base = m - bf
    diff = bp - bf
    lo, hi = np.inf, -np.inf
    chunk = max(1, 8_388_608 // max(len(m), 1))
    for start in range(0, steps, chunk):
        x_chunk = xs[start : start + chunk]
        resid = base[None, :] - x_chunk[:, None] * diff[None, :]
        f_chunk = np.sum(resid * resid, axis=1) * area
        lo = min(lo, float(f_chunk.min()))
        hi = max(hi, float(f_chunk.max()))
    return lo, hi
