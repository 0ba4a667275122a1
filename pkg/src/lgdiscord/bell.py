"""Two-qubit Bell-diagonal state math.

Everything here works on the four-eigenvalue description of a Bell-diagonal
density matrix. The module provides the linear map between eigenvalues and
the three diagonal correlation coefficients, the closed-form discord of such
a state, its inversion (discord -> λ0 on the two-eigenvalue family), the
explicit 4x4 density matrix, and a brute-force discord evaluation that
minimizes the measured conditional entropy over all projective measurement
directions on the second qubit. The brute-force path never uses the
closed-form expression, so the two can check each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateProbability, NonPhysical

ALGEBRA_TOL = 1e-12
GOLDEN_TOL = 1e-10
_ZERO_FLOOR = 1e-300  # below this an eigenvalue is treated as exactly 0 in entropies

_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# Columns of the computational basis |00>,|01>,|10>,|11>; rows are the four
# Bell kets in the eigenvalue order used throughout: psi+, phi+, psi-, phi-.
_BELL_KETS = np.array(
    [
        [1.0, 0.0, 0.0, 1.0],
        [0.0, 1.0, 1.0, 0.0],
        [1.0, 0.0, 0.0, -1.0],
        [0.0, 1.0, -1.0, 0.0],
    ],
    dtype=complex,
) / np.sqrt(2.0)


@dataclass(frozen=True)
class BellSpectrum:
    """Eigenvalues (lambda0..lambda3) of a Bell-diagonal two-qubit state.

    Values must be non-negative (within 1e-12) and sum to 1 (within 1e-12).
    Tiny negative round-off is snapped to 0 after validation.
    """

    lambda0: float
    lambda1: float
    lambda2: float
    lambda3: float

    def __post_init__(self):
        lams = (self.lambda0, self.lambda1, self.lambda2, self.lambda3)
        if any(l < -ALGEBRA_TOL or l > 1.0 + ALGEBRA_TOL for l in lams):
            raise NonPhysical(f"eigenvalues outside [0, 1]: {lams}")
        if abs(sum(lams) - 1.0) > ALGEBRA_TOL:
            raise NonPhysical(f"eigenvalues sum to {sum(lams)!r}, expected 1")
        for name, val in zip(("lambda0", "lambda1", "lambda2", "lambda3"), lams):
            object.__setattr__(self, name, min(max(val, 0.0), 1.0))

    @classmethod
    def from_values(cls, values) -> "BellSpectrum":
        v = [float(x) for x in values]
        if len(v) != 4:
            raise NonPhysical(f"expected 4 eigenvalues, got {len(v)}")
        return cls(*v)

    def as_array(self) -> np.ndarray:
        return np.array([self.lambda0, self.lambda1, self.lambda2, self.lambda3])


@dataclass(frozen=True)
class CorrelationVector:
    """Diagonal correlation coefficients (r1, r2, r3), each in [-1, 1]."""

    r1: float
    r2: float
    r3: float

    def __post_init__(self):
        for r in (self.r1, self.r2, self.r3):
            if abs(r) > 1.0 + ALGEBRA_TOL:
                raise NonPhysical(f"correlation coefficient {r!r} outside [-1, 1]")

    def as_array(self) -> np.ndarray:
        return np.array([self.r1, self.r2, self.r3])

    @property
    def r_max(self) -> float:
        return max(abs(self.r1), abs(self.r2), abs(self.r3))


@dataclass(frozen=True)
class MeasurementDirection:
    """Bloch-sphere direction (theta in [0, pi], phi in [0, 2pi)) of a measurement axis."""

    theta: float
    phi: float

    def axis(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])


def correlations_to_spectrum(c: CorrelationVector) -> BellSpectrum:
    """Map correlation coefficients to the four eigenvalues.

    Raises NonPhysical when the correlation vector lies outside the
    tetrahedron of Bell-diagonal states (some eigenvalue < -1e-12).
    """
    lam = (
        (1.0 - c.r1 - c.r2 - c.r3) / 4.0,
        (1.0 - c.r1 + c.r2 + c.r3) / 4.0,
        (1.0 + c.r1 - c.r2 + c.r3) / 4.0,
        (1.0 + c.r1 + c.r2 - c.r3) / 4.0,
    )
    if any(l < -ALGEBRA_TOL for l in lam):
        raise NonPhysical(f"correlations {c} give negative eigenvalues {lam}")
    return BellSpectrum(*lam)


def spectrum_to_correlations(s: BellSpectrum) -> CorrelationVector:
    """Invert the eigenvalue map; round-trips with correlations_to_spectrum."""
    return CorrelationVector(
        r1=1.0 - 2.0 * (s.lambda0 + s.lambda1),
        r2=1.0 - 2.0 * (s.lambda0 + s.lambda2),
        r3=1.0 - 2.0 * (s.lambda0 + s.lambda3),
    )


def _xlog2x(x: float) -> float:
    if x < _ZERO_FLOOR:
        return 0.0
    return x * np.log2(x)


def binary_entropy(p: float) -> float:
    """H2(p) = -p log2 p - (1-p) log2 (1-p), with 0 log 0 = 0."""
    return -_xlog2x(p) - _xlog2x(1.0 - p)


def spectrum_entropy(s: BellSpectrum) -> float:
    """Von Neumann entropy (bits) of the state, directly from its eigenvalues."""
    return -sum(_xlog2x(l) for l in s.as_array())


def analytic_discord(s: BellSpectrum) -> float:
    """Closed-form quantum discord of a Bell-diagonal state.

    D = 2 + sum_i lambda_i log2 lambda_i
          - (1-r)/2 log2(1-r) - (1+r)/2 log2(1+r),
    with r the largest |r_i| of the correlation vector.
    """
    r = spectrum_to_correlations(s).r_max
    d = 2.0 + sum(_xlog2x(l) for l in s.as_array())
    d -= ((1.0 - r) / 2.0) * _log2_or_zero(1.0 - r)
    d -= ((1.0 + r) / 2.0) * _log2_or_zero(1.0 + r)
    return d


def _log2_or_zero(x: float) -> float:
    if x < _ZERO_FLOOR:
        return 0.0
    return float(np.log2(x))


def bell_density_matrix(s: BellSpectrum) -> np.ndarray:
    """4x4 density matrix sum_i lambda_i |b_i><b_i| over the four Bell kets.

    Basis order of rows/columns is |00>, |01>, |10>, |11>.
    """
    lam = s.as_array()
    return np.einsum("i,ij,ik->jk", lam, _BELL_KETS, _BELL_KETS.conj())


def correlation_density_matrix(c: CorrelationVector) -> np.ndarray:
    """4x4 matrix (I + sum_i r_i sigma_i x sigma_i) / 4 for the same state family."""
    rho = np.eye(4, dtype=complex)
    for r, sigma in zip(c.as_array(), (PAULI_X, PAULI_Y, PAULI_Z)):
        rho += r * np.kron(sigma, sigma)
    return rho / 4.0


def invert_discord(d: float, branch: str = "lower") -> float:
    """Solve analytic_discord((x, 1-x, 0, 0)) = d for x by bisection.

    The discord of the two-eigenvalue family is two-to-one in lambda0, so the
    caller picks the branch: "lower" searches [0, 1/2] where discord decreases
    with lambda0, "upper" searches [1/2, 1] where it increases.
    """
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"discord {d!r} outside [0, 1]")
    if branch == "lower":
        lo, hi = 0.0, 0.5
        decreasing = True
    elif branch == "upper":
        lo, hi = 0.5, 1.0
        decreasing = False
    else:
        raise ValueError(f"branch must be 'lower' or 'upper', got {branch!r}")
    # endpoints are exact; near d = 0 the objective is quadratically flat in
    # lambda0, so bisection alone would stall anywhere in the flat basin
    if d == 0.0:
        return 0.5
    if d == 1.0:
        return lo if decreasing else hi

    def f(x: float) -> float:
        return analytic_discord(BellSpectrum(x, 1.0 - x, 0.0, 0.0))

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (f(mid) > d) == decreasing:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Brute-force discord: minimize the post-measurement conditional entropy over
# all projective measurement directions on qubit B.
# ---------------------------------------------------------------------------


def _partial_trace_a(rho: np.ndarray) -> np.ndarray:
    rr = rho.reshape(2, 2, 2, 2)
    return np.einsum("abad->bd", rr)


def _entropy_2x2(trace: np.ndarray, det: np.ndarray) -> np.ndarray:
    """Entropy of trace-normalized 2x2 Hermitian states from trace and det."""
    disc = np.clip(0.25 - det / trace**2, 0.0, None)
    hi = np.clip(0.5 + np.sqrt(disc), 0.0, 1.0)
    lo = 1.0 - hi
    out = np.zeros_like(hi)
    for side in (hi, lo):
        mask = side > _ZERO_FLOOR
        out[mask] -= side[mask] * np.log2(side[mask])
    return out


@lru_cache(maxsize=8)
def _direction_grid(grid_n: int):
    """Cached (theta, phi, projector stacks) for the coarse direction scan."""
    thetas = np.linspace(0.0, np.pi, grid_n)
    phis = np.linspace(0.0, 2.0 * np.pi, 2 * grid_n, endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    st = np.sin(tt.ravel())
    n = np.stack([st * np.cos(pp.ravel()), st * np.sin(pp.ravel()), np.cos(tt.ravel())], axis=-1)
    ns = (
        n[:, 0, None, None] * PAULI_X
        + n[:, 1, None, None] * PAULI_Y
        + n[:, 2, None, None] * PAULI_Z
    )
    eye = np.eye(2, dtype=complex)
    return thetas, phis, (eye + ns) / 2.0, (eye - ns) / 2.0


def _conditional_entropy_batch(rho: np.ndarray, proj_plus: np.ndarray, proj_minus: np.ndarray) -> np.ndarray:
    """sum_b p_b S(rho_A|b) for a stack of measurement directions on B.

    Unnormalized conditional states come from an explicit partial trace of
    (I x Pi) rho (I x Pi); since Pi is a projector this reduces to
    T[a,a'] = sum_{c,c'} rho[(a,c),(a',c')] Pi[c',c].
    Directions where an outcome probability falls below 1e-15 are skipped
    (returned as +inf so the scan ignores them).
    """
    rr = rho.reshape(2, 2, 2, 2)
    total = np.zeros(proj_plus.shape[0])
    valid = np.ones(proj_plus.shape[0], dtype=bool)
    for proj in (proj_plus, proj_minus):
        t = np.einsum("acbd,gdc->gab", rr, proj)
        p = np.real(t[:, 0, 0] + t[:, 1, 1])
        det = np.real(t[:, 0, 0] * t[:, 1, 1] - t[:, 0, 1] * t[:, 1, 0])
        ok = p > 1e-15
        valid &= ok
        contrib = np.zeros_like(p)
        contrib[ok] = p[ok] * _entropy_2x2(p[ok], det[ok])
        total += contrib
    total[~valid] = np.inf
    if not np.any(valid):
        raise DegenerateProbability("all measurement directions give vanishing outcome probability")
    return total


def _conditional_entropy_scalar(rho_flat: np.ndarray, theta: float, phi: float) -> float:
    """Scalar fast path of _conditional_entropy_batch for the refinement stage."""
    st = np.sin(theta)
    n1, n2, n3 = st * np.cos(phi), st * np.sin(phi), np.cos(theta)
    # vec holds Pi.T.ravel() entries for Pi = (I + n.sigma)/2
    total = 0.0
    for sign in (1.0, -1.0):
        vec = 0.5 * np.array(
            [1.0 + sign * n3, sign * (n1 + 1.0j * n2), sign * (n1 - 1.0j * n2), 1.0 - sign * n3]
        )
        t = rho_flat @ vec  # entries T00, T01, T10, T11
        p = (t[0] + t[3]).real
        if p <= 1e-15:
            continue
        det = (t[0] * t[3] - t[1] * t[2]).real
        disc = max(0.25 - det / p**2, 0.0)
        hi = min(max(0.5 + np.sqrt(disc), 0.0), 1.0)
        lo = 1.0 - hi
        s = 0.0
        for side in (hi, lo):
            if side > _ZERO_FLOOR:
                s -= side * np.log2(side)
        total += p * s
    return total


def _golden_minimize(f, lo: float, hi: float, tol: float = GOLDEN_TOL) -> float:
    """Golden-section minimum of a unimodal scalar function on [lo, hi]."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def oracle_discord(s: BellSpectrum, grid_n: int = 32) -> float:
    """Discord by direct minimization over projective measurements on qubit B.

    Computes S(rho_B) - S(rho_AB) + min_n sum_b p_b S(rho_A|b), scanning a
    grid_n x 2*grid_n grid of Bloch angles and then refining the best point
    with alternating golden-section searches on each angle. Independent of
    the closed form in analytic_discord except for sharing the state itself.
    """
    if grid_n < 32:
        raise ValueError(f"grid_n must be >= 32, got {grid_n}")
    rho = bell_density_matrix(s)
    s_ab = spectrum_entropy(s)
    rho_b = _partial_trace_a(rho)
    tr_b = np.real(rho_b[0, 0] + rho_b[1, 1])
    det_b = np.real(rho_b[0, 0] * rho_b[1, 1] - rho_b[0, 1] * rho_b[1, 0])
    s_b = float(_entropy_2x2(np.array([tr_b]), np.array([det_b]))[0])

    thetas, phis, proj_plus, proj_minus = _direction_grid(grid_n)
    values = _conditional_entropy_batch(rho, proj_plus, proj_minus)
    best = int(np.argmin(values))
    theta = thetas[best // len(phis)]
    phi = phis[best % len(phis)]

    rho_flat = rho.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    dtheta = np.pi / (grid_n - 1)
    dphi = 2.0 * np.pi / (2 * grid_n)
    for _ in range(3):
        theta = _golden_minimize(
            lambda x: _conditional_entropy_scalar(rho_flat, x, phi),
            max(0.0, theta - dtheta),
            min(np.pi, theta + dtheta),
        )
        phi = _golden_minimize(
            lambda x: _conditional_entropy_scalar(rho_flat, theta, x),
            phi - dphi,
            phi + dphi,
        )
    minimum = _conditional_entropy_scalar(rho_flat, theta, phi)
    return s_b - s_ab + minimum


def random_spectrum(rng: np.random.Generator) -> BellSpectrum:
    """Uniform-ish random valid spectrum: normalize four uniforms, retry on failure."""
    while True:
        raw = rng.uniform(0.0, 1.0, size=4)
        total = raw.sum()
        if total <= 0.0:
            continue
        try:
            return BellSpectrum.from_values(raw / total)
        except NonPhysical:  # pragma: no cover - normalized uniforms are always valid
            continue
