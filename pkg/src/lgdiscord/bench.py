"""Virtual two-arm interferometer bench and CCD sensor model.

One arm carries the psi_plus superposition tagged with horizontal
polarization, the other carries phi_plus tagged vertical; attenuators set
the intensity ratio. Because the polarizations are orthogonal the camera
sees the incoherent sum of the two arm intensities, which is what
trace_out_polarization computes. ccd_capture turns a clean intensity map
into integer sensor counts with laser-power jitter, optional arm
misregistration, shot noise, read noise, and quantization.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .errors import EmptyImage, GridMismatch, ZeroPower
from .modes import GridSpec, IntensityMap, ScalarField, intensity


@dataclass(frozen=True)
class ArmSettings:
    """Per-arm intensities; only the ratio matters downstream."""

    i0: float
    i1: float

    def __post_init__(self):
        if self.i0 < 0.0 or self.i1 < 0.0:
            raise ValueError(f"arm intensities must be non-negative: {self}")
        if self.i0 + self.i1 <= 0.0:
            raise ZeroPower("both arms have zero intensity")

    @property
    def lambda0(self) -> float:
        return self.i0 / (self.i0 + self.i1)


@dataclass(frozen=True)
class PolarizedField:
    """Horizontal and vertical field components on a shared grid."""

    e_h: ScalarField
    e_v: ScalarField

    def __post_init__(self):
        if self.e_h.grid != self.e_v.grid:
            raise GridMismatch("polarization components sampled on different grids")

    @property
    def total_power(self) -> float:
        return self.e_h.norm_squared + self.e_v.norm_squared


@dataclass(frozen=True)
class NoiseModel:
    """Sensor and source imperfections applied by ccd_capture.

    photon_scale is the expected photoelectron count produced by unit
    intensity; 0 disables shot noise entirely. read_sigma is additive
    Gaussian noise in output counts. intensity_jitter_sigma models per-frame
    laser power fluctuation as a single multiplicative factor. misalign_dx /
    misalign_dy translate the captured map in pixels (bilinear, zero fill).
    Counts are quantized to bit_depth bits. The defaults are the documented
    profile used for noisy sweeps; NoiseModel.noiseless() turns everything
    off.
    """

    photon_scale: float = 1e5
    read_sigma: float = 2.0
    intensity_jitter_sigma: float = 0.01
    misalign_dx: float = 0.0
    misalign_dy: float = 0.0
    bit_depth: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.photon_scale < 0 or self.read_sigma < 0 or self.intensity_jitter_sigma < 0:
            raise ValueError(f"noise magnitudes must be non-negative: {self}")
        if self.bit_depth not in (8, 16):
            raise ValueError(f"bit_depth must be 8 or 16, got {self.bit_depth}")

    @classmethod
    def noiseless(cls, bit_depth: int = 16, seed: int = 0) -> "NoiseModel":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, bit_depth, seed)

    @property
    def full_scale(self) -> int:
        return (1 << self.bit_depth) - 1

    def scaled(self, factor: float) -> "NoiseModel":
        """Scale every noise magnitude by `factor`.

        Additive and multiplicative sigmas scale linearly; shot noise has
        amplitude ~ 1/sqrt(photon_scale), so photon_scale divides by
        factor^2. photon_scale == 0 stays 0 (shot noise stays off).
        """
        return replace(
            self,
            photon_scale=self.photon_scale / factor**2 if self.photon_scale > 0 else 0.0,
            read_sigma=self.read_sigma * factor,
            intensity_jitter_sigma=self.intensity_jitter_sigma * factor,
            misalign_dx=self.misalign_dx * factor,
            misalign_dy=self.misalign_dy * factor,
        )

    def without_misalignment(self) -> "NoiseModel":
        return replace(self, misalign_dx=0.0, misalign_dy=0.0)


@dataclass(frozen=True)
class CCDImage:
    """Integer sensor counts plus the capture conditions that produced them."""

    counts: np.ndarray
    grid: GridSpec
    noise: NoiseModel
    exposure_id: int
    saturation_fraction: float


def build_combined_state(psi: ScalarField, phi: ScalarField, arms: ArmSettings) -> PolarizedField:
    """Attenuate the two normalized inputs and tag them with H/V polarization.

    The result carries fraction lambda0 of its power in the psi (H) component
    and 1 - lambda0 in the phi (V) component.
    """
    if psi.grid != phi.grid:
        raise GridMismatch("arm fields sampled on different grids")
    lam0 = arms.lambda0
    e_h = ScalarField(np.sqrt(lam0) * psi.values, psi.grid)
    e_v = ScalarField(np.sqrt(1.0 - lam0) * phi.values, phi.grid)
    return PolarizedField(e_h, e_v)


def trace_out_polarization(e: PolarizedField) -> IntensityMap:
    """Polarization-insensitive detection: pointwise |e_h|^2 + |e_v|^2."""
    return IntensityMap(
        np.abs(e.e_h.values) ** 2 + np.abs(e.e_v.values) ** 2, e.e_h.grid
    )


def expected_profile(i_psi: IntensityMap, i_phi: IntensityMap, lambda0: float) -> IntensityMap:
    """Convex combination lambda0 * i_psi + (1 - lambda0) * i_phi."""
    if i_psi.grid != i_phi.grid:
        raise GridMismatch("profile maps sampled on different grids")
    return IntensityMap(
        lambda0 * i_psi.values + (1.0 - lambda0) * i_phi.values, i_psi.grid
    )


def block_arm(psi: ScalarField, phi: ScalarField, which: str) -> IntensityMap:
    """Intensity of the arm left open when `which` is blocked."""
    if which == "phi_arm":
        return intensity(psi)
    if which == "psi_arm":
        return intensity(phi)
    raise ValueError(f"which must be 'psi_arm' or 'phi_arm', got {which!r}")


def translate_bilinear(values: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """Shift image content by (dx, dy) pixels; samples from outside are zero."""
    if dx == 0.0 and dy == 0.0:
        return values
    return ndimage.shift(values, (dy, dx), order=1, mode="constant", cval=0.0, prefilter=False)


def _capture_rng(nm: NoiseModel, exposure_id: int) -> np.random.Generator:
    # keyed on (seed, exposure id) so repeated captures are bit-identical
    return np.random.default_rng((int(nm.seed) & 0xFFFFFFFFFFFFFFFF, int(exposure_id)))


def ccd_capture(i: IntensityMap, nm: NoiseModel, exposure_id: int = 0) -> CCDImage:
    """Expose the sensor to an intensity map and return quantized counts.

    Per frame: draw one jitter factor ~ Normal(1, intensity_jitter_sigma)
    clipped to >= 0, translate the map by the misalignment, convert to
    expected photoelectrons mu = jitter * photon_scale * I, Poisson-sample
    if photon_scale > 0, then scale through a fixed ADC gain that maps the
    jitter-free input peak to full scale, add Gaussian read noise in counts,
    clip to the bit range, and round. With photon_scale == 0 the electron
    stage is skipped and counts are the deterministic quantization of the
    (jittered, shifted) map. Fully deterministic given (seed, exposure_id).
    """
    rng = _capture_rng(nm, exposure_id)
    jitter = 1.0
    if nm.intensity_jitter_sigma > 0.0:
        jitter = max(rng.normal(1.0, nm.intensity_jitter_sigma), 0.0)

    values = translate_bilinear(i.values, nm.misalign_dx, nm.misalign_dy)
    peak = float(np.max(i.values))
    full = nm.full_scale
    if peak <= 0.0:
        dn = np.zeros_like(values)
    elif nm.photon_scale > 0.0:
        mu = jitter * nm.photon_scale * values
        electrons = rng.poisson(np.clip(mu, 0.0, None)).astype(np.float64)
        dn = electrons * (full / (nm.photon_scale * peak))
    else:
        dn = jitter * full * values / peak

    if nm.read_sigma > 0.0:
        dn = dn + rng.normal(0.0, nm.read_sigma, size=values.shape)

    rounded = np.rint(dn)
    saturated = float(np.mean(rounded > full))
    counts = np.clip(rounded, 0, full).astype(np.uint16)
    return CCDImage(counts, i.grid, nm, exposure_id, saturated)


def normalize_counts(counts: np.ndarray, grid: GridSpec) -> IntensityMap:
    """Scale raw counts so the discrete integral is 1."""
    total = float(np.sum(counts, dtype=np.float64)) * grid.cell_area
    if total <= 0.0:
        raise EmptyImage("image has zero total counts")
    return IntensityMap(counts.astype(np.float64) / total, grid)


def normalize_image(img: CCDImage) -> IntensityMap:
    """Counts of a capture converted to a unit-integral intensity map."""
    return normalize_counts(img.counts, img.grid)
