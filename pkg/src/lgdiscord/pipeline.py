"""End-to-end experiment orchestration and file output.

run_experiment does the pure computation for one run: pick the arm split
(directly or from a target discord), synthesize the mode pair, capture the
blocked-arm basis images, capture the combined beam, and recover the weight
and its discord. The write_* functions add deterministic file output: PGM
images with JSON sidecars, JSON-line run records, sweep CSVs, and rendered
figure files.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import bench, modes, pgm, recovery
from .bell import BellSpectrum, analytic_discord, invert_discord
from .bench import CCDImage, NoiseModel
from .config import ExperimentConfig
from .errors import GridMismatch
from .modes import GridSpec, IntensityMap

SWEEP_HEADER = "required_discord,lambda0_set,lambda0_rec,discord_measured,residual,seed"

# exposure-id layout within one run: two basis calibrations, then the frames
_EXPOSURE_BASIS_PSI = 0
_EXPOSURE_BASIS_PHI = 1
_EXPOSURE_FIRST_FRAME = 2


@dataclass(frozen=True)
class RunRecord:
    """One experiment outcome: requested discord vs what was measured."""

    required_discord: float
    lambda0_set: float
    lambda0_rec: float
    discord_measured: float
    residual: float
    saturation_fraction: float
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RunArtifacts:
    """Everything a run produces, before any of it touches disk."""

    record: RunRecord
    measured_map: IntensityMap
    expected_map: IntensityMap
    recovered_map: IntensityMap
    basis_psi_map: IntensityMap
    basis_phi_map: IntensityMap
    basis_psi_capture: CCDImage | None
    basis_phi_capture: CCDImage | None
    measured_capture: CCDImage


def resolve_lambda0(config: ExperimentConfig) -> float:
    if config.lambda0 is not None:
        return config.lambda0
    return invert_discord(config.target_discord, config.branch)


def circular_mask(grid: GridSpec, radius: float | None) -> np.ndarray | None:
    """Boolean pixel mask r <= radius (radius in waist units), or None."""
    if radius is None:
        return None
    x, y = grid.meshgrid()
    return x**2 + y**2 <= (radius * grid.waist) ** 2


def _averaged_capture(caps: list[CCDImage]) -> CCDImage:
    """Mean of several exposures re-quantized to integer counts.

    Rounding the mean keeps the stored image byte-identical to what the
    recovery stage consumes, so recovering from the written file reproduces
    the recorded result exactly.
    """
    mean = np.mean([c.counts.astype(np.float64) for c in caps], axis=0)
    counts = np.rint(mean).astype(np.uint16)
    sat = float(np.mean([c.saturation_fraction for c in caps]))
    first = caps[0]
    return CCDImage(counts, first.grid, first.noise, first.exposure_id, sat)


def run_experiment(config: ExperimentConfig, seed: int | None = None) -> RunArtifacts:
    """Execute one full virtual experiment and recover the discord."""
    nm = config.noise if seed is None else replace(config.noise, seed=seed)
    grid = config.grid
    lambda0_set = resolve_lambda0(config)
    required = (
        config.target_discord
        if config.target_discord is not None
        else analytic_discord(BellSpectrum(lambda0_set, 1.0 - lambda0_set, 0.0, 0.0))
    )

    psi, phi = modes.bell_modes(grid)
    i_psi = modes.intensity(psi)
    i_phi = modes.intensity(phi)

    # Calibration images are taken with the arms aligned; any misalignment
    # models drift of the phi arm between calibration and the combined shot.
    nm_capture = nm.without_misalignment()
    basis_psi_cap = basis_phi_cap = None
    if config.basis_source == "measured":
        basis_psi_cap = bench.ccd_capture(i_psi, nm_capture, _EXPOSURE_BASIS_PSI)
        basis_phi_cap = bench.ccd_capture(i_phi, nm_capture, _EXPOSURE_BASIS_PHI)
        basis_psi_map = bench.normalize_image(basis_psi_cap)
        basis_phi_map = bench.normalize_image(basis_phi_cap)
    else:
        basis_psi_map = bench.normalize_counts(i_psi.values, grid)
        basis_phi_map = bench.normalize_counts(i_phi.values, grid)

    combined = bench.build_combined_state(psi, phi, bench.ArmSettings(lambda0_set, 1.0 - lambda0_set))
    map_h = np.abs(combined.e_h.values) ** 2
    map_v = np.abs(combined.e_v.values) ** 2
    if nm.misalign_dx != 0.0 or nm.misalign_dy != 0.0:
        map_v = bench.translate_bilinear(map_v, nm.misalign_dx, nm.misalign_dy)
    beam = IntensityMap(map_h + map_v, grid)

    frames = [
        bench.ccd_capture(beam, nm_capture, _EXPOSURE_FIRST_FRAME + k)
        for k in range(config.frames)
    ]
    measured_cap = _averaged_capture(frames)
    measured_map = bench.normalize_image(measured_cap)

    mask = circular_mask(grid, config.mask_radius)
    result = recovery.recover_fraction(measured_map, basis_psi_map, basis_phi_map, mask=mask)

    record = RunRecord(
        required_discord=float(required),
        lambda0_set=float(lambda0_set),
        lambda0_rec=float(result.lambda0_rec),
        discord_measured=float(result.discord_measured),
        residual=float(result.residual),
        saturation_fraction=float(measured_cap.saturation_fraction),
        seed=int(nm.seed),
    )
    expected_map = bench.expected_profile(basis_psi_map, basis_phi_map, lambda0_set)
    recovered_map = bench.expected_profile(basis_psi_map, basis_phi_map, result.lambda0_rec)
    return RunArtifacts(
        record=record,
        measured_map=measured_map,
        expected_map=expected_map,
        recovered_map=recovered_map,
        basis_psi_map=basis_psi_map,
        basis_phi_map=basis_phi_map,
        basis_psi_capture=basis_psi_cap,
        basis_phi_capture=basis_phi_cap,
        measured_capture=measured_cap,
    )


# ---------------------------------------------------------------------------
# File output
# ---------------------------------------------------------------------------


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _render_map(map_: IntensityMap, bit_depth: int, exposure_id: int = 0) -> CCDImage:
    """Noise-free quantization of a float map for image output."""
    return bench.ccd_capture(map_, NoiseModel.noiseless(bit_depth=bit_depth), exposure_id)


def write_run(config: ExperimentConfig, seed: int | None = None) -> tuple[RunRecord, dict]:
    """Run one experiment and write its images, record, and figure."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    art = run_experiment(config, seed=seed)
    bit = config.noise.bit_depth

    paths = {"basis_psi": out / "basis_psi.pgm", "basis_phi": out / "basis_phi.pgm"}
    if art.basis_psi_capture is not None:
        pgm.write_ccd_image(paths["basis_psi"], art.basis_psi_capture)
        pgm.write_ccd_image(paths["basis_phi"], art.basis_phi_capture)
    else:
        pgm.write_ccd_image(paths["basis_psi"], _render_map(art.basis_psi_map, bit, _EXPOSURE_BASIS_PSI))
        pgm.write_ccd_image(paths["basis_phi"], _render_map(art.basis_phi_map, bit, _EXPOSURE_BASIS_PHI))

    paths["measured"] = out / "measured.pgm"
    pgm.write_ccd_image(paths["measured"], art.measured_capture)
    paths["expected"] = out / "expected.pgm"
    pgm.write_ccd_image(paths["expected"], _render_map(art.expected_map, bit))
    paths["recovered"] = out / "recovered.pgm"
    pgm.write_ccd_image(paths["recovered"], _render_map(art.recovered_map, bit))

    paths["record"] = out / "run_record.json"
    _atomic_write_text(paths["record"], json.dumps(art.record.to_dict(), sort_keys=True) + "\n")

    if config.figures:
        from . import figures

        paths["figure"] = out / "run_profiles.png"
        figures.save_run_profiles(
            paths["figure"],
            art.measured_map,
            art.expected_map,
            art.recovered_map,
            art.record,
        )
    return art.record, paths


def write_modes(config: ExperimentConfig) -> dict:
    """Write analytic and captured mode profiles plus the Gram-matrix report."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = config.grid
    psi, phi = modes.bell_modes(grid)
    i_psi = modes.intensity(psi)
    i_phi = modes.intensity(phi)
    bit = config.noise.bit_depth

    paths = {
        "psi_analytic": out / "psi_analytic.pgm",
        "phi_analytic": out / "phi_analytic.pgm",
        "psi_ccd": out / "psi_ccd.pgm",
        "phi_ccd": out / "phi_ccd.pgm",
        "gram": out / "gram.json",
    }
    nm = config.noise.without_misalignment()
    psi_cap = bench.ccd_capture(i_psi, nm, _EXPOSURE_BASIS_PSI)
    phi_cap = bench.ccd_capture(i_phi, nm, _EXPOSURE_BASIS_PHI)
    pgm.write_ccd_image(paths["psi_analytic"], _render_map(i_psi, bit, _EXPOSURE_BASIS_PSI))
    pgm.write_ccd_image(paths["phi_analytic"], _render_map(i_phi, bit, _EXPOSURE_BASIS_PHI))
    pgm.write_ccd_image(paths["psi_ccd"], psi_cap)
    pgm.write_ccd_image(paths["phi_ccd"], phi_cap)

    basis = [modes.lg_mode(p, ell, grid) for (p, ell) in ((0, 0), (0, 1), (1, 0), (1, 1))]
    gram = modes.gram_matrix(basis)
    deviation = np.abs(gram - np.eye(4))
    off = deviation - np.diag(np.diag(deviation))
    report = {
        "n": grid.n,
        "half_extent": grid.half_extent,
        "waist": grid.waist,
        "mode_indices": [[0, 0], [0, 1], [1, 0], [1, 1]],
        "gram_abs": np.abs(gram).tolist(),
        "max_deviation": float(deviation.max()),
        "max_offdiag": float(off.max()),
    }
    _atomic_write_text(paths["gram"], json.dumps(report, sort_keys=True, indent=2) + "\n")

    if config.figures:
        from . import figures

        paths["figure"] = out / "modes.png"
        figures.save_mode_gallery(
            paths["figure"],
            [
                ("psi+ analytic", i_psi.values),
                ("phi+ analytic", i_phi.values),
                ("psi+ captured", psi_cap.counts),
                ("phi+ captured", phi_cap.counts),
            ],
        )
    return paths


def _format_float(x: float) -> str:
    return repr(float(x))


def write_sweep(config: ExperimentConfig, discords: list[float]) -> dict:
    """Run the experiment for each (discord, seed) pair and write the CSV report.

    Rows are sorted by (required_discord, seed) before the file is written,
    so any execution order produces identical output. Failing rows do not
    stop the sweep; they are reported in a separate errors CSV and counted
    in the summary.
    """
    if not discords:
        raise ValueError("sweep needs at least one required discord value")
    for d in discords:
        if not 0.0 <= d <= 1.0:
            raise ValueError(f"required discord {d!r} outside [0, 1]")
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    seeds = [config.noise.seed + k for k in range(config.sweep_seeds)]
    rows: list[RunRecord] = []
    failures: list[tuple[float, int, str]] = []
    for d in discords:
        run_cfg = replace(config, lambda0=None, target_discord=float(d), figures=False)
        for seed in seeds:
            try:
                art = run_experiment(run_cfg, seed=seed)
                rows.append(art.record)
            except Exception as exc:  # rows are isolated; the sweep must continue
                failures.append((float(d), seed, f"{type(exc).__name__}: {exc}"))

    rows.sort(key=lambda r: (r.required_discord, r.seed))
    failures.sort(key=lambda f: (f[0], f[1]))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER.split(","))
    for r in rows:
        writer.writerow(
            [
                _format_float(r.required_discord),
                _format_float(r.lambda0_set),
                _format_float(r.lambda0_rec),
                _format_float(r.discord_measured),
                _format_float(r.residual),
                r.seed,
            ]
        )
    paths = {"csv": out / "sweep.csv"}
    _atomic_write_text(paths["csv"], buf.getvalue())

    by_required: dict[float, list[float]] = {}
    for r in rows:
        by_required.setdefault(r.required_discord, []).append(
            abs(r.discord_measured - r.required_discord)
        )
    summary = {
        "seeds": seeds,
        "rows": len(rows),
        "failures": len(failures),
        "mean_abs_error_by_required": {
            _format_float(k): float(np.mean(v)) for k, v in sorted(by_required.items())
        },
        "mean_abs_error": float(
            np.mean([abs(r.discord_measured - r.required_discord) for r in rows])
        )
        if rows
        else None,
    }
    paths["summary"] = out / "sweep_summary.json"
    _atomic_write_text(paths["summary"], json.dumps(summary, sort_keys=True, indent=2) + "\n")

    if failures:
        ebuf = io.StringIO()
        ewriter = csv.writer(ebuf, lineterminator="\n")
        ewriter.writerow(["required_discord", "seed", "error"])
        for d, seed, msg in failures:
            ewriter.writerow([_format_float(d), seed, msg])
        paths["errors"] = out / "sweep_errors.csv"
        _atomic_write_text(paths["errors"], ebuf.getvalue())

    if config.figures:
        from . import figures

        paths["figure"] = out / "sweep_scatter.png"
        figures.save_sweep_scatter(paths["figure"], rows)
    return paths


def recover_from_files(measured_path, basis_psi_path, basis_phi_path) -> recovery.RecoveryResult:
    """Standalone recovery from three PGM files (sidecars optional).

    The weight estimate only depends on intensity ratios, so images without
    sidecars fall back to a unit-pitch grid; mixed pixel counts are rejected.
    """
    maps = []
    shape = None
    for path in (measured_path, basis_psi_path, basis_phi_path):
        counts, _ = pgm.read_pgm(path)
        if counts.shape[0] != counts.shape[1]:
            raise GridMismatch(f"{path}: image is not square: {counts.shape}")
        if shape is None:
            shape = counts.shape
        elif counts.shape != shape:
            raise GridMismatch(
                f"{path}: dimensions {counts.shape} differ from {shape}"
            )
        side = pgm.sidecar_path(path)
        if side.exists():
            meta = json.loads(side.read_text())
            grid = GridSpec(n=meta["n"], half_extent=meta["half_extent"], waist=meta["waist"])
        else:
            n = counts.shape[0]
            grid = GridSpec(n=n, half_extent=max(3.0, n / 2.0), waist=1.0)
        maps.append(bench.normalize_counts(counts, grid))
    if not (maps[0].grid == maps[1].grid == maps[2].grid):
        raise GridMismatch("sidecar grids disagree between images")
    return recovery.recover_fraction(maps[0], maps[1], maps[2])
