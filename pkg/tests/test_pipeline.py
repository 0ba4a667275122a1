"""Experiment orchestration: records, file layout, determinism, sweeps."""

import json
from dataclasses import replace

import numpy as np
import pytest

from lgdiscord import (
    ExperimentConfig,
    GridSpec,
    NoiseModel,
    config_from_dict,
    recover_from_files,
    run_experiment,
    write_modes,
    write_run,
    write_sweep,
)
from lgdiscord.pipeline import SWEEP_HEADER


def _fast_config(tmp_path, **noise_kwargs):
    noise = NoiseModel.noiseless() if not noise_kwargs else NoiseModel(**noise_kwargs)
    return ExperimentConfig(
        grid=GridSpec(n=128),
        noise=noise,
        output_dir=tmp_path / "out",
        figures=False,
    )


class TestRunExperiment:
    def test_noiseless_round_trip(self, tmp_path):
        config = replace(_fast_config(tmp_path), lambda0=0.38)
        art = run_experiment(config)
        assert art.record.lambda0_set == 0.38
        assert art.record.lambda0_rec == pytest.approx(0.38, abs=5e-6)
        assert art.record.discord_measured == pytest.approx(
            art.record.required_discord, abs=1e-5
        )

    def test_target_discord_zero_sets_balanced_arms(self, tmp_path):
        config = replace(
            _fast_config(tmp_path), lambda0=None, target_discord=0.0, branch="lower"
        )
        art = run_experiment(config)
        assert art.record.lambda0_set == 0.5
        assert art.record.required_discord == 0.0

    def test_target_discord_recorded_as_required(self, tmp_path):
        config = replace(
            _fast_config(tmp_path), lambda0=None, target_discord=0.07, branch="lower"
        )
        art = run_experiment(config)
        assert art.record.required_discord == 0.07
        assert art.record.discord_measured == pytest.approx(0.07, abs=1e-4)

    def test_same_seed_reproduces_record(self, tmp_path):
        config = replace(_fast_config(tmp_path, seed=9), lambda0=0.3)
        a = run_experiment(config)
        b = run_experiment(config)
        assert a.record == b.record
        assert np.array_equal(a.measured_capture.counts, b.measured_capture.counts)

    def test_seed_override_changes_noisy_capture(self, tmp_path):
        config = replace(_fast_config(tmp_path, seed=9), lambda0=0.3)
        a = run_experiment(config, seed=1)
        b = run_experiment(config, seed=2)
        assert not np.array_equal(a.measured_capture.counts, b.measured_capture.counts)
        assert a.record.seed == 1 and b.record.seed == 2

    def test_frame_averaging_of_identical_noiseless_frames(self, tmp_path):
        one = run_experiment(replace(_fast_config(tmp_path), lambda0=0.4, frames=1))
        many = run_experiment(replace(_fast_config(tmp_path), lambda0=0.4, frames=4))
        assert np.array_equal(one.measured_capture.counts, many.measured_capture.counts)
        assert one.record == many.record

    def test_analytic_basis_source(self, tmp_path):
        config = replace(_fast_config(tmp_path), lambda0=0.25, basis_source="analytic")
        art = run_experiment(config)
        assert art.basis_psi_capture is None
        assert art.record.lambda0_rec == pytest.approx(0.25, abs=5e-6)

    def test_misalignment_biases_recovery(self, tmp_path):
        aligned = run_experiment(replace(_fast_config(tmp_path), lambda0=0.4))
        skewed = run_experiment(
            replace(
                _fast_config(tmp_path),
                lambda0=0.4,
                noise=NoiseModel(0.0, 0.0, 0.0, misalign_dx=4.0, misalign_dy=0.0),
            )
        )
        assert abs(skewed.record.lambda0_rec - 0.4) > abs(aligned.record.lambda0_rec - 0.4)

    def test_mask_restricts_fit_region(self, tmp_path):
        config = replace(_fast_config(tmp_path), lambda0=0.38, mask_radius=2.0)
        art = run_experiment(config)
        assert art.record.lambda0_rec == pytest.approx(0.38, abs=1e-4)


class TestWriteRun:
    def test_files_written(self, tmp_path):
        config = replace(_fast_config(tmp_path), lambda0=0.38)
        record, paths = write_run(config)
        for key in ("basis_psi", "basis_phi", "measured", "expected", "recovered", "record"):
            assert paths[key].exists(), key
        stored = json.loads(paths["record"].read_text())
        assert stored == record.to_dict()

    def test_byte_identical_reruns(self, tmp_path):
        config = replace(_fast_config(tmp_path, seed=4), lambda0=0.3)
        _, first = write_run(config)
        snapshots = {k: p.read_bytes() for k, p in first.items()}
        _, second = write_run(config)
        for key, path in second.items():
            assert path.read_bytes() == snapshots[key], key

    def test_recover_from_written_files_matches_record(self, tmp_path):
        config = replace(_fast_config(tmp_path, seed=12), lambda0=0.44)
        record, paths = write_run(config)
        result = recover_from_files(paths["measured"], paths["basis_psi"], paths["basis_phi"])
        assert result.lambda0_rec == record.lambda0_rec

    def test_figure_rendered_when_enabled(self, tmp_path):
        config = replace(_fast_config(tmp_path), lambda0=0.38, figures=True)
        _, paths = write_run(config)
        assert paths["figure"].exists()
        assert paths["figure"].stat().st_size > 0


class TestWriteModes:
    def test_outputs_and_gram_report(self, tmp_path):
        config = _fast_config(tmp_path)
        paths = write_modes(config)
        for key in ("psi_analytic", "phi_analytic", "psi_ccd", "phi_ccd", "gram"):
            assert paths[key].exists(), key
        gram = json.loads(paths["gram"].read_text())
        assert gram["n"] == 128
        assert gram["max_offdiag"] <= 1e-3
        assert gram["max_deviation"] <= 1e-3

    def test_coarse_grid_has_larger_offdiag_than_converged(self, tmp_path):
        # n=16 is sampling-limited; n>=32 sits at the truncation floor
        coarse = write_modes(replace(_fast_config(tmp_path), grid=GridSpec(n=16)))
        fine = write_modes(
            replace(_fast_config(tmp_path), grid=GridSpec(n=512), output_dir=tmp_path / "fine")
        )
        coarse_off = json.loads(coarse["gram"].read_text())["max_offdiag"]
        fine_off = json.loads(fine["gram"].read_text())["max_offdiag"]
        assert coarse_off > fine_off


class TestWriteSweep:
    def test_noiseless_sweep_csv(self, tmp_path):
        config = _fast_config(tmp_path)
        paths = write_sweep(config, [0.0, 0.02, 0.05, 0.1])
        lines = paths["csv"].read_text().splitlines()
        assert lines[0] == SWEEP_HEADER
        assert len(lines) == 5
        for line in lines[1:]:
            fields = line.split(",")
            required, measured = float(fields[0]), float(fields[3])
            assert abs(measured - required) <= 1e-5
        summary = json.loads(paths["summary"].read_text())
        assert summary["rows"] == 4
        assert summary["failures"] == 0
        assert summary["mean_abs_error"] <= 1e-5

    def test_rows_sorted_by_required_then_seed(self, tmp_path):
        config = replace(_fast_config(tmp_path, seed=3), sweep_seeds=3)
        paths = write_sweep(config, [0.05, 0.0])
        rows = paths["csv"].read_text().splitlines()[1:]
        keys = [(float(r.split(",")[0]), int(r.split(",")[5])) for r in rows]
        assert keys == sorted(keys)

    def test_failed_rows_recorded_and_sweep_continues(self, tmp_path):
        # a mask that covers no pixels makes every fit degenerate
        config = replace(_fast_config(tmp_path), mask_radius=1e-4)
        paths = write_sweep(config, [0.0, 0.05])
        assert paths["csv"].read_text().splitlines() == [SWEEP_HEADER]
        errors = paths["errors"].read_text().splitlines()
        assert errors[0] == "required_discord,seed,error"
        assert len(errors) == 3
        assert "DegenerateBasis" in errors[1]
        summary = json.loads(paths["summary"].read_text())
        assert summary["failures"] == 2

    def test_empty_discord_list_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_sweep(_fast_config(tmp_path), [])

    def test_byte_identical_reruns(self, tmp_path):
        config = replace(_fast_config(tmp_path, seed=8), sweep_seeds=2)
        first = write_sweep(config, [0.0, 0.03])
        csv_bytes = first["csv"].read_bytes()
        summary_bytes = first["summary"].read_bytes()
        second = write_sweep(config, [0.0, 0.03])
        assert second["csv"].read_bytes() == csv_bytes
        assert second["summary"].read_bytes() == summary_bytes


class TestConfig:
    def test_empty_document_is_valid(self):
        config = config_from_dict({})
        assert config.grid.n == 512
        assert config.lambda0 == 0.5
        assert config.noise.photon_scale == 1e5

    def test_arms_with_both_settings_rejected(self):
        from lgdiscord import ConfigError

        with pytest.raises(ConfigError):
            config_from_dict({"arms": {"lambda0": 0.5, "target_discord": 0.1}})

    def test_unknown_key_rejected(self):
        from lgdiscord import ConfigError

        with pytest.raises(ConfigError):
            config_from_dict({"lamda0": 0.5})

    def test_nested_values_land_in_types(self):
        config = config_from_dict(
            {
                "grid": {"n": 64, "half_extent": 5.0},
                "waist": 2.0,
                "arms": {"target_discord": 0.05, "branch": "upper"},
                "noise": {"photon_scale": 0, "bit_depth": 8},
                "frames": 3,
                "sweep": {"discords": [0.0, 0.1], "seeds": 4},
            }
        )
        assert config.grid == GridSpec(n=64, half_extent=5.0, waist=2.0)
        assert config.target_discord == 0.05 and config.branch == "upper"
        assert config.noise.bit_depth == 8
        assert config.frames == 3
        assert config.sweep_discords == [0.0, 0.1]
        assert config.sweep_seeds == 4
