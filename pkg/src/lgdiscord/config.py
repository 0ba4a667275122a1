"""Experiment configuration: one JSON document, every field defaulted.

An empty document {} is a complete configuration. The arm setting is either
a direct lambda0 or a target discord plus inversion branch, never both.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .bench import NoiseModel
from .errors import ConfigError
from .modes import GridSpec

DEFAULT_SWEEP_DISCORDS = [round(0.01 * k, 2) for k in range(11)]


@dataclass
class ExperimentConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    lambda0: float | None = 0.5
    target_discord: float | None = None
    branch: str = "lower"
    noise: NoiseModel = field(default_factory=NoiseModel)
    frames: int = 1
    mask_radius: float | None = None
    output_dir: Path = Path("out")
    basis_source: str = "measured"
    figures: bool = True
    sweep_discords: list = field(default_factory=lambda: list(DEFAULT_SWEEP_DISCORDS))
    sweep_seeds: int = 1

    def __post_init__(self):
        if (self.lambda0 is None) == (self.target_discord is None):
            raise ConfigError("exactly one of lambda0 / target_discord must be set")
        if self.lambda0 is not None and not 0.0 <= self.lambda0 <= 1.0:
            raise ConfigError(f"lambda0 {self.lambda0!r} outside [0, 1]")
        if self.target_discord is not None and not 0.0 <= self.target_discord <= 1.0:
            raise ConfigError(f"target_discord {self.target_discord!r} outside [0, 1]")
        if self.branch not in ("lower", "upper"):
            raise ConfigError(f"branch must be 'lower' or 'upper', got {self.branch!r}")
        if self.frames < 1:
            raise ConfigError(f"frames must be >= 1, got {self.frames}")
        if self.mask_radius is not None and self.mask_radius <= 0.0:
            raise ConfigError(f"mask_radius must be positive, got {self.mask_radius}")
        if self.basis_source not in ("measured", "analytic"):
            raise ConfigError(
                f"basis_source must be 'measured' or 'analytic', got {self.basis_source!r}"
            )
        if self.sweep_seeds < 1:
            raise ConfigError(f"sweep_seeds must be >= 1, got {self.sweep_seeds}")
        self.output_dir = Path(self.output_dir)


_TOP_LEVEL_KEYS = {
    "grid",
    "waist",
    "arms",
    "noise",
    "frames",
    "mask_radius",
    "output_dir",
    "basis_source",
    "figures",
    "sweep",
}


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Build a config from a parsed JSON document, applying all defaults."""
    if not isinstance(doc, dict):
        raise ConfigError(f"config must be a JSON object, got {type(doc).__name__}")
    unknown = set(doc) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    try:
        grid_doc = dict(doc.get("grid", {}))
        grid = GridSpec(
            n=int(grid_doc.pop("n", 512)),
            half_extent=float(grid_doc.pop("half_extent", 4.0)),
            waist=float(doc.get("waist", 1.0)),
        )
        if grid_doc:
            raise ConfigError(f"unknown grid keys: {sorted(grid_doc)}")

        arms = dict(doc.get("arms", {}))
        lambda0 = arms.pop("lambda0", None)
        target = arms.pop("target_discord", None)
        branch = arms.pop("branch", "lower")
        if arms:
            raise ConfigError(f"unknown arms keys: {sorted(arms)}")
        if lambda0 is None and target is None:
            lambda0 = 0.5

        noise_doc = dict(doc.get("noise", {}))
        valid_noise = {f.name for f in fields(NoiseModel)}
        unknown_noise = set(noise_doc) - valid_noise
        if unknown_noise:
            raise ConfigError(f"unknown noise keys: {sorted(unknown_noise)}")
        noise = NoiseModel(**noise_doc)

        sweep = dict(doc.get("sweep", {}))
        discords = sweep.pop("discords", list(DEFAULT_SWEEP_DISCORDS))
        seeds = sweep.pop("seeds", 1)
        if sweep:
            raise ConfigError(f"unknown sweep keys: {sorted(sweep)}")

        return ExperimentConfig(
            grid=grid,
            lambda0=None if lambda0 is None else float(lambda0),
            target_discord=None if target is None else float(target),
            branch=str(branch),
            noise=noise,
            frames=int(doc.get("frames", 1)),
            mask_radius=(
                None if doc.get("mask_radius") is None else float(doc["mask_radius"])
            ),
            output_dir=Path(doc.get("output_dir", "out")),
            basis_source=str(doc.get("basis_source", "measured")),
            figures=bool(doc.get("figures", True)),
            sweep_discords=[float(d) for d in discords],
            sweep_seeds=int(seeds),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path=None) -> ExperimentConfig:
    """Read a JSON config file; None means all defaults."""
    if path is None:
        return config_from_dict({})
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(doc)
