"""Run configuration: JSON config file plus command-line overrides.

Every command resolves one RunConfig and writes the resolved snapshot next
to its outputs, so any artifact can be regenerated from the snapshot alone.
Flags win over config-file values; the config file wins over defaults.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .basins import BASINS, BasinConfig, basin_config
from .errors import InputError
from .grids import DEFAULT_N_DRAWS, GridSpec
from .kernels import KernelParams
from .simulate import SimulationParams

ENV_OUT_DIR = "STORMWEAVE_OUT"


@dataclass
class RunConfig:
    basin: str
    archive: str | None = None
    library_path: str | None = None
    table_path: str | None = None
    catalog_path: str | None = None
    out_dir: str = "."
    basin_overrides: dict = field(default_factory=dict)
    kernel: KernelParams = field(default_factory=KernelParams)
    n_years: int = 1000
    seed: int = 0
    jump_probability: float = 0.1
    smoothing_window: int = 5
    reserved_steps: int | None = None
    grid: GridSpec | None = None
    n_b: int | None = None          # None: the basin's modern window length
    n_draws: int = DEFAULT_N_DRAWS
    diag_seed: int = 0
    workers: int = 1

    def basin_cfg(self) -> BasinConfig:
        cfg = basin_config(self.basin)
        if self.basin_overrides:
            cfg = cfg.with_overrides(**self.basin_overrides)
        return cfg

    def sim_params(self) -> SimulationParams:
        return SimulationParams(
            n_years=self.n_years,
            seed=self.seed,
            jump_probability=self.jump_probability,
            smoothing_window=self.smoothing_window,
            reserved_steps=self.reserved_steps,
        )

    def grid_spec(self) -> GridSpec:
        return self.grid if self.grid is not None else GridSpec.for_basin(self.basin)

    def resolve_n_b(self) -> int:
        return self.n_b if self.n_b is not None else self.basin_cfg().modern_window_years

    def path(self, name: str, default_name: str) -> Path:
        explicit = getattr(self, name)
        if explicit:
            return Path(explicit)
        return Path(self.out_dir) / default_name

    def to_dict(self) -> dict:
        return {
            "basin": self.basin,
            "basin_overrides": self.basin_overrides,
            "paths": {
                "archive": self.archive,
                "library": self.library_path,
                "table": self.table_path,
                "catalog": self.catalog_path,
                "out_dir": self.out_dir,
            },
            "kernel": self.kernel.to_dict(),
            "simulation": {
                "n_years": self.n_years,
                "seed": self.seed,
                "jump_probability": self.jump_probability,
                "smoothing_window": self.smoothing_window,
                "reserved_steps": self.reserved_steps,
            },
            "grid": self.grid.to_dict() if self.grid is not None else None,
            "diagnostics": {"n_b": self.n_b, "n_draws": self.n_draws, "seed": self.diag_seed},
            "workers": self.workers,
        }

    def write_snapshot(self, command: str) -> Path:
        out = Path(self.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        snap = out / f"{command}.config.json"
        with open(snap, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")
        return snap


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Merge defaults <- config file <- CLI overrides into a RunConfig."""
    data: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"config {path} is not valid JSON: {exc}") from exc

    paths = data.get("paths", {})
    sim = data.get("simulation", {})
    diag = data.get("diagnostics", {})

    merged = {
        "basin": data.get("basin"),
        "archive": paths.get("archive"),
        "library_path": paths.get("library"),
        "table_path": paths.get("table"),
        "catalog_path": paths.get("catalog"),
        "out_dir": paths.get("out_dir") or os.environ.get(ENV_OUT_DIR, "."),
        "basin_overrides": data.get("basin_overrides", {}),
        "kernel": KernelParams.from_dict(data["kernel"]) if "kernel" in data else KernelParams(),
        "n_years": sim.get("n_years", 1000),
        "seed": sim.get("seed", 0),
        "jump_probability": sim.get("jump_probability", 0.1),
        "smoothing_window": sim.get("smoothing_window", 5),
        "reserved_steps": sim.get("reserved_steps"),
        "grid": GridSpec.from_dict(data["grid"]) if data.get("grid") else None,
        "n_b": diag.get("n_b"),
        "n_draws": diag.get("n_draws", DEFAULT_N_DRAWS),
        "diag_seed": diag.get("seed", 0),
        "workers": data.get("workers", 1),
    }

    for key, value in overrides.items():
        if value is not None:
            merged[key] = value

    if not merged["basin"]:
        raise InputError("no basin selected (config 'basin' or --basin)")
    if merged["basin"] not in BASINS:
        raise InputError(f"unknown basin {merged['basin']!r}")
    return RunConfig(**merged)
