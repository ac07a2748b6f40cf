"""Pipeline configuration: one JSON document, validated at load.

Environment overrides are deliberately limited to the output directory
and thread count (``SPARSEVIEW_OUT``, ``SPARSEVIEW_THREADS``); everything
else lives in the file so runs stay auditable.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigurationError, InputError

DEFAULT_SEED = 42
RESOLUTION_RANGE = (8, 1024)


def _merge(defaults: dict, overrides: dict) -> dict:
    out = dict(defaults)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


_DEFAULTS = {
    "seed": DEFAULT_SEED,
    "threads": 1,
    "out_dir": "out",
    "scene": {
        "geometry": "sphere",
        "texture": "gradient",
        "camera_count": 6,
        "ring_radius": 3.0,
        "pitch_deg": 0.0,
        "width": 256,
        "height": 256,
        "fov_deg": 50.0,
        "subdivisions": 3,
        "sphere_radius": 1.0,
        "frames": 1,
        "checker_scale": 4.0,
        "dir": "scene",
    },
    "recon": {
        "provider": "rgb",
        "head": "sphere-oracle",
        "head_width": 0.02,
        "head_radius": 1.0,
        "embed_dim": 64,
        "weights_seed": 0,
        "z_mode": "append",
        "resolution": [64, 64, 64],
        "bounds": None,
        "confidence_floor": 0.3,
        "threshold": 0.5,
        "mesh_format": "obj",
    },
    "tracking": {
        "canonical_frame": None,
        "reg_lambda": 100.0,
        "point_to": "triangle",
    },
    "solver": {"max_iters": 50, "damping": 1e-4, "tol": 1e-8},
    "render": {
        "novel": {"yaw_deg": 30.0, "radius": 3.0, "pitch_deg": 0.0},
        "rel_threshold": 0.01,
        "background": [0.0, 0.0, 0.0],
        "frame": 0,
        "geometry": "auto",
    },
    "eval": {"samples": 100_000},
}


@dataclass
class PipelineConfig:
    raw: dict
    path: str = ""

    seed: int = field(init=False)
    threads: int = field(init=False)
    out_dir: Path = field(init=False)

    def __post_init__(self):
        merged = _merge(_DEFAULTS, self.raw)
        self.raw = merged
        self.seed = int(merged["seed"])
        self.threads = int(os.environ.get("SPARSEVIEW_THREADS", merged["threads"]))
        self.out_dir = Path(os.environ.get("SPARSEVIEW_OUT", merged["out_dir"]))
        self._validate()

    def _validate(self):
        res = self.raw["recon"]["resolution"]
        if len(res) != 3 or any(
            not (RESOLUTION_RANGE[0] <= int(r) <= RESOLUTION_RANGE[1]) for r in res
        ):
            raise ConfigurationError(
                f"recon.resolution must be three values in [{RESOLUTION_RANGE[0]}, "
                f"{RESOLUTION_RANGE[1]}], got {res}"
            )
        if self.raw["recon"]["z_mode"] not in ("append", "head_only"):
            raise ConfigurationError(f"unknown z_mode {self.raw['recon']['z_mode']!r}")
        if self.raw["recon"]["head"] not in ("sphere-oracle", "mesh-oracle", "mlp"):
            raise ConfigurationError(f"unknown occupancy head {self.raw['recon']['head']!r}")
        if self.threads < 1:
            raise ConfigurationError("threads must be >= 1")
        scene = self.raw["scene"]
        if scene["geometry"] not in ("sphere", "stick") and not Path(scene["geometry"]).exists():
            raise InputError(f"scene geometry mesh not found: {scene['geometry']}")
        if scene["texture"] not in ("gradient", "checker") and not Path(scene["texture"]).exists():
            raise InputError(f"scene texture image not found: {scene['texture']}")

    @classmethod
    def load(
        cls,
        path,
        out_dir=None,
        seed: int | None = None,
        threads: int | None = None,
    ) -> "PipelineConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except FileNotFoundError as exc:
            raise InputError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
        if seed is not None:
            raw["seed"] = seed
        if threads is not None:
            raw["threads"] = threads
        if out_dir is not None:
            raw["out_dir"] = str(out_dir)
        return cls(raw=raw, path=str(path))

    @property
    def scene_dir(self) -> Path:
        return self.out_dir / self.raw["scene"]["dir"]

    def stage_dir(self, stage: str) -> Path:
        return self.out_dir / stage
