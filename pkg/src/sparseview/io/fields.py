"""Occupancy field debug dump: raw little-endian float32 corner values
in C order (x slowest) plus a JSON sidecar carrying the grid geometry."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import InputError


def write_field(path, field) -> None:
    path = Path(path)
    path.write_bytes(field.values.astype("<f4").tobytes())
    sidecar = {
        "resolution": list(field.resolution),
        "bounds_min": [float(x) for x in field.bounds_min],
        "bounds_max": [float(x) for x in field.bounds_max],
        "dtype": "<f4",
        "order": "C (x slowest, z fastest)",
    }
    with open(path.with_suffix(path.suffix + ".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_field(path):
    from ..recon.field import OccupancyField  # deferred: io must not pull in recon at import

    path = Path(path)
    sidecar_path = path.with_suffix(path.suffix + ".json")
    try:
        with open(sidecar_path) as fh:
            sidecar = json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"missing field sidecar: {sidecar_path}") from exc
    res = sidecar["resolution"]
    shape = (res[0] + 1, res[1] + 1, res[2] + 1)
    raw = np.frombuffer(path.read_bytes(), dtype="<f4")
    if raw.size != int(np.prod(shape)):
        raise InputError(f"{path}: payload does not match resolution {res}")
    return OccupancyField(
        values=raw.reshape(shape).astype(float),
        bounds_min=np.asarray(sidecar["bounds_min"], dtype=float),
        bounds_max=np.asarray(sidecar["bounds_max"], dtype=float),
    )
