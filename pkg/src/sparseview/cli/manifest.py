"""Run manifests: every stage records content hashes of its inputs and
outputs plus its configuration, so a full pipeline run is auditable.
Wall-clock timings live in their own field, excluded from any hashing,
keeping repeated runs bit-identical everywhere else."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def hash_files(paths) -> dict[str, str]:
    return {str(p): file_sha256(p) for p in sorted(str(p) for p in paths)}


def write_manifest(
    path,
    command: str,
    config: dict,
    inputs: dict[str, str],
    outputs: dict[str, str],
    timings: dict[str, float],
    extra: dict | None = None,
) -> None:
    payload = {
        "command": command,
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
        "extra": extra or {},
        "timings": {k: round(v, 6) for k, v in timings.items()},
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
