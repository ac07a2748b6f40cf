"""JSON file formats for rigs, skeletons, skinning and solver output.

Calibration document::

    {"cameras": [{"name": ..., "width": W, "height": H,
                  "K": [9 row-major], "R": [9 row-major], "t": [3]}, ...]}

Extrinsics are world-to-camera (``X_c = R X_w + t``), +z forward, pixel
origin top-left with pixel centers at integer coordinates.

2D skeleton per frame per view: ``{"joints": [[x, y, confidence], ...]}``.
3D skeleton per frame: ``{"joints": [[x, y, z], ...], "resolved": [...]}``.
Skinning weights: ``{"vertex_count": N, "entries": [[[joint, w], ...], ...]}``.
Kinematic parameters per frame: ``{"theta": J x 3, "root_t": [3]}``.
"""

from __future__ import annotations

import json

import numpy as np

from ..core.camera import Camera
from ..core.skeleton import JointLayout, Skeleton2D, Skeleton3D
from ..errors import InputError


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"missing input file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _dump_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_calibration(path, cameras: list[Camera]) -> None:
    payload = {
        "cameras": [
            {
                "name": cam.name,
                "width": cam.width,
                "height": cam.height,
                "K": [float(x) for x in cam.intrinsics.reshape(-1)],
                "R": [float(x) for x in cam.rotation.reshape(-1)],
                "t": [float(x) for x in cam.translation],
            }
            for cam in cameras
        ]
    }
    _dump_json(path, payload)


def read_calibration(path) -> list[Camera]:
    doc = _load_json(path)
    if "cameras" not in doc:
        raise InputError(f"{path}: calibration lacks a 'cameras' list")
    cameras = []
    for entry in doc["cameras"]:
        cameras.append(
            Camera(
                intrinsics=np.asarray(entry["K"], dtype=float).reshape(3, 3),
                rotation=np.asarray(entry["R"], dtype=float).reshape(3, 3),
                translation=np.asarray(entry["t"], dtype=float),
                width=int(entry["width"]),
                height=int(entry["height"]),
                name=str(entry.get("name", "")),
            )
        )
    return cameras


def write_skeleton2d(path, skeleton: Skeleton2D) -> None:
    joints = [
        [float(x), float(y), float(c)]
        for (x, y), c in zip(skeleton.positions, skeleton.confidence)
    ]
    _dump_json(path, {"joints": joints})


def read_skeleton2d(path) -> Skeleton2D:
    doc = _load_json(path)
    joints = np.asarray(doc["joints"], dtype=float).reshape(-1, 3)
    return Skeleton2D(positions=joints[:, :2], confidence=joints[:, 2])


def write_skeleton3d(path, skeleton: Skeleton3D) -> None:
    payload = {
        "joints": [[float(x) for x in j] for j in skeleton.joints],
        "resolved": [bool(r) for r in skeleton.resolved],
    }
    _dump_json(path, payload)


def read_skeleton3d(path, layout: JointLayout | None = None) -> Skeleton3D:
    doc = _load_json(path)
    joints = np.asarray(doc["joints"], dtype=float).reshape(-1, 3)
    resolved = np.asarray(doc.get("resolved", [True] * len(joints)), dtype=bool)
    return Skeleton3D(joints=joints, resolved=resolved, layout=layout)


def write_skinning_weights(path, entries: list[list[tuple[int, float]]]) -> None:
    payload = {
        "vertex_count": len(entries),
        "entries": [[[int(j), float(w)] for j, w in per_vertex] for per_vertex in entries],
    }
    _dump_json(path, payload)


def read_skinning_weights(path) -> list[list[tuple[int, float]]]:
    doc = _load_json(path)
    entries = [[(int(j), float(w)) for j, w in per_vertex] for per_vertex in doc["entries"]]
    if len(entries) != int(doc["vertex_count"]):
        raise InputError(f"{path}: entry count disagrees with vertex_count")
    return entries


def write_kinematic_params(path, theta: np.ndarray, root_t: np.ndarray) -> None:
    payload = {
        "theta": [[float(x) for x in row] for row in np.asarray(theta).reshape(-1, 3)],
        "root_t": [float(x) for x in np.asarray(root_t).reshape(3)],
    }
    _dump_json(path, payload)


def read_kinematic_params(path) -> tuple[np.ndarray, np.ndarray]:
    doc = _load_json(path)
    return (
        np.asarray(doc["theta"], dtype=float).reshape(-1, 3),
        np.asarray(doc["root_t"], dtype=float).reshape(3),
    )
