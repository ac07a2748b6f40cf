"""Occupancy queries and regular-grid field sampling."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..core.camera import Camera
from ..core.skeleton import Skeleton3D
from ..errors import ConfigurationError, OutOfViewError, ShapeMismatchError
from .depth_norm import DEPTH_SCALE_LAMBDA, normalize_depth_points
from .features import FeatureMap, bilinear_sample
from .fusion import TransformerWeights, fuse_and_pool, transformer_fuse

Z_MODES = ("append", "head_only")
_CHUNK = 4096


@dataclass
class OccupancyField:
    """Scalar samples on the corners of a regular grid.

    ``values[ix, iy, iz]`` sits at ``bounds_min + spacing * (ix, iy, iz)``;
    the resolution counts voxel cells per axis, so values has
    ``resolution + 1`` entries per axis.
    """

    values: np.ndarray
    bounds_min: np.ndarray
    bounds_max: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.bounds_min = np.asarray(self.bounds_min, dtype=float).reshape(3)
        self.bounds_max = np.asarray(self.bounds_max, dtype=float).reshape(3)
        if self.values.ndim != 3:
            raise ShapeMismatchError("field values must be a 3-D array")
        if np.any(self.bounds_max - self.bounds_min <= 0.0):
            raise ShapeMismatchError("field bounds must have positive extent")

    @property
    def resolution(self) -> tuple[int, int, int]:
        s = self.values.shape
        return (s[0] - 1, s[1] - 1, s[2] - 1)

    def spacing(self) -> np.ndarray:
        return (self.bounds_max - self.bounds_min) / np.asarray(self.resolution, dtype=float)

    def axis_coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(
            np.linspace(self.bounds_min[i], self.bounds_max[i], self.values.shape[i])
            for i in range(3)
        )


def _stack_view_features(
    points: np.ndarray,
    views: list[tuple[FeatureMap, Camera]],
    skeleton: Skeleton3D,
    z_mode: str,
    scale_lambda: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-view rows for each point: features (+ appended depth) and depths."""
    if z_mode not in Z_MODES:
        raise ConfigurationError(f"z_mode must be one of {Z_MODES}, got {z_mode!r}")
    if not views:
        raise ShapeMismatchError("need at least one view")
    hip = skeleton.hip_position()
    neck = skeleton.neck_position()
    rows = []
    z_all = []
    for featmap, camera in views:
        pixels, depths = camera.project_points(points)
        behind = depths <= 0.0
        if np.any(behind):
            raise OutOfViewError(f"{int(behind.sum())} query points behind camera {camera.name!r}")
        feats = bilinear_sample(featmap.values, pixels)
        z = normalize_depth_points(points, camera, hip, neck, scale_lambda)
        z_all.append(z)
        rows.append(np.concatenate([feats, z[:, None]], axis=1) if z_mode == "append" else feats)
    phi = np.stack(rows, axis=1)  # (P, N, D)
    z_views = np.stack(z_all, axis=1)  # (P, N)
    return phi, z_views


def query_occupancy_batch(
    points: np.ndarray,
    views: list[tuple[FeatureMap, Camera]],
    skeleton: Skeleton3D,
    weights: TransformerWeights,
    head,
    z_mode: str = "append",
    scale_lambda: float = DEPTH_SCALE_LAMBDA,
) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    phi, z_views = _stack_view_features(pts, views, skeleton, z_mode, scale_lambda)
    fused = fuse_and_pool(transformer_fuse(phi, weights))
    return np.asarray(head.batch(pts, fused, z_views), dtype=float)


def query_occupancy(
    point,
    views: list[tuple[FeatureMap, Camera]],
    skeleton: Skeleton3D,
    weights: TransformerWeights,
    head,
    z_mode: str = "append",
    scale_lambda: float = DEPTH_SCALE_LAMBDA,
) -> float:
    """Occupancy at one world point.

    Samples pixel-aligned features in every view, appends the per-view
    normalized depth as an extra channel (default mode), fuses across
    views with attention, pools, and evaluates the head.
    """
    return float(
        query_occupancy_batch(
            np.asarray(point, dtype=float).reshape(1, 3),
            views,
            skeleton,
            weights,
            head,
            z_mode,
            scale_lambda,
        )[0]
    )


def build_field(
    views: list[tuple[FeatureMap, Camera]],
    skeleton: Skeleton3D,
    weights: TransformerWeights,
    head,
    bounds: tuple,
    resolution,
    z_mode: str = "append",
    scale_lambda: float = DEPTH_SCALE_LAMBDA,
    threads: int = 1,
) -> OccupancyField:
    """Evaluate the occupancy on every corner of a regular grid.

    ``resolution`` counts voxel cells per axis (so ``resolution + 1``
    corners are sampled per axis, spanning the bounds inclusively).
    Corners are evaluated in chunks; chunks are independent, so thread
    fan-out cannot change the result.
    """
    res = np.asarray(resolution, dtype=int).reshape(-1)
    if res.size == 1:
        res = np.repeat(res, 3)
    if np.any(res < 2):
        raise ConfigurationError(f"grid resolution must be >= 2 per axis, got {res.tolist()}")
    lo = np.asarray(bounds[0], dtype=float).reshape(3)
    hi = np.asarray(bounds[1], dtype=float).reshape(3)
    axes = [np.linspace(lo[i], hi[i], res[i] + 1) for i in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)

    out = np.empty(len(grid))
    spans = [(start, min(start + _CHUNK, len(grid))) for start in range(0, len(grid), _CHUNK)]

    def run(span):
        a, b = span
        out[a:b] = query_occupancy_batch(grid[a:b], views, skeleton, weights, head, z_mode, scale_lambda)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, spans))
    else:
        for span in spans:
            run(span)

    values = out.reshape(res[0] + 1, res[1] + 1, res[2] + 1)
    return OccupancyField(values=values, bounds_min=lo, bounds_max=hi)
