"""Skeleton-anchored per-view depth normalization.

The camera-space depth of a query point is expressed relative to the
hip's depth in the same view and scaled by the world-space hip-to-neck
distance, so the value is comparable across subjects and rigs. The scale
constant defaults to 4*sqrt(3). Values are deliberately not clamped:
points behind the hip plane legitimately map to negative values.
"""

from __future__ import annotations

import math

import numpy as np

from ..core.camera import Camera
from ..errors import DegenerateSkeletonError

DEPTH_SCALE_LAMBDA = 4.0 * math.sqrt(3.0)


def normalize_depth_points(
    points: np.ndarray,
    camera: Camera,
    hip,
    neck,
    scale_lambda: float = DEPTH_SCALE_LAMBDA,
) -> np.ndarray:
    """Normalized depths for a batch of points, (P,)."""
    hip = np.asarray(hip, dtype=float).reshape(3)
    neck = np.asarray(neck, dtype=float).reshape(3)
    span = float(np.linalg.norm(hip - neck))
    if span <= 0.0:
        raise DegenerateSkeletonError("hip and neck coincide")
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    point_z = pts @ camera.rotation[2] + camera.translation[2]
    hip_z = float(camera.rotation[2] @ hip + camera.translation[2])
    return (point_z - hip_z) / (scale_lambda * span)


def normalize_depth(
    point,
    camera: Camera,
    hip,
    neck,
    scale_lambda: float = DEPTH_SCALE_LAMBDA,
) -> float:
    """Normalized depth of one point in one view."""
    return float(normalize_depth_points(np.asarray(point).reshape(1, 3), camera, hip, neck, scale_lambda)[0])
