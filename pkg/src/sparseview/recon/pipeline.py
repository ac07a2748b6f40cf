"""Single-frame reconstruction: images in, triangle mesh out."""

from __future__ import annotations

import numpy as np

from ..core.camera import Camera
from ..core.mesh import Mesh
from ..core.skeleton import JointLayout, Skeleton2D, Skeleton3D, triangulate_skeleton
from ..errors import DegenerateSkeletonError, InsufficientViewsError, ShapeMismatchError
from .depth_norm import DEPTH_SCALE_LAMBDA
from .features import rgb_provider
from .field import build_field
from .fusion import TransformerWeights
from .marching import DEFAULT_SURFACE_THRESHOLD, extract_surface

BOUNDS_DILATION = 0.75


def default_bounds(skeleton: Skeleton3D) -> tuple[np.ndarray, np.ndarray]:
    """Sampling volume from the skeleton: its bounding box dilated by
    0.75 x the hip-to-neck distance on every side."""
    resolved = skeleton.joints[skeleton.resolved]
    if len(resolved) == 0:
        raise DegenerateSkeletonError("no resolved joints to derive bounds from")
    margin = BOUNDS_DILATION * float(
        np.linalg.norm(skeleton.hip_position() - skeleton.neck_position())
    )
    if margin <= 0.0:
        raise DegenerateSkeletonError("hip and neck coincide; cannot derive bounds")
    return resolved.min(axis=0) - margin, resolved.max(axis=0) + margin


def reconstruct(
    images: list[np.ndarray],
    cameras: list[Camera],
    skeletons2d: list[Skeleton2D],
    weights: TransformerWeights,
    head,
    bounds=None,
    resolution=(64, 64, 64),
    provider=None,
    z_mode: str = "append",
    scale_lambda: float = DEPTH_SCALE_LAMBDA,
    threshold: float = DEFAULT_SURFACE_THRESHOLD,
    confidence_floor: float = 0.3,
    layout: JointLayout | None = None,
    threads: int = 1,
) -> Mesh:
    """Run the full per-frame pipeline.

    Triangulates the 2D skeletons, builds feature maps with the
    configured provider (raw RGB by default), samples the occupancy over
    a regular grid and extracts the 0.5 iso-surface.
    """
    if not (len(images) == len(cameras) == len(skeletons2d)):
        raise ShapeMismatchError("images, cameras and skeletons must align")
    if len(cameras) < 2:
        raise InsufficientViewsError(f"need at least 2 views, got {len(cameras)}")
    provider = provider or rgb_provider
    skeleton = triangulate_skeleton(
        list(zip(cameras, skeletons2d)), confidence_floor=confidence_floor, layout=layout
    )
    views = [(provider(img), cam) for img, cam in zip(images, cameras)]
    if bounds is None:
        bounds = default_bounds(skeleton)
    field = build_field(
        views,
        skeleton,
        weights,
        head,
        bounds,
        resolution,
        z_mode=z_mode,
        scale_lambda=scale_lambda,
        threads=threads,
    )
    return extract_surface(field, threshold)
