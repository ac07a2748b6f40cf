"""Per-pixel reprojection and depth-based visibility reasoning.

A source view sees a novel-view pixel's surface point iff reprojecting
the point into the source lands inside its image and the depth rendered
there matches the reprojected depth to a relative tolerance. Rendered
depth is looked up at the nearest pixel on purpose: bilinear
interpolation across depth discontinuities fabricates phantom depths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.camera import Camera
from ..errors import NoGeometryError, ShapeMismatchError
from ..raster.render import DepthMap
from ..recon.features import FeatureMap

VISIBILITY_REL_THRESHOLD = 0.01


@dataclass
class SourceView:
    """A calibrated input view: camera, features and its rendered depth.

    ``depth`` may be left None and rendered from the shared geometry by
    the synthesis step.
    """

    camera: Camera
    features: FeatureMap
    depth: DepthMap | None = None

    def __post_init__(self):
        if (self.features.width, self.features.height) != (self.camera.width, self.camera.height):
            raise ShapeMismatchError("feature map does not match the camera resolution")
        if self.depth is not None and (self.depth.width, self.depth.height) != (
            self.camera.width,
            self.camera.height,
        ):
            raise ShapeMismatchError("depth map does not match the camera resolution")


@dataclass
class Reprojection:
    """One (pixel, source view) visibility record."""

    pixel: np.ndarray
    depth: float
    rendered_depth: float
    in_image: bool

    def visible(self, rel_threshold: float = VISIBILITY_REL_THRESHOLD) -> bool:
        return bool(
            visibility_test(
                np.array([self.rendered_depth]),
                np.array([self.depth]),
                np.array([self.in_image]),
                rel_threshold,
            )[0]
        )


def nearest_pixel_lookup(depth: DepthMap, pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-pixel depth at continuous coordinates.

    Returns:
        (values, in_image): looked-up depths (0 outside) and whether the
        nearest pixel exists.
    """
    x = np.floor(pixels[:, 0] + 0.5).astype(np.int64)
    y = np.floor(pixels[:, 1] + 0.5).astype(np.int64)
    in_image = (x >= 0) & (x < depth.width) & (y >= 0) & (y < depth.height)
    values = np.zeros(len(pixels))
    values[in_image] = depth.values[y[in_image], x[in_image]]
    return values, in_image


def reproject_pixel(pixel, novel: tuple[Camera, DepthMap], source: SourceView) -> Reprojection:
    """Carry one novel-view pixel into a source view.

    Unprojects the pixel at its rendered novel depth to a world point,
    projects that point into the source camera, and reads the source's
    rendered depth at the landing pixel.

    Raises:
        NoGeometryError: if the novel depth map has no surface at the pixel.
    """
    novel_camera, novel_depth = novel
    if source.depth is None:
        raise ShapeMismatchError("source view carries no depth map")
    px = np.asarray(pixel, dtype=float).reshape(2)
    xi = int(np.floor(px[0] + 0.5))
    yi = int(np.floor(px[1] + 0.5))
    if not (0 <= xi < novel_depth.width and 0 <= yi < novel_depth.height):
        raise NoGeometryError(f"pixel {px} outside the novel image")
    d = float(novel_depth.values[yi, xi])
    if d <= 0.0:
        raise NoGeometryError(f"no geometry under pixel {px}")
    point = novel_camera.unproject(px, d)
    reproj_pixels, reproj_depths = source.camera.project_points(point[None, :])
    rendered, in_image = nearest_pixel_lookup(source.depth, reproj_pixels)
    in_front = reproj_depths[0] > 0.0
    return Reprojection(
        pixel=reproj_pixels[0],
        depth=float(reproj_depths[0]),
        rendered_depth=float(rendered[0]) if in_front else 0.0,
        in_image=bool(in_image[0] and in_front),
    )


def visibility_test(
    rendered_depth: np.ndarray,
    reprojected_depth: np.ndarray,
    in_image: np.ndarray,
    rel_threshold: float = VISIBILITY_REL_THRESHOLD,
) -> np.ndarray:
    """Vectorized visibility decision.

    Visible iff the reprojection landed in the source image with positive
    depth and ``|d_render - d_reproj| < rel_threshold * min(d_render,
    d_reproj)``. Source holes (rendered depth 0) always fail the
    inequality.
    """
    d_r = np.asarray(rendered_depth, dtype=float)
    d_p = np.asarray(reprojected_depth, dtype=float)
    close = np.abs(d_r - d_p) < rel_threshold * np.minimum(d_r, d_p)
    return np.asarray(in_image, dtype=bool) & (d_p > 0.0) & close
