"""Pixel-aligned feature maps and sampling.

Trained image encoders are out of scope; feature providers expose the
same per-pixel feature interface so the fusion and occupancy math stays
fully exercisable. The default provider is raw RGB; precomputed extra
channels (e.g. normal maps) can be appended.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.camera import Camera
from ..errors import ConfigurationError, OutOfViewError
from ..io.images import to_unit_float


@dataclass
class FeatureMap:
    """Dense per-pixel features, (H, W, D)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 2:
            self.values = self.values[:, :, None]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[2]


def bilinear_sample(values: np.ndarray, pixels: np.ndarray) -> np.ndarray:
    """Bilinear lookup at continuous pixel positions with border clamp.

    Args:
        values: (H, W, C).
        pixels: (P, 2) continuous coordinates, centers at integers.

    Returns:
        (P, C) interpolated values.
    """
    h, w = values.shape[:2]
    x = np.clip(pixels[:, 0], 0.0, w - 1.0)
    y = np.clip(pixels[:, 1], 0.0, h - 1.0)
    x0 = np.clip(np.floor(x).astype(np.int64), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(y).astype(np.int64), 0, max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (x - x0)[:, None]
    fy = (y - y0)[:, None]
    top = values[y0, x0] * (1.0 - fx) + values[y0, x1] * fx
    bottom = values[y1, x0] * (1.0 - fx) + values[y1, x1] * fx
    return top * (1.0 - fy) + bottom * fy


def masked_bilinear_sample(values: np.ndarray, valid: np.ndarray, pixels: np.ndarray) -> np.ndarray:
    """Bilinear lookup that ignores invalid taps.

    Tap weights are multiplied by the validity mask and renormalized, so
    values from invalid pixels (e.g. background behind a rendered
    silhouette) never bleed into the sample. Samples whose four taps are
    all invalid come back as zeros.
    """
    h, w = values.shape[:2]
    x = np.clip(pixels[:, 0], 0.0, w - 1.0)
    y = np.clip(pixels[:, 1], 0.0, h - 1.0)
    x0 = np.clip(np.floor(x).astype(np.int64), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(y).astype(np.int64), 0, max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    valid = np.asarray(valid, dtype=float)
    acc = np.zeros((len(pixels), values.shape[2]))
    total = np.zeros(len(pixels))
    for yi, xi, wt in (
        (y0, x0, (1.0 - fx) * (1.0 - fy)),
        (y0, x1, fx * (1.0 - fy)),
        (y1, x0, (1.0 - fx) * fy),
        (y1, x1, fx * fy),
    ):
        tap = wt * valid[yi, xi]
        acc += tap[:, None] * values[yi, xi]
        total += tap
    usable = total > 0.0
    acc[usable] /= total[usable, None]
    acc[~usable] = 0.0
    return acc


def sample_pixel_aligned(featmap: FeatureMap, camera: Camera, point) -> np.ndarray:
    """Feature vector at the projection of one world point.

    Projections outside the image clamp to the border; points behind the
    camera are an error.
    """
    pixels, depths = camera.project_points(np.asarray(point, dtype=float).reshape(1, 3))
    if depths[0] <= 0.0:
        raise OutOfViewError(f"point behind camera (depth {depths[0]:.6g})")
    return bilinear_sample(featmap.values, pixels)[0]


def rgb_provider(image: np.ndarray) -> FeatureMap:
    """Default provider: the image itself, normalized to [0, 1]."""
    return FeatureMap(to_unit_float(image))


class RgbExtraChannelsProvider:
    """RGB plus externally supplied per-view channels (e.g. normal maps)."""

    def __init__(self, extras: list[np.ndarray]):
        self._extras = [np.asarray(e, dtype=float) for e in extras]
        self._next = 0

    def __call__(self, image: np.ndarray) -> FeatureMap:
        if self._next >= len(self._extras):
            raise ConfigurationError("fewer extra-channel maps than views")
        extra = self._extras[self._next]
        self._next += 1
        rgb = to_unit_float(image)
        if extra.ndim == 2:
            extra = extra[:, :, None]
        if extra.shape[:2] != rgb.shape[:2]:
            raise ConfigurationError("extra channels do not match the image resolution")
        return FeatureMap(np.concatenate([rgb, extra], axis=2))


def build_feature_provider(name: str, extras: list[np.ndarray] | None = None):
    if name == "rgb":
        return rgb_provider
    if name == "rgb+extras":
        if extras is None:
            raise ConfigurationError("provider 'rgb+extras' needs extra channel maps")
        return RgbExtraChannelsProvider(extras)
    raise ConfigurationError(f"unknown feature provider {name!r}")
