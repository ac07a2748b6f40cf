"""Novel view synthesis: render depths, reason about visibility per
pixel, integrate features from the views that actually see the surface,
and decode to an image with an explicit hole mask.

Holes (pixels without geometry, or whose visible views all face away)
are flagged and filled with a background color, never extrapolated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.camera import Camera
from ..core.mesh import Mesh
from ..errors import ConfigurationError, ShapeMismatchError
from ..raster.render import DepthMap, render_depth
from ..recon.features import masked_bilinear_sample
from .visibility import VISIBILITY_REL_THRESHOLD, SourceView, nearest_pixel_lookup, visibility_test

DIRECTION_MODES = ("point_to_camera", "optical_axis")


@dataclass
class SynthesisOutput:
    """Integrated novel-view features plus diagnostics.

    ``features`` is float32 so a PFM round trip is lossless. The hole
    mask is a superset of the pixels with no rendered geometry.
    """

    features: np.ndarray
    hole_mask: np.ndarray
    visibility_count: np.ndarray
    novel_depth: DepthMap

    @property
    def width(self) -> int:
        return self.features.shape[1]

    @property
    def height(self) -> int:
        return self.features.shape[0]


def _normalize_rows(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def synthesize_view(
    sources: list[SourceView],
    geometry: Mesh,
    novel_camera: Camera,
    rel_threshold: float = VISIBILITY_REL_THRESHOLD,
    direction_mode: str = "point_to_camera",
) -> SynthesisOutput:
    """Integrate source-view features into the novel view.

    Any source view lacking a depth map gets one rendered from the shared
    geometry, as is the novel view's. Per covered pixel: unproject,
    reproject into every source, test visibility against the source's
    rendered depth, and average bilinear feature samples of the visible
    views weighted by ``max(0, cos)`` between viewing directions.
    """
    if not sources:
        raise ShapeMismatchError("need at least one source view")
    if geometry.is_empty():
        raise ShapeMismatchError("geometry is empty")
    if direction_mode not in DIRECTION_MODES:
        raise ConfigurationError(f"direction_mode must be one of {DIRECTION_MODES}")
    channels = sources[0].features.channels
    if any(s.features.channels != channels for s in sources):
        raise ShapeMismatchError("source views disagree on feature channels")

    sources = [
        s if s.depth is not None else SourceView(s.camera, s.features, render_depth(geometry, s.camera))
        for s in sources
    ]
    novel_depth = render_depth(geometry, novel_camera)
    covered = novel_depth.coverage()
    h, w = covered.shape

    features = np.zeros((h, w, channels), dtype=np.float32)
    weight_sum = np.zeros(covered.sum())
    accum = np.zeros((covered.sum(), channels))
    vis_count_flat = np.zeros(covered.sum(), dtype=np.int64)

    ys, xs = np.nonzero(covered)
    pixels = np.stack([xs, ys], axis=1).astype(float)
    points = novel_camera.unproject_pixels(pixels, novel_depth.values[ys, xs])
    if direction_mode == "point_to_camera":
        novel_dirs = _normalize_rows(novel_camera.center() - points)
    else:
        novel_dirs = np.broadcast_to(-novel_camera.rotation[2], points.shape)

    for source in sources:
        sp, sd = source.camera.project_points(points)
        rendered, in_image = nearest_pixel_lookup(source.depth, sp)
        visible = visibility_test(rendered, sd, in_image, rel_threshold)
        if not visible.any():
            continue
        if direction_mode == "point_to_camera":
            dirs = _normalize_rows(source.camera.center() - points[visible])
        else:
            dirs = np.broadcast_to(-source.camera.rotation[2], points[visible].shape)
        weights = np.maximum(0.0, np.einsum("pd,pd->p", dirs, novel_dirs[visible]))
        # Coverage-aware taps: background pixels behind the source
        # silhouette must not bleed into sampled features.
        samples = masked_bilinear_sample(
            source.features.values, source.depth.coverage(), sp[visible]
        )
        accum[visible] += weights[:, None] * samples
        weight_sum[visible] += weights
        vis_count_flat[visible] += 1

    lit = weight_sum > 0.0
    flat = np.zeros((covered.sum(), channels))
    flat[lit] = accum[lit] / weight_sum[lit, None]
    features[ys, xs] = flat.astype(np.float32)

    hole_mask = np.ones((h, w), dtype=bool)
    hole_mask[ys[lit], xs[lit]] = False
    vis_count = np.zeros((h, w), dtype=np.int64)
    vis_count[ys, xs] = vis_count_flat
    return SynthesisOutput(
        features=features, hole_mask=hole_mask, visibility_count=vis_count, novel_depth=novel_depth
    )


def decode(
    output: SynthesisOutput,
    decoder=None,
    background=(0.0, 0.0, 0.0),
) -> np.ndarray:
    """Turn integrated features into an RGB image.

    The default decoder passes the first three channels through, clamped
    to [0, 1]; a pluggable decoder maps (H, W, D) features to (H, W, 3).
    Hole pixels are filled with the background color either way.
    """
    feats = output.features
    if decoder is None:
        if feats.shape[2] < 3:
            raise ConfigurationError(
                f"default decoder needs >= 3 feature channels, got {feats.shape[2]}"
            )
        image = np.clip(feats[:, :, :3], 0.0, 1.0)
    else:
        image = np.asarray(decoder(feats))
        if image.shape != (output.height, output.width, 3):
            raise ConfigurationError("decoder returned a non-(H, W, 3) image")
    image = image.copy()
    image[output.hole_mask] = np.asarray(background, dtype=image.dtype)
    return image
