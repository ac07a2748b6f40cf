"""Deterministic software z-buffer rasterizer.

Output is bit-reproducible: triangles are processed in index order and
exact depth ties keep the earlier triangle. Depths are camera-space z.
A pixel is covered iff its center lies inside the projected triangle,
with a top-left rule deciding shared edges so abutting triangles neither
double-cover nor leave gaps. No back-face culling: tracked intermediate
meshes may contain flipped faces and culling would punch holes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.camera import Camera
from ..core.mesh import Mesh

_NEAR_PLANE = 1e-9


@dataclass
class DepthMap:
    """Per-pixel camera-space depth in meters; 0 marks no surface."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def coverage(self) -> np.ndarray:
        return self.values > 0.0


@dataclass
class AttributeImage:
    """Interpolated per-vertex channel values with a coverage mask."""

    values: np.ndarray
    mask: np.ndarray

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass
class RasterFragments:
    """Raw rasterization output shared by depth and attribute renders."""

    depth: np.ndarray        # (H, W) camera-space z, +inf where empty
    triangle: np.ndarray     # (H, W) winning triangle index, -1 where empty
    barycentric: np.ndarray  # (H, W, 3) perspective-correct weights

    def coverage(self) -> np.ndarray:
        return self.triangle >= 0


def rasterize(mesh: Mesh, camera: Camera) -> RasterFragments:
    """Rasterize every triangle against a fresh z-buffer.

    Triangles with any vertex at or behind the near plane are skipped
    (no clipping; capture rigs keep the subject well in front of every
    camera).
    """
    w, h = camera.width, camera.height
    depth = np.full((h, w), np.inf)
    tri_id = np.full((h, w), -1, dtype=np.int64)
    bary = np.zeros((h, w, 3))
    if mesh.is_empty():
        return RasterFragments(depth, tri_id, bary)

    pixels, depths = camera.project_points(mesh.vertices)

    for index, tri in enumerate(mesh.triangles):
        z = depths[tri]
        if np.any(z <= _NEAR_PLANE) or not np.all(np.isfinite(z)):
            continue
        p = pixels[tri]
        area = _edge(p[0], p[1], p[2])
        if area == 0.0:
            continue

        x_min = max(int(np.ceil(p[:, 0].min())), 0)
        x_max = min(int(np.floor(p[:, 0].max())), w - 1)
        y_min = max(int(np.ceil(p[:, 1].min())), 0)
        y_max = min(int(np.floor(p[:, 1].max())), h - 1)
        if x_min > x_max or y_min > y_max:
            continue

        xs = np.arange(x_min, x_max + 1, dtype=float)
        ys = np.arange(y_min, y_max + 1, dtype=float)
        px, py = np.meshgrid(xs, ys)

        w0 = _edge_grid(p[1], p[2], px, py)
        w1 = _edge_grid(p[2], p[0], px, py)
        w2 = _edge_grid(p[0], p[1], px, py)
        sign = 1.0 if area > 0.0 else -1.0
        edges = ((p[1], p[2]), (p[2], p[0]), (p[0], p[1]))
        inside = np.ones_like(px, dtype=bool)
        for wgt, (a, b) in zip((w0, w1, w2), edges):
            wn = sign * wgt
            inside &= (wn > 0.0) | ((wn == 0.0) & _is_top_left(a, b, sign))
        if not inside.any():
            continue

        lam0 = w0 / area
        lam1 = w1 / area
        lam2 = w2 / area
        inv_z = lam0 / z[0] + lam1 / z[1] + lam2 / z[2]
        z_pix = 1.0 / inv_z

        rows = py[inside].astype(np.int64)
        cols = px[inside].astype(np.int64)
        z_new = z_pix[inside]
        closer = z_new < depth[rows, cols]
        if not closer.any():
            continue
        rows, cols, z_new = rows[closer], cols[closer], z_new[closer]
        depth[rows, cols] = z_new
        tri_id[rows, cols] = index
        mu = np.stack(
            [
                (lam0[inside][closer] / z[0]) * z_new,
                (lam1[inside][closer] / z[1]) * z_new,
                (lam2[inside][closer] / z[2]) * z_new,
            ],
            axis=1,
        )
        bary[rows, cols] = mu

    return RasterFragments(depth, tri_id, bary)


def _edge(a, b, p):
    return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])


def _edge_grid(a, b, px, py):
    return (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0])


def _is_top_left(a, b, sign: float) -> bool:
    # Directed edge after orientation normalization; with y down and the
    # interior on the positive side, top edges run +x and left edges -y.
    dx = sign * (b[0] - a[0])
    dy = sign * (b[1] - a[1])
    return (dy == 0.0 and dx > 0.0) or dy < 0.0


def render_depth(mesh: Mesh, camera: Camera) -> DepthMap:
    """Z-buffer depth render; uncovered pixels store 0."""
    frags = rasterize(mesh, camera)
    values = np.where(frags.coverage(), frags.depth, 0.0)
    return DepthMap(values)


def render_attributes(mesh: Mesh, camera: Camera, channel: str) -> AttributeImage:
    """Perspective-correct interpolation of a per-vertex channel.

    The winning triangle per pixel is the z-buffer winner, so the
    coverage mask matches :func:`render_depth` for the same inputs.
    """
    attr = mesh.attribute(channel)
    if attr.ndim == 1:
        attr = attr[:, None]
    frags = rasterize(mesh, camera)
    mask = frags.coverage()
    values = np.zeros((camera.height, camera.width, attr.shape[1]))
    if mask.any():
        tris = mesh.triangles[frags.triangle[mask]]
        corner_vals = attr[tris]  # (P, 3, C)
        mu = frags.barycentric[mask]  # (P, 3)
        # Blend deltas against the first corner: constant channels come
        # out exact even though the weights only sum to 1 up to rounding.
        deltas = corner_vals[:, 1:] - corner_vals[:, :1]
        values[mask] = corner_vals[:, 0] + np.einsum("pk,pkc->pc", mu[:, 1:], deltas)
    return AttributeImage(values=values, mask=mask)
