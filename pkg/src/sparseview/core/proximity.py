"""Exact nearest-point queries against segments and triangle meshes.

The mesh query is exact: a KD-tree over triangle centroids only prunes
candidates using conservative bounds (centroid distance minus bounding
radius), never the answer itself.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..errors import MetricError
from .mesh import Mesh


def point_segment_distances(points: np.ndarray, seg_start: np.ndarray, seg_end: np.ndarray) -> np.ndarray:
    """Distances from each point to each segment.

    Args:
        points: (N, 3).
        seg_start, seg_end: (B, 3) segment endpoints. Degenerate segments
            (start == end) are treated as points.

    Returns:
        (N, B) Euclidean distances.
    """
    p = np.asarray(points, dtype=float)[:, None, :]
    a = np.asarray(seg_start, dtype=float)[None, :, :]
    d = np.asarray(seg_end, dtype=float)[None, :, :] - a
    dd = np.sum(d * d, axis=2)
    t = np.sum((p - a) * d, axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(dd > 0.0, t / dd, 0.0)
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[:, :, None] * d
    return np.linalg.norm(p - closest, axis=2)


def closest_point_on_triangles(points: np.ndarray, corners: np.ndarray) -> np.ndarray:
    """Closest point on triangle i to point i (paired, vectorized).

    Standard barycentric region classification; handles vertex, edge and
    face regions exactly, including degenerate slivers via the clamped
    edge fallbacks.

    Args:
        points: (Q, 3).
        corners: (Q, 3, 3) triangle corners paired with the points.

    Returns:
        (Q, 3) closest points.
    """
    p = np.asarray(points, dtype=float)
    a, b, c = corners[:, 0], corners[:, 1], corners[:, 2]

    ab = b - a
    ac = c - a
    ap = p - a
    d1 = np.sum(ab * ap, axis=1)
    d2 = np.sum(ac * ap, axis=1)

    bp = p - b
    d3 = np.sum(ab * bp, axis=1)
    d4 = np.sum(ac * bp, axis=1)

    cp = p - c
    d5 = np.sum(ab * cp, axis=1)
    d6 = np.sum(ac * cp, axis=1)

    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    def safe_div(num, den):
        return np.where(den != 0.0, num / np.where(den == 0.0, 1.0, den), 0.0)

    # Face region (computed first, then overwritten by boundary cases).
    denom = va + vb + vc
    v = safe_div(vb, denom)
    w = safe_div(vc, denom)
    out = a + ab * v[:, None] + ac * w[:, None]

    t_bc = safe_div(d4 - d3, (d4 - d3) + (d5 - d6))
    on_bc = (va <= 0.0) & (d4 - d3 >= 0.0) & (d5 - d6 >= 0.0)
    out = np.where(on_bc[:, None], b + (c - b) * t_bc[:, None], out)

    t_ac = safe_div(d2, d2 - d6)
    on_ac = (vb <= 0.0) & (d2 >= 0.0) & (d6 <= 0.0)
    out = np.where(on_ac[:, None], a + ac * t_ac[:, None], out)

    t_ab = safe_div(d1, d1 - d3)
    on_ab = (vc <= 0.0) & (d1 >= 0.0) & (d3 <= 0.0)
    out = np.where(on_ab[:, None], a + ab * t_ab[:, None], out)

    out = np.where(((d6 >= 0.0) & (d5 <= d6))[:, None], c, out)
    out = np.where(((d3 >= 0.0) & (d4 <= d3))[:, None], b, out)
    out = np.where(((d1 <= 0.0) & (d2 <= 0.0))[:, None], a, out)
    return out


class MeshProximity:
    """Exact nearest point-on-surface queries for one target mesh."""

    def __init__(self, mesh: Mesh):
        if mesh.is_empty():
            raise MetricError("proximity target mesh is empty")
        self.corners = mesh.triangle_corners()
        self.centroids = self.corners.mean(axis=1)
        self.radii = np.linalg.norm(self.corners - self.centroids[:, None, :], axis=2).max(axis=1)
        self.radius_max = float(self.radii.max())
        self._tree = cKDTree(self.centroids)

    def query(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Nearest surface points for a batch of queries.

        Returns:
            (distances (N,), closest points (N, 3), triangle indices (N,)).
        """
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        n = len(pts)
        # Upper bound from the triangle whose centroid is nearest.
        _, near_idx = self._tree.query(pts)
        near_closest = closest_point_on_triangles(pts, self.corners[near_idx])
        upper = np.linalg.norm(pts - near_closest, axis=1)

        # Any triangle that could beat the bound has its centroid within
        # upper + its own bounding radius; radius_max is a safe blanket.
        candidate_lists = self._tree.query_ball_point(pts, upper + self.radius_max)
        lens = np.fromiter((len(c) for c in candidate_lists), dtype=np.int64, count=n)
        flat_tris = np.concatenate([np.asarray(c, dtype=np.int64) for c in candidate_lists])
        flat_pts = np.repeat(pts, lens, axis=0)
        flat_closest = closest_point_on_triangles(flat_pts, self.corners[flat_tris])
        flat_dist = np.linalg.norm(flat_pts - flat_closest, axis=1)

        seg_id = np.repeat(np.arange(n), lens)
        order = np.lexsort((flat_dist, seg_id))
        offsets = np.concatenate([[0], np.cumsum(lens)[:-1]])
        best = order[offsets]
        return flat_dist[best], flat_closest[best], flat_tris[best]

    def distances(self, points: np.ndarray) -> np.ndarray:
        return self.query(points)[0]


class VertexProximity:
    """Nearest-vertex queries (the vertex-to-vertex tracking variant)."""

    def __init__(self, mesh: Mesh):
        if mesh.num_vertices == 0:
            raise MetricError("proximity target mesh has no vertices")
        self.vertices = mesh.vertices
        self._tree = cKDTree(self.vertices)

    def query(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        dist, idx = self._tree.query(pts)
        return dist, self.vertices[idx], idx
