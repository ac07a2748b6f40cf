"""Occupancy heads: fused features (and depths) to a scalar in (0, 1).

The trained decoder is out of scope, so two runnable stand-ins are
provided: an oracle head that evaluates a ground-truth signed-distance
occupancy (ignoring features), and a toy MLP with explicit weight
matrices for reference-computation tests. Heads receive the query point,
the pooled fused feature and the per-view normalized depths; batched
evaluation is the primary interface.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError

DEFAULT_ORACLE_WIDTH = 0.02


def sphere_sdf(center=(0.0, 0.0, 0.0), radius: float = 1.0):
    """Signed distance to a sphere: negative inside."""
    c = np.asarray(center, dtype=float)

    def sdf(points: np.ndarray) -> np.ndarray:
        return np.linalg.norm(np.asarray(points, dtype=float) - c, axis=-1) - radius

    return sdf


def mesh_sdf(mesh):
    """Signed distance to a closed, outward-oriented mesh.

    Sign comes from the side of the nearest triangle's plane; exact for
    smooth closed surfaces, off only within a facet of edges and
    vertices, which the head's smooth step absorbs.
    """
    from ..core.proximity import MeshProximity

    prox = MeshProximity(mesh)
    corners = mesh.triangle_corners()
    normals = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])

    def sdf(points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        dist, closest, tri = prox.query(pts)
        outside = np.einsum("pd,pd->p", pts - closest, normals[tri]) >= 0.0
        return np.where(outside, dist, -dist)

    return sdf


class SignedDistanceHead:
    """Oracle occupancy from a ground-truth signed distance function.

    ``s = sigmoid(-sdf / width)``: exactly 0.5 on the surface, above 0.5
    inside, approaching 1/0 away from it. ``width`` sets the smooth-step
    length scale and should be of the order of the sampling voxel.
    """

    def __init__(self, sdf, width: float = DEFAULT_ORACLE_WIDTH):
        if width <= 0.0:
            raise ShapeMismatchError("smooth-step width must be positive")
        self.sdf = sdf
        self.width = float(width)

    def batch(self, points: np.ndarray, fused: np.ndarray, z_views: np.ndarray) -> np.ndarray:
        d = np.asarray(self.sdf(points), dtype=float)
        return 1.0 / (1.0 + np.exp(d / self.width))

    def __call__(self, point, fused, z_views) -> float:
        return float(self.batch(np.asarray(point).reshape(1, 3), fused, z_views)[0])


class MlpHead:
    """Small explicit-weight perceptron head.

    Input is the pooled fused feature concatenated with the mean of the
    per-view normalized depths; tanh hidden layers and a sigmoid output.
    """

    def __init__(self, layers: list[tuple[np.ndarray, np.ndarray]]):
        self.layers = [(np.asarray(w, dtype=float), np.asarray(b, dtype=float)) for w, b in layers]
        for w, b in self.layers:
            if w.shape[1] != b.shape[0]:
                raise ShapeMismatchError("bias length must match layer width")

    @property
    def in_dim(self) -> int:
        return self.layers[0][0].shape[0]

    @classmethod
    def random(cls, in_dim: int, hidden: tuple[int, ...] = (8, 8), seed: int = 0) -> "MlpHead":
        rng = np.random.default_rng(seed)
        dims = [in_dim, *hidden, 1]
        layers = []
        for a, b in zip(dims[:-1], dims[1:]):
            layers.append((rng.standard_normal((a, b)) / np.sqrt(a), rng.standard_normal(b) * 0.1))
        return cls(layers)

    def batch(self, points: np.ndarray, fused: np.ndarray, z_views: np.ndarray) -> np.ndarray:
        fused = np.asarray(fused, dtype=float)
        if fused.ndim == 1:
            fused = fused[None, :]
        z = np.asarray(z_views, dtype=float)
        if z.ndim == 1:
            z = z[None, :]
        x = np.concatenate([fused, z.mean(axis=1, keepdims=True)], axis=1)
        if x.shape[1] != self.in_dim:
            raise ShapeMismatchError(f"head expects {self.in_dim} inputs, got {x.shape[1]}")
        for w, b in self.layers[:-1]:
            x = np.tanh(x @ w + b)
        w, b = self.layers[-1]
        out = (x @ w + b)[:, 0]
        return 1.0 / (1.0 + np.exp(-out))

    def __call__(self, point, fused, z_views) -> float:
        return float(self.batch(point, np.asarray(fused)[None, :], np.asarray(z_views)[None, :])[0])
