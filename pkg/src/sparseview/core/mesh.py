"""Indexed triangle mesh with optional per-vertex attribute channels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, ShapeMismatchError


@dataclass
class Mesh:
    """Triangle surface in world space (meters).

    Attributes:
        vertices: (N, 3) float positions.
        triangles: (M, 3) int vertex indices.
        attributes: named per-vertex channels, each (N,) or (N, C).
    """

    vertices: np.ndarray
    triangles: np.ndarray
    attributes: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        n = len(self.vertices)
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= n):
            raise ShapeMismatchError("triangle indices out of vertex range")
        for key, values in list(self.attributes.items()):
            values = np.asarray(values, dtype=float)
            if len(values) != n:
                raise ShapeMismatchError(
                    f"attribute {key!r} has {len(values)} entries for {n} vertices"
                )
            self.attributes[key] = values

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    def is_empty(self) -> bool:
        return self.num_triangles == 0

    def attribute(self, name: str) -> np.ndarray:
        if name not in self.attributes:
            raise ConfigurationError(f"mesh has no attribute channel {name!r}")
        return self.attributes[name]

    def triangle_corners(self) -> np.ndarray:
        """(M, 3, 3) corner positions of every triangle."""
        return self.vertices[self.triangles]

    def triangle_areas(self) -> np.ndarray:
        c = self.triangle_corners()
        cross = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def edges(self) -> np.ndarray:
        """Unique undirected edges as (E, 2) sorted index pairs."""
        if self.is_empty():
            return np.zeros((0, 2), dtype=np.int64)
        tri = self.triangles
        pairs = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]], axis=0)
        pairs = np.sort(pairs, axis=1)
        return np.unique(pairs, axis=0)

    def without_degenerate_triangles(self) -> "Mesh":
        """Drop zero-area triangles (construction cleanup).

        Vertex order and indices are preserved so attribute channels stay
        aligned.
        """
        if self.is_empty():
            return self
        distinct = (
            (self.triangles[:, 0] != self.triangles[:, 1])
            & (self.triangles[:, 1] != self.triangles[:, 2])
            & (self.triangles[:, 0] != self.triangles[:, 2])
        )
        keep = distinct & (self.triangle_areas() > 0.0)
        if np.all(keep):
            return self
        return Mesh(self.vertices, self.triangles[keep], dict(self.attributes))

    def transformed(self, rotation: np.ndarray, translation: np.ndarray) -> "Mesh":
        """Rigidly transformed copy: ``v -> R v + t``."""
        verts = self.vertices @ np.asarray(rotation, dtype=float).T + np.asarray(
            translation, dtype=float
        )
        return Mesh(verts, self.triangles.copy(), {k: v.copy() for k, v in self.attributes.items()})

    def copy(self) -> "Mesh":
        return Mesh(
            self.vertices.copy(),
            self.triangles.copy(),
            {k: v.copy() for k, v in self.attributes.items()},
        )
