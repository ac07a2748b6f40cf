"""Iso-surface extraction on a regular grid (256-case marching cubes).

The per-configuration triangulations are generated once at import by
walking the cut edges of each cube case into closed loops across the six
faces and fan-triangulating every loop. On an ambiguous face (four cut
boundary edges) the pairing always isolates the inside corners; the
choice depends only on the face's own corner signs, so the two cells
sharing a face always agree and the extracted surface cannot crack
along cell boundaries. Vertices are interpolated linearly along cut
edges and deduplicated through a global edge key, which makes interior
iso-surfaces watertight by construction.

Corner ``i`` of a cell sits at offset ``(i & 1, i >> 1 & 1, i >> 2 & 1)``;
a corner is inside iff its sample is strictly greater than the threshold.
"""

from __future__ import annotations

import numpy as np

from ..core.mesh import Mesh
from .field import OccupancyField

DEFAULT_SURFACE_THRESHOLD = 0.5

_CORNER_OFFSETS = [(i & 1, (i >> 1) & 1, (i >> 2) & 1) for i in range(8)]
_EDGES = sorted(
    (a, b)
    for a in range(8)
    for b in range(a + 1, 8)
    if bin(a ^ b).count("1") == 1
)
_EDGE_INDEX = {edge: i for i, edge in enumerate(_EDGES)}

# Corner cycles of the six faces, counter-clockwise seen from outside.
_FACE_CYCLES = (
    (1, 3, 7, 5),  # x = 1
    (0, 4, 6, 2),  # x = 0
    (2, 6, 7, 3),  # y = 1
    (0, 1, 5, 4),  # y = 0
    (4, 5, 7, 6),  # z = 1
    (0, 2, 3, 1),  # z = 0
)


def _canon(edge):
    a, b = edge
    return (a, b) if a < b else (b, a)


def _face_links(cycle, inside):
    """Directed cut-point connections across one face.

    Each link is directed so the inside region lies to its left when the
    face is viewed from outside the cube; loops then wind consistently
    and triangle normals come out pointing away from the inside.
    """
    boundary = [(cycle[p], cycle[(p + 1) % 4]) for p in range(4)]
    cut = [p for p in range(4) if inside[boundary[p][0]] != inside[boundary[p][1]]]
    if not cut:
        return []
    if len(cut) == 2:
        pairs = [(cut[0], cut[1])]
    else:
        inside_positions = [p for p in range(4) if inside[cycle[p]]]
        pairs = [((p - 1) % 4, p) for p in inside_positions]
    links = []
    for i, j in pairs:
        between = []
        p = (i + 1) % 4
        while True:
            between.append(inside[cycle[p]])
            if p == j:
                break
            p = (p + 1) % 4
        if len(set(between)) != 1:
            raise AssertionError("face pairing crossed a mixed corner run")
        src, dst = _canon(boundary[i]), _canon(boundary[j])
        links.append((dst, src) if between[0] else (src, dst))
    return links


def _build_case(config: int):
    inside = [bool((config >> i) & 1) for i in range(8)]
    nxt = {}
    incoming = set()
    for cycle in _FACE_CYCLES:
        for src, dst in _face_links(cycle, inside):
            if src in nxt or dst in incoming:
                raise AssertionError(f"config {config}: inconsistent face links")
            nxt[src] = dst
            incoming.add(dst)
    if set(nxt) != incoming:
        raise AssertionError(f"config {config}: open contour")
    triangles = []
    visited = set()
    for start in sorted(nxt, key=_EDGE_INDEX.get):
        if start in visited:
            continue
        loop = [start]
        visited.add(start)
        cursor = nxt[start]
        while cursor != start:
            loop.append(cursor)
            visited.add(cursor)
            cursor = nxt[cursor]
        for i in range(1, len(loop) - 1):
            # Reversed fan: loops arrive clockwise seen from outside.
            triangles.append(
                (_EDGE_INDEX[loop[0]], _EDGE_INDEX[loop[i + 1]], _EDGE_INDEX[loop[i]])
            )
    return tuple(triangles)


TRIANGLE_TABLE = tuple(_build_case(config) for config in range(256))


def extract_surface(field: OccupancyField, threshold: float = DEFAULT_SURFACE_THRESHOLD) -> Mesh:
    """Triangulate the iso-surface of an occupancy field.

    All-inside or all-outside fields yield an empty mesh. Vertices are in
    world coordinates via the field bounds.
    """
    values = field.values
    inside = values > threshold
    nx, ny, nz = field.resolution

    config = np.zeros((nx, ny, nz), dtype=np.uint16)
    for bit, (dx, dy, dz) in enumerate(_CORNER_OFFSETS):
        config |= inside[dx : dx + nx, dy : dy + ny, dz : dz + nz].astype(np.uint16) << bit
    mixed = np.argwhere((config != 0) & (config != 255))
    if len(mixed) == 0:
        return Mesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    xs, ys, zs = field.axis_coordinates()
    corner_stride = ((ny + 1) * (nz + 1), nz + 1, 1)

    vertex_ids: dict[tuple[int, int], int] = {}
    vertices: list[np.ndarray] = []
    triangles: list[tuple[int, int, int]] = []

    for ix, iy, iz in mixed:
        case = TRIANGLE_TABLE[config[ix, iy, iz]]
        cell_vertex = {}
        for edge_ids in case:
            resolved = []
            for e in edge_ids:
                if e in cell_vertex:
                    resolved.append(cell_vertex[e])
                    continue
                a, b = _EDGES[e]
                ax, ay, az = _CORNER_OFFSETS[a]
                bx, by, bz = _CORNER_OFFSETS[b]
                ga = (ix + ax) * corner_stride[0] + (iy + ay) * corner_stride[1] + (iz + az)
                gb = (ix + bx) * corner_stride[0] + (iy + by) * corner_stride[1] + (iz + bz)
                key = (ga, gb)
                vid = vertex_ids.get(key)
                if vid is None:
                    sa = values[ix + ax, iy + ay, iz + az]
                    sb = values[ix + bx, iy + by, iz + bz]
                    t = (threshold - sa) / (sb - sa)
                    pa = np.array([xs[ix + ax], ys[iy + ay], zs[iz + az]])
                    pb = np.array([xs[ix + bx], ys[iy + by], zs[iz + bz]])
                    vid = len(vertices)
                    vertices.append(pa + t * (pb - pa))
                    vertex_ids[key] = vid
                cell_vertex[e] = vid
                resolved.append(vid)
            triangles.append(tuple(resolved))

    mesh = Mesh(np.asarray(vertices), np.asarray(triangles, dtype=np.int64))
    return mesh.without_degenerate_triangles()
