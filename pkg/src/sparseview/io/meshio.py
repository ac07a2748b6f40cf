"""Mesh file formats: ASCII OBJ and binary little-endian PLY.

Both carry optional per-vertex RGB color: OBJ via the common
``v x y z r g b`` extension, PLY via uchar red/green/blue properties.
"""

from __future__ import annotations

import struct

import numpy as np

from ..core.mesh import Mesh
from ..errors import InputError


def write_obj(path, mesh: Mesh) -> None:
    color = mesh.attributes.get("color")
    with open(path, "w") as fh:
        for i, v in enumerate(mesh.vertices):
            if color is not None:
                c = color[i]
                fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g} {c[0]:.9g} {c[1]:.9g} {c[2]:.9g}\n")
            else:
                fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def read_obj(path) -> Mesh:
    vertices = []
    colors = []
    triangles = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                vals = [float(x) for x in parts[1:]]
                vertices.append(vals[:3])
                if len(vals) >= 6:
                    colors.append(vals[3:6])
            elif parts[0] == "f":
                idx = [int(tok.split("/")[0]) - 1 for tok in parts[1:4]]
                triangles.append(idx)
    if not vertices:
        raise InputError(f"{path}: OBJ contains no vertices")
    attributes = {}
    if colors and len(colors) == len(vertices):
        attributes["color"] = np.asarray(colors)
    return Mesh(np.asarray(vertices), np.asarray(triangles, dtype=np.int64).reshape(-1, 3), attributes)


def write_ply(path, mesh: Mesh) -> None:
    color = mesh.attributes.get("color")
    n, m = mesh.num_vertices, mesh.num_triangles
    header = ["ply", "format binary_little_endian 1.0", f"element vertex {n}"]
    header += ["property float x", "property float y", "property float z"]
    if color is not None:
        header += ["property uchar red", "property uchar green", "property uchar blue"]
    header += [f"element face {m}", "property list uchar int vertex_indices", "end_header"]
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        verts = mesh.vertices.astype("<f4")
        if color is not None:
            rgb = np.clip(np.round(color * 255.0), 0, 255).astype(np.uint8)
            for v, c in zip(verts, rgb):
                fh.write(v.tobytes() + c.tobytes())
        else:
            fh.write(verts.tobytes())
        for t in mesh.triangles:
            fh.write(struct.pack("<Biii", 3, int(t[0]), int(t[1]), int(t[2])))


def read_ply(path) -> Mesh:
    with open(path, "rb") as fh:
        line = fh.readline().strip()
        if line != b"ply":
            raise InputError(f"{path}: not a PLY file")
        n = m = 0
        has_color = False
        fmt = None
        element = None
        while True:
            line = fh.readline()
            if not line:
                raise InputError(f"{path}: PLY header never ends")
            tokens = line.split()
            if tokens[0] == b"format":
                fmt = tokens[1]
            elif tokens[0] == b"element":
                element = tokens[1]
                if element == b"vertex":
                    n = int(tokens[2])
                elif element == b"face":
                    m = int(tokens[2])
            elif tokens[0] == b"property" and element == b"vertex" and tokens[-1] == b"red":
                has_color = True
            elif tokens[0] == b"end_header":
                break
        if fmt != b"binary_little_endian":
            raise InputError(f"{path}: only binary little-endian PLY is supported")
        stride = 12 + (3 if has_color else 0)
        raw = fh.read(n * stride)
        if len(raw) != n * stride:
            raise InputError(f"{path}: truncated vertex payload")
        buf = np.frombuffer(raw, dtype=np.uint8).reshape(n, stride)
        vertices = buf[:, :12].copy().view("<f4").astype(float)
        attributes = {}
        if has_color:
            attributes["color"] = buf[:, 12:15].astype(float) / 255.0
        triangles = np.zeros((m, 3), dtype=np.int64)
        for i in range(m):
            count = struct.unpack("<B", fh.read(1))[0]
            if count != 3:
                raise InputError(f"{path}: face {i} is not a triangle")
            triangles[i] = struct.unpack("<iii", fh.read(12))
    return Mesh(vertices, triangles, attributes)


def write_mesh(path, mesh: Mesh) -> None:
    path = str(path)
    if path.endswith(".obj"):
        write_obj(path, mesh)
    elif path.endswith(".ply"):
        write_ply(path, mesh)
    else:
        raise InputError(f"unsupported mesh format: {path}")


def read_mesh(path) -> Mesh:
    path = str(path)
    if path.endswith(".obj"):
        return read_obj(path)
    if path.endswith(".ply"):
        return read_ply(path)
    raise InputError(f"unsupported mesh format: {path}")
