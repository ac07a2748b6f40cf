"""Synthetic scenes for demos, tests and the acceptance suites: closed
parametric geometry, per-vertex texture patterns, camera rings and
ground-truth skeletons (with articulated sequences for stick figures)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.camera import Camera, look_at_camera
from ..core.mesh import Mesh
from ..core.skeleton import JointLayout, Skeleton3D
from ..errors import ConfigurationError
from ..io.images import read_png
from ..io.meshio import read_mesh
from ..tracking.kinematics import KinematicParams, KinematicTree, forward_kinematics
from ..tracking.skinning import rig, lbs_deform


def icosphere(subdivisions: int = 3, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> Mesh:
    """Closed unit-ish sphere from repeated icosahedron subdivision."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=float,
    )
    faces = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    verts = list(verts)
    cache: dict[tuple[int, int], int] = {}

    def midpoint(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        if key in cache:
            return cache[key]
        m = verts[a] + verts[b]
        m /= np.linalg.norm(m)
        verts.append(m)
        cache[key] = len(verts) - 1
        return cache[key]

    for _ in range(subdivisions):
        next_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            next_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = next_faces
    vertices = np.asarray(verts) * radius + np.asarray(center, dtype=float)
    return Mesh(vertices, np.asarray(faces, dtype=np.int64))


def capped_tube(
    joints: np.ndarray,
    radius: float = 0.08,
    ring_segments: int = 16,
    rings_per_bone: int = 6,
) -> Mesh:
    """Closed tube around a vertical joint chain (the stick-figure body)."""
    joints = np.asarray(joints, dtype=float)
    y_lo = joints[:, 1].min() - 0.5 * radius
    y_hi = joints[:, 1].max() + 0.5 * radius
    n_rings = rings_per_bone * (len(joints) - 1) + 1
    heights = np.linspace(y_lo, y_hi, n_rings)
    cx, cz = joints[0, 0], joints[0, 2]

    verts = []
    for y in heights:
        for k in range(ring_segments):
            a = 2.0 * np.pi * k / ring_segments
            verts.append([cx + radius * np.cos(a), y, cz + radius * np.sin(a)])
    bottom = len(verts)
    verts.append([cx, y_lo, cz])
    top = len(verts)
    verts.append([cx, y_hi, cz])

    tris = []
    for i in range(n_rings - 1):
        for k in range(ring_segments):
            a = i * ring_segments + k
            b = i * ring_segments + (k + 1) % ring_segments
            c = a + ring_segments
            d = b + ring_segments
            tris += [[a, b, c], [b, d, c]]
    for k in range(ring_segments):
        a = k
        b = (k + 1) % ring_segments
        tris.append([b, a, bottom])
        a2 = (n_rings - 1) * ring_segments + k
        b2 = (n_rings - 1) * ring_segments + (k + 1) % ring_segments
        tris.append([a2, b2, top])
    return Mesh(np.asarray(verts), np.asarray(tris, dtype=np.int64))


def gradient_colors(mesh: Mesh) -> np.ndarray:
    """Smooth low-frequency RGB pattern over vertex positions."""
    p = mesh.vertices
    return 0.5 + 0.4 * np.stack(
        [
            np.sin(1.7 * p[:, 0] + 0.3),
            np.sin(2.3 * p[:, 1] + 1.1),
            np.sin(1.9 * p[:, 2] + 2.0),
        ],
        axis=1,
    )


def checker_colors(mesh: Mesh, scale: float = 4.0) -> np.ndarray:
    parity = np.floor(mesh.vertices * scale).sum(axis=1).astype(np.int64) % 2
    colors = np.where(parity[:, None] == 0, 0.9, 0.15)
    return np.repeat(colors[:, :1], 3, axis=1) * np.array([1.0, 0.95, 0.9])


def image_colors(mesh: Mesh, image: np.ndarray) -> np.ndarray:
    """Spherical (longitude/latitude) lookup of an image around the centroid."""
    d = mesh.vertices - mesh.vertices.mean(axis=0)
    d /= np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-12)
    u = (np.arctan2(d[:, 2], d[:, 0]) / (2.0 * np.pi) + 0.5) * (image.shape[1] - 1)
    v = (0.5 - np.arcsin(np.clip(d[:, 1], -1, 1)) / np.pi) * (image.shape[0] - 1)
    return image[np.round(v).astype(int), np.round(u).astype(int)].astype(float) / 255.0


def ring_cameras(
    count: int,
    radius: float = 3.0,
    pitch_deg: float = 0.0,
    width: int = 256,
    height: int = 256,
    fov_deg: float = 50.0,
    target=(0.0, 0.0, 0.0),
) -> list[Camera]:
    """Evenly spaced yaw ring of cameras looking at a common target."""
    if count < 1:
        raise ConfigurationError("camera ring needs at least one camera")
    target = np.asarray(target, dtype=float)
    pitch = np.radians(pitch_deg)
    cams = []
    for i in range(count):
        yaw = 2.0 * np.pi * i / count
        eye = target + radius * np.array(
            [np.sin(yaw) * np.cos(pitch), np.sin(pitch), np.cos(yaw) * np.cos(pitch)]
        )
        cams.append(
            look_at_camera(eye, target, width, height, fov_deg=fov_deg, name=f"cam{i:02d}")
        )
    return cams


STICK_PARENTS = (-1, 0, 1, 2)


def _stick_pose_schedule(frames: int, seed: int) -> list[np.ndarray]:
    """Deterministic per-frame joint rotations for the stick sequence.

    Axes stay perpendicular to the chain (pure bending): twist about a
    rotationally symmetric tube is unobservable from joint positions, so
    including it would make the round trip ill-posed rather than hard.
    """
    rng = np.random.default_rng(seed)
    mix = rng.uniform(-1.0, 1.0, size=2)
    axis2 = np.array([mix[0], 0.0, mix[1]])
    axis2 /= np.linalg.norm(axis2)
    poses = []
    for f in range(frames):
        theta = np.zeros((len(STICK_PARENTS), 3))
        if f > 0:
            bend = np.radians(12.0 * f)
            theta[1] = np.array([0.0, 0.0, 1.0]) * bend
            theta[2] = axis2 * 0.6 * bend
        poses.append(theta)
    return poses


@dataclass
class SceneData:
    """Everything a synthetic scene provides, one entry per frame."""

    meshes: list[Mesh]
    cameras: list[Camera]
    skeletons: list[Skeleton3D]
    parents: tuple[int, ...]
    layout: JointLayout
    poses: list[np.ndarray] = field(default_factory=list)


@dataclass
class SyntheticScene:
    """Parametric scene description (see the gen-scene command)."""

    geometry: str = "sphere"
    texture: str = "gradient"
    camera_count: int = 6
    ring_radius: float = 3.0
    pitch_deg: float = 0.0
    width: int = 256
    height: int = 256
    fov_deg: float = 50.0
    subdivisions: int = 3
    sphere_radius: float = 1.0
    frames: int = 1
    checker_scale: float = 4.0
    seed: int = 42

    def build(self) -> SceneData:
        if self.camera_count < 1:
            raise ConfigurationError("camera_count must be >= 1")
        cameras = ring_cameras(
            self.camera_count,
            self.ring_radius,
            self.pitch_deg,
            self.width,
            self.height,
            self.fov_deg,
        )
        if self.geometry == "sphere":
            base = icosphere(self.subdivisions, self.sphere_radius)
            offset = 0.5 * self.sphere_radius
            joints = np.array([[0.0, -offset, 0.0], [0.0, offset, 0.0]])
            layout = JointLayout(names=("hip", "neck"), parents=(-1, 0), hip=0, neck=1)
            meshes = [self._textured(base)]
            skeletons = [Skeleton3D(joints=joints, layout=layout)]
            return SceneData(meshes, cameras, skeletons, (-1, 0), layout, [np.zeros((2, 3))])
        if self.geometry == "stick":
            joints = np.array([[0.0, -0.45 + 0.3 * k, 0.0] for k in range(4)])
            layout = JointLayout(
                names=("hip", "spine", "chest", "neck"), parents=STICK_PARENTS, hip=0, neck=3
            )
            tree = KinematicTree(parents=STICK_PARENTS, canonical=joints)
            canonical = self._textured(capped_tube(joints))
            weights = rig(canonical, Skeleton3D(joints=joints, layout=layout), tree)
            meshes, skeletons, poses = [], [], []
            for theta in _stick_pose_schedule(self.frames, self.seed):
                params = KinematicParams(theta, np.zeros(3))
                meshes.append(lbs_deform(canonical, weights, tree, params))
                skel = forward_kinematics(tree, params)
                skeletons.append(Skeleton3D(joints=skel.joints, layout=layout))
                poses.append(theta)
            return SceneData(meshes, cameras, skeletons, STICK_PARENTS, layout, poses)
        # anything else is a mesh file on disk
        base = read_mesh(self.geometry)
        center = base.vertices.mean(axis=0)
        extent = float(np.linalg.norm(base.vertices - center, axis=1).max())
        joints = np.array([center - [0, extent / 2, 0], center + [0, extent / 2, 0]])
        layout = JointLayout(names=("hip", "neck"), parents=(-1, 0), hip=0, neck=1)
        return SceneData(
            [self._textured(base)],
            cameras,
            [Skeleton3D(joints=joints, layout=layout)],
            (-1, 0),
            layout,
            [np.zeros((2, 3))],
        )

    def _textured(self, mesh: Mesh) -> Mesh:
        if self.texture == "gradient":
            colors = gradient_colors(mesh)
        elif self.texture == "checker":
            colors = checker_colors(mesh, self.checker_scale)
        else:
            colors = image_colors(mesh, read_png(self.texture))
        out = mesh.copy()
        out.attributes["color"] = colors
        return out
