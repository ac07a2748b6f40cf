from __future__ import annotations

import numpy as np
import pytest

from sparseview.core import Camera, Mesh
from sparseview.tracking import KinematicTree


@pytest.fixture
def identity_camera():
    """f=1, principal point at the origin pixel: projects (x/z, y/z)."""
    return Camera(
        intrinsics=np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
        rotation=np.eye(3),
        translation=np.zeros(3),
        width=2,
        height=2,
    )


def random_camera(rng, width=64, height=64):
    """A valid random camera looking roughly at the origin."""
    q = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    eye = rng.uniform(2.0, 5.0) * _unit(rng.standard_normal(3))
    # Rebuild the third row so the camera looks at the origin.
    forward = _unit(-eye)
    right = _unit(np.cross(forward, q[:, 0]))
    down = np.cross(forward, right)
    rotation = np.stack([right, down, forward])
    translation = -rotation @ eye
    f = rng.uniform(50.0, 400.0)
    intrinsics = np.array(
        [
            [f, 0.0, rng.uniform(0.3, 0.7) * width],
            [0.0, f * rng.uniform(0.9, 1.1), rng.uniform(0.3, 0.7) * height],
            [0.0, 0.0, 1.0],
        ]
    )
    return Camera(
        intrinsics=intrinsics, rotation=rotation, translation=translation, width=width, height=height
    )


def _unit(v):
    return v / np.linalg.norm(v)


def make_cylinder(n_ring=12, n_h=9, radius=0.08, height=0.6, y0=0.0, radius_z=None):
    """Open-ended test tube along +y starting at y0.

    ``radius_z`` different from ``radius`` gives an elliptical cross
    section; round-trip tests need that to break the rotational symmetry
    that makes twist unobservable.
    """
    radius_z = radius if radius_z is None else radius_z
    vs, tris = [], []
    for i in range(n_h):
        y = y0 + height * i / (n_h - 1)
        for k in range(n_ring):
            a = 2.0 * np.pi * k / n_ring
            vs.append([radius * np.cos(a), y, radius_z * np.sin(a)])
    for i in range(n_h - 1):
        for k in range(n_ring):
            a = i * n_ring + k
            b = i * n_ring + (k + 1) % n_ring
            c = a + n_ring
            d = b + n_ring
            tris += [[a, b, c], [b, d, c]]
    return Mesh(np.array(vs), np.array(tris, dtype=np.int64))


def four_joint_chain(spacing=0.3):
    canonical = np.array([[0.0, spacing * k, 0.0] for k in range(4)])
    return KinematicTree(parents=(-1, 0, 1, 2), canonical=canonical)
