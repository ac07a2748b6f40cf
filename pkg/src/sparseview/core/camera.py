"""Perspective camera model and projection math.

Conventions, fixed once for the whole package:

* extrinsics map world to camera: ``X_c = R @ X_w + t`` (meters),
* the camera looks down its +z axis; points with ``z <= 0`` are behind it,
* pixel origin is the top-left corner, x right, y down,
* continuous pixel centers sit at integer coordinates, so pixel (i, j)
  covers the square ``[i - 0.5, i + 0.5] x [j - 0.5, j + 0.5]``,
* depth means camera-space z, not distance to the camera center.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BehindCameraError, CameraModelError, InvalidDepthError

_ORTHONORMAL_TOL = 1e-9


@dataclass(frozen=True)
class Camera:
    """Calibrated perspective camera.

    Attributes:
        intrinsics: 3x3 matrix with focal lengths and principal point in pixels.
        rotation: 3x3 orthonormal world-to-camera rotation.
        translation: world-to-camera translation (meters).
        width: image width in pixels.
        height: image height in pixels.
        name: optional rig identifier carried through calibration files.
    """

    intrinsics: np.ndarray
    rotation: np.ndarray
    translation: np.ndarray
    width: int
    height: int
    name: str = ""

    def __post_init__(self):
        K = np.asarray(self.intrinsics, dtype=float).reshape(3, 3)
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        object.__setattr__(self, "intrinsics", K)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)
        if not np.all(np.isfinite(K)) or not np.all(np.isfinite(R)) or not np.all(np.isfinite(t)):
            raise CameraModelError(f"camera {self.name!r}: non-finite parameters")
        if np.max(np.abs(R.T @ R - np.eye(3))) > _ORTHONORMAL_TOL:
            raise CameraModelError(f"camera {self.name!r}: rotation is not orthonormal")
        if K[0, 0] <= 0 or K[1, 1] <= 0:
            raise CameraModelError(f"camera {self.name!r}: focal lengths must be positive")
        if not (0 <= K[0, 2] <= self.width and 0 <= K[1, 2] <= self.height):
            raise CameraModelError(f"camera {self.name!r}: principal point outside the image")
        if self.width < 1 or self.height < 1:
            raise CameraModelError(f"camera {self.name!r}: empty resolution")

    @property
    def resolution(self) -> tuple[int, int]:
        return (self.width, self.height)

    def center(self) -> np.ndarray:
        """World-space position of the camera center, ``-R^T t``."""
        return -self.rotation.T @ self.translation

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        """World points (..., 3) into camera space."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def project(self, point) -> tuple[np.ndarray, float]:
        """Project one world point.

        Returns:
            (pixel, depth): continuous pixel coordinates (may lie outside
            the image; the caller checks bounds) and camera-space depth.

        Raises:
            BehindCameraError: if the point has non-positive depth.
        """
        xc = self.to_camera(np.asarray(point, dtype=float).reshape(3))
        depth = float(xc[2])
        if depth <= 0.0:
            raise BehindCameraError(f"point has camera depth {depth:.6g}")
        h = self.intrinsics @ xc
        return h[:2] / h[2], depth

    def unproject(self, pixel, depth: float) -> np.ndarray:
        """Inverse of :meth:`project` for a pixel at a known depth.

        Raises:
            InvalidDepthError: if ``depth <= 0``.
        """
        if not depth > 0.0:
            raise InvalidDepthError(f"depth must be positive, got {depth!r}")
        u, v = np.asarray(pixel, dtype=float).reshape(2)
        ray = np.linalg.solve(self.intrinsics, np.array([u, v, 1.0]))
        xc = depth * ray  # third intrinsics row is (0, 0, 1) so ray_z == 1
        return self.rotation.T @ (xc - self.translation)

    def project_points(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Batched projection without behind-camera checks.

        Args:
            points: (N, 3) world points.

        Returns:
            pixels (N, 2) and depths (N,); entries with ``depth <= 0`` hold
            garbage pixels and must be masked by the caller.
        """
        xc = self.to_camera(points)
        depths = xc[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            h = xc @ self.intrinsics.T
            pixels = h[:, :2] / h[:, 2:3]
        return pixels, depths

    def unproject_pixels(self, pixels: np.ndarray, depths: np.ndarray) -> np.ndarray:
        """Batched unprojection; depths must already be positive."""
        px = np.asarray(pixels, dtype=float).reshape(-1, 2)
        d = np.asarray(depths, dtype=float).reshape(-1)
        ones = np.ones((px.shape[0], 1))
        rays = np.concatenate([px, ones], axis=1) @ np.linalg.inv(self.intrinsics).T
        xc = rays * d[:, None]
        return (xc - self.translation) @ self.rotation

    def projection_matrix(self) -> np.ndarray:
        """3x4 matrix ``K [R | t]`` used by the triangulation solver."""
        return self.intrinsics @ np.concatenate(
            [self.rotation, self.translation[:, None]], axis=1
        )


def look_at_camera(
    eye,
    target,
    width: int,
    height: int,
    fov_deg: float = 50.0,
    up=(0.0, 1.0, 0.0),
    name: str = "",
) -> Camera:
    """Build a camera at ``eye`` looking at ``target`` with world-up ``up``.

    The horizontal and vertical focal lengths are equal and derived from
    the vertical field of view.
    """
    eye = np.asarray(eye, dtype=float)
    target = np.asarray(target, dtype=float)
    forward = target - eye
    norm = np.linalg.norm(forward)
    if norm == 0.0:
        raise CameraModelError("eye and target coincide")
    forward = forward / norm
    up = np.asarray(up, dtype=float)
    right = np.cross(forward, up)
    rnorm = np.linalg.norm(right)
    if rnorm < 1e-12:
        raise CameraModelError("view direction parallel to the up vector")
    right = right / rnorm
    down = np.cross(forward, right)
    R = np.stack([right, down, forward], axis=0)
    t = -R @ eye
    f = (height / 2.0) / np.tan(np.radians(fov_deg) / 2.0)
    K = np.array(
        [
            [f, 0.0, (width - 1) / 2.0],
            [0.0, f, (height - 1) / 2.0],
            [0.0, 0.0, 1.0],
        ]
    )
    return Camera(intrinsics=K, rotation=R, translation=t, width=width, height=height, name=name)
