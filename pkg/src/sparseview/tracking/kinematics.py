"""Kinematic tree, axis-angle rotations and forward kinematics.

Each joint carries a rotation vector applied about its canonical
position in its parent's frame, plus one global root translation; with
all parameters zero the canonical skeleton is reproduced exactly. Joint
``j``'s world transform is ``G_j = G_parent (R(theta_j) (x - c_j) + c_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.skeleton import Skeleton3D
from ..errors import ShapeMismatchError


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrices for (..., 3) vectors."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def _rodrigues_coeffs(theta: float) -> tuple[float, float, float]:
    # sin(t)/t, (1-cos t)/t^2, (t - sin t)/t^3 with Taylor fallbacks.
    if theta < 1e-6:
        t2 = theta * theta
        return 1.0 - t2 / 6.0, 0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0
    s, c = np.sin(theta), np.cos(theta)
    return s / theta, (1.0 - c) / (theta * theta), (theta - s) / (theta**3)


def rotation_matrix(w) -> np.ndarray:
    """Rodrigues' formula; exactly the identity at w = 0."""
    w = np.asarray(w, dtype=float).reshape(3)
    theta = float(np.linalg.norm(w))
    a, b, _ = _rodrigues_coeffs(theta)
    K = skew(w)
    return np.eye(3) + a * K + b * (K @ K)


def so3_right_jacobian(w) -> np.ndarray:
    """Right Jacobian of the exponential map at w."""
    w = np.asarray(w, dtype=float).reshape(3)
    theta = float(np.linalg.norm(w))
    _, b, c = _rodrigues_coeffs(theta)
    K = skew(w)
    return np.eye(3) - b * K + c * (K @ K)


def rotate_points_jacobian(w, points: np.ndarray) -> np.ndarray:
    """d(R(w) p)/dw for a batch of points.

    Args:
        w: rotation vector (3,).
        points: (P, 3).

    Returns:
        (P, 3, 3) with column j holding the derivative w.r.t. w_j.
    """
    R = rotation_matrix(w)
    Jr = so3_right_jacobian(w)
    return np.einsum("ab,pbc,cd->pad", -R, skew(points), Jr)


def wrap_rotation_vectors(theta: np.ndarray) -> np.ndarray:
    """Re-wrap rotation vectors so every magnitude lies in [0, pi]."""
    theta = np.asarray(theta, dtype=float).reshape(-1, 3)
    mags = np.linalg.norm(theta, axis=1)
    out = theta.copy()
    for i, m in enumerate(mags):
        if m > np.pi:
            k = np.floor((m + np.pi) / (2.0 * np.pi))
            out[i] = theta[i] * ((m - 2.0 * np.pi * k) / m)
    return out


@dataclass(frozen=True)
class KinematicTree:
    """Joint hierarchy with canonical joint positions.

    ``parents[i]`` is -1 exactly once (the root); the parent links must
    form a single connected tree.
    """

    parents: tuple[int, ...]
    canonical: np.ndarray

    def __post_init__(self):
        canonical = np.asarray(self.canonical, dtype=float).reshape(-1, 3)
        object.__setattr__(self, "canonical", canonical)
        parents = tuple(int(p) for p in self.parents)
        object.__setattr__(self, "parents", parents)
        j = len(parents)
        if canonical.shape[0] != j:
            raise ShapeMismatchError("canonical joints and parents differ in length")
        roots = [i for i, p in enumerate(parents) if p == -1]
        if len(roots) != 1:
            raise ShapeMismatchError(f"tree must have exactly one root, found {len(roots)}")
        order = [roots[0]]
        placed = {roots[0]}
        pending = [i for i in range(j) if i != roots[0]]
        while pending:
            progress = [i for i in pending if parents[i] in placed]
            if not progress:
                raise ShapeMismatchError("parent links contain a cycle or dangling joint")
            for i in progress:
                order.append(i)
                placed.add(i)
            pending = [i for i in pending if i not in placed]
        object.__setattr__(self, "topo_order", tuple(order))

    @property
    def num_joints(self) -> int:
        return len(self.parents)

    @property
    def root(self) -> int:
        return self.topo_order[0]

    def chain_to_root(self, joint: int) -> list[int]:
        """Joint indices from ``joint`` up to and including the root."""
        chain = [joint]
        while self.parents[chain[-1]] != -1:
            chain.append(self.parents[chain[-1]])
        return chain


@dataclass
class KinematicParams:
    """Per-joint rotation vectors (J, 3) and a global root translation."""

    theta: np.ndarray
    root_translation: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).reshape(-1, 3)
        self.root_translation = np.asarray(self.root_translation, dtype=float).reshape(3)

    @classmethod
    def zeros(cls, num_joints: int) -> "KinematicParams":
        return cls(theta=np.zeros((num_joints, 3)), root_translation=np.zeros(3))

    @property
    def num_joints(self) -> int:
        return len(self.theta)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.theta.reshape(-1), self.root_translation])

    @classmethod
    def from_vector(cls, x: np.ndarray, num_joints: int) -> "KinematicParams":
        x = np.asarray(x, dtype=float).reshape(-1)
        return cls(theta=x[: 3 * num_joints].reshape(num_joints, 3), root_translation=x[3 * num_joints :])

    def wrapped(self) -> "KinematicParams":
        return KinematicParams(wrap_rotation_vectors(self.theta), self.root_translation.copy())


def joint_transforms(tree: KinematicTree, params: KinematicParams) -> tuple[np.ndarray, np.ndarray]:
    """World transform (R_j, t_j) per joint relative to the bind pose."""
    if params.num_joints != tree.num_joints:
        raise ShapeMismatchError("parameter count does not match the tree")
    J = tree.num_joints
    R = np.zeros((J, 3, 3))
    t = np.zeros((J, 3))
    for j in tree.topo_order:
        c = tree.canonical[j]
        Rl = rotation_matrix(params.theta[j])
        tl = c - Rl @ c
        p = tree.parents[j]
        if p == -1:
            R[j] = Rl
            t[j] = tl + params.root_translation
        else:
            R[j] = R[p] @ Rl
            t[j] = R[p] @ tl + t[p]
    return R, t


def forward_kinematics(tree: KinematicTree, params: KinematicParams) -> Skeleton3D:
    """Joint world positions; zero parameters give the canonical skeleton."""
    R, t = joint_transforms(tree, params)
    joints = np.einsum("jab,jb->ja", R, tree.canonical) + t
    return Skeleton3D(joints=joints)


def _chain_point_jacobian(
    tree: KinematicTree,
    params: KinematicParams,
    joint: int,
    points: np.ndarray,
    R_world: np.ndarray,
    out: np.ndarray,
    weights: np.ndarray | None = None,
) -> None:
    """Accumulate d(G_joint(points))/d(params) into ``out`` (P, 3, 3J+3).

    Walks the ancestor chain leaf-to-root, maintaining the running local
    point fed into each joint's rotation.
    """
    J = tree.num_joints
    local = np.asarray(points, dtype=float).copy()
    w = None if weights is None else np.asarray(weights, dtype=float)
    for i in tree.chain_to_root(joint):
        c = tree.canonical[i]
        p = tree.parents[i]
        d = rotate_points_jacobian(params.theta[i], local - c)
        if p != -1:
            d = np.einsum("ab,pbc->pac", R_world[p], d)
        if w is not None:
            d = d * w[:, None, None]
        out[:, :, 3 * i : 3 * i + 3] += d
        Rl = rotation_matrix(params.theta[i])
        local = (local - c) @ Rl.T + c
    # Root translation moves every chain rigidly.
    eye = np.eye(3)
    if w is None:
        out[:, :, 3 * J :] += eye
    else:
        out[:, :, 3 * J :] += w[:, None, None] * eye


def forward_kinematics_jacobian(tree: KinematicTree, params: KinematicParams) -> np.ndarray:
    """d(joint positions)/d(params), shape (J, 3, 3J+3)."""
    R_world, _ = joint_transforms(tree, params)
    J = tree.num_joints
    out = np.zeros((J, 3, 3 * J + 3))
    for j in range(J):
        block = np.zeros((1, 3, 3 * J + 3))
        _chain_point_jacobian(tree, params, j, tree.canonical[j][None, :], R_world, block)
        out[j] = block[0]
    return out
