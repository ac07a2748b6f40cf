"""Skeleton types and confidence-weighted multi-view triangulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatchError
from .camera import Camera

DEFAULT_CONFIDENCE_FLOOR = 0.3


@dataclass(frozen=True)
class JointLayout:
    """Joint naming and hierarchy for a skeleton topology.

    ``parents[i]`` is the parent joint index, -1 for the root. ``hip`` and
    ``neck`` select the joints used for depth normalization.
    """

    names: tuple[str, ...]
    parents: tuple[int, ...]
    hip: int = 0
    neck: int = 1

    def __post_init__(self):
        if len(self.names) != len(self.parents):
            raise ShapeMismatchError("joint names and parents differ in length")

    @property
    def num_joints(self) -> int:
        return len(self.names)


def _default_body_layout() -> JointLayout:
    # 25-joint humanoid used when a rig does not declare its own topology.
    spec = [
        ("pelvis", -1),
        ("spine", 0),
        ("chest", 1),
        ("neck", 2),
        ("head", 3),
        ("l_clavicle", 2),
        ("l_shoulder", 5),
        ("l_elbow", 6),
        ("l_wrist", 7),
        ("l_hand", 8),
        ("r_clavicle", 2),
        ("r_shoulder", 10),
        ("r_elbow", 11),
        ("r_wrist", 12),
        ("r_hand", 13),
        ("l_hip", 0),
        ("l_knee", 15),
        ("l_ankle", 16),
        ("l_foot", 17),
        ("l_toe", 18),
        ("r_hip", 0),
        ("r_knee", 20),
        ("r_ankle", 21),
        ("r_foot", 22),
        ("r_toe", 23),
    ]
    names = tuple(n for n, _ in spec)
    parents = tuple(p for _, p in spec)
    return JointLayout(names=names, parents=parents, hip=0, neck=3)


DEFAULT_BODY_LAYOUT = _default_body_layout()


@dataclass
class Skeleton2D:
    """Detected 2D joints for one view: positions (J, 2) and confidence (J,)."""

    positions: np.ndarray
    confidence: np.ndarray

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        self.confidence = np.asarray(self.confidence, dtype=float).reshape(-1)
        if len(self.positions) != len(self.confidence):
            raise ShapeMismatchError("positions and confidence differ in length")

    @property
    def num_joints(self) -> int:
        return len(self.positions)


@dataclass
class Skeleton3D:
    """World-space joints (J, 3).

    ``resolved`` marks joints recovered from enough views; unresolved
    joints hold zeros. ``layout`` is optional topology metadata; without
    it the hip and neck default to joints 0 and 1.
    """

    joints: np.ndarray
    resolved: np.ndarray | None = None
    layout: JointLayout | None = None

    def __post_init__(self):
        self.joints = np.asarray(self.joints, dtype=float).reshape(-1, 3)
        if self.resolved is None:
            self.resolved = np.ones(len(self.joints), dtype=bool)
        else:
            self.resolved = np.asarray(self.resolved, dtype=bool).reshape(-1)
            if len(self.resolved) != len(self.joints):
                raise ShapeMismatchError("resolved mask length mismatch")

    @property
    def num_joints(self) -> int:
        return len(self.joints)

    def hip_position(self) -> np.ndarray:
        idx = self.layout.hip if self.layout is not None else 0
        return self.joints[idx]

    def neck_position(self) -> np.ndarray:
        idx = self.layout.neck if self.layout is not None else 1
        return self.joints[idx]


def triangulate_skeleton(
    observations: list[tuple[Camera, Skeleton2D]],
    confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR,
    layout: JointLayout | None = None,
) -> Skeleton3D:
    """Recover 3D joints from per-view 2D detections.

    Each joint is solved independently as the linear least-squares
    solution of the direct-linear-transform system built from every view
    whose confidence clears ``confidence_floor``; each view's two
    equations are weighted by its confidence. Joints observed in fewer
    than two such views come back with ``resolved == False`` and zero
    coordinates rather than failing the whole frame.
    """
    if not observations:
        raise ShapeMismatchError("no observations")
    num_joints = observations[0][1].num_joints
    for _, skel in observations:
        if skel.num_joints != num_joints:
            raise ShapeMismatchError("joint count differs across views")

    projections = [cam.projection_matrix() for cam, _ in observations]
    joints = np.zeros((num_joints, 3))
    resolved = np.zeros(num_joints, dtype=bool)
    for j in range(num_joints):
        rows = []
        rhs = []
        for (cam, skel), P in zip(observations, projections):
            w = skel.confidence[j]
            if w < confidence_floor:
                continue
            u, v = skel.positions[j]
            rows.append(w * (u * P[2, :3] - P[0, :3]))
            rows.append(w * (v * P[2, :3] - P[1, :3]))
            rhs.append(-w * (u * P[2, 3] - P[0, 3]))
            rhs.append(-w * (v * P[2, 3] - P[1, 3]))
        if len(rows) < 4:  # fewer than 2 contributing views
            continue
        A = np.stack(rows)
        b = np.asarray(rhs)
        solution, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
        if rank < 3:
            continue
        joints[j] = solution
        resolved[j] = True
    return Skeleton3D(joints=joints, resolved=resolved, layout=layout)
