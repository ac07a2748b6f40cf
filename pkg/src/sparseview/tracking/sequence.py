"""Whole-sequence tracking: rig once, then animate, refine and deform
every frame against its reconstruction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.mesh import Mesh
from ..core.proximity import MeshProximity
from ..core.skeleton import Skeleton3D
from ..errors import PipelineError, ShapeMismatchError
from .kinematics import KinematicParams, KinematicTree
from .registration import REG_LAMBDA_DEFAULT, nonrigid_deform, rigid_refine, solve_ik
from .skinning import SkinningWeights, lbs_deform, rig


@dataclass
class TrackedFrame:
    mesh: Mesh
    params: KinematicParams
    delta: np.ndarray
    warning: bool
    mean_distance: float


@dataclass
class TrackingResult:
    frames: list[TrackedFrame]
    weights: SkinningWeights
    canonical_index: int

    @property
    def meshes(self) -> list[Mesh]:
        return [f.mesh for f in self.frames]


def select_canonical_frame(skeletons: list[Skeleton3D]) -> int:
    """Frame whose skeleton has the largest limb separation (sum of
    pairwise joint distances over resolved joints)."""
    best, best_score = 0, -1.0
    for i, skel in enumerate(skeletons):
        joints = skel.joints[skel.resolved]
        if len(joints) < 2:
            continue
        diff = joints[:, None, :] - joints[None, :, :]
        score = float(np.linalg.norm(diff, axis=2).sum()) / 2.0
        if score > best_score:
            best, best_score = i, score
    return best


def track_sequence(
    canonical_index: int,
    recon_meshes: list[Mesh],
    skeletons: list[Skeleton3D],
    parents: list[int],
    reg_lambda: float = REG_LAMBDA_DEFAULT,
    point_to: str = "triangle",
    weights: SkinningWeights | None = None,
    **solver_options,
) -> TrackingResult:
    """Track a reconstructed sequence into a topology-consistent one.

    The canonical frame's mesh is rigged once; each frame is then solved
    as inverse kinematics onto its skeleton, refined against its
    reconstruction and non-rigidly deformed. Every output mesh shares the
    canonical connectivity. A frame whose solve diverges falls back to
    the previous frame's result and is flagged with ``warning``.
    """
    if len(recon_meshes) != len(skeletons) or not recon_meshes:
        raise ShapeMismatchError("need matching, non-empty mesh and skeleton lists")
    if not 0 <= canonical_index < len(recon_meshes):
        raise ShapeMismatchError(f"canonical index {canonical_index} out of range")

    canonical_skeleton = skeletons[canonical_index]
    canonical_mesh = recon_meshes[canonical_index]
    tree = KinematicTree(parents=tuple(parents), canonical=canonical_skeleton.joints)
    if weights is None:
        weights = rig(canonical_mesh, canonical_skeleton, tree)

    frames: list[TrackedFrame] = []
    for f, (recon, skel) in enumerate(zip(recon_meshes, skeletons)):
        try:
            params = solve_ik(canonical_skeleton, skel, tree, **solver_options)
            params = rigid_refine(
                params, canonical_mesh, weights, tree, recon, point_to=point_to, **solver_options
            )
            refined = lbs_deform(canonical_mesh, weights, tree, params)
            field, deformed = nonrigid_deform(
                refined, recon, reg_lambda=reg_lambda, point_to=point_to, **solver_options
            )
            mean_distance = float(np.mean(MeshProximity(recon).distances(deformed.vertices)))
            frames.append(TrackedFrame(deformed, params, field.delta, False, mean_distance))
        except PipelineError:
            if frames:
                prev = frames[-1]
                fallback = TrackedFrame(
                    prev.mesh.copy(), prev.params, prev.delta.copy(), True, prev.mean_distance
                )
            else:
                fallback = TrackedFrame(
                    canonical_mesh.copy(),
                    KinematicParams.zeros(tree.num_joints),
                    np.zeros_like(canonical_mesh.vertices),
                    True,
                    float("nan"),
                )
            frames.append(fallback)
    return TrackingResult(frames=frames, weights=weights, canonical_index=canonical_index)
