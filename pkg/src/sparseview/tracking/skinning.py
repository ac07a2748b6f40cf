"""Distance-based rigging and linear blend skinning.

Rigging assigns each vertex inverse-squared-distance weights over the
k = 4 nearest bone segments (a bone belongs to the joint whose rotation
moves it, i.e. the proximal joint of each parent-to-child segment).
External weights can be loaded from file instead; the scheme here only
keeps the pipeline self-contained.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.mesh import Mesh
from ..core.proximity import point_segment_distances
from ..core.skeleton import Skeleton3D
from ..errors import ShapeMismatchError
from .kinematics import KinematicParams, KinematicTree, _chain_point_jacobian, joint_transforms

RIG_NEIGHBORS = 4


@dataclass
class SkinningWeights:
    """Sparse per-vertex joint weights: at most 4 entries, summing to 1."""

    entries: list[list[tuple[int, float]]]
    num_joints: int

    def __post_init__(self):
        for i, per_vertex in enumerate(self.entries):
            if len(per_vertex) > RIG_NEIGHBORS:
                raise ShapeMismatchError(f"vertex {i}: more than {RIG_NEIGHBORS} weights")
            total = sum(w for _, w in per_vertex)
            if per_vertex and abs(total - 1.0) > 1e-6:
                raise ShapeMismatchError(f"vertex {i}: weights sum to {total}")
            if any(w < 0.0 for _, w in per_vertex):
                raise ShapeMismatchError(f"vertex {i}: negative weight")

    @property
    def num_vertices(self) -> int:
        return len(self.entries)

    def dense(self) -> np.ndarray:
        out = np.zeros((len(self.entries), self.num_joints))
        for i, per_vertex in enumerate(self.entries):
            for j, w in per_vertex:
                out[i, j] = w
        return out

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "SkinningWeights":
        dense = np.asarray(dense, dtype=float)
        entries = [
            [(int(j), float(w)) for j, w in enumerate(row) if w != 0.0] for row in dense
        ]
        return cls(entries=entries, num_joints=dense.shape[1])


def _bone_segments(tree: KinematicTree) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bone segments (start, end) and the joint index that owns each."""
    owners, starts, ends = [], [], []
    for child, parent in enumerate(tree.parents):
        if parent == -1:
            continue
        owners.append(parent)
        starts.append(tree.canonical[parent])
        ends.append(tree.canonical[child])
    if not owners:
        raise ShapeMismatchError("tree has no bones to rig against")
    return np.asarray(owners), np.asarray(starts), np.asarray(ends)


def rig(mesh: Mesh, skeleton: Skeleton3D, tree: KinematicTree, eps: float = 1e-12) -> SkinningWeights:
    """Skinning weights from inverse squared distance to nearby bones.

    A vertex lying exactly on a bone gets weight 1 on that bone's joint
    (shared equally if it touches several). Ties in the nearest-bone
    ordering break deterministically by bone index.
    """
    if skeleton.num_joints != tree.num_joints:
        raise ShapeMismatchError("skeleton does not match the kinematic tree")
    owners, seg_a, seg_b = _bone_segments(tree)
    dists = point_segment_distances(mesh.vertices, seg_a, seg_b)  # (V, B)
    k = min(RIG_NEIGHBORS, dists.shape[1])
    order = np.argsort(dists, axis=1, kind="stable")[:, :k]

    entries: list[list[tuple[int, float]]] = []
    for v in range(len(mesh.vertices)):
        nearest = order[v]
        d = dists[v, nearest]
        accum: dict[int, float] = {}
        on_bone = d <= eps
        if on_bone.any():
            touching = nearest[on_bone]
            share = 1.0 / len(touching)
            for bone in touching:
                accum[int(owners[bone])] = accum.get(int(owners[bone]), 0.0) + share
        else:
            raw = 1.0 / (d * d)
            raw /= raw.sum()
            for bone, w in zip(nearest, raw):
                accum[int(owners[bone])] = accum.get(int(owners[bone]), 0.0) + float(w)
        entries.append(sorted(accum.items()))
    return SkinningWeights(entries=entries, num_joints=tree.num_joints)


def lbs_deform(
    canonical: Mesh,
    weights: SkinningWeights,
    tree: KinematicTree,
    params: KinematicParams,
) -> Mesh:
    """Blend per-joint rigid transforms over the canonical vertices.

    Computed as a blended displacement, ``v + sum_j w_j ((R_j - I) v + t_j)``,
    so the bind pose (all parameters zero) returns vertices bit-identical
    to the canonical mesh.
    """
    if weights.num_vertices != canonical.num_vertices:
        raise ShapeMismatchError("weights do not match the canonical vertex count")
    R, t = joint_transforms(tree, params)
    W = weights.dense()
    v = canonical.vertices
    disp = np.einsum("vj,jab,vb->va", W, R - np.eye(3), v) + W @ t
    return Mesh(v + disp, canonical.triangles.copy(), {k: a.copy() for k, a in canonical.attributes.items()})


def lbs_jacobian(
    canonical: Mesh,
    weights: SkinningWeights,
    tree: KinematicTree,
    params: KinematicParams,
) -> np.ndarray:
    """d(skinned vertices)/d(params), shape (V, 3, 3J+3)."""
    R_world, _ = joint_transforms(tree, params)
    V = canonical.num_vertices
    J = tree.num_joints
    out = np.zeros((V, 3, 3 * J + 3))
    dense = weights.dense()
    verts = canonical.vertices
    for j in range(J):
        mask = dense[:, j] != 0.0
        if not mask.any():
            continue
        block = np.zeros((int(mask.sum()), 3, 3 * J + 3))
        _chain_point_jacobian(tree, params, j, verts[mask], R_world, block, weights=dense[mask, j])
        out[mask] += block
    return out
