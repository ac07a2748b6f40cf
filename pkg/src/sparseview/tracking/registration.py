"""Tracking energies: inverse kinematics, rigid ICP refinement and
regularized non-rigid deformation, all through the shared solver.

Nearest-neighbor correspondences are re-associated at every residual and
Jacobian evaluation and held fixed within each linearization, the usual
iterative-closest-point treatment. Data terms are squared L2 per
correspondence; the skeleton term uses a Huber reweighting (1 cm
transition) so single bad joints cannot dominate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.mesh import Mesh
from ..core.proximity import MeshProximity, VertexProximity
from ..core.skeleton import Skeleton3D
from ..errors import ConfigurationError, ShapeMismatchError
from .gauss_newton import gauss_newton
from .kinematics import (
    KinematicParams,
    KinematicTree,
    forward_kinematics,
    forward_kinematics_jacobian,
)
from .skinning import SkinningWeights, lbs_deform, lbs_jacobian

IK_HUBER_DELTA = 0.01
REG_LAMBDA_DEFAULT = 100.0


def _huber_row_weights(errors: np.ndarray, delta: float) -> np.ndarray:
    # sqrt weights turning squared residuals into the Huber objective
    w = np.ones_like(errors)
    large = errors > delta
    e = errors[large]
    w[large] = np.sqrt(delta * (2.0 * e - delta)) / e
    return w


def _proximity(mesh: Mesh, point_to: str):
    if point_to == "triangle":
        return MeshProximity(mesh)
    if point_to == "vertex":
        return VertexProximity(mesh)
    raise ConfigurationError(f"point_to must be 'triangle' or 'vertex', got {point_to!r}")


def solve_ik(
    canonical: Skeleton3D,
    target: Skeleton3D,
    tree: KinematicTree,
    huber_delta: float = IK_HUBER_DELTA,
    **solver_options,
) -> KinematicParams:
    """Kinematic parameters moving the canonical skeleton onto the target.

    Solved from zero parameters; only joints resolved in both skeletons
    contribute. Rotation vectors are re-wrapped to magnitude <= pi.
    """
    if canonical.num_joints != tree.num_joints or target.num_joints != tree.num_joints:
        raise ShapeMismatchError("skeletons do not match the kinematic tree")
    mask = canonical.resolved & target.resolved
    if not mask.any():
        raise ShapeMismatchError("no jointly resolved joints to fit")
    J = tree.num_joints
    goal = target.joints

    def residual(x):
        skel = forward_kinematics(tree, KinematicParams.from_vector(x, J))
        d = (skel.joints - goal)[mask]
        w = _huber_row_weights(np.linalg.norm(d, axis=1), huber_delta)
        return (d * w[:, None]).reshape(-1)

    def jacobian(x):
        params = KinematicParams.from_vector(x, J)
        d = (forward_kinematics(tree, params).joints - goal)[mask]
        w = _huber_row_weights(np.linalg.norm(d, axis=1), huber_delta)
        jac = forward_kinematics_jacobian(tree, params)[mask]
        return (jac * w[:, None, None]).reshape(-1, 3 * J + 3)

    result = gauss_newton(residual, KinematicParams.zeros(J).as_vector(), jacobian, **solver_options)
    return KinematicParams.from_vector(result.x, J).wrapped()


def rigid_refine(
    params0: KinematicParams,
    canonical: Mesh,
    weights: SkinningWeights,
    tree: KinematicTree,
    recon: Mesh,
    point_to: str = "triangle",
    **solver_options,
) -> KinematicParams:
    """ICP-style refinement of kinematic parameters against a per-frame
    reconstruction: every skinned vertex is pulled toward its nearest
    point on the reconstruction surface."""
    prox = _proximity(recon, point_to)
    J = tree.num_joints

    def skinned(x):
        return lbs_deform(canonical, weights, tree, KinematicParams.from_vector(x, J))

    def residual(x):
        verts = skinned(x).vertices
        _, closest, _ = prox.query(verts)
        return (verts - closest).reshape(-1)

    def jacobian(x):
        params = KinematicParams.from_vector(x, J)
        return lbs_jacobian(canonical, weights, tree, params).reshape(-1, 3 * J + 3)

    result = gauss_newton(residual, params0.as_vector(), jacobian, **solver_options)
    return KinematicParams.from_vector(result.x, J).wrapped()


@dataclass
class DeformationField:
    """Per-vertex translations recovering detail on one frame."""

    delta: np.ndarray

    def __post_init__(self):
        self.delta = np.asarray(self.delta, dtype=float).reshape(-1, 3)


def nonrigid_deform(
    refined: Mesh,
    recon: Mesh,
    reg_lambda: float = REG_LAMBDA_DEFAULT,
    point_to: str = "triangle",
    **solver_options,
) -> tuple[DeformationField, Mesh]:
    """Per-vertex displacement toward the reconstruction, regularized so
    displacements vary smoothly along edges.

    Minimizes ``sum_v |v + d_v - NN(v + d_v)|^2 +
    reg_lambda * sum_(a,b) |d_a - d_b|^2`` over the displacements ``d``.
    """
    if reg_lambda <= 0.0:
        raise ConfigurationError("reg_lambda must be positive")
    if refined.is_empty():
        raise ShapeMismatchError("refined mesh has no triangles (no edge connectivity)")
    prox = _proximity(recon, point_to)
    verts = refined.vertices
    edges = refined.edges()
    V = len(verts)
    sqrt_lambda = np.sqrt(reg_lambda)

    def residual(x):
        delta = x.reshape(V, 3)
        moved = verts + delta
        _, closest, _ = prox.query(moved)
        data = (moved - closest).reshape(-1)
        reg = sqrt_lambda * (delta[edges[:, 0]] - delta[edges[:, 1]]).reshape(-1)
        return np.concatenate([data, reg])

    # With correspondences frozen the residual is linear in delta, so the
    # Jacobian is constant: identity data rows plus the edge difference
    # operator.
    jac = np.zeros((3 * V + 3 * len(edges), 3 * V))
    jac[: 3 * V] = np.eye(3 * V)
    for e, (a, b) in enumerate(edges):
        for axis in range(3):
            row = 3 * V + 3 * e + axis
            jac[row, 3 * a + axis] = sqrt_lambda
            jac[row, 3 * b + axis] = -sqrt_lambda

    result = gauss_newton(residual, np.zeros(3 * V), lambda x: jac, **solver_options)
    field = DeformationField(result.x.reshape(V, 3))
    deformed = Mesh(
        verts + field.delta,
        refined.triangles.copy(),
        {k: a.copy() for k, a in refined.attributes.items()},
    )
    return field, deformed
