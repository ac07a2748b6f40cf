"""Rotations, forward kinematics, rigging and linear blend skinning."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from conftest import four_joint_chain, make_cylinder
from oracles import fk_chain_reference, skinning_reference
from sparseview.core import Mesh, Skeleton3D
from sparseview.errors import ShapeMismatchError
from sparseview.tracking import (
    KinematicParams,
    KinematicTree,
    forward_kinematics,
    forward_kinematics_jacobian,
    lbs_deform,
    lbs_jacobian,
    rig,
    rotation_matrix,
    rotate_points_jacobian,
    wrap_rotation_vectors,
)


class TestRotations:
    def test_identity_at_zero(self):
        assert np.array_equal(rotation_matrix(np.zeros(3)), np.eye(3))

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_scipy(self, seed):
        rng = np.random.default_rng(seed)
        w = rng.standard_normal(3) * rng.uniform(1e-8, 3.0)
        assert np.abs(rotation_matrix(w) - Rotation.from_rotvec(w).as_matrix()).max() < 1e-12

    @pytest.mark.parametrize("scale", [2.0, 1e-3, 1e-9])
    def test_rotate_jacobian_matches_finite_differences(self, scale):
        rng = np.random.default_rng(5)
        w = rng.standard_normal(3) * scale
        pts = rng.standard_normal((6, 3))
        jac = rotate_points_jacobian(w, pts)
        h = 1e-6
        for j in range(3):
            wp, wm = w.copy(), w.copy()
            wp[j] += h
            wm[j] -= h
            fd = (pts @ rotation_matrix(wp).T - pts @ rotation_matrix(wm).T) / (2 * h)
            assert np.abs(jac[:, :, j] - fd).max() < 1e-7

    def test_wrap_preserves_rotation(self):
        rng = np.random.default_rng(6)
        theta = rng.standard_normal((5, 3)) * 4.0
        wrapped = wrap_rotation_vectors(theta)
        assert (np.linalg.norm(wrapped, axis=1) <= np.pi + 1e-12).all()
        for a, b in zip(theta, wrapped):
            assert np.abs(rotation_matrix(a) - rotation_matrix(b)).max() < 1e-9


class TestKinematicTree:
    def test_rejects_two_roots(self):
        with pytest.raises(ShapeMismatchError):
            KinematicTree(parents=(-1, -1), canonical=np.zeros((2, 3)))

    def test_rejects_cycle(self):
        with pytest.raises(ShapeMismatchError):
            KinematicTree(parents=(-1, 2, 1), canonical=np.zeros((3, 3)))

    def test_topological_order_root_first(self):
        tree = KinematicTree(parents=(2, 2, -1), canonical=np.zeros((3, 3)))
        assert tree.topo_order[0] == 2


class TestForwardKinematics:
    def test_zero_parameters_reproduce_canonical(self):
        tree = four_joint_chain()
        skel = forward_kinematics(tree, KinematicParams.zeros(4))
        assert np.array_equal(skel.joints, tree.canonical)

    def test_root_rotation_spins_all_joints_about_root(self):
        tree = four_joint_chain()
        theta = np.zeros((4, 3))
        theta[0, 2] = np.pi / 2
        skel = forward_kinematics(tree, KinematicParams(theta, np.zeros(3)))
        R = Rotation.from_rotvec([0, 0, np.pi / 2]).as_matrix()
        expected = (tree.canonical - tree.canonical[0]) @ R.T + tree.canonical[0]
        assert np.abs(skel.joints - expected).max() < 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_random_chain_matches_matrix_chain_oracle(self, seed):
        rng = np.random.default_rng(seed)
        tree = four_joint_chain()
        theta = rng.uniform(-np.pi, np.pi, (4, 3))
        root_t = rng.standard_normal(3)
        skel = forward_kinematics(tree, KinematicParams(theta, root_t))
        oracle = fk_chain_reference(tree.parents, tree.canonical, theta, root_t)
        assert np.abs(skel.joints - oracle).max() < 1e-12

    def test_jacobian_matches_finite_differences(self):
        rng = np.random.default_rng(9)
        tree = four_joint_chain()
        theta = rng.uniform(-1.0, 1.0, (4, 3))
        params = KinematicParams(theta, rng.standard_normal(3))
        jac = forward_kinematics_jacobian(tree, params).reshape(12, 15)
        x = params.as_vector()
        h = 1e-6
        for i in range(15):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            fp = forward_kinematics(tree, KinematicParams.from_vector(xp, 4)).joints
            fm = forward_kinematics(tree, KinematicParams.from_vector(xm, 4)).joints
            fd = ((fp - fm) / (2 * h)).reshape(12)
            assert np.abs(jac[:, i] - fd).max() < 1e-6


class TestRig:
    def test_vertex_on_bone_gets_full_weight(self):
        tree = four_joint_chain()
        mesh = Mesh(np.array([[0.0, 0.15, 0.0]]), np.zeros((0, 3), dtype=int))
        weights = rig(mesh, Skeleton3D(tree.canonical), tree)
        assert weights.entries[0] == [(0, 1.0)]

    def test_equidistant_vertex_splits_evenly(self):
        # Two bones along y; a vertex level with the shared joint is
        # equidistant from both.
        canonical = np.array([[0.0, 0.0, 0.0], [0.0, 0.3, 0.0], [0.0, 0.6, 0.0]])
        tree = KinematicTree(parents=(-1, 0, 1), canonical=canonical)
        mesh = Mesh(np.array([[0.1, 0.3, 0.0]]), np.zeros((0, 3), dtype=int))
        weights = rig(mesh, Skeleton3D(canonical), tree)
        dense = weights.dense()[0]
        assert dense[0] == pytest.approx(0.5)
        assert dense[1] == pytest.approx(0.5)

    def test_weights_sum_to_one_with_at_most_four_entries(self):
        rng = np.random.default_rng(10)
        tree = four_joint_chain()
        mesh = Mesh(rng.uniform(-0.3, 1.2, (50, 3)), np.zeros((0, 3), dtype=int))
        weights = rig(mesh, Skeleton3D(tree.canonical), tree)
        dense = weights.dense()
        assert np.abs(dense.sum(axis=1) - 1.0).max() < 1e-6
        assert max(len(e) for e in weights.entries) <= 4
        assert (dense >= 0.0).all()


class TestLbs:
    def test_bind_pose_is_bit_identical(self):
        tree = four_joint_chain()
        mesh = make_cylinder()
        weights = rig(mesh, Skeleton3D(tree.canonical), tree)
        out = lbs_deform(mesh, weights, tree, KinematicParams.zeros(4))
        assert np.array_equal(out.vertices, mesh.vertices)

    def test_full_root_weight_rotates_rigidly(self):
        tree = four_joint_chain()
        mesh = make_cylinder()
        from sparseview.tracking import SkinningWeights

        weights = SkinningWeights(entries=[[(0, 1.0)]] * mesh.num_vertices, num_joints=4)
        theta = np.zeros((4, 3))
        theta[0] = [0.3, -0.2, 0.4]
        t = np.array([0.1, 0.2, -0.3])
        out = lbs_deform(mesh, weights, tree, KinematicParams(theta, t))
        R = Rotation.from_rotvec(theta[0]).as_matrix()
        expected = (mesh.vertices - tree.canonical[0]) @ R.T + tree.canonical[0] + t
        assert np.abs(out.vertices - expected).max() < 1e-9

    @pytest.mark.parametrize("seed", range(3))
    def test_bent_cylinder_matches_skinning_oracle(self, seed):
        rng = np.random.default_rng(seed)
        canonical = np.array([[0.0, 0.0, 0.0], [0.0, 0.3, 0.0], [0.0, 0.6, 0.0]])
        tree = KinematicTree(parents=(-1, 0, 1), canonical=canonical)
        mesh = make_cylinder()
        weights = rig(mesh, Skeleton3D(canonical), tree)
        theta = np.zeros((3, 3))
        theta[1, 2] = np.pi / 2  # 90-degree bend at the middle joint
        theta[0] = rng.uniform(-0.5, 0.5, 3)
        root_t = rng.standard_normal(3) * 0.2
        out = lbs_deform(mesh, weights, tree, KinematicParams(theta, root_t))
        oracle = skinning_reference(
            mesh.vertices, weights.dense(), tree.parents, canonical, theta, root_t
        )
        assert np.abs(out.vertices - oracle).max() < 1e-9

    def test_lbs_jacobian_matches_finite_differences(self):
        rng = np.random.default_rng(12)
        tree = four_joint_chain()
        mesh = make_cylinder(n_ring=6, n_h=4, height=0.9)
        weights = rig(mesh, Skeleton3D(tree.canonical), tree)
        params = KinematicParams(rng.uniform(-0.6, 0.6, (4, 3)), rng.standard_normal(3) * 0.1)
        jac = lbs_jacobian(mesh, weights, tree, params)
        x = params.as_vector()
        h = 1e-6
        for i in range(x.size):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            vp = lbs_deform(mesh, weights, tree, KinematicParams.from_vector(xp, 4)).vertices
            vm = lbs_deform(mesh, weights, tree, KinematicParams.from_vector(xm, 4)).vertices
            fd = (vp - vm) / (2 * h)
            assert np.abs(jac[:, :, i] - fd).max() < 1e-6
