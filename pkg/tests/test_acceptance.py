"""Acceptance suite.

Every criterion runs at its stated tolerance and prints one PASS/FAIL
line (run with ``pytest tests/test_acceptance.py -v -s``). The whole
module targets well under five minutes on a small desktop.
"""

from __future__ import annotations

import itertools
import math
import time

import numpy as np
import pytest

from oracles import (
    attention_reference,
    dilate,
    fusion_fd_gradients,
    occlusion_visible,
)
from conftest import four_joint_chain, make_cylinder
from sparseview.cli.scene import SyntheticScene, icosphere, ring_cameras
from sparseview.core import Mesh, Skeleton2D, Skeleton3D
from sparseview.ibr import SourceView, decode, nearest_pixel_lookup, synthesize_view, visibility_test
from sparseview.metrics import chamfer, psnr, ssim
from sparseview.raster import render_attributes, render_depth
from sparseview.recon import (
    DEPTH_SCALE_LAMBDA,
    DEFAULT_SURFACE_THRESHOLD,
    FeatureMap,
    SignedDistanceHead,
    TransformerWeights,
    reconstruct,
    sphere_sdf,
    transformer_fuse,
    transformer_fuse_grad,
)
from sparseview.ibr.visibility import VISIBILITY_REL_THRESHOLD
from sparseview.tracking import (
    KinematicParams,
    REG_LAMBDA_DEFAULT,
    forward_kinematics,
    gauss_newton,
    lbs_deform,
    nonrigid_deform,
    rig,
    solve_ik,
    track_sequence,
)


def _report(name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


# ---------------------------------------------------------------------------
# Transformer fusion
# ---------------------------------------------------------------------------


def test_fusion_gradient_suite():
    """Analytic gradients vs central finite differences on 100 seeded
    shapes (N<=4, D<=8, d_k<=4): relative error < 1e-5, under 10 s."""
    started = time.perf_counter()
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 5))
        d = int(rng.integers(1, 9))
        d_k = int(rng.integers(1, 5))
        phi = rng.standard_normal((n, d))
        weights = TransformerWeights(
            w_q=rng.standard_normal((d, d_k)),
            w_k=rng.standard_normal((d, d_k)),
            w_v=rng.standard_normal((d, d_k)),
        )
        upstream = rng.standard_normal((n, d_k))
        analytic = transformer_fuse_grad(phi, weights, upstream)
        numeric = fusion_fd_gradients(
            phi, TransformerWeights, weights.w_q, weights.w_k, weights.w_v, upstream,
            transformer_fuse,
        )
        for a, f in zip(analytic, numeric):
            scale = np.maximum(np.abs(f), 1e-3)
            worst = max(worst, float((np.abs(a - f) / scale).max()))
            assert np.allclose(a, f, rtol=1e-5, atol=1e-8)
    elapsed = time.perf_counter() - started
    _report(
        "fusion gradients vs finite differences (100 shapes)",
        worst < 1e-5 and elapsed < 10.0,
        f"worst rel {worst:.2e}, {elapsed:.1f}s",
    )


def test_fusion_oracle_equivalence_and_permutations():
    """transformer_fuse matches an independent dense recomputation to
    1e-12 on 1000 seeded cases; permutation equivariance is exact for
    N <= 4."""
    worst = 0.0
    for seed in range(1000):
        rng = np.random.default_rng(10_000 + seed)
        n = int(rng.integers(1, 5))
        d = int(rng.integers(1, 9))
        d_k = int(rng.integers(1, 5))
        phi = rng.standard_normal((n, d))
        weights = TransformerWeights(
            w_q=rng.standard_normal((d, d_k)),
            w_k=rng.standard_normal((d, d_k)),
            w_v=rng.standard_normal((d, d_k)),
        )
        out = transformer_fuse(phi, weights)
        ref = attention_reference(phi, weights.w_q, weights.w_k, weights.w_v)
        worst = max(worst, float(np.abs(out - ref).max()))
        assert worst < 1e-12

    exact = True
    for n in (2, 3, 4):
        rng = np.random.default_rng(999 + n)
        phi = rng.standard_normal((n, 6))
        weights = TransformerWeights.random(6, 3, seed=n)
        base = transformer_fuse(phi, weights)
        for perm in itertools.permutations(range(n)):
            perm = list(perm)
            exact &= bool(np.array_equal(transformer_fuse(phi[perm], weights), base[perm]))
    _report(
        "fusion oracle equivalence (1000 cases) + exact permutation equivariance",
        worst < 1e-12 and exact,
        f"worst abs {worst:.2e}",
    )


# ---------------------------------------------------------------------------
# Visibility soundness
# ---------------------------------------------------------------------------


def test_visibility_soundness():
    """Depth-test visibility flags vs brute-force ray-mesh occlusion on a
    6-camera ring around a unit sphere at 256 squared: at least 99.9%
    agreement outside a 1-pixel silhouette band, within 60 s.

    The band exempts pixels within 1 px of a visibility silhouette in the
    novel image and pairs whose reprojection lands within 1 px of the
    source view's coverage silhouette; both are places where rasterized
    depth is not sub-pixel-representative of the surface. Every remaining
    disagreement must also be conservative (flag invisible where the
    oracle sees the point), never the unsound direction.
    """
    started = time.perf_counter()
    mesh = icosphere(3)
    sources = ring_cameras(6, radius=4.5, width=256, height=256, fov_deg=40.0)
    novel = ring_cameras(12, radius=4.5, width=256, height=256, fov_deg=40.0)[1]
    corners = mesh.triangle_corners()

    novel_depth = render_depth(mesh, novel)
    covered = novel_depth.coverage()
    ys, xs = np.nonzero(covered)
    pixels = np.stack([xs, ys], axis=1).astype(float)
    points = novel.unproject_pixels(pixels, novel_depth.values[ys, xs])

    total = 0
    disagreements = 0
    unsound = 0
    h, w = covered.shape
    coverage_band = dilate(covered) & dilate(~covered)
    for camera in sources:
        depth = render_depth(mesh, camera)
        sp, sd = camera.project_points(points)
        rendered, in_image = nearest_pixel_lookup(depth, sp)
        flags = visibility_test(rendered, sd, in_image, VISIBILITY_REL_THRESHOLD)

        oracle = occlusion_visible(points, camera.center(), corners)

        oracle_img = np.zeros((h, w), dtype=bool)
        oracle_img[ys, xs] = oracle
        novel_band = (dilate(oracle_img & covered) & dilate(~oracle_img & covered)) | coverage_band
        source_cov = depth.coverage()
        source_band = dilate(source_cov) & dilate(~source_cov)
        sxi = np.clip(np.floor(sp[:, 0] + 0.5).astype(int), 0, w - 1)
        syi = np.clip(np.floor(sp[:, 1] + 0.5).astype(int), 0, h - 1)
        keep = ~novel_band[ys, xs] & ~source_band[syi, sxi]

        total += int(keep.sum())
        disagreements += int((flags[keep] != oracle[keep]).sum())
        unsound += int((flags & ~oracle & keep).sum())

    agreement = 1.0 - disagreements / total
    elapsed = time.perf_counter() - started
    _report(
        "visibility flags vs ray-cast occlusion oracle",
        agreement >= 0.999 and unsound == 0 and elapsed < 60.0,
        f"{agreement * 100:.3f}% of {total} pairs, unsound {unsound}, {elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# Image-based rendering round trip
# ---------------------------------------------------------------------------


def test_ibr_round_trip():
    """Leave-one-out synthesis of a textured sphere reaches 30 dB over
    non-hole pixels; reusing a source camera as the novel view reaches
    40 dB."""
    scene = SyntheticScene(geometry="sphere", texture="gradient", camera_count=6).build()
    mesh, cameras = scene.meshes[0], scene.cameras
    renders = [render_attributes(mesh, cam, "color") for cam in cameras]
    views = [SourceView(cam, FeatureMap(r.values)) for cam, r in zip(cameras, renders)]

    held_out = synthesize_view(views[1:], mesh, cameras[0])
    image = decode(held_out)
    gt = np.clip(renders[0].values, 0.0, 1.0)
    mask = renders[0].mask & ~held_out.hole_mask
    loo_psnr = psnr(image, gt, mask)

    self_out = synthesize_view(views, mesh, cameras[0])
    self_psnr = psnr(decode(self_out), gt, renders[0].mask & ~self_out.hole_mask)

    _report(
        "IBR round trip (leave-one-out > 30 dB, self-view > 40 dB)",
        loo_psnr > 30.0 and self_psnr > 40.0,
        f"leave-one-out {loo_psnr:.1f} dB, self {self_psnr:.1f} dB",
    )


# ---------------------------------------------------------------------------
# Reconstruction oracle
# ---------------------------------------------------------------------------


def test_reconstruction_oracle():
    """Oracle-occupancy pipeline over 6 views on a 64-cell grid: Chamfer
    against the analytic sphere under half a voxel (0.0235 m for the
    [-1.5, 1.5] cube) and watertight extraction."""
    scene = SyntheticScene(geometry="sphere", camera_count=6, width=128, height=128).build()
    mesh_gt, cameras, skeleton = scene.meshes[0], scene.cameras, scene.skeletons[0]
    images = [np.clip(render_attributes(mesh_gt, cam, "color").values, 0, 1) for cam in cameras]
    skeletons2d = [
        Skeleton2D(
            positions=np.stack([cam.project(j)[0] for j in skeleton.joints]),
            confidence=np.ones(skeleton.num_joints),
        )
        for cam in cameras
    ]
    mesh = reconstruct(
        images,
        cameras,
        skeletons2d,
        TransformerWeights.random(4, 4, seed=0),
        SignedDistanceHead(sphere_sdf(radius=1.0), width=0.02),
        bounds=(np.full(3, -1.5), np.full(3, 1.5)),
        resolution=(64, 64, 64),
    )
    value = chamfer(mesh, icosphere(4), samples=50_000, seed=0)

    tri = mesh.triangles
    pairs = np.sort(
        np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]], axis=0), axis=1
    )
    _, counts = np.unique(pairs, axis=0, return_counts=True)
    watertight = bool((counts == 2).all())

    _report(
        "reconstruction oracle (Chamfer < 0.0235, watertight)",
        value < 0.0235 and watertight,
        f"chamfer {value:.5f} m, watertight={watertight}",
    )


# ---------------------------------------------------------------------------
# Tracking round trip
# ---------------------------------------------------------------------------


def test_tracking_round_trip():
    """3-frame skinned sequence on a 4-joint chain: per-frame vertex error
    under 1e-3 m, noiseless IK joint error under 1e-6 m, and the
    regularizer's stiff limit collapses displacements to one translation
    (variance < 1e-10 m^2)."""
    tree = four_joint_chain()
    # Elliptical cross-section: residual twist must be observable through
    # the surface or the round trip is ill-posed.
    mesh = make_cylinder(n_ring=10, n_h=8, radius=0.1, radius_z=0.06, height=0.9)
    weights = rig(mesh, Skeleton3D(tree.canonical), tree)

    rng = np.random.default_rng(77)
    truths = [KinematicParams.zeros(4)]
    for _ in range(2):
        theta = np.zeros((4, 3))
        for j in (1, 2):
            axis = rng.uniform(-1.0, 1.0, 3)
            axis[1] = 0.0
            axis /= np.linalg.norm(axis)
            theta[j] = axis * rng.uniform(0.2, np.pi / 3)
        truths.append(KinematicParams(theta, rng.uniform(-0.2, 0.2, 3)))
    gt_meshes = [lbs_deform(mesh, weights, tree, p) for p in truths]
    gt_skeletons = [forward_kinematics(tree, p) for p in truths]

    result = track_sequence(0, gt_meshes, gt_skeletons, parents=tree.parents)
    vertex_errors = [
        float(np.linalg.norm(t.mesh.vertices - g.vertices, axis=1).max())
        for t, g in zip(result.frames, gt_meshes)
    ]

    ik = solve_ik(Skeleton3D(tree.canonical), gt_skeletons[2], tree)
    ik_error = float(
        np.abs(forward_kinematics(tree, ik).joints - gt_skeletons[2].joints).max()
    )

    offset_target = Mesh(mesh.vertices + np.array([0.02, 0.0, 0.0]), mesh.triangles)
    field, _ = nonrigid_deform(mesh, offset_target, reg_lambda=1e8)
    variance = float(field.delta.var(axis=0).max())

    _report(
        "tracking round trip (vertex < 1e-3 m, IK < 1e-6 m, stiff-limit var < 1e-10)",
        max(vertex_errors) < 1e-3 and ik_error < 1e-6 and variance < 1e-10,
        f"vertex {max(vertex_errors):.2e} m, IK {ik_error:.2e} m, var {variance:.2e}",
    )


# ---------------------------------------------------------------------------
# Solver sanity
# ---------------------------------------------------------------------------


def test_solver_sanity():
    """Linear least squares to 1e-10 within two iterations; the
    Rosenbrock residual case to 1e-6 within 50."""
    linear_ok = True
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((int(rng.integers(4, 16)), int(rng.integers(1, 4))))
        b = rng.standard_normal(A.shape[0])
        result = gauss_newton(lambda x: A @ x - b, np.zeros(A.shape[1]), jacobian=lambda x: A)
        reference = np.linalg.lstsq(A, b, rcond=None)[0]
        err = float(np.abs(result.x - reference).max())
        worst = max(worst, err)
        linear_ok &= result.iterations <= 2 and err < 1e-10

    rosen = gauss_newton(
        lambda x: np.array([10.0 * (x[1] - x[0] ** 2), 1.0 - x[0]]), np.array([-1.2, 1.0])
    )
    rosen_ok = rosen.iterations <= 50 and np.abs(rosen.x - 1.0).max() < 1e-6

    _report(
        "solver sanity (linear <= 2 iters @1e-10, Rosenbrock @1e-6)",
        linear_ok and rosen_ok,
        f"linear worst {worst:.1e}, Rosenbrock iters {rosen.iterations}",
    )


# ---------------------------------------------------------------------------
# Metrics calibration
# ---------------------------------------------------------------------------


def test_metrics_calibration():
    """PSNR of a uniform 0.1 offset is exactly 20 dB; SSIM self-compare is
    1; Chamfer between parallel unit squares 0.1 m apart is 0.1 m."""
    value_psnr = psnr(np.zeros((8, 8, 3)), np.full((8, 8, 3), 0.1))
    psnr_ok = math.isclose(value_psnr, 20.0, abs_tol=1e-12)

    img = np.random.default_rng(0).random((32, 32))
    value_ssim = ssim(img, img)
    ssim_ok = abs(value_ssim - 1.0) < 1e-9

    square = lambda z: Mesh(
        np.array([[0, 0, z], [1, 0, z], [1, 1, z], [0, 1, z]], dtype=float),
        np.array([[0, 1, 2], [0, 2, 3]]),
    )
    value_chamfer = chamfer(square(0.0), square(0.1), samples=20_000, seed=0)
    chamfer_ok = abs(value_chamfer - 0.1) < 1e-6

    _report(
        "metrics calibration (PSNR 20 dB, SSIM 1.0, Chamfer 0.1 m)",
        psnr_ok and ssim_ok and chamfer_ok,
        f"psnr {value_psnr:.12f}, ssim {value_ssim:.10f}, chamfer {value_chamfer:.7f}",
    )


# ---------------------------------------------------------------------------
# Constant conformance
# ---------------------------------------------------------------------------


def test_constant_conformance():
    """Library defaults pin the published constants: depth scale
    4*sqrt(3), visibility threshold 0.01, deformation regularizer 100,
    extraction threshold 0.5."""
    ok = (
        DEPTH_SCALE_LAMBDA == 4.0 * math.sqrt(3.0)
        and VISIBILITY_REL_THRESHOLD == 0.01
        and REG_LAMBDA_DEFAULT == 100.0
        and DEFAULT_SURFACE_THRESHOLD == 0.5
    )
    _report(
        "constant conformance (4*sqrt(3), 0.01, 100, 0.5)",
        ok,
        f"{DEPTH_SCALE_LAMBDA:.6f}, {VISIBILITY_REL_THRESHOLD}, "
        f"{REG_LAMBDA_DEFAULT}, {DEFAULT_SURFACE_THRESHOLD}",
    )
