"""Novel view synthesis: integration weights, holes, determinism."""

from __future__ import annotations

import numpy as np
import pytest

from sparseview.cli.scene import SyntheticScene, ring_cameras
from sparseview.errors import ConfigurationError, ShapeMismatchError
from sparseview.ibr import SourceView, decode, integrate_features, synthesize_view
from sparseview.io.pfm import read_pfm, write_pfm
from sparseview.metrics import psnr
from sparseview.raster import render_attributes
from sparseview.recon import FeatureMap


@pytest.fixture(scope="module")
def sphere_scene():
    scene = SyntheticScene(geometry="sphere", texture="gradient", camera_count=6).build()
    mesh, cameras = scene.meshes[0], scene.cameras
    renders = [render_attributes(mesh, cam, "color") for cam in cameras]
    views = [SourceView(cam, FeatureMap(r.values)) for cam, r in zip(cameras, renders)]
    return mesh, cameras, renders, views


class TestIntegrateFeatures:
    def test_single_view_weight_cancels(self):
        feats = np.array([[0.2, 0.4, 0.8]])
        fused, total = integrate_features(feats, np.array([[0.0, 0.0, 1.0]]), [0.0, 0.6, 0.8])
        assert np.array_equal(fused, feats[0])
        assert total == pytest.approx(0.8)

    def test_equal_features_any_positive_weights(self):
        f = np.array([0.3, 0.6, 0.1])
        dirs = np.array([[0.0, 0.0, 1.0], [0.0, 0.6, 0.8]])
        fused, total = integrate_features(np.stack([f, f]), dirs, [0.0, 0.0, 1.0])
        assert fused == pytest.approx(f, abs=1e-15)
        assert total > 0

    def test_seeded_case_matches_direct_formula(self):
        rng = np.random.default_rng(0)
        feats = rng.random((3, 5))
        dirs = rng.standard_normal((3, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        novel = np.array([0.0, 0.0, 1.0])
        fused, total = integrate_features(feats, dirs, novel)
        w = np.maximum(0.0, dirs @ novel)
        expected = sum(w[k] * feats[k] for k in range(3)) / w.sum()
        assert np.abs(fused - expected).max() < 1e-12
        assert total == pytest.approx(w.sum(), abs=1e-15)

    def test_all_backfacing_views_mark_hole(self):
        feats = np.ones((2, 3))
        dirs = np.array([[0.0, 0.0, -1.0], [0.0, -0.6, -0.8]])
        fused, total = integrate_features(feats, dirs, [0.0, 0.0, 1.0])
        assert total == 0.0
        assert not fused.any()

    def test_normalized_weights_sum_to_one(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            k = int(rng.integers(1, 6))
            dirs = rng.standard_normal((k, 3))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            novel = rng.standard_normal(3)
            novel /= np.linalg.norm(novel)
            w = np.maximum(0.0, dirs @ novel)
            if w.sum() == 0.0:
                continue
            normalized = w / w.sum()
            assert abs(normalized.sum() - 1.0) < 1e-12
            assert ((normalized >= 0.0) & (normalized <= 1.0)).all()

    def test_matching_direction_gets_maximal_weight(self):
        novel = np.array([0.6, 0.0, 0.8])
        dirs = np.stack([novel, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
        w = np.maximum(0.0, dirs @ novel)
        assert w[0] == w.max()
        assert w[0] == pytest.approx(1.0)


class TestSynthesizeView:
    def test_self_reprojection_matches_source(self, sphere_scene):
        """Novel camera equals a source camera: decoded output equals that
        source render on shared covered pixels to bilinear error."""
        mesh, cameras, renders, views = sphere_scene
        out = synthesize_view(views, mesh, cameras[0])
        image = decode(out)
        gt = np.clip(renders[0].values, 0.0, 1.0)
        mask = renders[0].mask & ~out.hole_mask
        assert mask.any()
        assert np.abs(image - gt)[mask].mean() < 1.0 / 255.0

    def test_leave_one_out_psnr(self, sphere_scene):
        mesh, cameras, renders, views = sphere_scene
        out = synthesize_view(views[1:], mesh, cameras[0])
        image = decode(out)
        gt = np.clip(renders[0].values, 0.0, 1.0)
        mask = renders[0].mask & ~out.hole_mask
        assert psnr(image, gt, mask) > 30.0

    def test_opposite_single_source_is_mostly_hole(self, sphere_scene):
        mesh, cameras, _, views = sphere_scene
        out = synthesize_view([views[0]], mesh, cameras[3])
        covered = out.novel_depth.coverage()
        assert (out.hole_mask & covered).sum() / covered.sum() > 0.4

    def test_deterministic_bitwise(self, sphere_scene):
        mesh, cameras, _, views = sphere_scene
        a = synthesize_view(views, mesh, cameras[1])
        b = synthesize_view(views, mesh, cameras[1])
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.hole_mask, b.hole_mask)
        assert np.array_equal(a.visibility_count, b.visibility_count)

    def test_removing_a_source_never_shrinks_holes(self, sphere_scene):
        mesh, cameras, _, views = sphere_scene
        novel = ring_cameras(12, radius=3.0, width=256, height=256)[1]
        full = synthesize_view(views, mesh, novel)
        for drop in range(len(views)):
            reduced = synthesize_view(views[:drop] + views[drop + 1 :], mesh, novel)
            assert (full.hole_mask & ~reduced.hole_mask).sum() == 0

    def test_hole_mask_covers_missing_geometry(self, sphere_scene):
        mesh, cameras, _, views = sphere_scene
        out = synthesize_view(views, mesh, cameras[0])
        assert (out.hole_mask | out.novel_depth.coverage()).all()

    def test_empty_sources_raise(self, sphere_scene):
        mesh, cameras, _, _ = sphere_scene
        with pytest.raises(ShapeMismatchError):
            synthesize_view([], mesh, cameras[0])


class TestDecode:
    def test_clamps_rgb_channels(self, sphere_scene):
        mesh, cameras, _, views = sphere_scene
        out = synthesize_view(views, mesh, cameras[0])
        image = decode(out)
        assert image.min() >= 0.0
        assert image.max() <= 1.0

    def test_holes_take_background_exactly(self, sphere_scene):
        mesh, cameras, _, views = sphere_scene
        out = synthesize_view(views, mesh, cameras[0])
        image = decode(out, background=(0.1, 0.2, 0.3))
        holes = out.hole_mask
        assert np.array_equal(
            image[holes], np.tile(np.float32([0.1, 0.2, 0.3]), (holes.sum(), 1))
        )

    def test_channel_mismatch_raises(self, sphere_scene):
        mesh, cameras, _, _ = sphere_scene
        narrow = [
            SourceView(cam, FeatureMap(np.zeros((cam.height, cam.width, 2))))
            for cam in cameras[:2]
        ]
        out = synthesize_view(narrow, mesh, cameras[0])
        with pytest.raises(ConfigurationError):
            decode(out)

    def test_pluggable_decoder(self, sphere_scene):
        mesh, cameras, _, views = sphere_scene
        out = synthesize_view(views, mesh, cameras[0])
        flipped = decode(out, decoder=lambda f: 1.0 - np.clip(f[:, :, :3], 0, 1))
        default = decode(out)
        lit = ~out.hole_mask
        assert np.allclose(flipped[lit], 1.0 - default[lit], atol=1e-6)

    def test_pfm_round_trip_decodes_bit_identically(self, sphere_scene, tmp_path):
        mesh, cameras, _, views = sphere_scene
        out = synthesize_view(views, mesh, cameras[2])
        path = tmp_path / "features.pfm"
        write_pfm(path, out.features)
        back = read_pfm(path)
        assert np.array_equal(back, out.features)
        out_back = type(out)(
            features=back,
            hole_mask=out.hole_mask,
            visibility_count=out.visibility_count,
            novel_depth=out.novel_depth,
        )
        assert np.array_equal(decode(out_back), decode(out))
