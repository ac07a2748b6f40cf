"""Iso-surface extraction: case table sanity, watertightness, sphere
accuracy against the analytic surface."""

from __future__ import annotations

import numpy as np

from sparseview.metrics import chamfer
from sparseview.cli.scene import icosphere
from sparseview.recon import DEFAULT_SURFACE_THRESHOLD, OccupancyField, extract_surface
from sparseview.recon.marching import TRIANGLE_TABLE, _EDGES


def _edge_use_counts(mesh):
    tri = mesh.triangles
    pairs = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]], axis=0)
    pairs = np.sort(pairs, axis=1)
    _, counts = np.unique(pairs, axis=0, return_counts=True)
    return counts


def _sphere_field(cells=64, extent=1.5, width=0.02):
    axis = np.linspace(-extent, extent, cells + 1)
    X, Y, Z = np.meshgrid(axis, axis, axis, indexing="ij")
    sdf = np.sqrt(X**2 + Y**2 + Z**2) - 1.0
    occ = 1.0 / (1.0 + np.exp(sdf / width))
    return OccupancyField(occ, [-extent] * 3, [extent] * 3)


class TestCaseTable:
    def test_table_covers_all_configs(self):
        assert len(TRIANGLE_TABLE) == 256
        assert TRIANGLE_TABLE[0] == ()
        assert TRIANGLE_TABLE[255] == ()
        assert all(len(case) <= 5 for case in TRIANGLE_TABLE)

    def test_every_cut_edge_is_used_exactly_once(self):
        # The triangulation's vertex set per cell is exactly the cut
        # edges; each cut edge hosts one loop vertex.
        for config in range(1, 255):
            inside = [(config >> i) & 1 for i in range(8)]
            cut = {
                e for e, (a, b) in enumerate(_EDGES) if inside[a] != inside[b]
            }
            used = {e for tri in TRIANGLE_TABLE[config] for e in tri}
            assert used == cut, f"config {config}"

    def test_single_corner_cases_make_one_triangle(self):
        for bit in range(8):
            assert len(TRIANGLE_TABLE[1 << bit]) == 1

    def test_edges_are_the_twelve_cube_edges(self):
        assert len(_EDGES) == 12
        for a, b in _EDGES:
            assert bin(a ^ b).count("1") == 1


class TestExtractSurface:
    def test_all_zero_field_gives_empty_mesh(self):
        field = OccupancyField(np.zeros((5, 5, 5)), [-1] * 3, [1] * 3)
        assert extract_surface(field).is_empty()

    def test_all_inside_field_gives_empty_mesh(self):
        field = OccupancyField(np.ones((5, 5, 5)), [-1] * 3, [1] * 3)
        assert extract_surface(field).is_empty()

    def test_threshold_default(self):
        assert DEFAULT_SURFACE_THRESHOLD == 0.5

    def test_single_interior_corner_produces_closed_cap(self):
        values = np.zeros((5, 5, 5))
        values[2, 2, 2] = 1.0
        field = OccupancyField(values, [-1] * 3, [1] * 3)
        mesh = extract_surface(field)
        assert not mesh.is_empty()
        counts = _edge_use_counts(mesh)
        assert (counts == 2).all()  # watertight around the corner cell
        # Vertices sit halfway along the cut edges around the hot corner.
        assert np.abs(np.linalg.norm(mesh.vertices, axis=1) - 0.25).max() < 1e-12

    def test_sphere_vertices_near_unit_radius(self):
        field = _sphere_field(64)
        mesh = extract_surface(field)
        voxel_diagonal = np.sqrt(3.0) * 3.0 / 64.0
        radii = np.linalg.norm(mesh.vertices, axis=1)
        assert np.abs(radii - 1.0).max() < voxel_diagonal

    def test_sphere_chamfer_below_half_voxel(self):
        field = _sphere_field(64)
        mesh = extract_surface(field)
        reference = icosphere(4)
        half_voxel = 0.5 * 3.0 / 64.0
        assert chamfer(mesh, reference, samples=20000, seed=1) < half_voxel

    def test_sphere_is_watertight(self):
        mesh = extract_surface(_sphere_field(32))
        counts = _edge_use_counts(mesh)
        assert (counts == 2).all()

    def test_sphere_normals_point_outward(self):
        mesh = extract_surface(_sphere_field(32))
        corners = mesh.triangle_corners()
        volume = np.einsum(
            "ij,ij->i", corners[:, 0], np.cross(corners[:, 1], corners[:, 2])
        ).sum() / 6.0
        assert volume > 0

    def test_extraction_is_deterministic(self):
        field = _sphere_field(16)
        a = extract_surface(field)
        b = extract_surface(field)
        assert np.array_equal(a.vertices, b.vertices)
        assert np.array_equal(a.triangles, b.triangles)

    def test_no_degenerate_triangles(self):
        mesh = extract_surface(_sphere_field(24))
        assert (mesh.triangle_areas() > 0.0).all()

    def test_random_fields_are_watertight_inside(self):
        """Noise fields whose iso-surface stays off the grid boundary
        still produce two-manifold output (the ambiguous-face rule is
        sign-consistent across neighboring cells)."""
        rng = np.random.default_rng(11)
        for _ in range(5):
            values = rng.random((7, 7, 7))
            values[0, :, :] = values[-1, :, :] = 0.0
            values[:, 0, :] = values[:, -1, :] = 0.0
            values[:, :, 0] = values[:, :, -1] = 0.0
            mesh = extract_surface(OccupancyField(values, [-1] * 3, [1] * 3))
            if mesh.is_empty():
                continue
            counts = _edge_use_counts(mesh)
            assert (counts == 2).all()
