from __future__ import annotations

import math

import numpy as np
import pytest

from dwellcert.triangulation import build_fan, radial_map

from brute import boundary_faces_bruteforce, polygon_area


def grid_faces(tri):
    return {tuple(sorted(tri.vertices[v].grid for v in s.vertex_ids))
            for s in tri.simplices}


class TestRadialMap:
    def test_origin_fixed(self):
        assert np.array_equal(radial_map([0.0, 0.0]), [0.0, 0.0])

    def test_axis_point_fixed(self):
        np.testing.assert_array_equal(radial_map([1.0, 0.0]), [1.0, 0.0])

    def test_diagonal(self):
        # max-norm 1, euclid norm sqrt(2): lands at (sqrt2/2, sqrt2/2)
        out = radial_map([1.0, 1.0])
        np.testing.assert_allclose(out, [math.sqrt(2) / 2] * 2, rtol=0, atol=1e-15)
        assert abs(np.linalg.norm(out) - 1.0) < 1e-15

    def test_output_radius_is_max_norm(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            x = rng.standard_normal(3) * rng.uniform(0.1, 50)
            out = radial_map(x)
            assert abs(np.linalg.norm(out) - np.abs(x).max()) < 1e-12 * max(1, np.abs(x).max())


class TestBuildCounts:
    def test_2d_k1_against_oracle(self):
        oracle = boundary_faces_bruteforce(2, 1)
        tri = build_fan(2, 1)
        assert len(oracle) == 8
        assert tri.num_boundary_vertices == 8
        assert len(tri.simplices) == 8
        assert grid_faces(tri) == oracle

    def test_3d_k1_against_oracle(self):
        oracle = boundary_faces_bruteforce(3, 1)
        tri = build_fan(3, 1)
        assert len(oracle) == 48
        assert tri.num_boundary_vertices == 26
        assert len(tri.simplices) == 48
        assert grid_faces(tri) == oracle

    @pytest.mark.parametrize("n,K", [(2, 2), (2, 3), (3, 2), (3, 3)])
    def test_count_law_against_oracle(self, n, K):
        oracle = boundary_faces_bruteforce(n, K)
        tri = build_fan(n, K)
        expected = 8 * K if n == 2 else 48 * K * K
        assert len(tri.simplices) == expected
        assert grid_faces(tri) == oracle

    def test_2d_k5_matches_fan_of_40(self):
        tri = build_fan(2, 5)
        assert len(tri.simplices) == 40
        radii = [v.radius for v in tri.vertices[1:]]
        assert max(abs(r - 5.0) for r in radii) < 1e-12 * 5

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            build_fan(1, 3)
        with pytest.raises(ValueError):
            build_fan(2, 0)


class TestVertices:
    @pytest.mark.parametrize("n,K", [(2, 1), (2, 4), (3, 2)])
    def test_all_on_sphere(self, n, K):
        tri = build_fan(n, K)
        for v in tri.vertices[1:]:
            assert abs(v.radius - K) <= 1e-12 * K
            assert max(abs(c) for c in v.grid) == K
        assert tri.vertices[0].grid == (0,) * n
        assert tri.vertices[0].radius == 0.0

    def test_ids_dense_and_sorted(self):
        tri = build_fan(2, 3)
        assert [v.id for v in tri.vertices] == list(range(len(tri.vertices)))
        grids = [v.grid for v in tri.vertices[1:]]
        assert grids == sorted(grids)

    def test_determinism_bit_identical(self):
        a = build_fan(3, 2)
        b = build_fan(3, 2)
        assert np.array_equal(a.points, b.points)
        assert np.array_equal(a.simplex_vertex_ids, b.simplex_vertex_ids)
        assert np.array_equal(a.X_inv_all, b.X_inv_all)


class TestSimplices:
    def test_nondegenerate_and_inverse(self):
        tri = build_fan(3, 2)
        for s in tri.simplices:
            assert s.det_abs > 1e-10 * 2 ** 3
            assert np.abs(s.X_inv @ s.X - np.eye(3)).max() < 1e-9

    def test_sorted_by_vertex_ids(self):
        tri = build_fan(2, 4)
        keys = [s.vertex_ids for s in tri.simplices]
        assert keys == sorted(keys)
        assert all(0 not in k for k in keys)

    @pytest.mark.parametrize("n,K", [(2, 1), (2, 3), (3, 1), (3, 2)])
    def test_cone_measures_sum_to_hull_volume(self, n, K):
        tri = build_fan(n, K)
        total = sum(s.det_abs for s in tri.simplices) / math.factorial(n)
        if n == 2:
            hull = polygon_area(tri.points[1:])
            assert abs(total - hull) < 1e-9 * hull


class TestLocate:
    def test_vertex_gives_basis_vector(self):
        tri = build_fan(2, 2)
        v = tri.vertices[3]
        sid, lam = tri.locate(v.point)
        k = tri.simplices[sid].vertex_ids.index(v.id)
        expect = np.zeros(2)
        expect[k] = 1.0
        np.testing.assert_allclose(lam, expect, atol=1e-12)

    def test_face_barycenter(self):
        tri = build_fan(3, 2)
        s = tri.simplices[17]
        x = s.X.mean(axis=1)
        sid, lam = tri.locate(x)
        np.testing.assert_allclose(np.sort(lam), [1 / 3] * 3, atol=1e-10)

    def test_hand_computed_diagonal_point(self):
        # x=(2,2) sits on the ray through grid (1,1); the containing cone
        # found by the facet walk has vertices (1,0) and (1,1), so
        # lam = (0, 2*sqrt(2)) solves X lam = x.
        tri = build_fan(2, 1)
        sid, lam = tri.locate(np.array([2.0, 2.0]))
        ids = tri.simplices[sid].vertex_ids
        grids = [tri.vertices[i].grid for i in ids]
        assert (1, 1) in grids
        np.testing.assert_allclose(sorted(lam), [0.0, 2 * math.sqrt(2)], atol=1e-12)

    def test_rejects_origin(self):
        tri = build_fan(2, 1)
        with pytest.raises(ValueError):
            tri.locate(np.zeros(2))

    @pytest.mark.parametrize("n,K", [(2, 3), (3, 2)])
    def test_coverage_random_directions(self, n, K):
        tri = build_fan(n, K)
        rng = np.random.default_rng(42)
        X = rng.standard_normal((10_000, n))
        X = X[np.linalg.norm(X, axis=1) > 1e-6]
        sid, lam = tri.locate_many(X)
        assert lam.min() > -1e-9
        resid = np.einsum("bij,bj->bi", tri.X_all[sid], lam) - X
        assert np.abs(resid).max() < 1e-9 * K

    def test_interiors_disjoint(self):
        tri = build_fan(2, 2)
        rng = np.random.default_rng(3)
        for s in tri.simplices:
            w = rng.uniform(0.2, 1.0, tri.n)
            x = s.X @ w
            inside = 0
            for other in tri.simplices:
                lam = other.X_inv @ x
                if lam.min() > -1e-9:
                    inside += 1
                    assert other.id == s.id
            assert inside == 1

    def test_scaling_consistency(self):
        tri = build_fan(3, 2)
        rng = np.random.default_rng(11)
        X = rng.standard_normal((200, 3))
        sid1, lam1 = tri.locate_many(X)
        sid2, lam2 = tri.locate_many(3.5 * X)
        assert np.array_equal(sid1, sid2)
        np.testing.assert_allclose(lam2, 3.5 * lam1, rtol=1e-12, atol=1e-12)


def test_export_csv(tmp_path):
    tri = build_fan(2, 1)
    vp, sp = tmp_path / "v.csv", tmp_path / "s.csv"
    tri.export_csv(vp, sp)
    vlines = vp.read_text().strip().splitlines()
    slines = sp.read_text().strip().splitlines()
    assert len(vlines) == 1 + 9
    assert len(slines) == 1 + 8
    assert vlines[0] == "id,g0,g1,p0,p1"
