import numpy as np
import pytest

import mahf.geometry as geometry
from mahf.errors import GeometryError
from mahf.geometry import (build_frames, face_areas, knn, pca_normals,
                           vertex_areas, vertex_normals)
from mahf.io_mesh import Mesh
from mahf.synthetic import flat_grid, icosphere


def equilateral():
    return Mesh(np.array([[0.0, 0, 0], [1.0, 0, 0], [0.5, np.sqrt(3) / 2, 0]]),
                [(0, 1, 2)])


# --- vertex areas ---

def test_vertex_areas_equilateral():
    areas = vertex_areas(equilateral())
    assert np.allclose(areas, np.sqrt(3) / 12, rtol=1e-14)


def test_vertex_areas_sum_to_total(grid20, ico162):
    for mesh in (grid20, ico162):
        total = face_areas(mesh).sum()
        assert vertex_areas(mesh).sum() == pytest.approx(total, rel=1e-12)


def test_vertex_areas_degenerate_only_vertex():
    # vertex 3 is touched only by a zero-area (collinear) triangle
    verts = np.array([[0.0, 0, 0], [1.0, 0, 0], [0, 1.0, 0], [2.0, 0, 0]])
    mesh = Mesh(verts, [(0, 1, 2), (0, 1, 3)])
    with pytest.raises(GeometryError, match="vertex 3"):
        vertex_areas(mesh)


# --- mesh normals ---

def test_vertex_normals_flat_grid(grid20):
    normals = vertex_normals(grid20)
    assert np.array_equal(normals, np.tile([0.0, 0.0, 1.0], (grid20.n_vertices, 1)))


def test_vertex_normals_icosphere_radial():
    mesh = icosphere(3)
    normals = vertex_normals(mesh)
    radial = mesh.vertices / np.linalg.norm(mesh.vertices, axis=1, keepdims=True)
    angles = np.degrees(np.arccos(np.clip(np.sum(normals * radial, axis=1), -1, 1)))
    assert angles.max() < 5.0


def test_vertex_normals_opposite_windings_degenerate():
    verts = np.array([[0.0, 0, 0], [1.0, 0, 0], [0, 1.0, 0]])
    mesh = Mesh(verts, [(0, 1, 2), (0, 2, 1)])
    with pytest.raises(GeometryError, match="degenerate"):
        vertex_normals(mesh)


def test_vertex_normals_isolated_vertex():
    verts = np.array([[0.0, 0, 0], [1.0, 0, 0], [0, 1.0, 0], [5.0, 5, 5]])
    mesh = Mesh(verts, [(0, 1, 2)])
    with pytest.raises(GeometryError, match="vertex 3"):
        vertex_normals(mesh)


# --- point-cloud normals ---

def test_pca_normals_plane():
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.uniform(0, 10, 200), rng.uniform(0, 10, 200),
                           np.zeros(200)])
    normals = pca_normals(pts, 6)
    assert np.allclose(np.abs(normals[:, 2]), 1.0, atol=1e-9)
    # propagation makes the whole field agree in sign
    assert len(np.unique(np.sign(normals[:, 2]))) == 1


def test_pca_normals_sphere():
    rng = np.random.default_rng(0)
    pts = rng.standard_normal((500, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    normals = pca_normals(pts, 10)
    cos = np.sum(normals * pts, axis=1)
    angles = np.degrees(np.arccos(np.clip(cos, -1, 1)))
    assert angles.mean() < 10.0
    # globally consistent: oriented outward everywhere after propagation
    assert (cos > 0).all()


def test_pca_normals_small_k_rejected():
    pts = np.random.default_rng(1).standard_normal((20, 3))
    with pytest.raises(ValueError, match="at least 3"):
        pca_normals(pts, 2)


def test_pca_normals_duplicate_neighborhood():
    pts = np.vstack([np.zeros((5, 3)), np.eye(3)])
    with pytest.raises(GeometryError, match="distinct"):
        pca_normals(pts, 4)


# --- tangent frames ---

def test_build_frames_axis_aligned():
    frames = build_frames(np.array([[0.0, 0, 1]]))
    assert np.array_equal(frames.x_axis[0], [1, 0, 0])
    assert np.array_equal(frames.y_axis[0], [0, 1, 0])


def test_build_frames_tie_break():
    # |e_y . n| and |e_z . n| tie at zero; y wins by axis order
    frames = build_frames(np.array([[1.0, 0, 0]]))
    assert np.array_equal(frames.x_axis[0], [0, 1, 0])
    assert np.array_equal(frames.y_axis[0], [0, 0, 1])


def test_build_frames_orthonormal_property():
    rng = np.random.default_rng(42)
    n = rng.standard_normal((1000, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    frames = build_frames(n)
    for a, b in (("x_axis", "y_axis"), ("x_axis", "normals"), ("y_axis", "normals")):
        dots = np.abs(np.sum(getattr(frames, a) * getattr(frames, b), axis=1))
        assert dots.max() <= 1e-9
    for name in ("x_axis", "y_axis", "normals"):
        norms = np.linalg.norm(getattr(frames, name), axis=1)
        assert np.abs(norms - 1).max() <= 1e-9
    handed = np.cross(frames.x_axis, frames.y_axis) - frames.normals
    assert np.abs(handed).max() <= 1e-9


def test_build_frames_deterministic():
    rng = np.random.default_rng(3)
    n = rng.standard_normal((50, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    a, b = build_frames(n), build_frames(n)
    assert np.array_equal(a.x_axis, b.x_axis)
    assert np.array_equal(a.y_axis, b.y_axis)


def test_build_frames_rejects_non_unit():
    with pytest.raises(GeometryError, match="non-unit"):
        build_frames(np.array([[0.0, 0, 2.0]]))


def test_frame_field_rotated_stays_orthonormal():
    rng = np.random.default_rng(5)
    n = rng.standard_normal((100, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    rotated = build_frames(n).rotated(rng.uniform(-np.pi, np.pi, 100))
    handed = np.cross(rotated.x_axis, rotated.y_axis) - rotated.normals
    assert np.abs(handed).max() <= 1e-12


# --- k nearest neighbors ---

def test_knn_collinear():
    pts = np.array([[0.0, 0, 0], [1.0, 0, 0], [3.0, 0, 0]])
    nbrs = knn(pts, 1)
    assert nbrs.indices[:, 0].tolist() == [1, 0, 1]
    assert np.allclose(nbrs.distances[:, 0], [1, 1, 2])


def _oracle_knn(points, k):
    n = len(points)
    idx = np.empty((n, k), dtype=int)
    for i in range(n):
        d = np.linalg.norm(points - points[i], axis=1)
        d[i] = np.inf
        idx[i] = sorted(range(n), key=lambda j: (d[j], j))[:k]
    return idx


def test_knn_matches_bruteforce_oracle():
    rng = np.random.default_rng(7)
    pts = rng.uniform(0, 1, (200, 3))
    nbrs = knn(pts, 5)
    assert np.array_equal(nbrs.indices, _oracle_knn(pts, 5))
    assert (np.diff(nbrs.distances, axis=1) >= 0).all()
    assert (nbrs.indices != np.arange(200)[:, None]).all()


def test_knn_tie_break_by_lower_index():
    pts = flat_grid(5, 5, 1.0).vertices
    nbrs = knn(pts, 2)
    # grid center has four neighbors at distance 1; the two lowest indices win
    assert nbrs.indices[12].tolist() == [7, 11]


def test_knn_k_too_large():
    pts = np.random.default_rng(0).standard_normal((5, 3))
    with pytest.raises(ValueError):
        knn(pts, 5)


def test_knn_accelerated_path_matches_exact(monkeypatch):
    rng = np.random.default_rng(9)
    pts = rng.uniform(0, 1, (400, 3))
    exact = knn(pts, 6)
    monkeypatch.setattr(geometry, "_BRUTE_FORCE_LIMIT", 10)
    accelerated = knn(pts, 6)
    assert np.array_equal(exact.indices, accelerated.indices)
    assert np.array_equal(exact.distances, accelerated.distances)


def test_knn_accelerated_path_tie_break(monkeypatch):
    pts = flat_grid(6, 6, 1.0).vertices
    exact = knn(pts, 3)
    monkeypatch.setattr(geometry, "_BRUTE_FORCE_LIMIT", 10)
    accelerated = knn(pts, 3)
    assert np.array_equal(exact.indices, accelerated.indices)
