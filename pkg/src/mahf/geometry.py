"""Per-vertex normals, lumped areas, k-nearest neighbors and tangent frames.

All operations are pure functions of immutable inputs.  Per-vertex
accumulations run in a fixed incident-face order, so results are
deterministic regardless of threading.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import GeometryError
from .io_mesh import Mesh

_BRUTE_FORCE_LIMIT = 5000


@dataclass(frozen=True)
class LocalFrame:
    """Right-handed orthonormal triad at one vertex; normal is the z axis."""

    index: int
    normal: np.ndarray
    x_axis: np.ndarray
    y_axis: np.ndarray


class FrameField:
    """Per-vertex tangent frames stored as (N, 3) arrays."""

    def __init__(self, normals: np.ndarray, x_axis: np.ndarray, y_axis: np.ndarray):
        self.normals = np.ascontiguousarray(normals, dtype=np.float64)
        self.x_axis = np.ascontiguousarray(x_axis, dtype=np.float64)
        self.y_axis = np.ascontiguousarray(y_axis, dtype=np.float64)

    def __len__(self) -> int:
        return self.normals.shape[0]

    def __getitem__(self, i: int) -> LocalFrame:
        return LocalFrame(i, self.normals[i], self.x_axis[i], self.y_axis[i])

    def rotated(self, angles: np.ndarray) -> "FrameField":
        """New field with each tangent basis rotated about its normal."""
        phi = np.asarray(angles, dtype=np.float64).reshape(-1, 1)
        if phi.shape[0] != len(self):
            raise ValueError("one rotation angle per vertex required")
        c, s = np.cos(phi), np.sin(phi)
        return FrameField(self.normals,
                          c * self.x_axis + s * self.y_axis,
                          c * self.y_axis - s * self.x_axis)


@dataclass(frozen=True)
class NeighborList:
    """Exact k-nearest neighbors: indices and ascending distances, self excluded."""

    indices: np.ndarray    # (N, k) int
    distances: np.ndarray  # (N, k) float

    def __len__(self) -> int:
        return self.indices.shape[0]

    @property
    def k(self) -> int:
        return self.indices.shape[1]

    def neighbors(self, i: int):
        return list(zip(self.indices[i].tolist(), self.distances[i].tolist()))


def _face_cross(mesh: Mesh) -> np.ndarray:
    v, f = mesh.vertices, mesh.faces
    return np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])


def face_areas(mesh: Mesh) -> np.ndarray:
    """Triangle areas, one per face."""
    return 0.5 * np.linalg.norm(_face_cross(mesh), axis=1)


def vertex_areas(mesh: Mesh) -> np.ndarray:
    """Barycentric lumped vertex areas: one third of each incident face.

    Sums exactly to the total surface area.  Raises for vertices with no
    incident area (isolated, or touched only by degenerate faces).
    """
    if mesh.n_faces == 0:
        raise GeometryError("mesh has no faces; vertex areas are undefined")
    areas = np.zeros(mesh.n_vertices)
    third = face_areas(mesh) / 3.0
    for c in range(3):
        np.add.at(areas, mesh.faces[:, c], third)
    dead = np.flatnonzero(areas <= 0.0)
    if dead.size:
        raise GeometryError(f"vertex {int(dead[0])} has zero incident area")
    return areas


def vertex_normals(mesh: Mesh) -> np.ndarray:
    """Area-weighted average of incident face normals, normalized.

    Used as a fallback when the mesh does not carry scanned normals.
    """
    if mesh.n_faces == 0:
        raise GeometryError("mesh has no faces; use pca_normals for point clouds")
    cross = _face_cross(mesh)          # face normal scaled by twice its area
    acc = np.zeros_like(mesh.vertices)
    counts = np.zeros(mesh.n_vertices, dtype=np.int64)
    for c in range(3):
        np.add.at(acc, mesh.faces[:, c], cross)
        np.add.at(counts, mesh.faces[:, c], 1)
    isolated = np.flatnonzero(counts == 0)
    if isolated.size:
        raise GeometryError(f"vertex {int(isolated[0])} has no incident face")
    norms = np.linalg.norm(acc, axis=1)
    scale = np.linalg.norm(mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)) + 1.0
    dead = np.flatnonzero(norms <= 1e-14 * scale ** 2)
    if dead.size:
        raise GeometryError(f"degenerate normal umbrella at vertex {int(dead[0])}")
    return acc / norms[:, None]


def effective_normals(mesh: Mesh) -> np.ndarray:
    """Mesh-supplied normals when present, otherwise the face-based estimate."""
    if mesh.normals is not None:
        return mesh.normals
    return vertex_normals(mesh)


def _brute_knn(points: np.ndarray, k: int) -> NeighborList:
    n = points.shape[0]
    d2 = np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=2)
    np.fill_diagonal(d2, np.inf)
    idx = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        # lexsort: distance first, vertex index breaks ties
        order = np.lexsort((np.arange(n), d2[i]))
        idx[i] = order[:k]
    dist = np.sqrt(d2[np.arange(n)[:, None], idx])
    return NeighborList(idx, dist)


def _tree_knn(points: np.ndarray, k: int) -> NeighborList:
    n = points.shape[0]
    tree = cKDTree(points)
    # one extra candidate detects ties straddling the cut; tied rows are
    # recomputed exactly so the accelerated path matches the brute-force scan
    m = min(n, k + 2)
    dist, idx = tree.query(points, k=m)
    out_idx = np.empty((n, k), dtype=np.int64)
    out_dist = np.empty((n, k))
    scale = dist[:, -1].max() + 1.0
    for i in range(n):
        keep = idx[i] != i
        cand_i, cand_d = idx[i][keep], dist[i][keep]
        order = np.lexsort((cand_i, cand_d))
        cand_i, cand_d = cand_i[order], cand_d[order]
        boundary_tie = cand_d.shape[0] > k and cand_d[k] - cand_d[k - 1] <= 1e-12 * scale
        if cand_d.shape[0] < k or boundary_tie:
            d2 = np.sum((points - points[i]) ** 2, axis=1)
            d2[i] = np.inf
            order = np.lexsort((np.arange(n), d2))[:k]
            out_idx[i], out_dist[i] = order, np.sqrt(d2[order])
        else:
            out_idx[i], out_dist[i] = cand_i[:k], cand_d[:k]
    return NeighborList(out_idx, out_dist)


def knn(points: np.ndarray, k: int) -> NeighborList:
    """Exact k-nearest neighbors by Euclidean distance, ties broken by lower index."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = points.shape[0]
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if k >= n:
        raise ValueError(f"k={k} requires more than k points, got {n}")
    if n <= _BRUTE_FORCE_LIMIT:
        return _brute_knn(points, k)
    return _tree_knn(points, k)


def pca_normals(points: np.ndarray, k: int) -> np.ndarray:
    """Point-cloud normals from local covariance, consistently oriented.

    The normal at each point is the least-variance direction of its k
    nearest neighbors.  Signs are fixed by breadth-first propagation over
    the kNN graph from the highest point, each normal flipped to agree
    with the neighbor it was reached from.

    Parameters
    ----------
    points : (N, 3) array
    k : int
        Neighborhood size, at least 3 and less than N.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = points.shape[0]
    if k < 3:
        raise ValueError(f"k must be at least 3 for a plane fit, got {k}")
    if k >= n:
        raise ValueError(f"k={k} requires more than k points, got {n}")
    nbrs = knn(points, k)
    normals = np.empty_like(points)
    for i in range(n):
        nbr_pts = points[nbrs.indices[i]]
        if np.unique(nbr_pts, axis=0).shape[0] < 3:
            raise GeometryError(f"vertex {i} has fewer than 3 distinct neighbors")
        centered = nbr_pts - nbr_pts.mean(axis=0)
        cov = centered.T @ centered
        _w, vecs = np.linalg.eigh(cov)
        normals[i] = vecs[:, 0]

    # undirected kNN graph for the orientation sweep
    adjacency = [set() for _ in range(n)]
    for i in range(n):
        for j in nbrs.indices[i]:
            adjacency[i].add(int(j))
            adjacency[int(j)].add(i)
    visited = np.zeros(n, dtype=bool)
    by_height = np.lexsort((np.arange(n), -points[:, 2]))
    for seed in by_height:
        if visited[seed]:
            continue
        if normals[seed, 2] < 0:
            normals[seed] = -normals[seed]
        visited[seed] = True
        queue = deque([int(seed)])
        while queue:
            u = queue.popleft()
            for v in sorted(adjacency[u]):
                if visited[v]:
                    continue
                if normals[v] @ normals[u] < 0:
                    normals[v] = -normals[v]
                visited[v] = True
                queue.append(v)
    return normals


def build_frames(normals: np.ndarray) -> FrameField:
    """Deterministic tangent frames from unit normals.

    The in-plane x axis is the projection of the global coordinate axis
    least aligned with the normal (ties resolved in x, y, z order); the
    y axis completes the right-handed triad.
    """
    n = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
    norms = np.linalg.norm(n, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-6:
        bad = int(np.argmax(np.abs(norms - 1.0)))
        raise GeometryError(f"non-unit normal at vertex {bad} (norm {norms[bad]:.6g})")
    n = n / norms[:, None]
    axis_choice = np.argmin(np.abs(n), axis=1)     # argmin takes the first minimum
    a = np.eye(3)[axis_choice]
    x = a - (np.sum(a * n, axis=1))[:, None] * n
    x /= np.linalg.norm(x, axis=1)[:, None]
    y = np.cross(n, x)
    return FrameField(n, x, y)
