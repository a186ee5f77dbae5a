"""Discrete Laplace operators with an explicit mass matrix.

The mesh operator keeps the symmetric cotangent stiffness separate from the
diagonal vertex-area mass, so the action ``mass^-1 @ stiffness`` matches the
per-vertex area-normalized cotangent weights while the spectral machinery can
solve a symmetric generalized problem.  Point clouds and plain graphs use
Gaussian kNN weights with identity mass.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.io import mmwrite

from .errors import OperatorError
from .geometry import knn, vertex_areas
from .io_mesh import Mesh

_COT_CLAMP = 1e6


@dataclass
class SparseOperator:
    """Symmetric stiffness plus positive diagonal mass.

    Attributes
    ----------
    stiffness : csr_matrix
        Symmetric N x N matrix with zero row sums.
    mass : (N,) array
        Positive diagonal entries; all ones for graph operators.
    """

    stiffness: sparse.csr_matrix
    mass: np.ndarray
    _lambda_max: float | None = field(default=None, repr=False)

    def __post_init__(self):
        self.mass = np.ascontiguousarray(np.asarray(self.mass, dtype=np.float64)).reshape(-1)
        self.stiffness = sparse.csr_matrix(self.stiffness)
        if self.stiffness.shape != (self.n, self.n):
            raise ValueError("stiffness and mass sizes disagree")
        if np.any(self.mass <= 0):
            raise ValueError("mass entries must be positive")

    @property
    def n(self) -> int:
        return self.mass.shape[0]

    @property
    def lambda_max(self) -> float:
        """Cached upper bound on the largest generalized eigenvalue."""
        if self._lambda_max is None:
            self._lambda_max = estimate_lambda_max(self)
        return self._lambda_max

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Generalized Laplacian action mass^-1 (stiffness @ x); x may be (N,) or (N, m)."""
        y = self.stiffness @ x
        if y.ndim == 1:
            return y / self.mass
        return y / self.mass[:, None]

    def apply_stiffness(self, x: np.ndarray) -> np.ndarray:
        return self.stiffness @ x


def _stiffness_from_edges(n: int, edge_i: np.ndarray, edge_j: np.ndarray,
                          weights: np.ndarray) -> sparse.csr_matrix:
    """Assemble D - W from one weight per undirected edge.

    Both triangle entries of an edge receive the identical float, so the
    matrix is symmetric entry-wise by construction.
    """
    diag = np.zeros(n)
    np.add.at(diag, edge_i, weights)
    np.add.at(diag, edge_j, weights)
    rows = np.concatenate([edge_i, edge_j, np.arange(n)])
    cols = np.concatenate([edge_j, edge_i, np.arange(n)])
    vals = np.concatenate([-weights, -weights, diag])
    return sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def cotan_operator(mesh: Mesh) -> SparseOperator:
    """Cotangent stiffness with barycentric lumped mass.

    Each interior edge is weighted by half the sum of the cotangents of the
    two angles opposite it; boundary edges use their single cotangent.
    Cotangents are clamped to +-1e6 so near-degenerate slivers survive with
    a warning instead of poisoning the matrix.
    """
    if mesh.n_faces == 0:
        raise OperatorError("cotangent operator needs a triangulated mesh")
    v, f = mesh.vertices, mesh.faces
    n = mesh.n_vertices

    half_cots = []
    edges = []
    for corner in range(3):
        a = f[:, corner]
        b = f[:, (corner + 1) % 3]
        c = f[:, (corner + 2) % 3]
        u, w = v[b] - v[a], v[c] - v[a]
        cross_norm = np.linalg.norm(np.cross(u, w), axis=1)
        zero = np.flatnonzero(cross_norm == 0)
        if zero.size:
            raise OperatorError(f"face {int(zero[0])} has zero area; "
                                "cotangent weights are undefined")
        cot = np.sum(u * w, axis=1) / cross_norm
        half_cots.append(0.5 * cot)
        edges.append((b, c))

    cots = np.concatenate(half_cots)
    clipped = np.count_nonzero(np.abs(cots) > 0.5 * _COT_CLAMP)
    if clipped:
        warnings.warn(f"clamped {clipped} near-degenerate cotangent entries",
                      RuntimeWarning, stacklevel=2)
        cots = np.clip(cots, -0.5 * _COT_CLAMP, 0.5 * _COT_CLAMP)
    ei = np.concatenate([np.minimum(b, c) for b, c in edges])
    ej = np.concatenate([np.maximum(b, c) for b, c in edges])

    # one accumulated weight per undirected edge; multiplicity counts the
    # incident faces, which a manifold-ish mesh caps at two
    keys = ei.astype(np.int64) * n + ej
    uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    over = np.flatnonzero(counts > 2)
    if over.size:
        i, j = divmod(int(uniq[over[0]]), n)
        raise OperatorError(f"edge ({i}, {j}) is shared by more than two faces")
    weights = np.zeros(uniq.shape[0])
    np.add.at(weights, inverse, cots)
    if not np.all(np.isfinite(weights)):
        raise OperatorError("non-finite cotangent weight (degenerate face)")

    stiffness = _stiffness_from_edges(n, uniq // n, uniq % n, weights)
    return SparseOperator(stiffness, vertex_areas(mesh))


def gaussian_knn_operator(points: np.ndarray, k: int,
                          sigma: float | str = "auto") -> SparseOperator:
    """Graph Laplacian from Gaussian kNN weights, identity mass.

    Weights exp(-d^2 / (2 sigma^2)) over each point's k nearest neighbors,
    symmetrized by the entry-wise maximum so the kNN digraph keeps its
    connectivity.  ``sigma="auto"`` uses the mean k-th neighbor distance.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = points.shape[0]
    nbrs = knn(points, k)
    if isinstance(sigma, str):
        if sigma != "auto":
            raise ValueError(f"sigma must be positive or 'auto', got {sigma!r}")
        sigma = float(np.mean(nbrs.distances[:, -1]))
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")

    rows = np.repeat(np.arange(n), k)
    cols = nbrs.indices.reshape(-1)
    vals = np.exp(-nbrs.distances.reshape(-1) ** 2 / (2.0 * sigma ** 2))
    w = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    w_sym = w.maximum(w.T)
    deg = np.asarray(w_sym.sum(axis=1)).reshape(-1)
    stiffness = (sparse.diags(deg) - w_sym).tocsr()
    return SparseOperator(stiffness, np.ones(n))


def estimate_lambda_max(op: SparseOperator, *, tol: float = 1e-6,
                        max_iter: int = 1000) -> float:
    """Power-iteration estimate of the largest generalized eigenvalue.

    Runs on the symmetrically normalized stiffness; the returned value is
    inflated by 1.01.  The estimate is not a guaranteed upper bound; the
    polynomial approximation interval clamps around it instead.
    """
    inv_sqrt = 1.0 / np.sqrt(op.mass)
    a = sparse.diags(inv_sqrt) @ op.stiffness @ sparse.diags(inv_sqrt)
    a = a.tocsr()
    rng = np.random.default_rng(0)
    v = rng.standard_normal(op.n)
    v /= np.linalg.norm(v)
    lam = 0.0
    converged = False
    for it in range(max_iter):
        w = a @ v
        norm_w = np.linalg.norm(w)
        if norm_w < 1e-300:
            lam = 0.0
            converged = True
            break
        lam_new = float(v @ w)
        if it > 0 and abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            lam = lam_new
            converged = True
            break
        lam = lam_new
        v = w / norm_w
    if not converged:
        warnings.warn("power iteration did not converge in "
                      f"{max_iter} iterations; using the current estimate",
                      RuntimeWarning, stacklevel=2)
    return 1.01 * max(lam, 0.0)


def dump_matrix_market(op: SparseOperator, stiffness_path, mass_path=None) -> None:
    """Debug dump of the operator in Matrix Market coordinate format."""
    mmwrite(str(stiffness_path), op.stiffness.tocoo())
    if mass_path is not None:
        mmwrite(str(mass_path), op.mass.reshape(-1, 1))
