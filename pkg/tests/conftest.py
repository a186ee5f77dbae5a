import numpy as np
import pytest
import scipy.sparse as sp

from mahf.geometry import build_frames, vertex_normals
from mahf.io_mesh import Mesh
from mahf.laplacian import SparseOperator, cotan_operator
from mahf.synthetic import cube_surface, flat_grid, icosphere

# Desk-scale stand-ins: mesh units are millimeters, so diffusion times in the
# demonstrated 5..100 range stay in the localized regime (sqrt(2 t) is a few
# mesh cells, and t * lambda_max stays well inside the Chebyshev envelope).
GRID_SPACING = 5.0
SPHERE_RADIUS = 20.0
CUBE_EDGE = 40.0
CUBE_DIVISIONS = 12


@pytest.fixture(scope="session")
def grid20():
    return flat_grid(20, 20, GRID_SPACING)


@pytest.fixture(scope="session")
def grid20_op(grid20):
    return cotan_operator(grid20)


@pytest.fixture(scope="session")
def grid20_frames(grid20):
    return build_frames(vertex_normals(grid20))


@pytest.fixture(scope="session")
def ico162():
    return icosphere(2, SPHERE_RADIUS)


@pytest.fixture(scope="session")
def ico162_op(ico162):
    return cotan_operator(ico162)


@pytest.fixture(scope="session")
def ico162_frames(ico162):
    return build_frames(vertex_normals(ico162))


@pytest.fixture(scope="session")
def ico642():
    return icosphere(3, SPHERE_RADIUS)


@pytest.fixture(scope="session")
def ico642_op(ico642):
    return cotan_operator(ico642)


@pytest.fixture(scope="session")
def cube40():
    return cube_surface(CUBE_DIVISIONS, CUBE_EDGE)


@pytest.fixture(scope="session")
def cube40_op(cube40):
    return cotan_operator(cube40)


@pytest.fixture(scope="session")
def two_node_op():
    stiffness = sp.csr_matrix(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    return SparseOperator(stiffness, np.ones(2))


@pytest.fixture(scope="session")
def path4_op():
    # path graph on 4 nodes with unit edge weights
    w = np.zeros((4, 4))
    for i in range(3):
        w[i, i + 1] = w[i + 1, i] = 1.0
    stiffness = sp.csr_matrix(np.diag(w.sum(axis=1)) - w)
    return SparseOperator(stiffness, np.ones(4))


def dense_heat_oracle(op: SparseOperator, t: float):
    """Independent dense reference: (kernel K_t, propagator exp(-t L)).

    Uses numpy's eigensolver directly on the symmetrized operator; shares no
    code with the library's spectral module.
    """
    dense = op.stiffness.toarray()
    inv_sqrt = 1.0 / np.sqrt(op.mass)
    sym = inv_sqrt[:, None] * dense * inv_sqrt[None, :]
    w, v = np.linalg.eigh(0.5 * (sym + sym.T))
    phi = inv_sqrt[:, None] * v
    kernel = (phi * np.exp(-t * w)[None, :]) @ phi.T
    return kernel, kernel * op.mass[None, :]


def grid_columns_rows(mesh: Mesh, spacing: float = GRID_SPACING):
    cols = np.rint(mesh.vertices[:, 0] / spacing).astype(int)
    rows = np.rint(mesh.vertices[:, 1] / spacing).astype(int)
    return cols, rows


def grid_interior_mask(mesh: Mesh, margin: int = 4, spacing: float = GRID_SPACING):
    """Vertices at least ``margin`` cells away from the open grid boundary."""
    cols, rows = grid_columns_rows(mesh, spacing)
    cmax, rmax = cols.max(), rows.max()
    return ((cols >= margin) & (cols <= cmax - margin) &
            (rows >= margin) & (rows <= rmax - margin))
