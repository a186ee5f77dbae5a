import inspect

import numpy as np
import pytest

from mahf.baselines import MhwSpec, mhw_apply, mhw_normal_variation
from mahf.io_mesh import Mesh, VertexSignal


def test_mhw_two_node_closed_form(two_node_op):
    out = mhw_apply(two_node_op, MhwSpec(0.5, 50), np.array([1.0, -1.0]))
    expected = 2.0 * np.exp(-1.0)
    assert np.allclose(out, [expected, -expected], atol=1e-9)


def test_mhw_annihilates_constants(two_node_op, ico162_op):
    for op in (two_node_op, ico162_op):
        out = mhw_apply(op, MhwSpec(10.0, 50), np.ones(op.n))
        assert np.abs(out).max() < 1e-8


def test_mhw_matches_dense_oracle(ico162_op):
    rng = np.random.default_rng(0)
    s = rng.standard_normal(ico162_op.n)
    dense = ico162_op.stiffness.toarray()
    inv = 1.0 / np.sqrt(ico162_op.mass)
    w, v = np.linalg.eigh(inv[:, None] * dense * inv[None, :])
    phi = inv[:, None] * v
    exact = (phi * (w * np.exp(-10.0 * w))[None, :]) @ (phi.T @ (ico162_op.mass * s))
    got = mhw_apply(ico162_op, MhwSpec(10.0, 50), s)
    assert np.abs(got - exact).max() < 1e-7


def test_mhw_mean_orthogonal_to_constants(path4_op):
    rng = np.random.default_rng(1)
    s = rng.standard_normal(4)
    out = mhw_apply(path4_op, MhwSpec(0.7, 50), s)
    assert abs(out.mean()) < 1e-8 * np.abs(s).max()


def test_mhw_is_isotropic_by_construction():
    # the baseline never reads tangent frames at all
    assert "frames" not in inspect.signature(mhw_apply).parameters
    assert "frames" not in inspect.signature(mhw_normal_variation).parameters


def test_mhw_normal_variation_flat_grid(grid20, grid20_op):
    mesh = Mesh(grid20.vertices, grid20.faces,
                normals=np.tile([0.0, 0.0, 1.0], (grid20.n_vertices, 1)))
    field = mhw_normal_variation(mesh, grid20_op, MhwSpec(10.0, 50))
    assert field.values.max() < 1e-10


def test_mhw_normal_variation_icosphere_uniform(ico642, ico642_op):
    field = mhw_normal_variation(ico642, ico642_op, MhwSpec(10.0, 50))
    cov = field.values.std() / field.values.mean()
    assert cov < 0.2


def test_mhw_accepts_vertex_signal(two_node_op):
    out = mhw_apply(two_node_op, MhwSpec(0.5, 30), VertexSignal([1.0, -1.0]))
    assert isinstance(out, VertexSignal)


def test_mhw_spec_validation():
    with pytest.raises(ValueError):
        MhwSpec(0.0)
    with pytest.raises(ValueError):
        MhwSpec(1.0, chebyshev_order=0)
