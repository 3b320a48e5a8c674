import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from framewalk import (EulerAngles, SpectralGrid, frame_from_euler,
                       initial_profile, orthonormality_error, tangent_basis)
from framewalk.frames import SO3_GENERATORS, FrameField, random_frame


@pytest.fixture
def tiny_grid():
    return SpectralGrid((4, 4, 2), (2 * np.pi,) * 3)


def test_euler_identity(tiny_grid):
    p = frame_from_euler(EulerAngles(0.0, 0.0, 0.0), tiny_grid)
    assert np.abs(p.data - np.eye(3)).max() == 0.0


def test_euler_quarter_turn(tiny_grid):
    # direct substitution of (theta, phi, psi) = (pi/2, 0, 0)
    p = frame_from_euler(EulerAngles(np.pi / 2, 0.0, 0.0), tiny_grid)
    expected = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])
    assert np.abs(p.data - expected).max() <= 1e-15


def test_euler_random_angles_on_so3(tiny_grid, rng):
    # 1000 random triples across repeated small fields
    worst = 0.0
    for _ in range(32):
        th, ph, ps = rng.uniform(0, 2 * np.pi, size=(3,) + tiny_grid.counts)
        p = frame_from_euler(EulerAngles(th, ph, ps), tiny_grid)
        worst = max(worst, p.orthonormality_error(), p.det_error())
    assert worst <= 1e-14


def test_euler_rejects_non_finite(tiny_grid):
    with pytest.raises(ValueError, match="non-finite"):
        frame_from_euler(EulerAngles(np.nan, 0.0, 0.0), tiny_grid)


@settings(max_examples=30, deadline=None)
@given(th=st.floats(-10, 10), ph=st.floats(-10, 10), ps=st.floats(-10, 10))
def test_euler_property_so3(th, ph, ps):
    g = SpectralGrid((2, 2, 1), (1, 1, 1))
    p = frame_from_euler(EulerAngles(th, ph, ps), g)
    assert p.orthonormality_error() <= 1e-14
    assert p.det_error() <= 1e-13


def test_orthonormality_error_identity(tiny_grid):
    assert orthonormality_error(FrameField.identity(tiny_grid)) == 0.0


def test_orthonormality_error_scaled_column(tiny_grid, rng):
    p = random_frame(tiny_grid, rng)
    p.data[..., :, 0] *= 1.1
    # Gram (1,1) entry becomes 1.1^2, so the error is exactly 0.21
    assert orthonormality_error(p) == pytest.approx(0.21, abs=1e-12)


def test_frame_shape_validation(tiny_grid):
    with pytest.raises(ValueError, match="shape"):
        FrameField(tiny_grid, np.zeros((3, 3)))


def test_profile_3_3_node_values():
    g = SpectralGrid((8, 8, 1), (2, 2, 2), (-1, -1, -1))
    p = initial_profile("meridian_swirl", g)
    # x = 0 sits at index N/2; there n3 = (-sin 0, cos 0, 0)
    node = p.data[4, 4, 0]
    assert np.abs(node[:, 2] - np.array([0.0, 1.0, 0.0])).max() <= 1e-15
    assert p.orthonormality_error() <= 1e-14


def test_profile_3_4_constant_n3():
    g = SpectralGrid((10, 10, 1), (2, 2, 2), (-1, -1, -1))
    p = initial_profile("inplane_twist", g)
    n3 = p.data[..., :, 2]
    assert np.abs(n3 - np.array([0.0, 1.0, 0.0])).max() == 0.0
    assert p.orthonormality_error() <= 1e-14
    assert p.det_error() <= 1e-14


def test_profile_manufactured_t0():
    g = SpectralGrid((8, 8, 8), (2 * np.pi,) * 3)
    p = initial_profile("manufactured_t0", g)
    assert p.orthonormality_error() <= 1e-14
    assert np.abs(p.data[..., 2, 2]).max() == 0.0


def test_profile_unknown_name(tiny_grid):
    with pytest.raises(ValueError, match="unknown initial profile"):
        initial_profile("no_such_profile", tiny_grid)


def test_tangent_basis_construction(tiny_grid, rng):
    p = random_frame(tiny_grid, rng)
    V = tangent_basis(p)
    n1, n2, n3 = (p.data[..., :, j] for j in range(3))
    zero = np.zeros_like(n1)
    assert np.array_equal(V.V1, np.stack([zero, n3, -n2], axis=-1))
    assert np.array_equal(V.V2, np.stack([-n3, zero, n1], axis=-1))
    assert np.array_equal(V.V3, np.stack([n2, -n1, zero], axis=-1))


def test_tangent_basis_orthogonality(tiny_grid, rng):
    p = random_frame(tiny_grid, rng)
    Vs = list(tangent_basis(p))
    for i in range(3):
        for j in range(3):
            pair = np.einsum("...rc,...rc->...", Vs[i], Vs[j])
            expected = 2.0 if i == j else 0.0
            assert np.abs(pair - expected).max() <= 1e-14


def test_tangent_basis_equals_generator_product(tiny_grid, rng):
    p = random_frame(tiny_grid, rng)
    Vs = list(tangent_basis(p))
    for k in range(3):
        prod = np.einsum("...ij,jk->...ik", p.data, SO3_GENERATORS[k])
        assert np.abs(prod - Vs[k]).max() <= 1e-15


@settings(max_examples=25, deadline=None)
@given(w=st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)))
def test_tangency_property(w):
    # p^T (p Theta) is skew for any skew Theta and any frame p
    g = SpectralGrid((2, 2, 1), (1, 1, 1))
    rng = np.random.default_rng(abs(hash(w)) % 2**32)
    p = random_frame(g, rng)
    theta = (w[0] * SO3_GENERATORS[0] + w[1] * SO3_GENERATORS[1]
             + w[2] * SO3_GENERATORS[2])
    tangent = np.einsum("...ij,jk->...ik", p.data, theta)
    sym = np.einsum("...ji,...jk->...ik", p.data, tangent)
    assert np.abs(sym + np.swapaxes(sym, -1, -2)).max() <= 1e-14 * (1 + np.abs(w).max())


def test_random_frame_smooth_is_orthonormal(grid16, rng):
    p = random_frame(grid16, rng, max_mode=2)
    assert p.orthonormality_error() <= 1e-14
