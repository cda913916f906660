import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from htype.clifford import build_structure, j_map
from htype.errors import DomainError
from htype.group import (
    GroupPoint,
    bracket,
    dilate,
    jz_identities,
    multiply,
    radial_subgradient,
)

DIMS = [(1, 1), (2, 1), (2, 3), (4, 5)]
seeds = st.integers(0, 2**32 - 1)


def random_point(rng, s, scale=1.0):
    return GroupPoint(scale * rng.standard_normal(2 * s.n), scale * rng.standard_normal(s.m))


def close(g, h, tol=1e-12):
    return np.allclose(g.x, h.x, atol=tol) and np.allclose(g.z, h.z, atol=tol)


def test_bracket_examples():
    s = build_structure(1, 1)
    e1, e2 = np.eye(2)
    assert bracket(s, e1, e2)[0] == 1.0
    assert bracket(s, e1, e1)[0] == 0.0
    with pytest.raises(ValueError):
        bracket(s, np.ones(3), e1)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(DIMS), seeds)
def test_bracket_properties(dims, seed):
    s = build_structure(*dims)
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, 2 * s.n))
    z = rng.standard_normal(s.m)
    np.testing.assert_allclose(bracket(s, x, y), -bracket(s, y, x), atol=1e-13)
    np.testing.assert_allclose(bracket(s, x, j_map(s, z) @ x), (x @ x) * z, atol=1e-12 * (1 + x @ x) * (1 + np.abs(z).max()))


@pytest.mark.parametrize("dims", DIMS)
def test_bracket_spans_center(dims):
    s = build_structure(*dims)
    rng = np.random.default_rng(0)
    B = np.array([bracket(s, *rng.standard_normal((2, 2 * s.n))) for _ in range(3 * s.m)]).T
    assert np.linalg.matrix_rank(B) == s.m


def test_identity_inverse_noncommutative():
    s = build_structure(1, 1)
    g = GroupPoint([0.3, -1.2], [0.7])
    assert close(multiply(s, g, GroupPoint.origin(1, 1)), g)
    assert close(multiply(s, g, g.inverse()), GroupPoint.origin(1, 1))
    e1 = GroupPoint([1.0, 0.0], [0.0])
    e2 = GroupPoint([0.0, 1.0], [0.0])
    h = multiply(s, multiply(s, e1, e2), e1.inverse())
    assert not close(h, e2)


def test_shape_mismatch():
    s = build_structure(2, 1)
    with pytest.raises(ValueError):
        multiply(s, GroupPoint([1.0, 0.0], [0.0]), GroupPoint.origin(2, 1))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(DIMS), seeds, st.floats(-5, 5).filter(lambda a: abs(a) > 1e-3), st.floats(-5, 5).filter(lambda a: abs(a) > 1e-3))
def test_group_laws(dims, seed, a, b):
    s = build_structure(*dims)
    rng = np.random.default_rng(seed)
    g, h, k = (random_point(rng, s) for _ in range(3))
    assert close(multiply(s, multiply(s, g, h), k), multiply(s, g, multiply(s, h, k)))
    assert close(dilate(multiply(s, g, h), a), multiply(s, dilate(g, a), dilate(h, a)), 1e-11)
    assert close(dilate(dilate(g, a), b), dilate(g, a * b), 1e-11)


def test_dilate_examples():
    g = GroupPoint([1.0, 2.0], [3.0])
    assert close(dilate(g, 1.0), g)
    h = dilate(g, -1.0)
    np.testing.assert_array_equal(h.x, -g.x)
    np.testing.assert_array_equal(h.z, g.z)
    with pytest.raises(DomainError):
        dilate(g, 0.0)


def test_radial_subgradient_examples():
    s = build_structure(2, 3)
    g = GroupPoint([2.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0])
    np.testing.assert_allclose(radial_subgradient(1.5, 0.0, g, s), [1.5, 0, 0, 0])
    v = radial_subgradient(0.0, 1.0, g, s)
    assert np.linalg.norm(v) == pytest.approx(1.0)
    assert v @ g.x == pytest.approx(0.0, abs=1e-15)


def test_radial_subgradient_degenerate():
    s = build_structure(1, 1)
    zero_x = GroupPoint([0.0, 0.0], [1.0])
    assert not radial_subgradient(0.0, 2.0, zero_x, s).any()
    with pytest.raises(DomainError):
        radial_subgradient(1.0, 0.0, zero_x, s)
    zero_z = GroupPoint([1.0, 1.0], [0.0])
    np.testing.assert_allclose(radial_subgradient(2.0, 0.0, zero_z, s), np.sqrt(2.0) * np.ones(2))
    with pytest.raises(DomainError):
        radial_subgradient(0.0, 1.0, zero_z, s)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(DIMS), seeds, st.floats(-10, 10), st.floats(-10, 10))
def test_radial_subgradient_norm(dims, seed, fr, fs):
    s = build_structure(*dims)
    g = random_point(np.random.default_rng(seed), s)
    v = radial_subgradient(fr, fs, g, s)
    expect = np.sqrt(fr ** 2 + 0.25 * fs ** 2 * g.x_norm ** 2)
    assert np.linalg.norm(v) == pytest.approx(expect, rel=1e-12, abs=1e-12)


def test_jz_identities_small():
    errs = jz_identities(build_structure(4, 7), samples=20)
    assert set(errs) == {"skew", "orthogonal", "square", "anticommute", "inner_product", "bracket"}
    assert max(errs.values()) < 1e-13
