import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from htype.errors import QuadratureError
from htype.quadrature import (
    GAUSS_WEIGHTS,
    KRONROD_NODES,
    KRONROD_WEIGHTS,
    circle_trapezoid,
    gauss_kronrod,
)


def test_gauss_subrule_is_legendre():
    x, w = np.polynomial.legendre.leggauss(10)
    mask = GAUSS_WEIGHTS > 0
    np.testing.assert_allclose(KRONROD_NODES[mask], x, atol=1e-15)
    np.testing.assert_allclose(GAUSS_WEIGHTS[mask], w, atol=1e-15)
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)


@pytest.mark.parametrize("k", range(0, 32))
def test_kronrod_exact_for_degree_31(k):
    exact = 0.0 if k % 2 else 2.0 / (k + 1)
    assert KRONROD_WEIGHTS @ KRONROD_NODES ** k == pytest.approx(exact, abs=2e-15)


def test_vector_components_share_mesh():
    res = gauss_kronrod(lambda x: np.stack([np.sin(x), np.exp(-x * x)]), 0.0, 10.0,
                        rel_tol=1e-13, abs_tol=1e-15)
    assert res.converged
    np.testing.assert_allclose(res.value, [1 - math.cos(10.0), 0.5 * math.sqrt(math.pi) * math.erf(10.0)],
                               rtol=1e-13)
    assert res.error.shape == (2,)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 40.0))
def test_oscillatory(w):
    res = gauss_kronrod(lambda x: np.cos(w * x), 0.0, 3.0, rel_tol=1e-12, abs_tol=1e-14,
                        breakpoints=np.arange(1, 40) * math.pi / w)
    assert res.value[0] == pytest.approx(math.sin(3 * w) / w, abs=1e-12)


def test_deterministic():
    f = lambda x: np.sqrt(np.abs(x - 0.3))
    a = gauss_kronrod(f, 0.0, 1.0, rel_tol=1e-10)
    b = gauss_kronrod(f, 0.0, 1.0, rel_tol=1e-10)
    assert a.value[0] == b.value[0] and a.intervals == b.intervals


def test_failure_raises_with_partial_value():
    with pytest.raises(QuadratureError) as info:
        gauss_kronrod(lambda x: np.sin(1.0 / x), 1e-9, 1.0, rel_tol=1e-14, abs_tol=1e-30, max_subdivisions=8)
    assert info.value.value is not None
    res = gauss_kronrod(lambda x: np.sin(1.0 / x), 1e-9, 1.0, rel_tol=1e-14, abs_tol=1e-30,
                        max_subdivisions=8, raise_on_failure=False)
    assert not res.converged


def test_roundoff_limited_stop():
    # tolerance far below double precision: stops on the roundoff floor
    res = gauss_kronrod(lambda x: np.exp(x), 0.0, 1.0, rel_tol=1e-30, abs_tol=1e-40)
    assert res.roundoff_limited and res.converged
    assert res.value[0] == pytest.approx(math.e - 1.0, rel=1e-15)


def test_circle_trapezoid_residue():
    val, err, n = circle_trapezoid(lambda w: 1.0 / (w - 0.5j) + w ** 3, 0.5j, 0.7)
    assert val[0] == pytest.approx(2j * math.pi, abs=1e-13)
    val, err, n = circle_trapezoid(lambda w: np.exp(w) / w ** 3, 0.0, 1.0)
    assert val[0] == pytest.approx(1j * math.pi, abs=1e-13)
    assert err[0] < 1e-12
