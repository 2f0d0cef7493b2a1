import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopfwatt.jet import VectorFieldJet, jet_from_callable, multiplicities
from hopfwatt.wgss import WgssParams, analytic_jet, equilibrium, vector_field

params_st = st.builds(
    WgssParams,
    beta=st.floats(0.1, 0.95),
    alpha=st.floats(0.1, 2.0),
    epsilon=st.floats(0.05, 1.5),
    kappa=st.floats(0.0, 0.95),
)


def field_callable(params):
    def f(s):
        return vector_field(s, params)

    return f


def test_multiplicity_counts():
    for n, r in [(3, 1), (3, 2), (3, 5), (2, 9)]:
        assert len(multiplicities(n, r)) == math.comb(n + r - 1, r)


@settings(max_examples=15, deadline=None)
@given(params_st)
def test_dense_tensors_are_symmetric(params):
    jet = analytic_jet(params, order=5)
    for r in (2, 3, 4, 5):
        T = jet.dense(r)
        for perm in itertools.islice(itertools.permutations(range(1, r + 1)), 12):
            assert np.array_equal(T, np.transpose(T, (0,) + perm))


@settings(max_examples=15, deadline=None)
@given(params_st, st.integers(0, 2**31 - 1))
def test_forms_real_on_real_and_conjugate_on_complex(params, seed):
    jet = analytic_jet(params, order=6)
    rng = np.random.default_rng(seed)
    for r in (2, 3, 6):
        real = [rng.normal(size=3) for _ in range(r)]
        assert np.allclose(jet(*real).imag, 0)
        cx = [rng.normal(size=3) + 1j * rng.normal(size=3) for _ in range(r)]
        assert np.allclose(jet(*[np.conj(v) for v in cx]), np.conj(jet(*cx)))


@settings(max_examples=15, deadline=None)
@given(params_st, st.integers(0, 2**31 - 1))
def test_forms_are_multilinear_and_symmetric(params, seed):
    jet = analytic_jet(params, order=4)
    rng = np.random.default_rng(seed)
    u, v, w, z = (rng.normal(size=3) + 1j * rng.normal(size=3) for _ in range(4))
    a, b = 0.7 - 0.2j, -1.3
    lhs = jet(a * u + b * v, w, z)
    rhs = a * jet(u, w, z) + b * jet(v, w, z)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)
    assert np.allclose(jet(u, w, z), jet(z, u, w), rtol=1e-12, atol=1e-12)


@settings(max_examples=5, deadline=None)
@given(params_st)
def test_series_jet_equals_closed_form(params):
    x0 = equilibrium(params).point
    auto = jet_from_callable(field_callable(params), x0, order=9)
    exact = analytic_jet(params, order=9)
    for r in range(1, 10):
        for alpha in multiplicities(3, r):
            assert np.allclose(auto.derivative(alpha), exact.derivative(alpha), rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("beta,alpha,kappa", [(0.5, 0.3, 0.0), (0.93593, 1.02753, 0.90164), (0.3, 1.5, 0.5)])
def test_finite_differences_agree_through_order_four(beta, alpha, kappa):
    params = WgssParams.critical(beta, alpha, kappa)
    x0 = equilibrium(params).point
    fd = jet_from_callable(field_callable(params), x0, order=4, method="finite-difference")
    exact = analytic_jet(params, order=4)
    for r in range(1, 5):
        for a in multiplicities(3, r):
            e, g = exact.derivative(a), fd.derivative(a)
            scale = max(np.max(np.abs(e)), 1.0)
            assert np.max(np.abs(e - g)) <= 1e-6 * scale, (a, e, g)


def test_finite_differences_refuse_high_orders():
    with pytest.raises(ValueError):
        jet_from_callable(lambda s: s, np.zeros(2), order=5, method="finite-difference")


def test_jet_validation_and_tensor_roundtrip(rng):
    T2 = rng.normal(size=(2, 2, 2))
    T2 = 0.5 * (T2 + T2.transpose(0, 2, 1))
    jet = VectorFieldJet.from_tensors({1: np.eye(2), 2: T2})
    assert np.allclose(jet.dense(2), T2)
    with pytest.raises(ValueError):
        VectorFieldJet(2, {(1, 1, 0): [1.0, 0.0]})
    with pytest.raises(FloatingPointError):
        VectorFieldJet(2, {(1, 0): [np.nan, 0.0]})
    assert np.allclose(jet(np.ones(2)), np.ones(2))
    with pytest.raises(ValueError):
        jet(np.ones(3))
