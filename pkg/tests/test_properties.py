"""Property-based checks over random example-family models and arguments."""
import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from matstruct.characteristics import CharTables
from matstruct.model import ModelSpec, check_delta_strict, example_family
from matstruct.solver import hermite_eval, hermite_slopes, hermite_weights

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

kappas = st.floats(1.2, 6.0)
alphas = st.floats(1.2, 8.0)
maturities = st.floats(1e-6, 1.0)
lags = st.floats(0.0, 5.0)


@st.composite
def specs(draw):
    return example_family(
        kappa=draw(kappas), alpha=draw(alphas), delta=draw(st.floats(0.0, 5.0)), gamma=draw(st.floats(0.0, 5.0)),
        beta0=draw(st.floats(0.1, 3.0)), theta=draw(st.floats(0.2, 3.0)), n=draw(st.floats(1.0, 4.0)),
    )


@SETTINGS
@given(specs(), maturities, lags, lags)
def test_chi_semigroup(spec, m, s1, s2):
    t = CharTables(spec)
    a = t.chi(-s1, t.chi(-s2, m))
    b = t.chi(-(s1 + s2), m)
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-300)


@SETTINGS
@given(specs(), maturities, lags)
def test_chi_backwards_decreases(spec, m, s):
    t = CharTables(spec)
    assert t.chi(-s, m) <= m
    assert t.chi(0.0, m) == m


@SETTINGS
@given(specs(), maturities)
def test_theta_fixed_point_and_bounds(spec, m):
    t = CharTables(spec)
    x = t.theta(m)
    assert 0.0 < x < m
    assert math.isclose(x, t.chi(-spec.delay(x), m), rel_tol=1e-10)


@SETTINGS
@given(specs(), st.lists(maturities, min_size=2, max_size=8, unique=True))
def test_h_and_theta_increasing(spec, ms):
    t = CharTables(spec)
    ms = np.sort(ms)
    assert np.all(np.diff(t.h(ms)) >= 0)
    assert np.all(np.diff(t.theta(ms)) >= 0)
    apart = np.diff(ms) > 1e-9 * ms[1:]
    assert np.all(np.diff(t.h(ms))[apart] > 0)


@SETTINGS
@given(specs(), maturities, lags)
def test_kernels_in_unit_interval(spec, m, s):
    t = CharTables(spec)
    for k in (t.kernel_K(s, m), t.kernel_H(s, m)):
        assert 0.0 < k <= 1.0


@SETTINGS
@given(kappas, alphas)
def test_delta_strict_sign(kappa, alpha):
    spec = example_family(kappa=kappa, alpha=alpha)
    if abs(alpha - kappa) < 1e-3:
        return
    assert check_delta_strict(spec).holds == (alpha > kappa)


@SETTINGS
@given(specs())
def test_serialization_round_trip(spec):
    assert ModelSpec.from_dict(spec.to_dict()).to_dict() == spec.to_dict()


@SETTINGS
@given(st.lists(st.floats(-10, 10), min_size=6, max_size=12), st.integers(0, 2**32 - 1))
def test_hermite_reproduces_nodes(values, seed):
    rng = np.random.default_rng(seed)
    u = np.cumsum(rng.uniform(0.1, 1.0, len(values)))
    v = np.asarray(values)
    left, right = hermite_slopes(v, u)
    k, w = hermite_weights(u, u)
    np.testing.assert_allclose(hermite_eval(v, left, right, k, w), v, rtol=1e-12, atol=1e-12)
