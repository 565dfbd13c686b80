import math

import numpy as np
import pytest

from matstruct import immature as im
from matstruct.analysis import converged_limit
from matstruct.model import example_family

XI_BAR_0 = 2.0 * 4.0**-1.2


def const(v):
    return lambda a: np.full(np.shape(a), float(v))


@pytest.fixture(scope="module")
def ref_params(ref_spec, ref_tables):
    return im.ImmatureParams.from_model(ref_spec, ref_tables)


@pytest.fixture(scope="module")
def unstable_params():
    return im.ImmatureParams.from_model(example_family(kappa=4.0, alpha=4.5, delta=0.0, gamma=0.0, beta0=2.0))


def test_params_from_model(ref_params):
    assert ref_params.rho == pytest.approx(1.1)
    assert ref_params.eta == pytest.approx(1.2)
    assert ref_params.r == pytest.approx(math.log(4.0))
    assert ref_params.xi_bar0 == pytest.approx(XI_BAR_0, rel=1e-12)
    assert ref_params.pi_bar0 == pytest.approx(math.exp(-1.2 * math.log(4.0)), rel=1e-12)


def test_initial_phase_zero_data(ref_params):
    ph = im.solve_initial_phase(ref_params, 0.0, const(0.0))
    t = np.linspace(0.0, ref_params.r, 21)
    assert np.all(ph.phi(t) == 0.0)
    assert np.all(ph.psi(t) == 0.0)


def test_initial_phase_pure_decay():
    p = im.ImmatureParams(rho=1.0, eta=0.5, r=1.0, xi_bar0=0.4, pi_bar0=0.4, beta0=1e-300)
    ph = im.solve_initial_phase(p, 2.0, const(0.0))
    t = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(ph.phi(t), 2.0 * np.exp(-t), rtol=1e-7)


def test_initial_phase_nonnegative(ref_params):
    ph = im.solve_initial_phase(ref_params, 0.3, lambda a: np.sin(3.0 * np.asarray(a)) ** 2)
    t = np.linspace(0.0, ref_params.r, 101)
    assert np.all(ph.phi(t) >= 0) and np.all(ph.psi(t) >= 0)


def test_trivial_solution(ref_params):
    tr = im.simulate(ref_params, 0.0, const(0.0), 5.0 * ref_params.r)
    assert np.all(tr.x == 0.0) and np.all(tr.y == 0.0)


def test_reference_decays(ref_params):
    tr = im.simulate(ref_params, 1.0, const(0.5), 30.0 * ref_params.r)
    assert tr.x[-1] < 1e-8 * tr.x[0]
    assert np.all(tr.x >= 0) and np.all(tr.y >= 0)


def test_y_representations_agree(ref_params, unstable_params):
    for p in (ref_params, unstable_params):
        tr = im.simulate(p, 1.0, const(0.5), 10.0 * p.r)
        late = tr.t >= p.r
        np.testing.assert_allclose(tr.y[late], tr.y_ode[late], atol=1e-6, rtol=1e-6)


def _one_sided_slopes(tr, h=1e-4):
    r = tr.params.r
    left = (tr.x_at(r) - tr.x_at(r - h)) / h
    right = (tr.x_at(r + h) - tr.x_at(r)) / h
    return float(left), float(right)


def test_smooth_at_r_iff_compatible(ref_params):
    p = ref_params
    ok = im.simulate(p, 1.0, const(float(p.f(1.0))), 3.0 * p.r)
    bad = im.simulate(p, 1.0, const(0.9), 3.0 * p.r)
    assert not ok.jump_at_r and bad.jump_at_r
    l1, r1 = _one_sided_slopes(ok)
    l2, r2 = _one_sided_slopes(bad)
    assert abs(l1 - r1) < 1e-3
    assert abs((l2 - r2) - 2.0 * p.xi_bar0 * (0.9 - float(p.f(1.0)))) < 1e-3


def test_asymptotic_y_values():
    assert im.asymptotic_y(im.ImmatureParams(0.0, 0.0, 2.0, 0.4, 0.4), 0.0) == 0.0
    assert im.asymptotic_y(im.ImmatureParams(0.0, 0.0, 2.0, 0.4, 0.4), 1.0) == pytest.approx(1.0, rel=1e-14)
    assert im.asymptotic_y(im.ImmatureParams(0.0, 0.5, math.log(4.0), 0.4, 0.4), 2.0) == pytest.approx(0.4, rel=1e-14)


def test_lyapunov_values(ref_params):
    expected = 0.5 * math.log(2.0) + XI_BAR_0 * math.log(4.0) / 4.0  # 0.4779004234
    assert im.lyapunov_J(ref_params, lambda s: np.ones_like(s)) == pytest.approx(expected, rel=1e-10)
    assert im.lyapunov_J(ref_params, lambda s: np.zeros_like(s)) == 0.0
    assert im.lyapunov_rate(ref_params, 0.0) == 0.0
    u = np.linspace(0.01, 10.0, 50)
    assert np.all(im.lyapunov_rate(ref_params, u) > 0)


@pytest.mark.parametrize("n", [1.0, 2.0, 3.0])
def test_primitive_matches_quadrature(n):
    from scipy.integrate import quad

    p = im.ImmatureParams(0.5, 0.5, 1.0, 0.4, 0.4, beta0=1.3, theta=0.7, n=n)
    for x in (0.0, 0.4, 2.5):
        ref = quad(lambda s: float(p.f(s)), 0.0, x, epsabs=1e-13, epsrel=1e-13)[0]
        assert im.primitive_f(p, x) == pytest.approx(ref, rel=1e-10, abs=1e-14)


def test_lyapunov_descent(ref_params):
    tr = im.simulate(ref_params, 2.0, lambda a: 1.0 + np.cos(np.asarray(a)) ** 2, 20.0 * ref_params.r)
    _, J = im.lyapunov_series(tr)
    assert np.all(np.diff(J) <= 10.0 * im.RTOL * J[0])


def test_classify_examples(ref_params, unstable_params):
    s = im.classify_stability(ref_params)
    assert s.verdict == "GloballyStable" and s.margin == pytest.approx(1.342141716744801, rel=1e-9)
    u = im.classify_stability(unstable_params)
    assert unstable_params.xi_bar0 == pytest.approx(4.0 / 4.5, rel=1e-12)
    assert u.verdict == "Unstable" and u.margin == pytest.approx(-5.0 / 9.0, rel=1e-9)
    half = im.classify_stability(im.ImmatureParams(0.3, 0.1, 1.0, 0.5, 0.3, beta0=7.0))
    assert half.verdict == "GloballyStable" and half.margin == pytest.approx(0.3)


def test_characteristic_roots(ref_params, unstable_params):
    assert im.characteristic_root(im.ImmatureParams(0.0, 0.1, 1.0, 0.5, 0.3)).dominant_real_part == pytest.approx(0.0, abs=1e-12)
    stable = im.characteristic_root(ref_params).dominant_real_part
    unstable = im.characteristic_root(unstable_params).dominant_real_part
    assert stable == pytest.approx(-0.52683, abs=1e-5)
    assert unstable == pytest.approx(0.09272, abs=1e-5)


def test_characteristic_root_solves_equation(unstable_params):
    p = unstable_params
    res = im.characteristic_root(p)
    lam = res.real_root
    assert abs(lam + (p.rho + p.beta0) - 2.0 * p.xi_bar0 * p.beta0 * math.exp(-lam * p.r)) < 1e-10
    for z in res.complex_roots:
        assert abs(z + (p.rho + p.beta0) - 2.0 * p.xi_bar0 * p.beta0 * np.exp(-z * p.r)) < 1e-8


def test_unbounded_check_examples():
    p = im.ImmatureParams(0.0, 0.0, 1.0, 0.9, 0.5)
    assert p.x_bar == pytest.approx(1.0)
    assert not im.unbounded_scenario_check(p, 2.0, const(0.0)).applies
    p2 = im.ImmatureParams(0.1, 0.0, 1.0, 0.9, 0.5)
    chk = im.unbounded_scenario_check(p2, 2.0, const(0.4))
    assert not chk.applies and any("rho" in r for r in chk.reasons)
    assert im.unbounded_scenario_check(p, 2.0, const(0.4)).applies


def test_bounded_under_horizon_doubling(unstable_params):
    p = unstable_params
    p = im.ImmatureParams(**{**p.__dict__, "rho": 0.2})
    tr = im.simulate(p, 1.0, const(0.5), 160.0 * p.r)
    s1 = tr.x[tr.t <= 80.0 * p.r].max()
    assert tr.x.max() == pytest.approx(s1, rel=1e-3)


@pytest.mark.parametrize("eta", [0.0, 0.3])
def test_y_limit(eta):
    p = im.ImmatureParams(rho=0.2, eta=eta, r=1.0, xi_bar0=0.9, pi_bar0=math.exp(-eta), beta0=1.0)
    tr = im.simulate(p, 1.0, const(0.5), 200.0)
    C = converged_limit(tr)
    assert C == pytest.approx(math.sqrt(3.0), rel=1e-6)
    assert abs(tr.y[-1] - im.asymptotic_y(p, C)) <= 1e-6
    if eta == 0.0:
        assert abs(tr.y[-1] - p.r * float(p.beta(C)) * C) <= 1e-6


def test_dense_and_sampled_agree(ref_params):
    tr = im.simulate(ref_params, 1.0, const(0.5), 6.0 * ref_params.r)
    mid = 0.5 * (tr.t[1:] + tr.t[:-1])
    np.testing.assert_allclose(tr.interpolate(mid), tr.x_at(mid), atol=1e-6)
