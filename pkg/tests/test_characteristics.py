import math

import numpy as np
import pytest

from matstruct.characteristics import CharTables, DomainError
from matstruct.model import (
    ConstantDelay,
    HillReentry,
    LinearDivision,
    LogAffineDelay,
    PowerLawVelocity,
    Profile,
    TabulatedVelocity,
    build_model,
    example_family,
    validation_grid,
)

HILL = HillReentry(Profile.constant(1.0), Profile.constant(1.0), 2.0)

# frozen closed-form values for kappa=2, alpha=4, gamma=0.2
THETA_1 = (math.sqrt(20.0) - 4.0) / 2.0  # 0.2360679775
THETA_HALF = (math.sqrt(18.0) - 4.0) / 2.0  # 0.1213203436
XI_BAR_0 = 2.0 * 4.0**-1.2  # 0.3789291416
T_BAR = math.log(20.0) + 5.0 * math.log(5.0)  # 11.0429218357
T_FULL = 6.0 * math.log(5.0) - math.log(0.025)  # 13.3455069287


def test_h_values(ref_tables):
    assert ref_tables.h(0.25) == pytest.approx(0.25, abs=1e-15)
    assert ref_tables.h(1.0) == 1.0
    assert ref_tables.h(0.0) == 0.0


def test_chi_values(ref_tables):
    assert ref_tables.chi(-1.0, 0.5) == pytest.approx(0.18393972058572117, abs=1e-14)
    assert ref_tables.chi(0.0, 0.3) == pytest.approx(0.3, abs=1e-15)
    assert ref_tables.chi(-2.0, 0.0) == 0.0


def test_theta_values(ref_tables):
    assert ref_tables.theta(1.0) == pytest.approx(THETA_1, abs=1e-12)
    assert ref_tables.theta(0.5) == pytest.approx(THETA_HALF, abs=1e-12)


def test_theta_constant_delay():
    spec = build_model(PowerLawVelocity(1.0, 1.0), ConstantDelay(0.7), LinearDivision(2.0), HILL)
    m = np.linspace(0.05, 1.0, 20)
    np.testing.assert_allclose(CharTables(spec).theta(m), m * math.exp(-0.7), rtol=1e-12)


def test_delta_values(ref_tables):
    assert ref_tables.delta(0.5) == pytest.approx(THETA_1, abs=1e-12)
    assert ref_tables.delta(0.75) == pytest.approx(THETA_1, abs=1e-12)
    assert ref_tables.delta_inv(0.1) == pytest.approx(0.205, abs=1e-12)
    with pytest.raises(DomainError):
        ref_tables.delta_inv(0.3)


def test_kernels(ref_tables):
    assert ref_tables.kernel_K(1.3, 0.4) == pytest.approx(math.exp(-1.1 * 1.3), rel=1e-12)
    assert ref_tables.kernel_K(0.0, 0.4) == 1.0
    assert ref_tables.kernel_H(2.0, 0.5) == pytest.approx(0.0907179532894125, rel=1e-12)


def test_rates(ref_tables):
    assert ref_tables.xi_bar(0.0) == pytest.approx(XI_BAR_0, rel=1e-12)
    assert ref_tables.xi(0.1, 0.6) == 0.0
    assert ref_tables.pi(0.0, 0.3) == pytest.approx(1.0, abs=1e-15)


def test_schedule_reference(ref_tables):
    sc = ref_tables.schedule(0.05)
    assert sc.N == 3
    np.testing.assert_allclose(sc.b_seq[:4], [0.025, 0.0503125, 0.101890673828125, 0.20897220236282477], rtol=1e-12)
    assert sc.b_seq[-1] == 0.5
    assert sc.b_seq[sc.N] < ref_tables.theta1 <= sc.b_seq[sc.N + 1] <= 0.5
    assert sc.t_bar == pytest.approx(T_BAR, abs=1e-12)
    assert sc.t_full == pytest.approx(T_FULL, abs=1e-12)


def test_schedule_reproduces_formula(ref_tables, ref_spec):
    for b in (0.01, 0.05, 0.2, 0.45):
        sc = ref_tables.schedule(b)
        g1 = ref_spec.division.g1
        t_bar = math.log(ref_tables.h(g1) / ref_tables.h(sc.b_seq[0])) + (sc.N + 2) * ref_spec.tau_max
        assert sc.t_bar == t_bar
        assert np.all(np.diff(sc.b_seq) > 0)
        assert sc.t_full - sc.t_bar == pytest.approx(ref_spec.tau_max - math.log(ref_tables.h(g1)), abs=1e-13)


def test_schedule_large_b_uses_zero_index(ref_tables):
    sc = ref_tables.schedule(0.8)
    assert sc.N == 0
    assert sc.b_seq == (0.4, 0.5)


def test_schedule_requires_delta_strict():
    with pytest.raises(DomainError):
        CharTables(example_family(kappa=4.0, alpha=3.0)).schedule(0.05)


def test_closed_forms_on_validation_grid(ref_tables):
    m = validation_grid()
    np.testing.assert_allclose(ref_tables.h(m), m, atol=1e-8, rtol=0)
    np.testing.assert_allclose(ref_tables.theta(m), 0.5 * (np.sqrt(16.0 + 4.0 * m) - 4.0), atol=1e-8, rtol=0)
    md = m[m <= 0.5]
    np.testing.assert_allclose(ref_tables.delta(md), 0.5 * (np.sqrt(8.0 * md + 16.0) - 4.0), atol=1e-8, rtol=0)


def test_theta_fixed_point_residual(ref_tables, ref_spec):
    m = validation_grid(n=256)
    th = ref_tables.theta(m)
    res = th - ref_tables.chi(-ref_spec.delay(th), m)
    assert np.max(np.abs(res)) <= ref_tables.root_tol
    assert np.all((th > 0) & (th < m))


def test_monotonicity(ref_tables):
    m = validation_grid(n=512)
    assert np.all(np.diff(ref_tables.h(m)) > 0)
    assert np.all(np.diff(ref_tables.theta(m)) > 0)
    below = m[m < 0.5]
    assert np.all(np.diff(ref_tables.delta(below)) > 0)
    assert np.all(np.diff(ref_tables.chi(-0.7, m)) > 0)
    assert np.all(ref_tables.theta(m) <= ref_tables.delta(m))


def test_kernel_bounds(ref_tables):
    for t in (0.0, 0.3, 1.0, 1.6):
        for m in (0.0, 0.1, 0.5, 1.0):
            k = ref_tables.kernel_K(t, m)
            hh = ref_tables.kernel_H(t, m)
            assert 0 < k <= 1 and 0 < hh <= 1


def test_power_law_above_one():
    """V(m) = m^2: log h(m) = 1 - 1/m, so h(m) = exp(1 - 1/m)."""
    spec = build_model(PowerLawVelocity(1.0, 2.0), LogAffineDelay(4.0), LinearDivision(2.0), HILL)
    t = CharTables(spec)
    m = np.array([0.1, 0.25, 0.5, 0.9, 1.0])
    np.testing.assert_allclose(t.h(m), np.exp(1.0 - 1.0 / m), rtol=1e-13)
    np.testing.assert_allclose(t.h_inv(t.h(m)), m, rtol=1e-12)


def test_tabulated_velocity_matches_closed_form():
    """A tabulated V(m) = m uses the quadrature table and must reproduce h(m) = m."""
    grid = np.linspace(0.0, 1.0, 65)
    spec = build_model(TabulatedVelocity(grid, grid), LogAffineDelay(4.0), LinearDivision(2.0), HILL)
    t = CharTables(spec)
    m = np.linspace(0.01, 1.0, 50)
    np.testing.assert_allclose(t.h(m), m, rtol=1e-6)
    np.testing.assert_allclose(t.theta(m), 0.5 * (np.sqrt(16.0 + 4.0 * m) - 4.0), rtol=1e-6)
