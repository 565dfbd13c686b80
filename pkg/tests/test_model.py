import math

import numpy as np
import pytest

from matstruct.model import (
    ConstantDelay,
    HillReentry,
    HypothesisViolation,
    LinearDivision,
    LogAffineDelay,
    ModelSpec,
    PowerLawVelocity,
    Profile,
    TabulatedDelay,
    TabulatedDivision,
    TabulatedVelocity,
    build_model,
    bump_data,
    check_compatibility,
    check_delta_strict,
    constant_data,
    data_from_dict,
    example_family,
    hill,
    validation_grid,
    zero_below_data,
)

HILL = HillReentry(Profile.constant(1.0), Profile.constant(1.0), 2.0)


def test_derived_constants(ref_spec):
    assert ref_spec.tau_max == pytest.approx(1.6094379124341003, abs=1e-14)
    assert ref_spec.rho == pytest.approx(1.1, abs=1e-14)
    assert ref_spec.eta == pytest.approx(1.2, abs=1e-14)
    assert ref_spec.r == pytest.approx(1.3862943611198906, abs=1e-14)


def test_negative_tabulated_delay_rejected():
    m = np.linspace(0.0, 1.0, 11)
    with pytest.raises(HypothesisViolation) as exc:
        build_model(PowerLawVelocity(1.0, 1.0), TabulatedDelay(m, -np.ones_like(m)), LinearDivision(2.0), HILL)
    assert "tau" in exc.value.which


def test_division_ratio_below_one_rejected():
    with pytest.raises(HypothesisViolation) as exc:
        example_family(kappa=0.5)
    assert "g(m) <= m" in str(exc.value)
    assert "kappa" in str(exc.value)


def test_velocity_must_vanish_at_least_linearly():
    m = np.linspace(0.0, 1.0, 21)
    with pytest.raises(HypothesisViolation) as exc:
        build_model(TabulatedVelocity(m, np.sqrt(m)), LogAffineDelay(4.0), LinearDivision(2.0), HILL)
    assert "cover" not in str(exc.value)


def test_hill_exponent_below_one_rejected():
    with pytest.raises(HypothesisViolation):
        build_model(PowerLawVelocity(1.0, 1.0), LogAffineDelay(4.0), LinearDivision(2.0),
                    HillReentry(Profile.constant(1.0), Profile.constant(1.0), 0.5))


def test_accepted_model_invariants(ref_spec):
    m = validation_grid()
    assert np.all(ref_spec.velocity(m) > 0)
    assert np.all(ref_spec.delay(np.concatenate([[0.0], m])) > 0)
    g = ref_spec.division.g(m)
    assert np.all((g >= 0) & (g <= m))
    x = np.linspace(0.0, 10.0, 101)
    b = ref_spec.reentry(0.3, x)
    assert np.all(np.diff(b) < 0)


def test_hill_values():
    assert hill(1.0, 1.0, 2.0, 1.0) == pytest.approx(0.5)
    assert hill(2.0, 1.0, 2.0, 0.0) == 2.0
    assert hill(1.0, 1.0, 2.0, 1e200) == pytest.approx(0.0, abs=1e-300)


@pytest.mark.parametrize("kappa, alpha, holds", [(2.0, 4.0, True), (4.0, 3.0, False), (2.0, 2.0, False)])
def test_delta_strict_examples(kappa, alpha, holds):
    chk = check_delta_strict(example_family(kappa=kappa, alpha=alpha))
    assert chk.holds is holds
    if not holds:
        assert chk.witness is not None


@pytest.mark.parametrize("kappa", [1.5, 2.0, 3.0, 5.0])
@pytest.mark.parametrize("alpha", [1.2, 1.9, 2.5, 4.0, 6.0])
def test_delta_strict_matches_sign_of_alpha_minus_kappa(kappa, alpha):
    assert check_delta_strict(example_family(kappa=kappa, alpha=alpha)).holds is (alpha > kappa)


def test_compatibility_examples(ref_spec):
    c0 = check_compatibility(ref_spec, constant_data(0.0, 0.0))
    c1 = check_compatibility(ref_spec, constant_data(1.0, 0.5))
    c2 = check_compatibility(ref_spec, constant_data(1.0, 0.7))
    assert c0.compatible and c1.compatible
    assert not c2.compatible
    assert (c2.lhs, c2.rhs) == (pytest.approx(0.7), pytest.approx(0.5))


def test_serialization_round_trip_is_bit_exact():
    m = np.linspace(0.0, 1.0, 9)
    specs = [
        example_family(kappa=3.0, alpha=5.0, delta=0.3, gamma=0.4, beta0=1.5, theta=0.7, n=3.0),
        build_model(PowerLawVelocity(0.8, 2.0), ConstantDelay(0.9), TabulatedDivision(m, m / 3.0 + 0.1 * m**3 / 3.0),
                    HillReentry(Profile.tabulated(m, 1.0 + 0.2 * m), Profile.constant(1.0), 2.0),
                    delta=Profile.tabulated(m, 0.1 + m), gamma=0.2),
    ]
    for spec in specs:
        back = ModelSpec.from_dict(spec.to_dict())
        assert back.derived() == spec.derived()
        assert back.to_dict() == spec.to_dict()


def test_from_dict_rejects_unknown_family():
    d = example_family().to_dict()
    d["velocity"] = {"family": "exotic"}
    with pytest.raises(HypothesisViolation):
        ModelSpec.from_dict(d)


def test_presets_are_nonnegative_and_zero_below():
    m = np.linspace(0.0, 1.0, 401)
    z = zero_below_data(0.05)
    assert np.all(z.mu(m[m <= 0.05]) == 0.0)
    assert np.all(z.gamma(m[m <= 0.05], 0.3) == 0.0)
    b = bump_data(0.5)
    assert np.all(b.mu(m) >= 0)
    assert b.mu(0.5) == 1.0
    assert np.all(b.mu(m[np.abs(m - 0.5) >= 0.15]) == 0.0)


def test_gamma_bar_of_constant_profile(ref_spec):
    d = constant_data(1.0, 0.5)
    upper = np.array([0.5, 1.0, 1.5])
    assert d.gamma_bar(np.zeros(3), upper) == pytest.approx(0.5 * upper, rel=1e-14)


def test_negative_data_rejected(ref_spec):
    with pytest.raises(HypothesisViolation):
        constant_data(-1.0).validate(ref_spec.tau_max)


def test_data_from_dict_presets():
    assert data_from_dict({"preset": "constant", "level": 2.0}).mu(0.3) == 2.0
    s = data_from_dict({"preset": "sum", "terms": [{"preset": "constant"}, {"preset": "bump", "b": 0.5}]})
    assert s.mu(0.5) == pytest.approx(2.0)
    with pytest.raises(HypothesisViolation):
        data_from_dict({"preset": "nope"})


def test_example_family_log_affine_delay():
    spec = example_family(alpha=4.0)
    m = np.linspace(0.0, 1.0, 5)
    np.testing.assert_allclose(spec.delay(m), np.log(m + 4.0), rtol=0, atol=1e-15)
    assert spec.tau_min == pytest.approx(math.log(4.0))
