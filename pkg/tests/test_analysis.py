import math

import numpy as np
import pytest

from matstruct import analysis
from matstruct.model import bump_data, constant_data, example_family, zero_below_data


def test_local_criterion_reference(ref_spec):
    lc = analysis.local_criterion(ref_spec)
    assert lc.sup_xi == pytest.approx(2.0, rel=1e-12)
    assert lc.lhs == pytest.approx(5.0, rel=1e-12)
    assert lc.rhs == pytest.approx(1.1, rel=1e-12)
    assert not lc.holds


@pytest.mark.parametrize("kappa", [1.5, 2.0, 3.0])
def test_local_criterion_family_bound(kappa):
    spec = example_family(kappa=kappa, alpha=4.0, delta=0.5, gamma=0.0)
    lc = analysis.local_criterion(spec)
    assert lc.lhs == pytest.approx(1.0 + 2.0 * kappa, rel=1e-12)
    assert lc.rhs == pytest.approx(1.0, rel=1e-12)
    positive_gamma = analysis.local_criterion(example_family(kappa=kappa, alpha=4.0, delta=0.5, gamma=0.4))
    assert positive_gamma.lhs <= 1.0 + 2.0 * kappa + 1e-12


def test_local_criterion_vanishing_reentry():
    lc = analysis.local_criterion(example_family(beta0=1e-300))
    assert lc.lhs < 1e-250 and lc.holds


@pytest.mark.parametrize(
    "kw, verdict",
    [
        (dict(delta=6.0, gamma=6.0), "GloballyExpStable"),
        (dict(kappa=4.0, alpha=4.5, delta=0.0, gamma=0.0, beta0=2.0), "Unstable"),
        (dict(), "ImmatureStableOnly"),
    ],
)
def test_classify_examples(kw, verdict):
    rep = analysis.classify(example_family(**kw), b=0.05)
    assert rep.verdict == verdict
    d = rep.to_dict()
    assert d["verdict"] == verdict
    if verdict == "GloballyExpStable":
        assert (rep.local.lhs, rep.local.rhs) == (pytest.approx(5.0), pytest.approx(7.0))
        assert d["schedule"]["N"] == 3
    if verdict == "Unstable":
        assert rep.immature["margin"] == pytest.approx(-5.0 / 9.0, rel=1e-9)
        assert rep.immature["dominant_root"] > 0
    if verdict == "ImmatureStableOnly":
        assert rep.immature["margin"] == pytest.approx(1.342141716744801, rel=1e-9)
    assert verdict in rep.summary()


def test_combine_logic():
    assert analysis.combine(True, True, -1.0) == "GloballyExpStable"
    assert analysis.combine(False, True, -0.1) == "Unstable"
    assert analysis.combine(True, False, 0.0) == "Unstable"
    assert analysis.combine(False, False, 0.5) == "ImmatureStableOnly"
    assert analysis.combine(True, False, 0.5) == "Indeterminate"


@pytest.mark.parametrize("scale", [1.0, 0.5, 0.1, 0.01])
def test_classify_monotone_in_beta0(scale):
    base = analysis.classify(example_family(delta=6.0, gamma=6.0))
    scaled = analysis.classify(example_family(delta=6.0, gamma=6.0, beta0=scale))
    assert base.verdict == "GloballyExpStable"
    assert scaled.verdict == "GloballyExpStable"


def test_classify_simulated_immature():
    rep = analysis.classify(example_family(delta=6.0, gamma=6.0), simulate_immature=True)
    assert rep.simulation["x_final_ratio"] < 1e-4
    assert not rep.simulation["x_persists"]


def test_dependence_identical_data(ref_spec, ref_tables):
    out = analysis.dependence_experiment(ref_spec, constant_data(), constant_data(), 0.05, T=4.0, M=32, tables=ref_tables)
    assert np.all(out.diff_all == 0.0) and np.all(out.diff_P_all == 0.0)
    assert out.exact_below_gb


def test_dependence_precondition(ref_spec, ref_tables):
    with pytest.raises(analysis.PreconditionViolated):
        analysis.dependence_experiment(ref_spec, constant_data(), constant_data(2.0), 0.05, M=32, tables=ref_tables)


def test_dependence_negative_control(ref_spec, ref_tables):
    """Before t_bar the runs may differ above g(b); the exact check below g(b) still holds."""
    d1, d2 = constant_data(), constant_data() + zero_below_data(0.05, 0.7)
    out = analysis.dependence_experiment(ref_spec, d1, d2, 0.05, T=6.0, M=32, tables=ref_tables)
    assert out.exact_below_gb
    assert out.diff_all.max() > 0.0


def test_extinction_zero_data(ref_spec, ref_tables):
    out = analysis.extinction_experiment(ref_spec, 0.05, constant_data(0.0, 0.0), T=1.0, M=32, tables=ref_tables)
    assert out.extinct_by == 0.0 and out.passed


def test_extinction_large_b_uses_zero_index(ref_spec, ref_tables):
    out = analysis.extinction_experiment(ref_spec, 0.8, bump_data(0.9, width=0.08), M=64, tables=ref_tables)
    sc = ref_tables.schedule(0.8)
    assert sc.N == 0
    assert out.predicted == pytest.approx(3 * ref_spec.tau_max - math.log(0.4))
    assert out.passed and out.zero_below_gb


def test_extinction_precondition(ref_spec, ref_tables):
    with pytest.raises(analysis.PreconditionViolated):
        analysis.extinction_experiment(ref_spec, 0.05, constant_data(), M=32, tables=ref_tables)
