"""Inequality stress lab: ratio definitions, ensembles, cancellation structure."""

import numpy as np
import pytest

from fnlslab.estimates import (
    EnsembleSpec,
    bilinear_ratio,
    bounded_constant_check,
    cancellation_exponent,
    commutator_bracket,
    refined_commutator,
    refined_commutator_ratio,
    run_ensemble,
    write_ratio_csv,
)
from fnlslab.spectral import (
    SpectralField,
    derivative,
    pointwise_product,
    random_field,
    sobolev_norm,
)


def test_bilinear_ratio_constants():
    one = SpectralField.constant(1.0)
    assert bilinear_ratio(0.0, 1.0, 1.0, one, one) == pytest.approx(1.0)


def test_bilinear_ratio_opposite_modes():
    f = SpectralField.from_modes({1: 1.0}, 1)
    g = SpectralField.from_modes({-1: 1.0}, 1)
    # fg = 1, each factor has H^1 norm sqrt(2): ratio 1/2
    assert bilinear_ratio(0.0, 1.0, 1.0, f, g) == pytest.approx(0.5)


def test_bilinear_hypotheses_enforced():
    f = SpectralField.constant(1.0)
    with pytest.raises(ValueError):
        bilinear_ratio(0.0, 0.2, 0.2, f, f)  # total below 1/2 on both branches
    with pytest.raises(ValueError):
        bilinear_ratio(2.0, -1.5, 1.0, f, f)  # min pair sum negative
    # exact total 1/2 is allowed when every pair sum is strictly positive
    bilinear_ratio(0.0, 0.25, 0.25, f, f)
    # zero fields: 0/0 -> 0
    assert bilinear_ratio(0.0, 1.0, 1.0, SpectralField.zeros(2), f) == 0.0


def test_commutator_trivial_cases():
    rng = np.random.default_rng(0)
    f = random_field(8, 1.0, rng)
    g = random_field(8, 1.0, rng)
    assert sobolev_norm(commutator_bracket(0.0, f, g)) < 1e-13
    c = SpectralField.constant(2.0 - 1j, cutoff=4)
    assert sobolev_norm(commutator_bracket(1.7, c, g)) < 1e-12


def test_refined_commutator_trivial_cases():
    rng = np.random.default_rng(1)
    g = random_field(8, 1.0, rng)
    c = SpectralField.constant(3.0, cutoff=4)
    assert sobolev_norm(refined_commutator(2.5, c, g)) < 1e-12
    f = random_field(8, 1.0, rng)
    assert sobolev_norm(refined_commutator(2.5, f, SpectralField.zeros(8))) == 0.0


def test_commutators_bilinear_in_inputs():
    rng = np.random.default_rng(2)
    f1, f2 = random_field(6, 1.0, rng), random_field(6, 1.0, rng)
    g = random_field(6, 1.0, rng)
    a, b = 1.3 - 0.2j, -0.7j
    for op, s in ((commutator_bracket, 1.3), (refined_commutator, 2.4)):
        lhs = op(s, a * f1 + b * f2, g)
        rhs = a * op(s, f1, g) + b * op(s, f2, g)
        assert sobolev_norm(lhs - rhs) < 1e-12
        lhs = op(s, g, a * f1 + b * f2)
        rhs = a * op(s, g, f1) + b * op(s, g, f2)
        assert sobolev_norm(lhs - rhs) < 1e-12


def test_refined_commutator_s2_reduction():
    # At s = 2 the bracket is 1 - d^2/dx^2 and the operator collapses to -(f'') g.
    rng = np.random.default_rng(3)
    f = random_field(10, 1.5, rng)
    g = random_field(10, 1.5, rng)
    lhs = refined_commutator(2.0, f, g)
    rhs = pointwise_product(-1.0 * derivative(derivative(f)), g, out_cutoff=20)
    assert sobolev_norm(lhs - rhs) < 1e-10


@pytest.mark.parametrize(
    "op,params",
    [
        ("bilinear", {"s0": 0.0, "s1": 1.0, "s2": 1.0}),
        ("commutator", {"s": 1.0}),
        ("commutator", {"s": -1.0}),
        ("refined_commutator", {"s": 2.25}),
    ],
)
def test_ensembles_bounded(op, params):
    spec = EnsembleSpec(cutoffs=(16, 32, 64, 128, 256), samples_per_cutoff=6, seed=0)
    rep = run_ensemble(op, spec, **params)
    ok, worst_growth, slope = bounded_constant_check(rep)
    print(f"{op} {params}: growth={worst_growth:.3f} slope={slope:.4f}")
    assert ok, (worst_growth, slope)
    assert np.all(rep.max_ratio >= 0) and np.all(np.isfinite(rep.max_ratio))


def test_single_sample_report_is_the_single_ratio():
    spec = EnsembleSpec(cutoffs=(16,), samples_per_cutoff=1, seed=5, adversarial=False)
    rep = run_ensemble("bilinear", spec, s0=0.0, s1=1.0, s2=1.0)
    rng = np.random.default_rng(5)
    f = random_field(16, spec.decay, rng)
    g = random_field(16, spec.decay, rng)
    expect = bilinear_ratio(0.0, 1.0, 1.0, f, g)
    assert rep.max_ratio[0] == pytest.approx(expect)
    assert rep.median_ratio[0] == pytest.approx(expect)


def test_reports_deterministic():
    spec = EnsembleSpec(cutoffs=(16, 32), samples_per_cutoff=3, seed=11)
    a = run_ensemble("commutator", spec, s=1.0)
    b = run_ensemble("commutator", spec, s=1.0)
    assert np.array_equal(a.max_ratio, b.max_ratio)
    assert np.array_equal(a.median_ratio, b.median_ratio)


def test_separated_family_cancellation_exponent():
    # ||R_f^s(e^{iKx})|| grows like K^{s-2}: second-order cancellation.
    for s in (2.25, 3.0):
        expo = cancellation_exponent(s)
        print(f"s={s}: exponent {expo:.4f}")
        assert expo <= s - 2.0 + 0.2
        assert expo >= s - 2.0 - 0.5  # and not absurdly small


def test_refined_ratio_requires_s_above_two():
    rng = np.random.default_rng(4)
    f = random_field(6, 1.0, rng)
    with pytest.raises(ValueError):
        refined_commutator_ratio(1.5, f, f)


def test_ratio_csv(tmp_path):
    spec = EnsembleSpec(cutoffs=(8, 16), samples_per_cutoff=2, seed=0)
    reps = [run_ensemble("bilinear", spec, s0=0.0, s1=1.0, s2=1.0)]
    path = tmp_path / "ratios.csv"
    write_ratio_csv(reps, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "estimate,cutoff,max_ratio,median_ratio,growth_factor"
    assert len(lines) == 3
