"""Tests for impact functions, model averaging, rescaling and benefits."""

import numpy as np
import pytest

from pariscba.carbon_climate import temperature_path
from pariscba.exceptions import AlignmentError, DomainError, ScenarioParseError, SingularDesignError
from pariscba.impacts import (
    FORMS,
    CompositeImpactFunction,
    ImpactEstimate,
    ImpactFunction,
    UncertaintyBand,
    benefit,
    bundled_estimates,
    calibrate_benefit_deltas,
    coverage_adjust,
    damage,
    default_impact_function,
    fit_all,
    fit_impact_function,
    impact_histogram,
    load_estimates,
    model_average,
    scale_estimate,
    summarize_estimates,
)

DEFAULT = default_impact_function()


def _estimates(warming, impacts, weights=None):
    weights = weights if weights is not None else [1.0 / len(warming)] * len(warming)
    return [ImpactEstimate(f"p{i}", t, y, w) for i, (t, y, w) in enumerate(zip(warming, impacts, weights))]


def test_default_quadratic_coefficients():
    """The two SSP5-8.5 deltas pin D(T) = 0.176 T + 0.121 T^2"""
    a, b = DEFAULT.params

    assert DEFAULT.form == "quadratic"
    assert a == pytest.approx(0.29 / 1.65, abs=1e-12)
    assert b == pytest.approx(0.2 / 1.65, abs=1e-12)
    assert damage(2.5, DEFAULT) == pytest.approx(1.197, abs=1e-3)
    assert damage(4.8, DEFAULT) - damage(2.0, DEFAULT) == pytest.approx(2.8, abs=1e-12)
    assert damage(4.8, DEFAULT) - damage(1.5, DEFAULT) == pytest.approx(3.1, abs=1e-12)


def test_held_out_deltas_are_close():
    """The held-out SSP3-7.0 deltas (1.8 and 2.2) come out somewhat lower"""
    assert damage(3.9, DEFAULT) - damage(2.0, DEFAULT) == pytest.approx(1.8, abs=0.15)
    assert damage(3.9, DEFAULT) - damage(1.5, DEFAULT) == pytest.approx(2.2, abs=0.25)


def test_zero_warming_means_zero_damage():
    fits = fit_all(bundled_estimates())

    assert damage(0.0, DEFAULT) == 0.0
    for f in fits:
        assert damage(0.0, f) == pytest.approx(0.0, abs=1e-12)
    assert damage(0.0, model_average(fits)) == pytest.approx(0.0, abs=1e-12)


def test_negative_temperature_is_rejected():
    with pytest.raises(DomainError, match="non-negative"):
        damage(-0.1, DEFAULT)


def test_default_damage_is_monotone():
    values = damage(np.linspace(0.0, 6.0, 121), DEFAULT)

    assert np.all(np.diff(values) > 0)


def test_noiseless_quadratic_recovery():
    t = np.array([0.5, 1.0, 2.0, 3.0, 4.5])
    estimates = _estimates(t, -(0.3 * t + 0.15 * t**2))

    fitted = fit_impact_function(estimates, "quadratic")
    np.testing.assert_allclose(fitted.params, (0.3, 0.15), atol=1e-8)
    assert fitted.wsse == pytest.approx(0.0, abs=1e-20)


def test_single_estimate_linear_fit():
    fitted = fit_impact_function([ImpactEstimate("only", 2.0, -1.0)], "linear")

    assert fitted.params == pytest.approx((0.5,))
    assert fitted(4.0) == pytest.approx(2.0)


NORMAL_EQUATION_BASES = {
    "linear": lambda t: np.column_stack([t]),
    "quadratic_no_linear": lambda t: np.column_stack([t**2]),
    "quadratic": lambda t: np.column_stack([t, t**2]),
    "cubic": lambda t: np.column_stack([t, t**2, t**3]),
    "piecewise_linear": lambda t: np.column_stack([np.minimum(t, 2.5), np.maximum(t - 2.5, 0.0)]),
}


@pytest.mark.parametrize("seed", range(20))
def test_weighted_fit_matches_normal_equations(seed):
    """Weighted least squares agrees with (X'WX)^-1 X'Wy on random instances"""
    rng = np.random.default_rng(seed)
    form = sorted(NORMAL_EQUATION_BASES)[seed % len(NORMAL_EQUATION_BASES)]
    n = int(rng.integers(5, 40))
    # one point on each side of the piecewise knot
    t = np.concatenate([[1.0, 4.0], rng.uniform(0.3, 6.0, n - 2)])
    y = rng.uniform(-0.5, 0.5) * t + rng.uniform(0.0, 0.3) * t**2 + rng.normal(0.0, 0.5, n)
    w = rng.uniform(0.05, 2.0, n)

    X = NORMAL_EQUATION_BASES[form](t)
    W = np.diag(w)
    oracle = np.linalg.solve(X.T @ W @ X, X.T @ W @ y)
    fitted = fit_impact_function(_estimates(t, -y, w), form)

    np.testing.assert_allclose(fitted.params, oracle, rtol=1e-7, atol=1e-8)


def test_singular_designs():
    """Two-parameter forms need two distinct warming levels"""
    same_t = _estimates([2.5, 2.5, 2.5], [-1.0, -1.2, -0.8])

    with pytest.raises(SingularDesignError, match="not identified"):
        fit_impact_function(same_t, "quadratic")
    with pytest.raises(SingularDesignError, match="distinct warming"):
        fit_impact_function(same_t, "power")
    with pytest.raises(SingularDesignError, match="at least 3"):
        fit_impact_function(same_t[:2], "cubic")


def test_fit_all_skips_unidentified_forms(caplog):
    estimates = _estimates([2.5, 2.5], [-1.0, -1.2])
    fits = fit_all(estimates)

    assert {f.form for f in fits} == {"linear", "quadratic_no_linear"}
    assert sum(f.fit_weight for f in fits) == pytest.approx(1.0)
    assert any("skipping quadratic" in message for message in caplog.messages)


def test_fit_all_on_bundled_estimates():
    fits = fit_all(bundled_estimates())

    assert [f.form for f in fits] == list(FORMS)
    weights = np.array([f.fit_weight for f in fits])
    assert weights.sum() == pytest.approx(1.0)
    best = min(fits, key=lambda f: f.wsse)
    assert best.fit_weight == pytest.approx(weights.max())


def test_composite_of_identical_fits():
    member = ImpactFunction("quadratic", (0.2, 0.1), wsse=1.0)
    composite = model_average([member] * 7)
    t = np.linspace(0, 5, 11)

    np.testing.assert_allclose(composite(t), member(t))


def test_composite_with_one_nonzero_weight():
    first = ImpactFunction("linear", (1.0,), fit_weight=1.0)
    second = ImpactFunction("linear", (5.0,), fit_weight=0.0)

    assert model_average([first, second])(3.0) == pytest.approx(3.0)


def test_composite_of_two_slopes():
    composite = CompositeImpactFunction(
        (ImpactFunction("linear", (1.0,)), ImpactFunction("linear", (3.0,))),
        (0.5, 0.5),
    )

    assert composite(2.0) == pytest.approx(4.0)


def test_composite_weights_must_sum_to_one():
    with pytest.raises(ValueError, match="sum to 1"):
        CompositeImpactFunction((DEFAULT,), (0.5,))


def test_scale_estimate():
    quadratic = ImpactFunction("quadratic_no_linear", (1.0,))

    assert scale_estimate(ImpactEstimate("a", 1.0, -1.0), 2.0, quadratic) == pytest.approx(-4.0)
    assert scale_estimate(ImpactEstimate("b", 2.5, -1.7), 2.5, DEFAULT) == pytest.approx(-1.7)


def test_scale_estimate_at_zero_damage():
    flat = ImpactFunction("linear", (0.0,))

    with pytest.raises(DomainError, match="cannot rescale"):
        scale_estimate(ImpactEstimate("a", 1.0, -1.0), 2.5, flat)


def test_histogram_weights_sum_to_one():
    estimates = bundled_estimates()
    histogram = impact_histogram(estimates, model_average(fit_all(estimates)))

    assert list(histogram.columns) == ["bin_lower", "bin_upper", "weighted_frequency"]
    assert histogram["weighted_frequency"].sum() == pytest.approx(1.0)
    assert np.all(histogram["bin_upper"] - histogram["bin_lower"] == 1.0)


def test_bundled_estimate_weights():
    """Each paper weighs 1/18, split over its estimates"""
    estimates = bundled_estimates()
    weights = {e.paper_id: 0.0 for e in estimates}
    for e in estimates:
        weights[e.paper_id] += e.weight

    assert len(estimates) == 22
    assert sum(e.weight for e in estimates) == pytest.approx(1.0, abs=1e-9)
    assert all(w == pytest.approx(1 / 18) for w in weights.values())


def test_summarize_bundled_estimates():
    """Raw bundled estimates: 2 of 18 papers report a net benefit"""
    summary = summarize_estimates(bundled_estimates())

    assert summary["n_estimates"] == 22
    assert summary["benefit_share"] == pytest.approx(2 / 18)
    assert summary["weighted_mean"] < 0
    assert summary["damage_skewness"] > 0
    assert summary["pessimist_optimist_ratio"] == pytest.approx(8.2 / 2.3)
    total = summary["benefit_share"] + summary["moderate_damage_share"]
    assert total + summary["beyond_growth_share"] <= 1.0 + 1e-12


def test_load_estimates_errors(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("paper_id,warming_c\nx,2.0\n")
    with pytest.raises(ScenarioParseError, match="impact_pct_gdp"):
        load_estimates(path)

    path.write_text("paper_id,warming_c,impact_pct_gdp\nx,0,-1\n")
    with pytest.raises(ScenarioParseError, match="row 2, column 'warming_c'"):
        load_estimates(path)


def test_benefit_is_zero_for_identical_paths(params, paris20):
    path = temperature_path(paris20, *params)

    np.testing.assert_array_equal(benefit(path, path, DEFAULT), 0.0)


def test_benefit_is_antisymmetric(params, ssp585, paris20):
    base = temperature_path(ssp585, *params)
    policy = temperature_path(paris20, *params)

    np.testing.assert_allclose(benefit(base, policy, DEFAULT), -benefit(policy, base, DEFAULT))


def test_benefits_in_2100(params, ssp585, ssp370, paris20, paris15):
    """2.8 and 3.1 % GDP against SSP5-8.5; the SSP3-7.0 pair is smaller"""
    paths = {s.name: temperature_path(s, *params) for s in (ssp585, ssp370, paris20, paris15)}

    b585_20 = benefit(paths["ssp585_like"], paths["paris20"], DEFAULT)
    b585_15 = benefit(paths["ssp585_like"], paths["paris15"], DEFAULT)
    b370_20 = benefit(paths["ssp370_like"], paths["paris20"], DEFAULT)
    b370_15 = benefit(paths["ssp370_like"], paths["paris15"], DEFAULT)

    assert b585_20[-1] == pytest.approx(2.8, abs=0.05)
    assert b585_15[-1] == pytest.approx(3.1, abs=0.05)
    assert b370_20[-1] == pytest.approx(1.8, abs=0.1)
    assert b370_15[-1] == pytest.approx(2.2, abs=0.25)
    assert np.all(b585_15[1:] >= b585_20[1:] - 1e-12)
    assert np.all(b585_20 >= b370_20)


def test_benefit_rejects_misaligned_paths(params, ssp585, paris20):
    base = temperature_path(ssp585, *params)
    policy = temperature_path(paris20.slice(2020, 2090), *params)

    with pytest.raises(AlignmentError, match="81 years"):
        benefit(base, policy, DEFAULT)


def test_benefit_broadcasts_over_draws():
    baseline = np.array([[1.0, 2.0], [2.0, 3.0]])
    policy = np.array([1.0, 1.5])[:, None]

    result = benefit(baseline, policy, DEFAULT)
    assert result.shape == (2, 2)
    assert result[0, 0] == 0.0


def test_coverage_adjust():
    assert coverage_adjust(2.0) == 2.0
    assert coverage_adjust(1.0, 0.5) == 2.0
    assert coverage_adjust(2.8, 0.63) == pytest.approx(7.5676, abs=1e-4)
    with pytest.raises(DomainError, match=r"\[0, 1\)"):
        coverage_adjust(1.0, 1.0)


def test_uncertainty_band_is_right_skewed():
    band = UncertaintyBand()
    lo, hi = band.bounds(np.array([0.0, 2.8]))

    assert lo[0] == hi[0] == 0.0
    assert lo[1] == pytest.approx(1.6)
    assert hi[1] == pytest.approx(4.6)
    with pytest.raises(ValueError):
        UncertaintyBand(sd_below=-1.0)


def test_calibrate_benefit_deltas_needs_two_distinct_pairs():
    with pytest.raises(SingularDesignError):
        calibrate_benefit_deltas([(4.8, 2.0, 2.8), (4.8, 2.0, 2.8)])


def test_unknown_form():
    with pytest.raises(ValueError, match="unknown impact form"):
        ImpactFunction("logistic", (1.0,))
