"""Tests for mitigation cost paths, tax efficacy and subsidies."""

import logging

import numpy as np
import pytest
from beartype.roar import BeartypeCallHintParamViolation

from pariscba.exceptions import DomainError, ScenarioParseError
from pariscba.policy_costs import (
    COST_MODELS,
    CostModel,
    TaxRecord,
    bundled_tax_records,
    cost_band,
    cost_path,
    default_cost_model,
    efficacy_range_check,
    efficacy_table,
    load_tax_records,
    subsidy_path,
    subsidy_share,
    tax_efficacy,
)

YEARS = np.arange(2020, 2101)


def test_cost_anchors():
    """3.9 % GDP (2 °C) and 5.6 % GDP (1.5 °C) in 2100, zero in 2020"""
    two = cost_path(default_cost_model(2.0), YEARS)
    one_five = cost_path(default_cost_model(1.5), YEARS)

    assert two[-1] == pytest.approx(3.9)
    assert one_five[-1] == pytest.approx(5.6)
    assert two[0] == 0.0
    assert one_five[0] == 0.0
    assert two[10] == pytest.approx(0.45)
    assert one_five[10] == pytest.approx(0.6)


def test_cost_paths_rise_and_order():
    two = cost_path(COST_MODELS[2.0], YEARS)
    one_five = cost_path(COST_MODELS[1.5], YEARS)

    assert np.all(np.diff(two) >= 0)
    assert np.all(one_five >= two)


def test_cost_multiplier_scales_the_path():
    m = COST_MODELS[2.0]

    np.testing.assert_allclose(cost_path(m, YEARS, multiplier=2.0), 2.0 * cost_path(m, YEARS))


def test_equal_anchors_give_a_flat_path_after_2020():
    path = cost_path(CostModel(2.0, 3.0, 3.0), YEARS)

    assert path[0] == 0.0
    np.testing.assert_allclose(path[1:], 3.0)


def test_cost_model_validation():
    with pytest.raises(DomainError, match="exceeds"):
        CostModel(2.0, cost_2030=5.0, cost_2100=4.0)
    with pytest.raises(DomainError, match="non-negative"):
        CostModel(2.0, cost_2030=-1.0, cost_2100=4.0)
    with pytest.raises(DomainError, match="no default cost model"):
        default_cost_model(3.0)


def test_cost_path_outside_policy_window():
    with pytest.raises(DomainError, match="2020-2100"):
        cost_path(COST_MODELS[2.0], np.arange(2015, 2030))


def test_cost_band_scales_with_the_path():
    lo, hi = cost_band(COST_MODELS[2.0], YEARS)

    assert lo[-1] == pytest.approx(3.9 - 1.2)
    assert hi[-1] == pytest.approx(3.9 + 1.2)
    assert lo[0] == hi[0] == 0.0
    assert np.all(lo >= 0)


def test_tax_efficacy():
    assert tax_efficacy(46.0, 40.0) == pytest.approx(1.15)
    assert tax_efficacy(0.0, 50.0) == 0.0
    assert tax_efficacy(4.0, 100.0) == pytest.approx(0.04)
    assert tax_efficacy(20.0, 100.0) == pytest.approx(tax_efficacy(20.0, 50.0) / 2)


def test_tax_efficacy_needs_a_positive_price():
    with pytest.raises(DomainError, match="positive"):
        tax_efficacy(10.0, 0.0)
    with pytest.raises(DomainError):
        TaxRecord("free", price_usd_per_tco2=-5.0, reduction_pct_2030=1.0)
    with pytest.raises(BeartypeCallHintParamViolation):
        tax_efficacy("10", 40.0)


def test_bundled_ex_ante_records_span_the_range():
    """Eight ex-ante models: spread 1.15 / 0.04 = 28.75, nothing flagged"""
    ex_ante = [r for r in bundled_tax_records() if r.kind == "ex_ante"]
    check = efficacy_range_check(ex_ante)

    assert len(ex_ante) == 8
    assert check["flags"] == []
    assert check["spread_ratio"] == pytest.approx(28.75)


def test_ex_post_records_are_flagged(caplog):
    """One ex-post study above the ex-ante range, two below, one inside"""
    records = bundled_tax_records()
    with caplog.at_level(logging.WARNING, logger="pariscba.policy_costs"):
        check = efficacy_range_check(records)

    assert len(check["flags"]) == 3
    assert sum("above" in flag for flag in check["flags"]) == 1
    assert sum("below" in flag for flag in check["flags"]) == 2
    assert len(caplog.records) == 3


def test_single_high_record_is_flagged():
    check = efficacy_range_check([TaxRecord("x", 10.0, 20.0, "ex_post")])

    assert "above" in check["flags"][0]


def test_empty_collection():
    assert efficacy_range_check([]) == {}


def test_efficacy_table_columns():
    table = efficacy_table(bundled_tax_records())

    assert list(table.columns) == ["source", "kind", "price_usd_per_tco2", "reduction_pct_2030", "efficacy"]
    assert len(table) == 12


def test_load_tax_records_errors(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("source,kind,price_usd_per_tco2,reduction_pct_2030\nx,modelled,40,10\n")
    with pytest.raises(ScenarioParseError, match="unknown kind 'modelled'"):
        load_tax_records(path)

    path.write_text("source,kind,price_usd_per_tco2,reduction_pct_2030\nx,ex_ante,0,10\n")
    with pytest.raises(ScenarioParseError, match="row 2, column 'price_usd_per_tco2'"):
        load_tax_records(path)


def test_subsidy_share():
    """20 GtCO2/yr at 500 USD/t is 4 % of a 250 trillion USD economy"""
    assert subsidy_share(0.0, 500.0, 250.0) == 0.0
    assert subsidy_share(20.0, 500.0, 250.0) == pytest.approx(4.0)
    assert subsidy_share(20.0, 500.0, 125.0) == pytest.approx(8.0)
    assert subsidy_share(40.0, 500.0, 250.0) == pytest.approx(2 * subsidy_share(20.0, 500.0, 250.0))
    with pytest.raises(DomainError):
        subsidy_share(-1.0, 500.0, 250.0)


def test_subsidy_path_pays_only_for_net_removals(paris15):
    path = subsidy_path(paris15, 100.0)
    negative = paris15.emissions < 0

    assert np.all(path[~negative] == 0.0)
    assert np.all(path[negative] > 0.0)
    k = int(np.argmax(negative))
    assert path[k] == pytest.approx(subsidy_share(float(-paris15.emissions[k]), 100.0, float(paris15.gdp[k])))
    with pytest.raises(DomainError, match="positive"):
        subsidy_path(paris15, 0.0)
