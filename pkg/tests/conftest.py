"""Shared fixtures: bundled scenarios and calibrated model parameters."""

import pytest

from pariscba.commands import calibrated_params
from pariscba.scenario_io import bundled_scenario


@pytest.fixture(scope="session")
def params():
    """(carbon, climate) parameters calibrated to the bundled temperature anchors."""
    return calibrated_params()


@pytest.fixture(scope="session")
def ssp585():
    return bundled_scenario("ssp585_like")


@pytest.fixture(scope="session")
def ssp370():
    return bundled_scenario("ssp370_like")


@pytest.fixture(scope="session")
def paris20():
    return bundled_scenario("paris20")


@pytest.fixture(scope="session")
def paris15():
    return bundled_scenario("paris15")


@pytest.fixture(scope="session")
def history():
    return bundled_scenario("kaya_history")
