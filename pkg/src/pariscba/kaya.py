"""Kaya identity: decompose emission growth and project constant-rate paths.

Emissions = population x (GDP / population) x (energy / GDP) x (CO2 / energy).
Growth rates are in %/yr. With the default continuous convention
(100 x average log growth) the four component rates add up to the emission
rate exactly; the geometric convention (average annual compound growth)
matches how published tables usually quote rates, to within rounding.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Literal, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from beartype import BeartypeConf, beartype

from .exceptions import DomainError
from .scenario_io import EmissionScenario

logger = logging.getLogger(__name__)

CONVENTIONS = Literal["continuous", "geometric"]

DEFAULT_PERIODS = ((1965, 1999), (1999, 2011), (2011, 2021), (1965, 2021))

FACTOR_COLUMNS = (
    "population",
    "income_per_capita",
    "energy_intensity",
    "carbon_intensity",
    "emissions",
)


@dataclass(frozen=True)
class KayaRates:
    """Average growth rates (%/yr) of emissions and its four Kaya components."""

    population_growth: float
    income_per_capita_growth: float
    energy_intensity_growth: float
    carbon_intensity_growth: float
    emissions_growth: float
    period: Tuple[int, int]

    def __post_init__(self):
        start, end = self.period
        if start >= end:
            raise ValueError(f"period start {start} must precede end {end}")

    @property
    def gdp_growth(self) -> float:
        return self.population_growth + self.income_per_capita_growth

    def components(self) -> Tuple[float, float, float, float]:
        return (
            self.population_growth,
            self.income_per_capita_growth,
            self.energy_intensity_growth,
            self.carbon_intensity_growth,
        )

    def residual(self) -> float:
        """Emission rate minus the sum of the component rates."""
        return self.emissions_growth - sum(self.components())

    def as_row(self) -> Dict[str, float]:
        return {
            "period": f"{self.period[0]}-{self.period[1]}",
            "population": self.population_growth,
            "income_per_capita": self.income_per_capita_growth,
            "energy_intensity": self.energy_intensity_growth,
            "carbon_intensity": self.carbon_intensity_growth,
            "emissions": self.emissions_growth,
        }


def _endpoint_values(series, years, period) -> Tuple[float, float, int]:
    years = np.asarray(years)
    series = np.asarray(series, dtype=float)
    start, end = (int(y) for y in period)
    if start >= end:
        raise ValueError(f"period start {start} must precede end {end}")
    if start < years[0] or end > years[-1]:
        raise DomainError(
            f"period {start}-{end} not covered by series ({years[0]}-{years[-1]})"
        )
    window = series[start - years[0] : end - years[0] + 1]
    bad = np.flatnonzero(window <= 0)
    if bad.size:
        raise DomainError(
            f"growth rate needs positive values, got {window[bad[0]]} in {start + bad[0]}"
        )
    return float(window[0]), float(window[-1]), end - start


def _rate(v_start: float, v_end: float, n: int, convention: str) -> float:
    if convention == "continuous":
        return 100.0 * np.log(v_end / v_start) / n
    if convention == "geometric":
        return 100.0 * ((v_end / v_start) ** (1.0 / n) - 1.0)
    raise ValueError(f"unknown growth convention '{convention}'")


def growth_rate(
    series,
    years,
    period: Tuple[int, int],
    convention: CONVENTIONS = "continuous",
) -> float:
    """Average annual growth rate of ``series`` over ``period`` in %/yr.

    Only the two endpoint values matter. ``years`` is the contiguous year
    axis matching ``series``.
    """
    v_start, v_end, n = _endpoint_values(series, years, period)
    return _rate(v_start, v_end, n, convention)


def kaya_factors(s: EmissionScenario) -> pd.DataFrame:
    """Per-year Kaya factors of a scenario that carries primary energy."""
    if s.energy is None:
        raise DomainError(f"scenario '{s.name}' has no energy_ej column")
    return pd.DataFrame(
        {
            "population": s.population,
            "income_per_capita": s.gdp / s.population,
            "energy_intensity": s.energy / s.gdp,
            "carbon_intensity": s.emissions / s.energy,
            "emissions": s.emissions,
        },
        index=pd.Index(s.years, name="year"),
    )


def kaya_indices(s: EmissionScenario, base_year: Optional[int] = None) -> pd.DataFrame:
    """Kaya factors normalized to 1 at ``base_year`` (first year by default)."""
    factors = kaya_factors(s)
    base_year = s.start_year if base_year is None else base_year
    s.index_of(base_year)
    return factors / factors.loc[base_year]


def decompose(
    s: EmissionScenario,
    period: Tuple[int, int],
    convention: CONVENTIONS = "continuous",
) -> KayaRates:
    """Growth rates of emissions and the four Kaya components over ``period``."""
    factors = kaya_factors(s)
    rates = {
        column: growth_rate(factors[column].to_numpy(), s.years, period, convention)
        for column in FACTOR_COLUMNS
    }
    result = KayaRates(
        population_growth=rates["population"],
        income_per_capita_growth=rates["income_per_capita"],
        energy_intensity_growth=rates["energy_intensity"],
        carbon_intensity_growth=rates["carbon_intensity"],
        emissions_growth=rates["emissions"],
        period=(int(period[0]), int(period[1])),
    )
    logger.debug("decomposed %s over %s: %s", s.name, period, result)
    return result


def table1(
    s: EmissionScenario,
    periods: Sequence[Tuple[int, int]] = DEFAULT_PERIODS,
    convention: CONVENTIONS = "continuous",
) -> pd.DataFrame:
    """One row of Kaya rates per period."""
    rows = [decompose(s, p, convention).as_row() for p in periods]
    return pd.DataFrame(rows).set_index("period")


@beartype(conf=BeartypeConf(is_pep484_tower=True))
def required_intensity_decline(target_emissions_growth: float, gdp_growth: float) -> float:
    """Combined energy + carbon intensity growth needed to hit an emission rate.

    GDP growth stands in for population times per-capita income. A 15 %/yr
    emission cut with 2.5 %/yr GDP growth needs intensities to fall 17.5 %/yr.
    """
    return target_emissions_growth - gdp_growth


def _factor(rate_pct: float, steps: np.ndarray, convention: str) -> np.ndarray:
    if convention == "continuous":
        return np.exp(rate_pct / 100.0 * steps)
    if convention == "geometric":
        return (1.0 + rate_pct / 100.0) ** steps
    raise ValueError(f"unknown growth convention '{convention}'")


def project(
    base: EmissionScenario,
    rates: KayaRates,
    horizon: int,
    convention: CONVENTIONS = "continuous",
) -> EmissionScenario:
    """Extend ``base`` to ``horizon`` at constant rates.

    Emissions grow at ``rates.emissions_growth``. Population, GDP and
    energy (when present) follow the component rates; exogenous forcing is
    held at its last value.
    """
    if horizon <= base.end_year:
        raise ValueError(f"horizon {horizon} must be after the last base year {base.end_year}")
    steps = np.arange(1, horizon - base.end_year + 1, dtype=float)

    population = base.population[-1] * _factor(rates.population_growth, steps, convention)
    income = _factor(rates.income_per_capita_growth, steps, convention)
    gdp = base.gdp[-1] * (population / base.population[-1]) * income
    emissions = base.emissions[-1] * _factor(rates.emissions_growth, steps, convention)
    energy = None
    if base.energy is not None:
        intensity = _factor(rates.energy_intensity_growth, steps, convention)
        energy = np.concatenate(
            [base.energy, base.energy[-1] * (gdp / base.gdp[-1]) * intensity]
        )

    return EmissionScenario(
        name=f"{base.name}_projected",
        years=np.arange(base.start_year, horizon + 1),
        emissions=np.concatenate([base.emissions, emissions]),
        gdp=np.concatenate([base.gdp, gdp]),
        population=np.concatenate([base.population, population]),
        exo_forcing=np.concatenate(
            [base.exo_forcing, np.full(steps.size, base.exo_forcing[-1])]
        ),
        energy=energy,
    )
