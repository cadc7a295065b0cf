"""Mitigation costs, carbon-tax efficacy and negative-emission subsidies."""

import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, List, Literal, Sequence, Tuple

import numpy as np
import pandas as pd
from beartype import BeartypeConf, beartype

from .exceptions import DomainError, ScenarioParseError
from .scenario_io import EmissionScenario

logger = logging.getLogger(__name__)

POLICY_START = 2020
ANCHOR_YEAR = 2030
HORIZON = 2100

# range of tax efficacy (% reduction in 2030 per USD/tCO2) across ex-ante models
EX_ANTE_RANGE = (0.04, 1.15)

TAX_KINDS = Literal["ex_ante", "ex_post"]


@dataclass(frozen=True)
class CostModel:
    """Two-anchor mitigation cost curve for one temperature target.

    ``cost_2030`` and ``cost_2100`` are % GDP; ``sd_across_models`` is the
    spread across models at 2100.
    """

    target: float
    cost_2030: float
    cost_2100: float
    sd_across_models: float = 0.0

    def __post_init__(self):
        if self.cost_2030 < 0 or self.cost_2100 < 0:
            raise DomainError("mitigation costs must be non-negative")
        if self.cost_2030 > self.cost_2100:
            raise DomainError(
                f"cost in {ANCHOR_YEAR} ({self.cost_2030}) exceeds cost in {HORIZON} ({self.cost_2100})"
            )
        if self.sd_across_models < 0:
            raise DomainError("sd_across_models must be non-negative")

    @property
    def shape_exponent(self) -> float:
        """Exponent k of c(t) = cost_2100 ((t - 2020)/80)^k through both anchors."""
        if self.cost_2030 == self.cost_2100:
            return 0.0
        if self.cost_2030 == 0:
            return np.inf
        span = (ANCHOR_YEAR - POLICY_START) / (HORIZON - POLICY_START)
        return float(np.log(self.cost_2030 / self.cost_2100) / np.log(span))


COST_MODELS: Dict[float, CostModel] = {
    2.0: CostModel(target=2.0, cost_2030=0.45, cost_2100=3.9, sd_across_models=1.2),
    1.5: CostModel(target=1.5, cost_2030=0.6, cost_2100=5.6, sd_across_models=1.6),
}


def default_cost_model(target: float) -> CostModel:
    try:
        return COST_MODELS[float(target)]
    except KeyError:
        raise DomainError(f"no default cost model for a {target} °C target") from None


def cost_path(m: CostModel, years, multiplier: float = 1.0) -> np.ndarray:
    """Mitigation cost (% GDP) per year, zero up to 2020.

    ``multiplier`` scales the first-best path for real-world
    inefficiencies.
    """
    years = np.asarray(years)
    if np.any(years < POLICY_START) or np.any(years > HORIZON):
        raise DomainError(f"cost paths are defined on {POLICY_START}-{HORIZON}")
    fraction = (years - POLICY_START) / (HORIZON - POLICY_START)
    k = m.shape_exponent
    if np.isinf(k):
        path = np.where(fraction == 1.0, m.cost_2100, 0.0)
    else:
        path = m.cost_2100 * fraction**k
    path = np.where(years == POLICY_START, 0.0, path)
    return multiplier * path


def cost_band(m: CostModel, years, multiplier: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Cost path plus and minus ``sd_across_models``, scaled along the path."""
    central = cost_path(m, years, multiplier)
    if m.cost_2100 == 0:
        return central, central
    half_width = central * (m.sd_across_models / m.cost_2100)
    return np.maximum(central - half_width, 0.0), central + half_width


@dataclass(frozen=True)
class TaxRecord:
    source: str
    price_usd_per_tco2: float
    reduction_pct_2030: float
    kind: TAX_KINDS = "ex_ante"

    def __post_init__(self):
        if not self.price_usd_per_tco2 > 0:
            raise DomainError(f"{self.source}: carbon price must be positive")
        if self.kind not in ("ex_ante", "ex_post"):
            raise ValueError(f"{self.source}: kind must be ex_ante or ex_post, got {self.kind}")

    @property
    def efficacy(self) -> float:
        return tax_efficacy(self.reduction_pct_2030, self.price_usd_per_tco2)


@beartype(conf=BeartypeConf(is_pep484_tower=True))
def tax_efficacy(reduction_pct_2030: float, price_usd: float) -> float:
    """Emission reduction in 2030 (%) per USD/tCO2 of carbon price."""
    if price_usd <= 0:
        raise DomainError(f"carbon price must be positive, got {price_usd}")
    return reduction_pct_2030 / price_usd


def efficacy_range_check(
    records: Sequence[TaxRecord],
    valid_range: Tuple[float, float] = EX_ANTE_RANGE,
) -> Dict[str, object]:
    """Flag records whose efficacy falls outside the ex-ante model range.

    Returns ``flags`` (one message per out-of-range record) and
    ``spread_ratio`` (largest over smallest positive ex-ante efficacy).
    An empty collection gives an empty result.
    """
    if not records:
        return {}
    lo, hi = valid_range
    flags: List[str] = []
    for record in records:
        value = record.efficacy
        if value < lo or value > hi:
            side = "below" if value < lo else "above"
            flags.append(
                f"{record.source} ({record.kind}): efficacy {value:.3f} is {side} "
                f"the ex-ante range [{lo}, {hi}]"
            )
            logger.warning(flags[-1])
    ex_ante = [r.efficacy for r in records if r.kind == "ex_ante" and r.efficacy > 0]
    spread = max(ex_ante) / min(ex_ante) if ex_ante else float("nan")
    return {"flags": flags, "spread_ratio": spread}


def efficacy_table(records: Sequence[TaxRecord]) -> pd.DataFrame:
    """Records with their efficacy, for the efficacy chart."""
    return pd.DataFrame(
        {
            "source": [r.source for r in records],
            "kind": [r.kind for r in records],
            "price_usd_per_tco2": [r.price_usd_per_tco2 for r in records],
            "reduction_pct_2030": [r.reduction_pct_2030 for r in records],
            "efficacy": [r.efficacy for r in records],
        }
    )


def load_tax_records(path) -> List[TaxRecord]:
    """Read ``source,kind,price_usd_per_tco2,reduction_pct_2030`` rows."""
    path = Path(path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    frame.columns = [str(c).strip() for c in frame.columns]
    for column in ("source", "kind", "price_usd_per_tco2", "reduction_pct_2030"):
        if column not in frame.columns:
            raise ScenarioParseError("missing required column", column=column)

    records = []
    for position, row in enumerate(frame.itertuples(index=False)):
        values = {}
        for column in ("price_usd_per_tco2", "reduction_pct_2030"):
            try:
                values[column] = float(getattr(row, column))
            except ValueError:
                raise ScenarioParseError(
                    f"'{getattr(row, column)}' is not a number", row=position + 2, column=column
                ) from None
        if row.kind not in ("ex_ante", "ex_post"):
            raise ScenarioParseError(f"unknown kind '{row.kind}'", row=position + 2, column="kind")
        if values["price_usd_per_tco2"] <= 0:
            raise ScenarioParseError("price must be positive", row=position + 2, column="price_usd_per_tco2")
        records.append(TaxRecord(row.source, kind=row.kind, **values))
    return records


def bundled_tax_records() -> List[TaxRecord]:
    """Eight ex-ante model records and four ex-post studies (reconstructed)."""
    ref = resources.files(__package__) / "data" / "tax_records.csv"
    with resources.as_file(ref) as path:
        return load_tax_records(path)


@beartype(conf=BeartypeConf(is_pep484_tower=True))
def subsidy_share(gross_negative_emissions: float, price_usd: float, gdp: float) -> float:
    """Subsidy bill for negative emissions as % of GDP.

    Emissions in GtCO2/yr, price in USD/tCO2, GDP in trillion USD/yr.
    """
    if gross_negative_emissions < 0:
        raise DomainError("gross negative emissions must be non-negative")
    return 100.0 * (gross_negative_emissions * 1e9 * price_usd) / (gdp * 1e12)


def subsidy_path(s: EmissionScenario, price_usd: float) -> np.ndarray:
    """Per-year subsidy (% GDP) paid for the scenario's net-negative emissions."""
    if price_usd <= 0:
        raise DomainError(f"carbon price must be positive, got {price_usd}")
    removals = np.maximum(-s.emissions, 0.0)
    return 100.0 * (removals * 1e9 * price_usd) / (s.gdp * 1e12)
