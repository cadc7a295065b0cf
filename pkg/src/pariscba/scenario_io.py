"""Emission scenarios: the record type, CSV loading/writing and bundled fixtures."""

import logging
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from .exceptions import ScenarioParseError

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = (
    "year",
    "emissions_gtco2",
    "gdp_trillion_usd",
    "population_million",
)
EXO_COLUMN = "exo_forcing_wm2"
ENERGY_COLUMN = "energy_ej"

# |emissions| at or above this is implausible (GtCO2/yr)
PLAUSIBLE_EMISSIONS = 200.0

BUNDLED_SCENARIOS = (
    "ssp585_like",
    "ssp370_like",
    "paris20",
    "paris15",
    "kaya_history",
)


def year_position(years, year: int) -> int:
    """Position of ``year`` on a year axis; KeyError when it is not on it."""
    years = np.asarray(years)
    matches = np.flatnonzero(years == int(year))
    if matches.size == 0:
        raise KeyError(f"year {year} not on the year axis ({years[0]}-{years[-1]})")
    return int(matches[0])


def _frozen(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class EmissionScenario:
    """Annual CO2 emissions with the GDP, population and forcing they come with.

    Units: emissions GtCO2/yr (may be negative), gdp trillion USD/yr,
    population million, exo_forcing W/m2 (non-CO2), energy EJ/yr (optional).
    Arrays are stored read-only.
    """

    name: str
    years: np.ndarray
    emissions: np.ndarray
    gdp: np.ndarray
    population: np.ndarray
    exo_forcing: Optional[np.ndarray] = None
    energy: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "years", _frozen(self.years, dtype=np.int64))
        for name in ("emissions", "gdp", "population"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        exo = self.exo_forcing
        if exo is None:
            exo = np.zeros(len(self.years))
        object.__setattr__(self, "exo_forcing", _frozen(exo))
        if self.energy is not None:
            object.__setattr__(self, "energy", _frozen(self.energy))

    def __len__(self) -> int:
        return len(self.years)

    @property
    def start_year(self) -> int:
        return int(self.years[0])

    @property
    def end_year(self) -> int:
        return int(self.years[-1])

    def index_of(self, year: int) -> int:
        """Position of ``year`` on the year axis."""
        position = int(year) - self.start_year
        if position < 0 or position >= len(self.years):
            raise KeyError(f"year {year} outside {self.start_year}-{self.end_year}")
        return position

    def slice(self, start: int, end: int) -> "EmissionScenario":
        """Sub-scenario covering ``start``..``end`` inclusive."""
        i, j = self.index_of(start), self.index_of(end) + 1
        return replace(
            self,
            years=self.years[i:j],
            emissions=self.emissions[i:j],
            gdp=self.gdp[i:j],
            population=self.population[i:j],
            exo_forcing=self.exo_forcing[i:j],
            energy=None if self.energy is None else self.energy[i:j],
        )

    def with_emissions(self, emissions, name: Optional[str] = None) -> "EmissionScenario":
        """Copy with a different emission path (same length)."""
        emissions = np.asarray(emissions, dtype=float)
        if emissions.shape != self.emissions.shape:
            raise ValueError(
                f"emission path has {emissions.size} values, scenario has {len(self)}"
            )
        return replace(self, emissions=emissions, name=name or self.name)


def validate_scenario(s: EmissionScenario) -> List[str]:
    """Check invariants and physical plausibility.

    Returns a list of human-readable diagnostics; empty when everything holds.
    Never raises.
    """
    diagnostics = []
    n = len(s.years)
    for label in ("emissions", "gdp", "population", "exo_forcing", "energy"):
        series = getattr(s, label)
        if series is not None and len(series) != n:
            diagnostics.append(f"{label} has {len(series)} values, years has {n}")
    if diagnostics:
        return diagnostics

    steps = np.diff(s.years)
    for i in np.flatnonzero(steps != 1):
        diagnostics.append(
            f"non-contiguous years: {s.years[i]} followed by {s.years[i + 1]}"
        )
    for label in ("emissions", "gdp", "population", "exo_forcing", "energy"):
        series = getattr(s, label)
        if series is not None and not np.all(np.isfinite(series)):
            diagnostics.append(f"{label} contains non-finite values")
    for label in ("gdp", "population"):
        for i in np.flatnonzero(getattr(s, label) <= 0):
            diagnostics.append(f"{label} must be positive, got {getattr(s, label)[i]} in {s.years[i]}")
    if s.energy is not None:
        for i in np.flatnonzero(s.energy <= 0):
            diagnostics.append(f"energy must be positive, got {s.energy[i]} in {s.years[i]}")
    for i in np.flatnonzero(np.abs(s.emissions) >= PLAUSIBLE_EMISSIONS):
        diagnostics.append(
            f"implausible emissions {s.emissions[i]:.1f} GtCO2/yr in {s.years[i]} "
            f"(|emissions| should stay below {PLAUSIBLE_EMISSIONS:.0f})"
        )
    return diagnostics


def _parse_column(frame: pd.DataFrame, column: str, integer: bool = False) -> np.ndarray:
    values = []
    for position, text in enumerate(frame[column]):
        row = position + 2  # header is row 1
        if not isinstance(text, str) or text.strip() == "":
            raise ScenarioParseError("missing value", row=row, column=column)
        try:
            value = int(text) if integer else float(text)
        except ValueError:
            raise ScenarioParseError(f"'{text}' is not a number", row=row, column=column) from None
        if not integer and not np.isfinite(value):
            raise ScenarioParseError(f"'{text}' is not finite", row=row, column=column)
        values.append(value)
    return np.array(values, dtype=np.int64 if integer else float)


def load_scenario(path, name: Optional[str] = None) -> EmissionScenario:
    """Load and validate a scenario CSV.

    Columns ``year,emissions_gtco2,gdp_trillion_usd,population_million`` are
    required; ``exo_forcing_wm2`` defaults to zero and ``energy_ej`` is
    optional. Years must be contiguous and increasing; rows are never
    reordered or interpolated.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise ScenarioParseError(f"{path}: file is empty") from None
    except pd.errors.ParserError as e:
        raise ScenarioParseError(f"{path}: malformed row ({e})") from None

    frame.columns = [str(c).strip() for c in frame.columns]
    for column in REQUIRED_COLUMNS:
        if column not in frame.columns:
            raise ScenarioParseError("missing required column", column=column)
    if frame.empty:
        raise ScenarioParseError(f"{path}: no data rows")

    years = _parse_column(frame, "year", integer=True)
    gaps = np.flatnonzero(np.diff(years) != 1)
    if gaps.size:
        i = int(gaps[0])
        raise ScenarioParseError(
            f"non-contiguous years ({years[i]} followed by {years[i + 1]})",
            row=i + 3,
            column="year",
        )

    columns = {c: _parse_column(frame, c) for c in REQUIRED_COLUMNS[1:]}
    exo = _parse_column(frame, EXO_COLUMN) if EXO_COLUMN in frame.columns else None
    energy = _parse_column(frame, ENERGY_COLUMN) if ENERGY_COLUMN in frame.columns else None

    for column in ("gdp_trillion_usd", "population_million"):
        bad = np.flatnonzero(columns[column] <= 0)
        if bad.size:
            raise ScenarioParseError("value must be positive", row=int(bad[0]) + 2, column=column)

    scenario = EmissionScenario(
        name=name or path.stem,
        years=years,
        emissions=columns["emissions_gtco2"],
        gdp=columns["gdp_trillion_usd"],
        population=columns["population_million"],
        exo_forcing=exo,
        energy=energy,
    )
    for diagnostic in validate_scenario(scenario):
        logger.warning("%s: %s", scenario.name, diagnostic)
    logger.debug("loaded %s (%d-%d)", scenario.name, scenario.start_year, scenario.end_year)
    return scenario


def scenario_frame(s: EmissionScenario) -> pd.DataFrame:
    """The scenario as a DataFrame in normalized column order."""
    data = {
        "year": s.years,
        "emissions_gtco2": s.emissions,
        "gdp_trillion_usd": s.gdp,
        "population_million": s.population,
        EXO_COLUMN: s.exo_forcing,
    }
    if s.energy is not None:
        data[ENERGY_COLUMN] = s.energy
    return pd.DataFrame(data)


def write_scenario(s: EmissionScenario, path) -> Path:
    """Write the normalized CSV form of a scenario.

    Floats use their shortest round-trip form, so loading the file gives the
    same values back.
    """
    path = Path(path)
    scenario_frame(s).to_csv(path, index=False, lineterminator="\n")
    return path


def bundled_names() -> tuple:
    return BUNDLED_SCENARIOS


def bundled_scenario(name: str) -> EmissionScenario:
    """Load one of the packaged fixture scenarios by name."""
    if name not in BUNDLED_SCENARIOS:
        raise KeyError(f"unknown bundled scenario '{name}'; choose from {', '.join(BUNDLED_SCENARIOS)}")
    ref = resources.files(__package__) / "data" / "scenarios" / f"{name}.csv"
    with resources.as_file(ref) as path:
        return load_scenario(path, name=name)


def resolve_scenario(name_or_path: str) -> EmissionScenario:
    """A bundled scenario by name, otherwise a CSV path."""
    if name_or_path in BUNDLED_SCENARIOS:
        return bundled_scenario(name_or_path)
    return load_scenario(name_or_path)
