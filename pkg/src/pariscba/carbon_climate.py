"""Carbon cycle and climate response.

Emissions feed five parallel carbon boxes (one permanent); atmospheric CO2
drives a logarithmic forcing; temperature relaxes toward its equilibrium
with a single e-folding lag. Everything steps annually.

A step from year t to t+1 decays the boxes, adds the emissions of year t,
then recomputes concentration, forcing (with the exogenous forcing of
year t+1) and temperature.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import minimize

from .exceptions import CalibrationError, InfeasibleCeilingError
from .scenario_io import EmissionScenario, year_position

logger = logging.getLogger(__name__)

LN2 = np.log(2.0)


def _readonly(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class CarbonCycleParams:
    """Impulse-response carbon cycle.

    ``box_lifetimes`` are e-folding times in years; ``inf`` marks the
    permanent box.
    """

    box_shares: Tuple[float, ...] = (0.13, 0.20, 0.32, 0.25, 0.10)
    box_lifetimes: Tuple[float, ...] = (np.inf, 363.0, 74.0, 17.0, 2.0)
    preindustrial_ppm: float = 275.0
    gtco2_per_ppm: float = 7.81

    def __post_init__(self):
        if len(self.box_shares) != len(self.box_lifetimes):
            raise ValueError("box_shares and box_lifetimes must have the same length")
        if abs(sum(self.box_shares) - 1.0) > 1e-12:
            raise ValueError(f"box shares must sum to 1, got {sum(self.box_shares)}")
        if any(share < 0 for share in self.box_shares):
            raise ValueError("box shares must be non-negative")
        if any(not tau > 0 for tau in self.box_lifetimes):
            raise ValueError("box lifetimes must be positive")
        if not self.preindustrial_ppm > 0:
            raise ValueError("preindustrial_ppm must be positive")
        if not self.gtco2_per_ppm > 0:
            raise ValueError("gtco2_per_ppm must be positive")

    @property
    def shares(self) -> np.ndarray:
        return np.asarray(self.box_shares, dtype=float)

    @property
    def decay(self) -> np.ndarray:
        """Fraction of each box retained after one year (1 for the permanent box)."""
        return np.exp(-1.0 / np.asarray(self.box_lifetimes, dtype=float))

    def impulse_response(self, years_since_pulse) -> np.ndarray:
        """Airborne fraction of a unit pulse after the given number of years."""
        t = np.asarray(years_since_pulse, dtype=float)
        lifetimes = np.asarray(self.box_lifetimes, dtype=float)
        return np.sum(self.shares * np.exp(-t[..., None] / lifetimes), axis=-1)


@dataclass(frozen=True)
class ClimateParams:
    """Equilibrium sensitivity (°C per doubling), response lag (years) and
    forcing per doubling (W/m2)."""

    ecs: float = 3.0
    lag_years: float = 40.0
    f2x: float = 3.71

    def __post_init__(self):
        for name in ("ecs", "lag_years", "f2x"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class ClimateState:
    year: int
    box_inventories: np.ndarray
    concentration: float
    temperature: float

    def __post_init__(self):
        object.__setattr__(self, "box_inventories", _readonly(self.box_inventories))

    @classmethod
    def from_inventories(
        cls,
        year: int,
        inventories,
        temperature: float,
        params: Optional[CarbonCycleParams] = None,
    ) -> "ClimateState":
        """Build a state whose concentration follows from the box inventories."""
        params = params or CarbonCycleParams()
        inventories = np.asarray(inventories, dtype=float)
        concentration = params.preindustrial_ppm + inventories.sum() / params.gtco2_per_ppm
        return cls(int(year), inventories, float(concentration), float(temperature))


def initial_state(
    year: int = 2020,
    concentration_ppm: float = 412.0,
    temperature_c: float = 1.2,
    history_growth: float = 0.02,
    params: Optional[CarbonCycleParams] = None,
) -> ClimateState:
    """State at ``year`` with the given concentration and warming.

    The excess carbon is spread over the boxes as it would be had
    emissions grown exponentially at ``history_growth`` per year.
    """
    params = params or CarbonCycleParams()
    lifetimes = np.asarray(params.box_lifetimes, dtype=float)
    weights = params.shares / (1.0 - np.exp(-(history_growth + 1.0 / lifetimes)))
    excess = (concentration_ppm - params.preindustrial_ppm) * params.gtco2_per_ppm
    inventories = weights / weights.sum() * excess
    return ClimateState.from_inventories(year, inventories, temperature_c, params)


def preindustrial_state(year: int, params: Optional[CarbonCycleParams] = None) -> ClimateState:
    """Empty boxes and zero warming."""
    params = params or CarbonCycleParams()
    return ClimateState.from_inventories(year, np.zeros(len(params.box_shares)), 0.0, params)


def step_concentration(
    state: ClimateState, emissions: float, p: CarbonCycleParams
) -> ClimateState:
    """Advance the carbon boxes one year with ``emissions`` (GtCO2) emitted."""
    inventories = state.box_inventories * p.decay + p.shares * emissions
    return ClimateState.from_inventories(state.year + 1, inventories, state.temperature, p)


def forcing(
    concentration,
    p: ClimateParams,
    exo=0.0,
    preindustrial_ppm: float = CarbonCycleParams.preindustrial_ppm,
):
    """CO2 forcing relative to pre-industrial plus exogenous forcing (W/m2)."""
    return p.f2x * np.log(np.asarray(concentration) / preindustrial_ppm) / LN2 + exo


def step_temperature(state: ClimateState, f: float, p: ClimateParams) -> ClimateState:
    """Relax temperature one year toward the equilibrium of forcing ``f``."""
    temperature = state.temperature + (p.ecs * f / p.f2x - state.temperature) / p.lag_years
    return replace(state, temperature=float(temperature))


@dataclass(frozen=True)
class ClimatePath:
    """Annual concentration (ppm), forcing (W/m2) and temperature (°C)."""

    years: np.ndarray
    concentration: np.ndarray
    forcing: np.ndarray
    temperature: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "years", np.asarray(self.years, dtype=np.int64))
        for name in ("concentration", "forcing", "temperature"):
            if getattr(self, name) is not None:
                object.__setattr__(self, name, _readonly(getattr(self, name)))

    @property
    def peak(self) -> float:
        return float(np.max(self.temperature))

    def at(self, year: int) -> float:
        return float(self.temperature[year_position(self.years, year)])

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "year": self.years,
                "concentration_ppm": self.concentration,
                "forcing_wm2": self.forcing,
                "temperature_c": self.temperature,
            }
        )

    def write_csv(self, path) -> None:
        self.frame().to_csv(path, index=False, float_format="%.6f", lineterminator="\n")


def _check_start(s: EmissionScenario, init: ClimateState) -> None:
    if init.year != s.start_year:
        raise ValueError(
            f"initial state is for {init.year}, scenario '{s.name}' starts in {s.start_year}"
        )


def forcing_path(
    s: EmissionScenario,
    cp: Optional[CarbonCycleParams] = None,
    kp: Optional[ClimateParams] = None,
    init: Optional[ClimateState] = None,
) -> ClimatePath:
    """Concentration and forcing for every scenario year (no temperature)."""
    cp = cp or CarbonCycleParams()
    kp = kp or ClimateParams()
    init = init or initial_state(s.start_year, params=cp)
    _check_start(s, init)

    n = len(s)
    concentration = np.empty(n)
    concentration[0] = init.concentration
    inventories = init.box_inventories.copy()
    decay, shares = cp.decay, cp.shares
    for k in range(1, n):
        inventories = inventories * decay + shares * s.emissions[k - 1]
        concentration[k] = cp.preindustrial_ppm + inventories.sum() / cp.gtco2_per_ppm

    f = forcing(concentration, kp, s.exo_forcing, cp.preindustrial_ppm)
    return ClimatePath(s.years, concentration, f)


def temperature_from_forcing(
    f: np.ndarray,
    kp: ClimateParams,
    t0: float,
    ecs=None,
) -> np.ndarray:
    """Temperature recursion over a forcing path.

    ``ecs`` overrides ``kp.ecs``; an array of sensitivities gives one
    column per value, shape (years, draws).
    """
    ecs = kp.ecs if ecs is None else np.asarray(ecs, dtype=float)
    temperature = np.empty((len(f),) + np.shape(ecs))
    temperature[0] = t0
    for k in range(1, len(f)):
        previous = temperature[k - 1]
        temperature[k] = previous + (ecs * f[k] / kp.f2x - previous) / kp.lag_years
    return temperature


def temperature_path(
    s: EmissionScenario,
    cp: Optional[CarbonCycleParams] = None,
    kp: Optional[ClimateParams] = None,
    init: Optional[ClimateState] = None,
) -> ClimatePath:
    """Run the full emissions -> concentration -> forcing -> temperature chain.

    ``init`` defaults to :func:`initial_state` for the scenario's first year.
    """
    cp = cp or CarbonCycleParams()
    kp = kp or ClimateParams()
    init = init or initial_state(s.start_year, params=cp)
    path = forcing_path(s, cp, kp, init)
    return replace(path, temperature=temperature_from_forcing(path.forcing, kp, init.temperature))


def _anchor_parts(anchor):
    scenario, year, target = anchor
    return scenario, int(year), float(target)


def calibrate(
    anchors: Sequence[Tuple[EmissionScenario, int, float]],
    carbon: Optional[CarbonCycleParams] = None,
    climate: Optional[ClimateParams] = None,
    init: Optional[ClimateState] = None,
    tolerance: float = 0.1,
    already_met: float = 0.01,
    max_iterations: int = 2000,
) -> Tuple[CarbonCycleParams, ClimateParams]:
    """Fit ``ecs`` and ``lag_years`` to (scenario, year, target °C) anchors.

    The box structure and ``f2x`` are held fixed. Starting parameters that
    already meet every anchor within ``already_met`` are returned as they
    are. Otherwise Powell's direction-set search minimizes the squared
    anchor error, and a :class:`CalibrationError` is raised when any
    residual still exceeds ``tolerance``.
    """
    anchors = [_anchor_parts(a) for a in anchors]
    if not anchors:
        raise ValueError("calibrate needs at least one anchor")
    carbon = carbon or CarbonCycleParams()
    climate = climate or ClimateParams()

    prepared = []
    for scenario, year, target in anchors:
        state = init if init is not None else initial_state(scenario.start_year, params=carbon)
        path = forcing_path(scenario, carbon, climate, state)
        prepared.append((path.forcing[: scenario.index_of(year) + 1], state.temperature, target))

    def residuals(x) -> np.ndarray:
        kp = replace(climate, ecs=float(x[0]), lag_years=float(x[1]))
        return np.array(
            [temperature_from_forcing(f, kp, t0)[-1] - target for f, t0, target in prepared]
        )

    def sse(x) -> float:
        return float(np.sum(residuals(x) ** 2))

    start = np.array([climate.ecs, climate.lag_years])
    r0 = residuals(start)
    if np.all(np.abs(r0) <= already_met):
        logger.info(
            "starting parameters meet all %d anchors (max residual %.4f °C)",
            len(anchors),
            np.max(np.abs(r0)),
        )
        return carbon, climate

    result = minimize(
        sse,
        start,
        method="Powell",
        bounds=[(0.5, 10.0), (1.0, 200.0)],
        options={"maxiter": max_iterations, "xtol": 1e-6, "ftol": 1e-12},
    )
    best = replace(climate, ecs=float(result.x[0]), lag_years=float(result.x[1]))
    r = residuals(result.x)
    logger.debug("Powell finished after %d evaluations: %s", result.nfev, result.message)
    if np.any(np.abs(r) > tolerance):
        raise CalibrationError(
            f"calibration missed anchors by up to {np.max(np.abs(r)):.3f} °C "
            f"(best ecs={best.ecs:.3f}, lag={best.lag_years:.1f})",
            best=(carbon, best),
            residuals=r,
        )
    if not result.success:
        logger.warning("optimizer did not report success (%s) but anchors are met", result.message)
    logger.info(
        "calibrated ecs=%.3f °C lag=%.2f yr, max residual %.4f °C",
        best.ecs,
        best.lag_years,
        np.max(np.abs(r)),
    )
    return carbon, best


def _declining_path(base: EmissionScenario, rate: float, start_year: int, floor: float) -> np.ndarray:
    emissions = base.emissions.copy()
    k = base.index_of(start_year)
    elapsed = np.arange(1, len(base) - k)
    emissions[k + 1 :] = np.maximum(emissions[k] * (1.0 - rate * elapsed), floor)
    return emissions


def invert_emissions(
    base: EmissionScenario,
    ceiling: float,
    carbon: Optional[CarbonCycleParams] = None,
    climate: Optional[ClimateParams] = None,
    init: Optional[ClimateState] = None,
    start_year: int = 2025,
    max_rate: float = 0.30,
    floor: float = -20.0,
    window: float = 0.05,
    max_iterations: int = 100,
) -> EmissionScenario:
    """Emission path whose peak warming lies in ``[ceiling - window, ceiling]``.

    After ``start_year`` emissions fall linearly by a constant fraction
    ``rate`` of their ``start_year`` level per year, down to ``floor``
    (net-negative). ``rate`` is found by bisection on ``[0, max_rate]``.
    A baseline that already peaks at or below the ceiling is returned
    unchanged.
    """
    carbon = carbon or CarbonCycleParams()
    climate = climate or ClimateParams()
    init = init or initial_state(base.start_year, params=carbon)

    def peak(rate: float) -> float:
        trial = base.with_emissions(_declining_path(base, rate, start_year, floor))
        return temperature_path(trial, carbon, climate, init).peak

    baseline_peak = temperature_path(base, carbon, climate, init).peak
    if baseline_peak <= ceiling:
        logger.info("%s already peaks at %.3f °C <= %.2f °C", base.name, baseline_peak, ceiling)
        return base

    min_peak = peak(max_rate)
    if min_peak > ceiling:
        raise InfeasibleCeilingError(ceiling, min_peak)

    lo, hi, hi_peak = 0.0, max_rate, min_peak
    for iteration in range(max_iterations):
        if hi_peak >= ceiling - window:
            break
        mid = 0.5 * (lo + hi)
        mid_peak = peak(mid)
        logger.debug("bisection %d: rate=%.5f peak=%.4f", iteration, mid, mid_peak)
        if mid_peak > ceiling:
            lo = mid
        else:
            hi, hi_peak = mid, mid_peak

    if hi_peak < ceiling - window:
        logger.warning(
            "%s: bisection stopped after %d iterations with peak %.3f °C, below the %.2f-%.2f °C window",
            base.name,
            max_iterations,
            hi_peak,
            ceiling - window,
            ceiling,
        )

    logger.info(
        "%s below %.2f °C: decline %.2f%%/yr of %d level, peak %.3f °C",
        base.name,
        ceiling,
        100 * hi,
        start_year,
        hi_peak,
    )
    return base.with_emissions(
        _declining_path(base, hi, start_year, floor), name=f"{base.name}_below_{ceiling:g}"
    )


def peak_year(path: ClimatePath) -> int:
    return int(path.years[int(np.argmax(path.temperature))])
