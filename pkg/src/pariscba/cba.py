"""Cost-benefit analysis of a temperature target.

Costs and benefits are % of baseline GDP per year. Present values are in
trillion USD, discounted to 2020. Uncertainty is propagated by Monte
Carlo over climate sensitivity, the damage level and the cost level; the
draws are fanned out over a :class:`~pariscba.manager.JobManager`.
"""

import asyncio
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from beartype import BeartypeConf, beartype
from scipy.optimize import brentq
from scipy.special import logsumexp

from .carbon_climate import (
    CarbonCycleParams,
    ClimateParams,
    ClimateState,
    forcing_path,
    initial_state,
    temperature_from_forcing,
)
from .exceptions import AlignmentError, DistributionError, DomainError
from .impacts import UncertaintyBand, coverage_adjust, damage, default_impact_function
from .job import DrawBatchJob
from .manager import JobManager
from .policy_costs import CostModel, cost_band, cost_path
from .scenario_io import EmissionScenario, year_position

logger = logging.getLogger(__name__)

BASE_YEAR = 2020
PERCENTILES = (5, 17, 50, 83, 95)
DISCOUNT_RATES = (0.0, 0.01, 0.03, 0.05)


@dataclass(frozen=True)
class Band:
    """A per-year path with lower and upper bounds."""

    years: np.ndarray
    central: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        for name in ("years", "central", "lo", "hi"):
            array = np.array(getattr(self, name), dtype=np.int64 if name == "years" else float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        if not (self.years.shape == self.central.shape == self.lo.shape == self.hi.shape):
            raise AlignmentError("band arrays must share the year axis")

    @classmethod
    def exact(cls, years, central) -> "Band":
        return cls(years, central, central, central)


@dataclass(frozen=True)
class CbaResult:
    """Cost, benefit and net benefit paths (% GDP) and their present value.

    ``percentiles`` holds the Monte Carlo percentile tables (one per
    quantity, rows are years) when the result comes from draws.
    """

    years: np.ndarray
    cost: Band
    benefit: Band
    net_benefit: Band
    npv_usd: float
    discount_rate: float
    risk_aversion_eta: float = 0.0
    certainty_equivalent_usd: Optional[float] = None
    percentiles: Dict[str, pd.DataFrame] = field(default_factory=dict)

    def frame(self) -> pd.DataFrame:
        """Result table with columns year, cost, cost_lo, ... net_hi."""
        data = {"year": self.years}
        for name, band in (("cost", self.cost), ("benefit", self.benefit), ("net", self.net_benefit)):
            data[name] = band.central
            data[f"{name}_lo"] = band.lo
            data[f"{name}_hi"] = band.hi
        return pd.DataFrame(data)

    def at(self, year: int) -> Dict[str, float]:
        i = year_position(self.years, year)
        return {
            "cost": float(self.cost.central[i]),
            "benefit": float(self.benefit.central[i]),
            "net": float(self.net_benefit.central[i]),
        }


def _check_aligned(a, b, what: str) -> None:
    if len(a) != len(b) or not np.array_equal(a, b):
        raise AlignmentError(f"{what} are not on the same year axis")


def net_benefit(cost: Band, benefit: Band) -> Band:
    """Benefit minus cost, with spreads combined in quadrature.

    The low end pairs low benefits with high costs, the high end the
    reverse.
    """
    _check_aligned(cost.years, benefit.years, "cost and benefit paths")
    central = benefit.central - cost.central
    down = np.hypot(benefit.central - benefit.lo, cost.hi - cost.central)
    up = np.hypot(benefit.hi - benefit.central, cost.central - cost.lo)
    return Band(cost.years, central, central - down, central + up)


def discount_factors(years, rate: float, base_year: int = BASE_YEAR) -> np.ndarray:
    if rate < 0:
        raise DomainError(f"discount rate must be non-negative, got {rate}")
    return (1.0 + rate) ** -(np.asarray(years, dtype=float) - base_year)


def npv(path, gdp, rate: float, years=None, base_year: int = BASE_YEAR) -> float:
    """Present value (trillion USD) of a % GDP path.

    Without ``years`` the first value is taken to fall in ``base_year``.
    """
    path = np.asarray(path, dtype=float)
    gdp = np.asarray(gdp, dtype=float)
    if path.shape != gdp.shape:
        raise AlignmentError(f"path has {path.size} values, gdp has {gdp.size}")
    years = base_year + np.arange(path.size) if years is None else np.asarray(years)
    if years.shape != path.shape:
        raise AlignmentError(f"path has {path.size} values, years has {years.size}")
    return float(np.sum(path * gdp / 100.0 * discount_factors(years, rate, base_year)))


@beartype(conf=BeartypeConf(is_pep484_tower=True))
def ramsey_rate(pure_time_pref: float, eta: float, growth: float) -> float:
    """Consumption discount rate: pure time preference plus eta times growth."""
    return pure_time_pref + eta * growth


def certainty_equivalent(samples, eta: float) -> float:
    """Sure value equivalent to ``samples`` under CRRA utility with risk aversion ``eta``.

    eta = 0 gives the mean and eta = 1 the geometric mean. Power utility
    needs non-negative samples for 0 < eta < 1 and positive samples for
    eta >= 1.
    """
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size < 2:
        raise DomainError("certainty_equivalent needs at least 2 samples")
    if eta < 0:
        raise DomainError(f"risk aversion must be non-negative, got {eta}")
    if eta == 0:
        return float(np.mean(x))
    if eta >= 1 and np.any(x <= 0):
        raise DomainError(f"eta={eta} needs positive consumption, got {x.min()}")
    if np.any(x < 0):
        raise DomainError(f"eta={eta} needs non-negative consumption, got {x.min()}")

    with np.errstate(divide="ignore"):
        log_x = np.log(x)
    if eta == 1:
        return float(np.exp(np.mean(log_x)))
    power = 1.0 - eta
    log_mean = logsumexp(power * log_x) - np.log(x.size)
    return float(np.exp(log_mean / power))


@dataclass(frozen=True)
class NpvDraws:
    """Present values (trillion USD) per Monte Carlo draw at one discount rate.

    ``wealth`` is the present value of baseline GDP.
    """

    discount_rate: float
    wealth: float
    baseline_damage: np.ndarray
    policy_damage: np.ndarray
    cost: np.ndarray

    @property
    def npv(self) -> np.ndarray:
        return self.baseline_damage - self.policy_damage - self.cost


def risk_adjusted_npv(draws: NpvDraws, eta: float) -> float:
    """Certainty-equivalent consumption with the policy minus without it.

    Consumption is discounted GDP net of discounted damages and, with the
    policy, discounted costs. With eta = 0 this is the mean NPV.
    """
    with_policy = draws.wealth - draws.policy_damage - draws.cost
    without_policy = draws.wealth - draws.baseline_damage
    return certainty_equivalent(with_policy, eta) - certainty_equivalent(without_policy, eta)


def risk_aversion_frontier(
    draws: Mapping[float, NpvDraws],
    rates: Optional[Sequence[float]] = None,
    eta_max: float = 100.0,
) -> Dict[float, Optional[float]]:
    """Smallest eta at which the risk-adjusted NPV turns non-negative, per rate.

    ``None`` marks rates where even ``eta_max`` does not justify the policy.
    """
    rates = sorted(draws) if rates is None else rates
    frontier = {}
    for rate in rates:
        sample = draws[rate]

        def value(eta: float) -> float:
            return risk_adjusted_npv(sample, eta)

        if value(0.0) >= 0:
            frontier[rate] = 0.0
        elif value(eta_max) < 0:
            frontier[rate] = None
        else:
            frontier[rate] = float(brentq(value, 0.0, eta_max, xtol=1e-6))
        logger.info("rate %.3f: break-even eta %s", rate, frontier[rate])
    return frontier


@dataclass(frozen=True)
class _Pipeline:
    """Everything a draw needs that does not depend on the draw."""

    years: np.ndarray
    gdp: np.ndarray
    baseline_forcing: np.ndarray
    policy_forcing: np.ndarray
    baseline_t0: float
    policy_t0: float
    climate: ClimateParams
    impact: object
    cost: np.ndarray
    coverage_fraction: float

    def evaluate(self, ecs, damage_factor, cost_multiplier) -> Dict[str, np.ndarray]:
        """Per-year paths, one column per draw."""
        t_b = temperature_from_forcing(self.baseline_forcing, self.climate, self.baseline_t0, ecs)
        t_p = temperature_from_forcing(self.policy_forcing, self.climate, self.policy_t0, ecs)
        d_b = coverage_adjust(damage(t_b, self.impact) * damage_factor, self.coverage_fraction)
        d_p = coverage_adjust(damage(t_p, self.impact) * damage_factor, self.coverage_fraction)
        benefit = d_b - d_p
        cost = self.cost[:, None] * cost_multiplier
        return {
            "baseline_damage": d_b,
            "policy_damage": d_p,
            "benefit": benefit,
            "cost": cost,
            "net": benefit - cost,
        }


def _pipeline(
    baseline: EmissionScenario,
    policy: EmissionScenario,
    cost_model: CostModel,
    impact,
    carbon: Optional[CarbonCycleParams],
    climate: Optional[ClimateParams],
    init: Optional[ClimateState],
    coverage_fraction: float,
) -> _Pipeline:
    _check_aligned(baseline.years, policy.years, "baseline and policy scenarios")
    carbon = carbon or CarbonCycleParams()
    climate = climate or ClimateParams()
    init = init or initial_state(baseline.start_year, params=carbon)
    return _Pipeline(
        years=baseline.years,
        gdp=baseline.gdp,
        baseline_forcing=forcing_path(baseline, carbon, climate, init).forcing,
        policy_forcing=forcing_path(policy, carbon, climate, init).forcing,
        baseline_t0=init.temperature,
        policy_t0=init.temperature,
        climate=climate,
        impact=impact or default_impact_function(),
        cost=cost_path(cost_model, baseline.years),
        coverage_fraction=coverage_fraction,
    )


def run_cba(
    baseline: EmissionScenario,
    policy: EmissionScenario,
    cost_model: CostModel,
    impact=None,
    carbon: Optional[CarbonCycleParams] = None,
    climate: Optional[ClimateParams] = None,
    init: Optional[ClimateState] = None,
    discount_rate: float = 0.03,
    eta: float = 0.0,
    band: Optional[UncertaintyBand] = None,
    cost_multiplier: float = 1.0,
    coverage_fraction: float = 0.0,
) -> CbaResult:
    """Deterministic cost-benefit run at central parameter values.

    Benefit bands come from ``band`` and cost bands from the cost model's
    spread across models.
    """
    pipe = _pipeline(baseline, policy, cost_model, impact, carbon, climate, init, coverage_fraction)
    paths = pipe.evaluate(np.array([pipe.climate.ecs]), np.array([1.0]), np.array([cost_multiplier]))
    cost = paths["cost"][:, 0]
    benefit = paths["benefit"][:, 0]

    cost_lo, cost_hi = cost_band(cost_model, pipe.years, cost_multiplier)
    benefit_lo, benefit_hi = (band or UncertaintyBand()).bounds(benefit)
    cost_b = Band(pipe.years, cost, cost_lo, cost_hi)
    benefit_b = Band(pipe.years, benefit, benefit_lo, benefit_hi)
    net = net_benefit(cost_b, benefit_b)
    return CbaResult(
        years=pipe.years,
        cost=cost_b,
        benefit=benefit_b,
        net_benefit=net,
        npv_usd=npv(net.central, pipe.gdp, discount_rate, pipe.years),
        discount_rate=discount_rate,
        risk_aversion_eta=eta,
    )


@dataclass(frozen=True)
class MonteCarloConfig:
    """Distributions of the uncertain inputs.

    Climate sensitivity is lognormal around the central value. Damages are
    scaled by a two-piece normal factor with mode 1 (relative spreads
    below/above the mode). The cost multiplier is normal around its
    central value; ``cost_sd`` is relative to the 2100 cost and defaults to
    the cost model's spread across models.
    """

    ecs_sigma_log: float = 0.25
    damage_sd_below: float = 1.2 / 2.8
    damage_sd_above: float = 1.8 / 2.8
    cost_sd: Optional[float] = None

    def __post_init__(self):
        for name in ("ecs_sigma_log", "damage_sd_below", "damage_sd_above", "cost_sd"):
            value = getattr(self, name)
            if value is not None and not (np.isfinite(value) and value >= 0):
                raise DistributionError(f"{name} must be a finite non-negative number, got {value}")

    @classmethod
    def degenerate(cls) -> "MonteCarloConfig":
        """All spreads zero: every draw equals the central run."""
        return cls(ecs_sigma_log=0.0, damage_sd_below=0.0, damage_sd_above=0.0, cost_sd=0.0)


def sample_inputs(
    config: MonteCarloConfig,
    seeds: Sequence[np.random.SeedSequence],
    ecs_median: float,
    cost_sd: float,
    cost_multiplier: float = 1.0,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sensitivity, damage factor and cost multiplier, one per seed."""
    z = np.empty((len(seeds), 3))
    u = np.empty(len(seeds))
    for i, seed in enumerate(seeds):
        rng = np.random.default_rng(seed)
        z[i] = rng.standard_normal(3)
        u[i] = rng.random()

    ecs = ecs_median * np.exp(config.ecs_sigma_log * z[:, 0])

    below, above = config.damage_sd_below, config.damage_sd_above
    p_below = below / (below + above) if below + above > 0 else 0.0
    magnitude = np.abs(z[:, 1])
    factor = np.where(u < p_below, 1.0 - below * magnitude, 1.0 + above * magnitude)

    multiplier = np.maximum(cost_multiplier + cost_multiplier * cost_sd * z[:, 2], 0.0)
    return ecs, factor, multiplier


@dataclass(frozen=True)
class _DrawEvaluator:
    pipeline: _Pipeline
    config: MonteCarloConfig
    seeds: Tuple[np.random.SeedSequence, ...]
    ecs_median: float
    cost_sd: float
    cost_multiplier: float
    record_index: np.ndarray
    rates: Tuple[float, ...]

    def __call__(self, start: int, stop: int) -> Dict[str, np.ndarray]:
        ecs, factor, multiplier = sample_inputs(
            self.config, self.seeds[start:stop], self.ecs_median, self.cost_sd, self.cost_multiplier
        )
        paths = self.pipeline.evaluate(ecs, factor, multiplier)
        out = {name: paths[name][self.record_index] for name in ("cost", "benefit", "net")}
        gdp = self.pipeline.gdp[:, None] / 100.0
        for name in ("baseline_damage", "policy_damage", "cost"):
            out[f"pv_{name}"] = np.stack(
                [
                    np.sum(paths[name] * gdp * discount_factors(self.pipeline.years, rate)[:, None], axis=0)
                    for rate in self.rates
                ]
            )
        return out


@dataclass(frozen=True)
class MonteCarloResult:
    """Outcome of :func:`monte_carlo`: the summary and the per-draw present values."""

    result: CbaResult
    npv_draws: Dict[float, NpvDraws]


def _percentile_table(years, values: np.ndarray) -> pd.DataFrame:
    table = pd.DataFrame(
        np.percentile(values, PERCENTILES, axis=1).T,
        columns=[f"p{p}" for p in PERCENTILES],
    )
    table.insert(0, "year", years)
    return table


def _chunks(n: int, size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + size, n)) for start in range(0, n, size)]


async def monte_carlo_async(
    baseline: EmissionScenario,
    policy: EmissionScenario,
    cost_model: CostModel,
    n_draws: int,
    seed: int,
    config: Optional[MonteCarloConfig] = None,
    impact=None,
    carbon: Optional[CarbonCycleParams] = None,
    climate: Optional[ClimateParams] = None,
    init: Optional[ClimateState] = None,
    discount_rate: float = 0.03,
    eta: float = 0.0,
    cost_multiplier: float = 1.0,
    coverage_fraction: float = 0.0,
    record_years: Optional[Sequence[int]] = None,
    discount_rates: Sequence[float] = DISCOUNT_RATES,
    workers: int = 4,
    chunk_size: int = 250,
) -> MonteCarloResult:
    """Monte Carlo cost-benefit run.

    Draw ``i`` uses the ``i``-th child of ``SeedSequence(seed)``, so results
    are bit-identical for any ``workers`` and ``chunk_size``. Bands in the
    returned result are the 17th and 83rd percentiles around the median;
    the full percentile tables are in ``result.percentiles``. With
    ``record_years`` only those years are kept.
    """
    if n_draws < 1:
        raise DistributionError(f"n_draws must be at least 1, got {n_draws}")
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    config = config or MonteCarloConfig()
    pipe = _pipeline(baseline, policy, cost_model, impact, carbon, climate, init, coverage_fraction)

    if record_years is None:
        record_index = np.arange(len(pipe.years))
    else:
        record_index = np.array([baseline.index_of(y) for y in record_years])
    rates = tuple(sorted({float(r) for r in discount_rates} | {float(discount_rate)}))
    cost_sd = config.cost_sd
    if cost_sd is None:
        cost_sd = cost_model.sd_across_models / cost_model.cost_2100 if cost_model.cost_2100 else 0.0

    evaluator = _DrawEvaluator(
        pipeline=pipe,
        config=config,
        seeds=tuple(np.random.SeedSequence(seed).spawn(n_draws)),
        ecs_median=pipe.climate.ecs,
        cost_sd=cost_sd,
        cost_multiplier=cost_multiplier,
        record_index=record_index,
        rates=rates,
    )
    jobs = [DrawBatchJob(start=a, stop=b, evaluate=evaluator) for a, b in _chunks(n_draws, chunk_size)]
    manager = JobManager(max_workers=workers)
    batches = await manager.run_all(jobs)
    merged = {key: np.concatenate([b[key] for b in batches], axis=1) for key in batches[0]}
    logger.info("evaluated %d draws in %d batches", n_draws, len(jobs))

    years = pipe.years[record_index]
    tables = {name: _percentile_table(years, merged[name]) for name in ("cost", "benefit", "net")}
    bands = {
        name: Band(years, table["p50"], table["p17"], table["p83"]) for name, table in tables.items()
    }

    npv_draws = {}
    for k, rate in enumerate(rates):
        wealth = float(np.sum(pipe.gdp * discount_factors(pipe.years, rate)))
        npv_draws[rate] = NpvDraws(
            discount_rate=rate,
            wealth=wealth,
            baseline_damage=merged["pv_baseline_damage"][k],
            policy_damage=merged["pv_policy_damage"][k],
            cost=merged["pv_cost"][k],
        )
    central = npv_draws[float(discount_rate)]
    ce = risk_adjusted_npv(central, eta) if n_draws >= 2 else None

    result = CbaResult(
        years=years,
        cost=bands["cost"],
        benefit=bands["benefit"],
        net_benefit=bands["net"],
        npv_usd=float(np.mean(central.npv)),
        discount_rate=discount_rate,
        risk_aversion_eta=eta,
        certainty_equivalent_usd=ce,
        percentiles=tables,
    )
    return MonteCarloResult(result=result, npv_draws=npv_draws)


def monte_carlo(*args, **kwargs) -> MonteCarloResult:
    """Blocking wrapper around :func:`monte_carlo_async`."""
    return asyncio.run(monte_carlo_async(*args, **kwargs))
