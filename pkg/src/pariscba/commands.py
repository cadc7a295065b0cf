"""CLI subcommands, one registered Command per figure or table."""

import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from .carbon_climate import (
    CarbonCycleParams,
    ClimateParams,
    calibrate,
    invert_emissions,
    temperature_path,
)
from .cba import (
    DISCOUNT_RATES,
    CbaResult,
    MonteCarloResult,
    monte_carlo,
    risk_adjusted_npv,
    risk_aversion_frontier,
    run_cba,
)
from .impacts import (
    bundled_estimates,
    fit_all,
    impact_histogram,
    load_estimates,
    model_average,
    summarize_estimates,
)
from .job import Command
from .kaya import DEFAULT_PERIODS, kaya_indices, table1
from .policy_costs import (
    EX_ANTE_RANGE,
    bundled_tax_records,
    default_cost_model,
    efficacy_range_check,
    efficacy_table,
    load_tax_records,
    subsidy_path,
)
from .registry import registry
from .scenario_io import EmissionScenario, bundled_scenario, resolve_scenario

logger = logging.getLogger(__name__)

# (bundled scenario, year, °C) the climate parameters are calibrated to
TEMPERATURE_ANCHORS = (("ssp585_like", 2100, 4.8), ("ssp370_like", 2100, 3.9))

DEFAULT_POLICIES = {2.0: "paris20", 1.5: "paris15"}


@lru_cache(maxsize=1)
def calibrated_params() -> Tuple[CarbonCycleParams, ClimateParams]:
    """Default parameters calibrated to the bundled temperature anchors."""
    anchors = [(bundled_scenario(name), year, target) for name, year, target in TEMPERATURE_ANCHORS]
    return calibrate(anchors)


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format="%.6f", lineterminator="\n", na_rep="")
    logger.info("wrote %s", path)
    return path


def _target_label(target: float) -> str:
    return f"{target:g}".replace(".", "p")


@dataclass
class CbaCommandBase(Command):
    """Shared scenario and parameter handling of the cost-benefit commands."""

    def targets(self) -> Tuple[float, ...]:
        return (self.config.target,) if self.config.target is not None else (2.0, 1.5)

    def baseline(self) -> EmissionScenario:
        return resolve_scenario(self.config.baseline)

    def policy(self, baseline: EmissionScenario, target: float) -> EmissionScenario:
        if self.config.policy:
            return resolve_scenario(self.config.policy)
        if self.config.invert:
            carbon, climate = calibrated_params()
            return invert_emissions(baseline, target, carbon, climate)
        return bundled_scenario(DEFAULT_POLICIES[target])

    def setup(self, target: float):
        carbon, climate = calibrated_params()
        baseline = self.baseline()
        policy = self.policy(baseline, target)
        self.heading = f"{baseline.name} vs {policy.name}"
        return baseline, policy, default_cost_model(target), carbon, climate

    def deterministic(self, target: float, discount_rate: Optional[float] = None) -> CbaResult:
        cfg = self.config
        baseline, policy, cost_model, carbon, climate = self.setup(target)
        return run_cba(
            baseline,
            policy,
            cost_model,
            carbon=carbon,
            climate=climate,
            discount_rate=cfg.discount_rate if discount_rate is None else discount_rate,
            eta=cfg.eta,
            cost_multiplier=cfg.cost_multiplier,
            coverage_fraction=cfg.coverage_fraction,
        )

    def draws(self, target: float) -> Optional[MonteCarloResult]:
        """Monte Carlo run, or ``None`` when no draws are requested."""
        cfg = self.config
        if cfg.n_draws == 0:
            return None
        baseline, policy, cost_model, carbon, climate = self.setup(target)
        return monte_carlo(
            baseline,
            policy,
            cost_model,
            cfg.n_draws,
            cfg.seed,
            carbon=carbon,
            climate=climate,
            discount_rate=cfg.discount_rate,
            eta=cfg.eta,
            cost_multiplier=cfg.cost_multiplier,
            coverage_fraction=cfg.coverage_fraction,
            workers=cfg.workers,
        )


@registry.register
@dataclass
class KayaCommand(Command):
    """Kaya growth-rate table of a scenario carrying primary energy."""

    scenario: str = "kaya_history"

    def run(self) -> List[Path]:
        s = resolve_scenario(self.scenario)
        periods = [p for p in DEFAULT_PERIODS if s.start_year <= p[0] and p[1] <= s.end_year]
        if (s.start_year, s.end_year) not in periods:
            periods.append((s.start_year, s.end_year))
        convention = "geometric" if self.config.geometric_rates else "continuous"
        table = table1(s, periods, convention).reset_index()
        written = [write_csv(table, self.output_path(f"kaya_{s.name}.csv"))]
        if self.config.plot:
            from .plotting import plot_kaya_indices

            written.append(plot_kaya_indices(kaya_indices(s), self.output_path(f"kaya_{s.name}.png")))
        return written


@registry.register
@dataclass
class SimulateCommand(Command):
    """Temperature path of a scenario (and its Kaya indices when it has energy)."""

    scenario: Optional[str] = None

    def run(self) -> List[Path]:
        s = resolve_scenario(self.scenario or self.config.baseline)
        carbon, climate = calibrated_params()
        path = temperature_path(s, carbon, climate)
        logger.info("%s: %.3f °C in %d, peak %.3f °C", s.name, path.temperature[-1], s.end_year, path.peak)

        target = self.output_path(f"temperature_{s.name}.csv")
        path.write_csv(target)
        written = [target]
        if s.energy is not None:
            indices = kaya_indices(s).reset_index()
            written.append(write_csv(indices, self.output_path(f"kaya_indices_{s.name}.csv")))
        if self.config.plot:
            from .plotting import plot_temperature

            written.append(plot_temperature({s.name: path}, self.output_path(f"temperature_{s.name}.png")))
        return written


@registry.register
@dataclass
class EfficacyCommand(Command):
    """Carbon-tax efficacy of ex-ante models and ex-post studies."""

    records: Optional[str] = None

    def run(self) -> List[Path]:
        records = load_tax_records(self.records) if self.records else bundled_tax_records()
        check = efficacy_range_check(records)
        if check:
            logger.info("ex-ante efficacy spread: %.2f", check["spread_ratio"])
        table = efficacy_table(records)
        lo, hi = EX_ANTE_RANGE
        table["in_ex_ante_range"] = table["efficacy"].between(lo, hi)
        written = [write_csv(table, self.output_path("efficacy.csv"))]
        if self.config.plot:
            from .plotting import plot_efficacy

            written.append(plot_efficacy(table, self.output_path("efficacy.png")))
        return written


@registry.register
@dataclass
class ImpactsCommand(Command):
    """Fits, model average and weighted histogram of impact estimates."""

    estimates: Optional[str] = None
    warming: float = 2.5

    def run(self) -> List[Path]:
        estimates = load_estimates(self.estimates) if self.estimates else bundled_estimates()
        fits = fit_all(estimates)
        composite = model_average(fits)

        fit_table = pd.DataFrame(
            {
                "form": [f.form for f in fits],
                "params": [";".join(f"{p:.6g}" for p in f.params) for f in fits],
                "wsse": [f.wsse for f in fits],
                "fit_weight": [f.fit_weight for f in fits],
            }
        )
        histogram = impact_histogram(estimates, composite, target_T=self.warming)
        summary = summarize_estimates(estimates, composite, target_T=self.warming)
        summary_table = pd.DataFrame({"statistic": list(summary), "value": list(summary.values())})

        written = [
            write_csv(fit_table, self.output_path("impact_fits.csv")),
            write_csv(histogram, self.output_path("impact_histogram.csv")),
            write_csv(summary_table, self.output_path("impact_summary.csv")),
        ]
        if self.config.plot:
            from .plotting import plot_histogram

            written.append(plot_histogram(histogram, self.output_path("impact_histogram.png"), self.warming))
        return written


@registry.register
@dataclass
class CbaCommand(CbaCommandBase):
    """Cost and benefit paths for each target.

    Also writes the subsidy bill for the policy path's net removals at
    ``subsidy_price`` USD/tCO2.
    """

    subsidy_price: float = 100.0

    def subsidy_table(self, policy: EmissionScenario) -> pd.DataFrame:
        bill = subsidy_path(policy, self.subsidy_price)
        if bill.any():
            logger.info(
                "%s: subsidy peaks at %.3f %% GDP in %d", policy.name, bill.max(), policy.years[np.argmax(bill)]
            )
        return pd.DataFrame(
            {
                "year": policy.years,
                "removals_gtco2": np.maximum(-policy.emissions, 0.0),
                "subsidy_pct_gdp": bill,
            }
        )

    def run(self) -> List[Path]:
        written, results = [], {}
        for target in self.targets():
            result, draws = self.deterministic(target), self.draws(target)
            label = _target_label(target)
            results[f"{target:g} °C"] = result
            written.append(write_csv(result.frame(), self.output_path(f"cba_{label}.csv")))
            policy = self.policy(self.baseline(), target)
            written.append(write_csv(self.subsidy_table(policy), self.output_path(f"subsidy_{label}.csv")))
            if draws is not None:
                mc = draws.result
                written.append(write_csv(mc.frame(), self.output_path(f"cba_{label}_mc.csv")))
                for name, table in mc.percentiles.items():
                    written.append(write_csv(table, self.output_path(f"cba_{label}_{name}_percentiles.csv")))
        if self.config.plot:
            from .plotting import plot_cba

            written.append(plot_cba(results, self.output_path("cba.png")))
        return written


@registry.register
@dataclass
class NetbenCommand(CbaCommandBase):
    """Net benefit paths for each target."""

    def run(self) -> List[Path]:
        written, results = [], {}
        for target in self.targets():
            result, draws = self.deterministic(target), self.draws(target)
            shown = draws.result if draws is not None else result
            results[f"{target:g} °C"] = shown
            frame = shown.frame()[["year", "net", "net_lo", "net_hi"]]
            if draws is not None:
                percentiles = shown.percentiles["net"].drop(columns="year")
                frame = pd.concat([frame, percentiles.add_prefix("net_")], axis=1)
            written.append(write_csv(frame, self.output_path(f"netben_{_target_label(target)}.csv")))
            logger.info(
                "%g °C: central net benefit %.3f to %.3f %% GDP",
                target,
                result.net_benefit.central.min(),
                result.net_benefit.central.max(),
            )
        if self.config.plot:
            from .plotting import plot_cba

            written.append(plot_cba(results, self.output_path("netben.png"), net=True))
        return written


@registry.register
@dataclass
class NpvCommand(CbaCommandBase):
    """Net present value (and certainty equivalent with draws) per target and discount rate."""

    def run(self) -> List[Path]:
        rows, frontier_rows = [], []
        for target in self.targets():
            draws = self.draws(target)
            for rate in DISCOUNT_RATES:
                result = self.deterministic(target, discount_rate=rate)
                ce = risk_adjusted_npv(draws.npv_draws[rate], self.config.eta) if draws else np.nan
                rows.append(
                    {
                        "target": target,
                        "discount_rate": rate,
                        "eta": self.config.eta,
                        "npv_trillion_usd": result.npv_usd,
                        "ce_trillion_usd": ce,
                    }
                )
            if draws is not None:
                for rate, eta in risk_aversion_frontier(draws.npv_draws, DISCOUNT_RATES).items():
                    frontier_rows.append(
                        {"target": target, "discount_rate": rate, "break_even_eta": np.nan if eta is None else eta}
                    )

        written = [write_csv(pd.DataFrame(rows), self.output_path("npv.csv"))]
        if frontier_rows:
            written.append(write_csv(pd.DataFrame(frontier_rows), self.output_path("npv_frontier.csv")))
        return written

