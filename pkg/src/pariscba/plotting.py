"""Static PNG charts of command outputs.

Figures are built with the object-oriented ``Figure`` API (no pyplot
state), so they can be drawn from worker threads.
"""

import logging
from pathlib import Path
from typing import Dict

import pandas as pd
from matplotlib.figure import Figure

from .carbon_climate import ClimatePath
from .cba import CbaResult

logger = logging.getLogger(__name__)

PNG_METADATA = {"Software": None}


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=PNG_METADATA)
    logger.info("wrote %s", path)
    return path


def plot_kaya_indices(indices: pd.DataFrame, path) -> Path:
    fig = Figure(figsize=(8, 5))
    ax = fig.subplots()
    for column in indices.columns:
        ax.plot(indices.index, indices[column], label=column.replace("_", " "))
    ax.axhline(1.0, color="grey", linewidth=0.5)
    ax.set_xlabel("Year")
    ax.set_ylabel(f"Index ({indices.index[0]} = 1)")
    ax.legend()
    return _save(fig, path)


def plot_temperature(paths: Dict[str, ClimatePath], path) -> Path:
    fig = Figure(figsize=(8, 5))
    ax = fig.subplots()
    for name, climate in paths.items():
        ax.plot(climate.years, climate.temperature, label=name)
    ax.set_xlabel("Year")
    ax.set_ylabel("Warming above pre-industrial [°C]")
    ax.legend()
    return _save(fig, path)


def plot_efficacy(table: pd.DataFrame, path) -> Path:
    """Efficacy per record on a log axis, ex-ante and ex-post side by side."""
    fig = Figure(figsize=(8, 5))
    ax = fig.subplots()
    shown = table[table["efficacy"] > 0]
    for kind, marker in (("ex_ante", "o"), ("ex_post", "s")):
        rows = shown[shown["kind"] == kind]
        ax.scatter(rows["efficacy"], rows["source"], marker=marker, label=kind.replace("_", "-"))
    ax.set_xscale("log")
    ax.set_xlabel("Emission reduction in 2030 [%] per USD/tCO2")
    ax.legend()
    return _save(fig, path)


def plot_histogram(histogram: pd.DataFrame, path, target_T: float = 2.5) -> Path:
    fig = Figure(figsize=(8, 5))
    ax = fig.subplots()
    widths = histogram["bin_upper"] - histogram["bin_lower"]
    ax.bar(histogram["bin_lower"], histogram["weighted_frequency"], width=widths, align="edge")
    ax.set_xlabel(f"Welfare impact at {target_T:g} °C [% GDP]")
    ax.set_ylabel("Weighted frequency")
    return _save(fig, path)


def plot_cba(results: Dict[str, CbaResult], path, net: bool = False) -> Path:
    """Cost and benefit paths with bands, or net benefits when ``net``."""
    fig = Figure(figsize=(8, 5))
    ax = fig.subplots()
    for label, result in results.items():
        bands = [("net benefit", result.net_benefit)] if net else [
            ("cost", result.cost),
            ("benefit", result.benefit),
        ]
        for name, band in bands:
            line = ax.plot(result.years, band.central, label=f"{name} {label}")[0]
            ax.fill_between(result.years, band.lo, band.hi, alpha=0.2, color=line.get_color())
    ax.axhline(0.0, color="grey", linewidth=0.5)
    ax.set_xlabel("Year")
    ax.set_ylabel("% GDP")
    ax.legend()
    return _save(fig, path)
