"""Climate-economy cost-benefit analysis of the Paris temperature targets."""

try:
    from ._version import __version__
except ImportError:  # not built by hatch-vcs
    __version__ = "0.0.0"

from .carbon_climate import CarbonCycleParams, ClimateParams, temperature_path
from .cba import run_cba
from .models import RunConfig
from .scenario_io import EmissionScenario, bundled_scenario, load_scenario

__all__ = [
    "CarbonCycleParams",
    "ClimateParams",
    "EmissionScenario",
    "RunConfig",
    "__version__",
    "bundled_scenario",
    "load_scenario",
    "run_cba",
    "temperature_path",
]
