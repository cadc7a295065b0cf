"""Command-line entry point: ``pariscba <subcommand> [options]``."""

import argparse
import asyncio
import logging
import sys
import tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from . import commands  # noqa: F401  registers the subcommands
from .exceptions import JobFailedError, PariscbaError
from .manager import JobManager
from .models import RunConfig
from .registry import registry

logger = logging.getLogger(__name__)

_HELP = {
    "baseline": "baseline scenario: bundled name or CSV path",
    "policy": "policy scenario: bundled name or CSV path",
    "target": "1.5, 2.0 or none (both targets)",
    "discount_rate": "annual discount rate",
    "eta": "relative risk aversion",
    "n_draws": "Monte Carlo draws (0 = deterministic)",
    "seed": "random seed, required with --n-draws",
    "output_dir": "directory for output files",
    "cost_multiplier": "scale factor on mitigation costs",
    "coverage_fraction": "share of impacts missing from the estimates",
    "geometric_rates": "use geometric instead of continuous growth rates",
    "invert": "derive the policy path from the temperature ceiling",
    "plot": "also write PNG charts",
    "workers": "worker count for Monte Carlo batches",
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_config_options(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("run configuration")
    for name, info in RunConfig.model_fields.items():
        if info.annotation is bool:
            group.add_argument(_flag(name), action="store_true", default=argparse.SUPPRESS, help=_HELP.get(name))
        else:
            group.add_argument(_flag(name), default=argparse.SUPPRESS, metavar=name.upper(), help=_HELP.get(name))
    parser.add_argument("--config", type=Path, default=argparse.SUPPRESS, help="flat key = value TOML file")
    parser.add_argument(
        "--log-level",
        default=argparse.SUPPRESS,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="diagnostics written to stderr (default WARNING)",
    )


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per registered command."""
    parser = argparse.ArgumentParser(
        prog="pariscba",
        description="Cost-benefit analysis of the Paris temperature targets.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    for name, command_class in sorted(registry.get_all_commands().items()):
        doc = (command_class.__doc__ or "").strip().splitlines()
        sub = subparsers.add_parser(name, help=doc[0] if doc else None)
        for param in registry.get_cli_params(command_class):
            kind = param["type"] if param["type"] in (int, float, str) else str
            sub.add_argument(
                _flag(param["name"]),
                dest=f"command.{param['name']}",
                type=kind,
                required=param["required"],
                default=argparse.SUPPRESS,
                help=f"default: {param['default']}" if not param["required"] else None,
            )
        _add_config_options(sub)
    return parser


def load_config_file(path: Path) -> Dict[str, Any]:
    """Settings from a flat TOML file; keys use RunConfig field names."""
    with open(path, "rb") as f:
        data = tomllib.load(f)
    nested = [key for key, value in data.items() if isinstance(value, dict)]
    if nested:
        raise ValueError(f"{path}: config file must be flat, found table(s) {', '.join(nested)}")
    return data


def resolve_config(options: Dict[str, Any]) -> RunConfig:
    """RunConfig from flags over the config file over the environment and defaults."""
    merged: Dict[str, Any] = {}
    if "config" in options:
        merged.update(load_config_file(options["config"]))
    merged.update({k: v for k, v in options.items() if k in RunConfig.model_fields})
    return RunConfig(**merged)


def run(name: str, config: RunConfig, **params) -> List[Path]:
    """Run one subcommand to completion and return the paths it wrote."""
    command = registry.get_command_class(name)(config=config, **params)
    (written,) = asyncio.run(JobManager(max_workers=1).run_all([command]))
    return written


def main(argv: Optional[List[str]] = None) -> int:
    """Console entry point; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1

    options = vars(args)
    name = options.pop("command")
    logging.basicConfig(
        level=options.pop("log_level", "WARNING"),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    params = {k.split(".", 1)[1]: options.pop(k) for k in list(options) if k.startswith("command.")}

    try:
        config = resolve_config(options)
        written = run(name, config, **params)
    except JobFailedError as e:
        job = e.failed[0]
        print(f"pariscba {name}: {job.error_type}: {job.error_message}", file=sys.stderr)
        logger.debug("%s", job.error_traceback)
        return 1
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        print(f"pariscba {name}: invalid configuration: {problems}", file=sys.stderr)
        return 1
    except (PariscbaError, ValueError, OSError) as e:
        print(f"pariscba {name}: {e}", file=sys.stderr)
        return 1

    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
