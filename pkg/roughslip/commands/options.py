"""
Shared command options
Config-file loading and the flags that override config keys
"""

import argparse
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from database.connection import settings
from database.schemas import RunConfig, load_run_config
from utilities.errors import ConfigError

# flag dest -> dotted config key
CONFIG_FLAGS = {
    "name": "name",
    "n0": "n0",
    "order": "order",
    "horizon": "horizon",
    "seed": "seed",
    "epsilons": "sweep.epsilons",
    "nus": "sweep.nus",
    "nu_constant": "sweep.nu_constant",
    "nu_exponent": "sweep.nu_exponent",
    "workers": "sweep.workers",
    "formats": "report.formats",
    "include_runtimes": "report.include_runtimes",
}


def config_parent() -> argparse.ArgumentParser:
    """Flags mirroring config keys; anything given here beats the YAML file"""
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("study overrides")
    group.add_argument("--name", help="study name used for the run database and report files")
    group.add_argument("--n0", type=int, help="roughness exponent N0 (alpha = 1/N0)")
    group.add_argument("--order", type=int, help="expansion order N")
    group.add_argument("--horizon", type=float, help="final time T0")
    group.add_argument("--seed", type=int, help="seed of the randomized check suites")
    group.add_argument("--epsilons", type=float, nargs="+", help="roughness scales, 1/eps integer")
    group.add_argument("--nus", type=float, nargs="+", help="one viscosity per epsilon")
    group.add_argument("--nu-constant", dest="nu_constant", type=float, help="c in nu = c eps^p")
    group.add_argument("--nu-exponent", dest="nu_exponent", type=float, help="p in nu = c eps^p")
    group.add_argument("--workers", type=int, help="parallel (eps, nu) pairs")
    group.add_argument("--formats", nargs="+", choices=["csv", "json", "svg"], help="report formats")
    group.add_argument("--include-runtimes", dest="include_runtimes", action="store_true", default=None,
                       help="keep wall-clock times in the reports")
    return parent


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {}
    for dest, key in CONFIG_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[key] = value
    return overrides


def _set_dotted(data: Dict[str, Any], key: str, value: Any) -> None:
    *parents, leaf = key.split(".")
    node = data
    for part in parents:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[leaf] = value


def parse_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """YAML file (optional) validated into a RunConfig, dotted overrides applied on top"""
    data: Dict[str, Any] = {}
    if path is not None:
        file = Path(path)
        if not file.is_file():
            raise ConfigError(f"config file not found: {path}", [str(path)])
        try:
            loaded = yaml.safe_load(file.read_text(encoding="utf-8"))
        except yaml.YAMLError as e:
            raise ConfigError(f"config file is not valid YAML: {str(e)}", [str(path)])
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError("config file must hold a mapping at the top level", [str(path)])
        data = loaded or {}
    for key, value in (overrides or {}).items():
        _set_dotted(data, key, value)
    return load_run_config(data)


def output_dir(args: argparse.Namespace, config: RunConfig) -> str:
    """--output-dir, then the config file, then ROUGHSLIP_OUTPUT_DIR"""
    return getattr(args, "output_dir", None) or config.output_dir or settings.output_dir


def epsilon_index(config: RunConfig, epsilon: Optional[float]) -> int:
    if epsilon is None:
        return 0
    for i, eps in enumerate(config.sweep.epsilons):
        if abs(eps - epsilon) <= 1e-12:
            return i
    raise ConfigError(f"epsilon {epsilon} is not part of the sweep {config.sweep.epsilons}", ["sweep.epsilons"])
