"""Run configuration: defaults, key=value config files and command-line overrides."""

import math
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

from dotenv import dotenv_values
from rich.console import Console
from rich.table import Table

from holosim.errors import ConfigError


def _to_int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _to_str(text: str) -> str:
    return text.strip()


KEY_TYPES: Dict[str, Callable[[str], Any]] = {
    "seed": _to_int,
    "workers": _to_int,
    "log_level": _to_str,
    "family": _to_str,
    "mu": float,
    "lam": float,
    "eta": float,
    "theta_alpha": float,
    "theta_sq": float,
    "tau": float,
    "mass": float,
    "omega": float,
    "phi_min": float,
    "phi_max": float,
    "n_phi": _to_int,
    "lam_min": float,
    "lam_max": float,
    "n_lambda": _to_int,
    "eta_min": float,
    "eta_max": float,
    "n_eta": _to_int,
    "mu_over_r_min": float,
    "mu_over_r_max": float,
    "n_mu": _to_int,
    "sigma": float,
    "rho": float,
    "n_samples": _to_int,
    "mode": _to_str,
    "cutoff": _to_int,
}

ALIASES = {"lambda": "lam"}

GLOBAL_DEFAULTS: Dict[str, Any] = {
    "seed": 0,
    "workers": 1,
    "log_level": "WARNING",
}

RP_DEFAULTS = {"tau": 1e-3, "mass": 100.0, "omega": 3.14e15}

COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "validate": {"cutoff": 0},
    "sweep-fig2": {
        "mu": 1e3,
        "theta_alpha": 0.0,
        "theta_sq": 0.0,
        "phi_min": 0.0,
        "phi_max": math.pi,
        "n_phi": 37,
        "lam_min": 1e-2,
        "lam_max": 1e2,
        "n_lambda": 25,
    },
    "sweep-eta": {
        "mu": 2e23,
        "lam": 0.5,
        "eta_min": 0.0,
        "eta_max": 1.0,
        "n_eta": 51,
        **RP_DEFAULTS,
    },
    "sweep-mu": {
        "lam": 0.5,
        "eta": 0.98,
        "mu_over_r_min": 1e-6,
        "mu_over_r_max": 10.0,
        "n_mu": 36,
        **RP_DEFAULTS,
    },
    "estimate": {
        "family": "SQ",
        "mu": 100.0,
        "lam": 0.5,
        "eta": 1.0,
        "theta_alpha": 0.0,
        "theta_sq": 0.0,
        "sigma": 1e-3,
        "rho": 0.5,
        "n_samples": 100000,
        "mode": "exact",
    },
}

COMMANDS = tuple(COMMAND_DEFAULTS)


def normalize_key(key: str) -> str:
    key = key.strip().lstrip("-").replace("-", "_").lower()
    return ALIASES.get(key, key)


def parse_values(raw: Dict[str, Optional[str]], source: str) -> Dict[str, Any]:
    """
    Convert raw string settings to typed values.

    Args:
        raw: Mapping of key to text (from a config file or the command line)
        source: Where the values came from, for error messages

    Returns:
        Typed settings

    Raises:
        ConfigError: Unknown key or unparsable value
    """
    parsed = {}
    for key, text in raw.items():
        name = normalize_key(key)
        if name not in KEY_TYPES:
            raise ConfigError(f"unknown key {key!r} in {source}")
        if text is None or text.strip() == "":
            raise ConfigError(f"key {key!r} in {source} has no value")
        try:
            parsed[name] = KEY_TYPES[name](text)
        except ValueError as exc:
            raise ConfigError(f"cannot parse {key}={text!r} in {source}: {exc}") from exc
    return parsed


def load_config_file(path: str) -> Dict[str, Any]:
    """Read a flat key=value file; unknown keys are rejected."""
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_values(dotenv_values(file_path), str(file_path))


def parse_overrides(tokens: Iterable[str]) -> Dict[str, Any]:
    """Turn ``--key value`` / ``--key=value`` tokens into typed settings."""
    tokens = list(tokens)
    raw: Dict[str, str] = {}
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--"):
            raise ConfigError(f"expected --key value, got {token!r}")
        if "=" in token:
            key, text = token.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"missing value for {token}")
            key, text = token, tokens[i + 1]
            i += 2
        raw[key] = text
    return parse_values(raw, "command line")


class RunConfig:
    """Resolved settings for one command: flag > config file > command default > global default."""

    def __init__(
        self,
        command: str,
        config_path: Optional[str] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ):
        if command not in COMMAND_DEFAULTS:
            raise ConfigError(f"unknown command {command!r}")
        self.command = command
        values = dict(GLOBAL_DEFAULTS)
        values.update(COMMAND_DEFAULTS[command])
        self._keys = list(values)
        if config_path:
            values.update(load_config_file(config_path))
        values.update(overrides or {})
        for key in values:
            if key not in self._keys:
                self._keys.append(key)
        self._values = values

    def __getattr__(self, name: str) -> Any:
        values = self.__dict__.get("_values", {})
        if name in values:
            return values[name]
        raise AttributeError(name)

    def get(self, name: str, default: Any = None) -> Any:
        return self._values.get(name, default)

    def items(self) -> List[Tuple[str, Any]]:
        """Settings in a stable order for CSV headers."""
        return [(key, self._values[key]) for key in self._keys]

    def display(self, console: Console):
        """Render the resolved settings as a table."""
        table = Table(title=f"{self.command} settings", show_header=True, header_style="bold cyan")
        table.add_column("key")
        table.add_column("value", justify="right")
        for key, value in self.items():
            table.add_row(key, str(value))
        console.print(table)


def get_config(command: str, config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Get the resolved configuration for a command."""
    return RunConfig(command, config_path, overrides)
