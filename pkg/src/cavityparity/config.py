"""Experiment configuration: flat key=value text with sections.

The grammar is the INI subset understood by configparser: `[section]`
headers followed by `key = value` lines, `#` comments.  Unknown sections
or keys are rejected by name.  Documented defaults: eta = 1, n_max = 3,
model = effective, t_max = 3 / (eta * kappa_eff).
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError
from .params import SystemParams, effective_rates

EXPERIMENTS = ("trajectory", "parity-simple", "parity-herald", "master",
               "analytics-table", "robustness", "cluster-fuse",
               "cluster-grow", "sweep")

_DEFAULT_C_GRID = (1.0, 5.0, 10.0, 20.0, 40.0)
_DEFAULT_EPS_GRID = tuple(round(0.1 * i, 10) for i in range(11))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: SystemParams
    runs: int = 1
    base_seed: int = 0
    output_path: str = "."
    model: str = "effective"  # effective | full
    threads: int = 1
    # protocol settings
    variant: str = "double-herald"  # simple | double-herald
    t_window: float = None
    t_max: float = None  # default 3 / (eta * kappa_eff), resolved lazily
    target: str = "bell"  # bell | ghz4
    # trajectory / master settings
    t_end: float = None
    n_samples: int = 200
    initial: str = "product"  # product | bell | ghz
    # grids for analytics-table / robustness / sweep
    c_values: tuple = _DEFAULT_C_GRID
    eta_values: tuple = (1.0,)
    epsilon_values: tuple = _DEFAULT_EPS_GRID
    # cluster experiments
    size_a: int = 2
    size_b: int = 2
    fuse_k: int = 2
    fuse_l: int = 2
    fuse_mode: str = "linear"  # linear | 2d
    p_suc: float = 0.5
    target_size: int = 10
    fresh_size: int = 2
    nielsen: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.model not in ("effective", "full"):
            raise ConfigError(f"model must be effective or full, "
                              f"got {self.model!r}")
        if self.variant not in ("simple", "double-herald"):
            raise ConfigError(f"unknown protocol variant {self.variant!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.initial not in ("product", "bell", "ghz"):
            raise ConfigError(f"unknown initial state {self.initial!r}")
        if self.target not in ("bell", "ghz4"):
            raise ConfigError(f"unknown target {self.target!r}")

    def resolved_t_max(self) -> float:
        if self.t_max is not None:
            return self.t_max
        rates = effective_rates(self.params)
        if self.params.eta <= 0 or rates.kappa_eff <= 0:
            raise ConfigError("t_max has no finite default at "
                              "eta * kappa_eff = 0; set protocol.t_max")
        return 3.0 / (self.params.eta * rates.kappa_eff)


_RUN_KEYS = {"experiment": str, "runs": int, "base_seed": int,
             "output_path": str, "model": str, "threads": int}
_PARAM_KEYS = {"omega": float, "g": float, "g1": float, "g2": float,
               "delta": float, "gamma0": float, "gamma1": float,
               "kappa": float, "eta": float, "n_max": int}
_PROTOCOL_KEYS = {"variant": str, "t_window": float, "t_max": float,
                  "target": str}
_TRAJECTORY_KEYS = {"t_end": float, "n_samples": int, "initial": str}
_GRID_KEYS = {"c_values": "floats", "eta_values": "floats",
              "epsilon_values": "floats"}
_CLUSTER_KEYS = {"size_a": int, "size_b": int, "fuse_k": int, "fuse_l": int,
                 "fuse_mode": str, "p_suc": float, "target_size": int,
                 "fresh_size": int, "nielsen": bool}

_SECTIONS = {"run": _RUN_KEYS, "params": _PARAM_KEYS,
             "protocol": _PROTOCOL_KEYS, "trajectory": _TRAJECTORY_KEYS,
             "grid": _GRID_KEYS, "cluster": _CLUSTER_KEYS}


def _convert(section: str, key: str, raw: str, kind):
    try:
        if kind is bool:
            low = raw.strip().lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if kind == "floats":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(
            f"bad value for {section}.{key}: {raw!r}") from exc


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate configuration text; errors name the bad key."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc

    values = {}
    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        known = _SECTIONS[section]
        for key, raw in cp.items(section):
            if key not in known:
                raise ConfigError(f"unknown key {section}.{key}")
            values[(section, key)] = _convert(section, key, raw, known[key])

    if ("run", "experiment") not in values:
        raise ConfigError("missing required key run.experiment")

    p = {k: v for (s, k), v in values.items() if s == "params"}
    g = p.pop("g", None)
    if g is not None:
        p.setdefault("g1", g)
        p.setdefault("g2", g)
    p.setdefault("g1", 1.0)
    p.setdefault("g2", 1.0)
    p.setdefault("omega", 1.0)
    p.setdefault("delta", 50.0)
    p.setdefault("gamma0", 0.05)
    p.setdefault("gamma1", 0.05)
    try:
        params = SystemParams(**p)
    except ValueError as exc:
        raise ConfigError(f"invalid params: {exc}") from exc

    kwargs = {"params": params}
    for (section, key), v in values.items():
        if section == "params":
            continue
        kwargs[key] = v
    try:
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Configuration text that parses back to an identical config."""
    out = io.StringIO()
    out.write("[run]\n")
    for key in _RUN_KEYS:
        out.write(f"{key} = {_fmt(getattr(cfg, key))}\n")
    out.write("\n[params]\n")
    for key in ("omega", "g1", "g2", "delta", "gamma0", "gamma1", "kappa",
                "eta", "n_max"):
        out.write(f"{key} = {_fmt(getattr(cfg.params, key))}\n")
    out.write("\n[protocol]\n")
    for key in _PROTOCOL_KEYS:
        v = getattr(cfg, key)
        if v is not None:
            out.write(f"{key} = {_fmt(v)}\n")
    out.write("\n[trajectory]\n")
    for key in _TRAJECTORY_KEYS:
        v = getattr(cfg, key)
        if v is not None:
            out.write(f"{key} = {_fmt(v)}\n")
    out.write("\n[grid]\n")
    for key in _GRID_KEYS:
        out.write(f"{key} = {_fmt(getattr(cfg, key))}\n")
    out.write("\n[cluster]\n")
    for key in _CLUSTER_KEYS:
        out.write(f"{key} = {_fmt(getattr(cfg, key))}\n")
    return out.getvalue()
