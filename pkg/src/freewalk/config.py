"""Run configuration: tolerance bundle, TOML loading, flag merging.

The command line mirrors every config-file key one to one; flags win
over the file, the file wins over defaults. Stochastic commands require
an explicit seed (no wall-clock fallback), so a stored config plus a
command line reproduces a run exactly.
"""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["Tolerances", "RunConfig", "load_config", "merge_config"]


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared across commands.

    escalation: Cauchy tolerance for level escalation (harmonic
    measure, Green's function, embeddings). solver: relative residual
    bound for linear solves. consistency: allowed deviation in level
    consistency checks. convexity: allowed inward defect in embedded
    faces.
    """

    escalation: float = 1e-6
    solver: float = 1e-8
    consistency: float = 1e-6
    convexity: float = 1e-9

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and v > 0):
                raise ValueError(f"tolerance {f.name} must be positive, got {v!r}")


@dataclass(frozen=True)
class RunConfig:
    """One command's full configuration.

    `graph` is a zoo family name or a path to a weighted-graph JSON
    file; `params` carries the family parameters (b, d, lam, m). A seed
    of None means the command refuses to run anything stochastic.
    `hm_level` pins the truncation used for shell re-entry rows instead
    of escalating to tolerance; lattices need it, their escalation
    converges too slowly to be worth waiting for.
    """

    graph: str = ""
    params: dict = field(default_factory=dict)
    level: int = 3
    hm_level: int | None = None
    seed: int | None = None
    replicas: int = 1
    rate_base: float = 1.0
    rate_growth: float = 4.0
    threads: int = 1
    output: str | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be >= 1")
        if self.hm_level is not None and self.hm_level < 1:
            raise ValueError("hm_level must be >= 1")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.rate_base <= 0 or self.rate_growth <= 0:
            raise ValueError("rate schedule parameters must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tolerances"] = asdict(self.tolerances)
        return d


_SCALAR_KEYS = {f.name for f in fields(RunConfig)} - {"tolerances", "params"}


def _from_tables(data: Mapping[str, Any]) -> RunConfig:
    unknown = set(data) - _SCALAR_KEYS - {"tolerances", "params"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    tol = Tolerances(**data.get("tolerances", {}))
    kwargs = {k: data[k] for k in _SCALAR_KEYS if k in data}
    return RunConfig(params=dict(data.get("params", {})),
                     tolerances=tol, **kwargs)


def load_config(path: str | Path) -> RunConfig:
    """Read a TOML config file into a RunConfig."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return _from_tables(data)


def merge_config(cfg: RunConfig, overrides: Mapping[str, Any]) -> RunConfig:
    """Apply non-None overrides (flag values) on top of a config.

    Scalar keys replace; `params` entries merge key by key; tolerance
    overrides arrive as a `tolerances` mapping and also merge key by
    key.
    """
    updates: dict[str, Any] = {}
    for k, v in overrides.items():
        if v is None:
            continue
        if k == "params":
            updates["params"] = {**cfg.params, **v}
        elif k == "tolerances":
            updates["tolerances"] = replace(cfg.tolerances, **v)
        elif k in _SCALAR_KEYS:
            updates[k] = v
        else:
            raise ValueError(f"unknown config key: {k}")
    return replace(cfg, **updates) if updates else cfg
