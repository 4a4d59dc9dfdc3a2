"""Run configuration: a YAML file validated into a :class:`RunConfig`.

Schema (every key optional except ``distributions``)::

    distributions:            # list of family specs, each with an optional name
      - {name: g1, family: gaussian, mean: 0, var: 1}
      - {name: u-smooth, family: uniform, a: 0, b: 1, smoothing: 0.01}
    lambda_grid: [0, 0.25, 0.5, 0.75, 1]
    t_grid: [0.1, 1, 10]
    grid_policy: {n: 4096, mass_tol: 1.0e-12}
    tolerances: {epi_concave: 1.0e-5}   # per check name, overrides defaults
    checks: all                         # or a list of check names
    seed: 12345
    mc_samples: 1000000

``smoothing: v`` replaces the density by that of ``X + sqrt(v) Z``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields

import yaml

from .density import GridPolicy, Law
from .families import AnalyticDensity

SINGLE_CHECKS = ("complementary", "debruijn", "gvs", "fi_representation", "mmse_representation",
                 "deficit_coincidence", "mi_identity", "mc_entropy", "mc_mmse")
PAIR_CHECKS = ("epi", "epi_concave", "theorem1", "deficit_f", "fii", "fii_weighted",
               "mmse_ineq", "dj_ineq", "jk_equivalence", "epi_limit")
ALL_CHECKS = SINGLE_CHECKS + PAIR_CHECKS

DEFAULT_TOLERANCES = {
    "complementary": 1e-4, "debruijn": 1e-5, "gvs": 1e-5, "fi_representation": 1e-3,
    "mmse_representation": 1e-3, "deficit_coincidence": 2e-4, "mi_identity": 1e-8,
    "epi": 1e-5, "epi_concave": 1e-5, "theorem1": 1e-5, "deficit_f": 1e-4, "fii": 1e-5,
    "fii_weighted": 1e-5, "mmse_ineq": 1e-5, "dj_ineq": 1e-5, "jk_equivalence": 2e-4,
    "epi_limit": 1e-5, "mc_entropy": 3.0, "mc_mmse": 3.0,
}


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Distribution:
    name: str
    density: AnalyticDensity
    smoothing: float = 0.0

    @property
    def law(self):
        law = Law.of(self.density)
        return law.smoothed(self.smoothing) if self.smoothing > 0 else law

    def to_spec(self):
        out = {"name": self.name, **self.density.to_spec()}
        if self.smoothing:
            out["smoothing"] = self.smoothing
        return out


@dataclass(frozen=True)
class RunConfig:
    distributions: tuple
    lambda_grid: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    t_grid: tuple = (0.1, 1.0, 10.0)
    grid_policy: GridPolicy = GridPolicy()
    tolerances: dict = field(default_factory=dict)
    checks: tuple = ALL_CHECKS
    seed: int = 12345
    mc_samples: int = 1_000_000

    def tol(self, check):
        return self.tolerances.get(check, DEFAULT_TOLERANCES[check])

    def to_dict(self):
        gp = self.grid_policy
        return {
            "distributions": [d.to_spec() for d in self.distributions],
            "lambda_grid": list(self.lambda_grid),
            "t_grid": list(self.t_grid),
            "grid_policy": {f.name: getattr(gp, f.name) for f in fields(gp)},
            "tolerances": {k: self.tol(k) for k in self.checks},
            "checks": list(self.checks),
            "seed": self.seed,
            "mc_samples": self.mc_samples,
        }


def _number_list(raw, path, lo=None, hi=None, positive=False):
    if not isinstance(raw, list) or not raw:
        raise ConfigError(path, "must be a non-empty list of numbers")
    out = []
    for i, v in enumerate(raw):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{path}[{i}]", f"expected a number, got {v!r}")
        v = float(v)
        if (lo is not None and v < lo) or (hi is not None and v > hi) or (positive and v <= 0):
            bounds = "positive" if positive else f"in [{lo}, {hi}]"
            raise ConfigError(f"{path}[{i}]", f"{v} is not {bounds}")
        out.append(v)
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError(path, "must be strictly increasing")
    return tuple(out)


def _distribution(raw, path):
    if not isinstance(raw, dict):
        raise ConfigError(path, "must be a mapping with a 'family' key")
    raw = dict(raw)
    smoothing = raw.pop("smoothing", 0.0)
    if isinstance(smoothing, bool) or not isinstance(smoothing, (int, float)) or smoothing < 0:
        raise ConfigError(f"{path}.smoothing", "must be a nonnegative number")
    try:
        d = AnalyticDensity.from_spec(raw)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None
    return Distribution(str(raw.get("name") or d.label), d, float(smoothing))


def parse_config(raw):
    """Validate a parsed YAML mapping into a :class:`RunConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a mapping")
    known = {f.name for f in fields(RunConfig)}
    for k in raw:
        if k not in known:
            raise ConfigError(k, "unknown key")
    if "distributions" not in raw:
        raise ConfigError("distributions", "required")
    dists = raw["distributions"]
    if not isinstance(dists, list) or not dists:
        raise ConfigError("distributions", "must be a non-empty list")
    dists = tuple(_distribution(d, f"distributions[{i}]") for i, d in enumerate(dists))
    names = [d.name for d in dists]
    if len(set(names)) != len(names):
        raise ConfigError("distributions", f"names must be unique, got {names}")
    kw = {"distributions": dists}
    if "lambda_grid" in raw:
        kw["lambda_grid"] = _number_list(raw["lambda_grid"], "lambda_grid", 0.0, 1.0)
    if "t_grid" in raw:
        kw["t_grid"] = _number_list(raw["t_grid"], "t_grid", positive=True)
    if "grid_policy" in raw:
        gp = raw["grid_policy"]
        if not isinstance(gp, dict):
            raise ConfigError("grid_policy", "must be a mapping")
        allowed = {f.name for f in fields(GridPolicy)}
        for k in gp:
            if k not in allowed:
                raise ConfigError(f"grid_policy.{k}", "unknown key")
        try:
            kw["grid_policy"] = GridPolicy(**gp)
        except (TypeError, ValueError) as exc:
            raise ConfigError("grid_policy", str(exc)) from None
    if "tolerances" in raw:
        tols = raw["tolerances"]
        if not isinstance(tols, dict):
            raise ConfigError("tolerances", "must be a mapping")
        for k, v in tols.items():
            if k not in DEFAULT_TOLERANCES:
                raise ConfigError(f"tolerances.{k}", "unknown check")
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"tolerances.{k}", "must be a positive number")
        kw["tolerances"] = {k: float(v) for k, v in tols.items()}
    if "checks" in raw:
        checks = raw["checks"]
        if checks == "all":
            checks = list(ALL_CHECKS)
        if not isinstance(checks, list) or not checks:
            raise ConfigError("checks", "must be 'all' or a non-empty list of check names")
        for i, c in enumerate(checks):
            if c not in ALL_CHECKS:
                raise ConfigError(f"checks[{i}]", f"unknown check {c!r}")
        kw["checks"] = tuple(c for c in ALL_CHECKS if c in checks)
    for key in ("seed", "mc_samples"):
        if key in raw:
            v = raw[key]
            if isinstance(v, bool) or not isinstance(v, int) or v < (1 if key == "mc_samples" else 0):
                raise ConfigError(key, "must be a nonnegative integer" if key == "seed"
                                  else "must be a positive integer")
            kw[key] = v
    return RunConfig(**kw)


def load_config(path):
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"{path} is not valid YAML: {exc}") from None
    return parse_config(raw)
