"""Flat key=value config files describing a model, simulation settings and
an optional parameter sweep."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ParseError, ValidationError
from .levy import ExponentialFamily, TabulatedDensity
from .model import ModelParams, k_upper_bound, validate_params
from .simulate import SimConfig
from .sweep import SWEEP_PARAMETERS, SweepSpec

REQUIRED_KEYS = ("mu", "sigma2", "c", "k", "levy")
_DEFAULTS = {"s": 0.0, "beta": 0.8, "dt": 1e-3, "n_paths": 10_000, "seed": 1}
_KNOWN_KEYS = set(REQUIRED_KEYS) | set(_DEFAULTS) | {
    "horizon", "antithetic", "sweep_param", "sweep_range", "sweep_outputs",
}

_EXP_RE = re.compile(r"^exp\(\s*([^)]+?)\s*\)$")
_TABLE_RE = re.compile(r"^table\(\s*([^,]+?)\s*,\s*([^)]+?)\s*\)$")


@dataclass(frozen=True)
class ParsedConfig:
    model: ModelParams
    sim: SimConfig
    sweep: Optional[SweepSpec] = None


def _float(key, raw, line):
    try:
        return float(raw)
    except ValueError:
        raise ParseError(f"value for '{key}' is not a number: {raw!r}", line)


def _parse_levy(raw: str, line: int, base_dir: str):
    m = _EXP_RE.match(raw)
    if m:
        return ExponentialFamily(rate=_float("levy", m.group(1), line))
    m = _TABLE_RE.match(raw)
    if m:
        path = m.group(1).strip().strip("'\"")
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        try:
            data = np.loadtxt(path, delimiter=",", ndmin=2)
        except OSError as exc:
            raise ParseError(f"cannot read density table {path}: {exc}", line)
        if data.shape[1] != 2:
            raise ParseError(f"density table {path} must have two columns", line)
        return TabulatedDensity(
            z=data[:, 0], density=data[:, 1],
            tail_rate=_float("levy tail rate", m.group(2), line),
        )
    raise ParseError(
        f"levy must be exp(rate) or table(path, tail_rate), got {raw!r}", line
    )


def parse_config(text: str, base_dir: str = ".") -> ParsedConfig:
    """Parse a line-oriented `key = value` config.

    Unknown keys are errors.  Required: mu, sigma2, c, k, levy.
    Defaults: s=0, beta=0.8, dt=1e-3, n_paths=10000, seed=1,
    horizon=18/c (the shortest admissible truncation horizon).
    """
    values: dict = {}
    lines: dict = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        stripped = rawline.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(f"expected 'key = value', got {stripped!r}", lineno)
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", lineno)
        values[key] = raw
        lines[key] = lineno

    missing = [key for key in REQUIRED_KEYS if key not in values]
    if missing:
        raise ValidationError(f"missing required keys: {', '.join(missing)}")

    levy = _parse_levy(values["levy"], lines["levy"], base_dir)
    model = ModelParams(
        mu=_float("mu", values["mu"], lines["mu"]),
        sigma2=_float("sigma2", values["sigma2"], lines["sigma2"]),
        k=_float("k", values["k"], lines["k"]),
        c=_float("c", values["c"], lines["c"]),
        beta=_float("beta", values["beta"], lines["beta"]) if "beta" in values
        else _DEFAULTS["beta"],
        s=_float("s", values["s"], lines["s"]) if "s" in values else _DEFAULTS["s"],
        levy=levy,
    )
    try:
        validate_params(model)
    except Exception as exc:
        if isinstance(model.levy, ExponentialFamily) and model.levy.rate > 0:
            bound = k_upper_bound(model)
            raise ValidationError(f"{exc} (k bound here: {bound:g})") from exc
        raise ValidationError(str(exc)) from exc

    horizon = (
        _float("horizon", values["horizon"], lines.get("horizon"))
        if "horizon" in values else 18.0 / model.c
    )
    anti_raw = values.get("antithetic", "false").lower()
    if anti_raw not in ("true", "false", "0", "1", "yes", "no"):
        raise ParseError(
            f"antithetic must be boolean, got {values['antithetic']!r}",
            lines.get("antithetic"),
        )
    sim = SimConfig(
        horizon=horizon,
        dt=_float("dt", values["dt"], lines.get("dt")) if "dt" in values
        else _DEFAULTS["dt"],
        n_paths=int(_float("n_paths", values["n_paths"], lines.get("n_paths")))
        if "n_paths" in values else _DEFAULTS["n_paths"],
        seed=int(_float("seed", values["seed"], lines.get("seed")))
        if "seed" in values else _DEFAULTS["seed"],
        antithetic=anti_raw in ("true", "1", "yes"),
    )

    sweep = None
    if "sweep_param" in values or "sweep_range" in values:
        if not ("sweep_param" in values and "sweep_range" in values):
            raise ValidationError("sweep_param and sweep_range must appear together")
        param = values["sweep_param"]
        if param not in SWEEP_PARAMETERS:
            raise ValidationError(
                f"sweep_param must be one of {sorted(SWEEP_PARAMETERS)}, got {param!r}"
            )
        parts = values["sweep_range"].split(":")
        if len(parts) != 3:
            raise ParseError(
                "sweep_range must be lo:hi:n", lines.get("sweep_range")
            )
        lo = _float("sweep_range lo", parts[0], lines.get("sweep_range"))
        hi = _float("sweep_range hi", parts[1], lines.get("sweep_range"))
        n = int(_float("sweep_range n", parts[2], lines.get("sweep_range")))
        outputs = tuple(
            s.strip() for s in values.get("sweep_outputs", "").split(",") if s.strip()
        )
        sweep = SweepSpec(
            parameter=param, lo=lo, hi=hi, n_points=n, fixed=model,
            outputs=outputs or SweepSpec.DEFAULT_OUTPUTS,
        )
    return ParsedConfig(model=model, sim=sim, sweep=sweep)
