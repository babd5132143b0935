"""Parameter sweeps over the solved policy and deterministic CSV output."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DivbarError
from .levy import ExponentialFamily
from .model import ModelParams, validate_params
from .solver import solve_policy
from .value import ValueFunction

SWEEP_PARAMETERS = {"k", "mu", "sigma2", "levy_t", "x"}


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep around a fixed model template."""

    DEFAULT_OUTPUTS = ("x_star", "gamma", "d_minus", "d_plus")

    parameter: str
    lo: float
    hi: float
    n_points: int
    fixed: ModelParams
    outputs: tuple = DEFAULT_OUTPUTS
    x_values: tuple = ()

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(
                f"parameter must be one of {sorted(SWEEP_PARAMETERS)}, "
                f"got {self.parameter!r}"
            )
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got {self.lo} >= {self.hi}")
        if self.n_points < 2:
            raise ValueError(f"need at least 2 points, got {self.n_points}")
        allowed = set(self.DEFAULT_OUTPUTS)
        bad = [o for o in self.outputs if o not in allowed]
        if bad:
            raise ValueError(f"unknown outputs: {bad}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n_points)


@dataclass
class SweepTable:
    header: list
    rows: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        err_idx = self.header.index("error")
        return all(row[err_idx] == "" for row in self.rows)

    def column(self, name, skip_errors=True):
        idx = self.header.index(name)
        err_idx = self.header.index("error")
        return [
            row[idx] for row in self.rows
            if not (skip_errors and row[err_idx] != "")
        ]


def _model_at(spec: SweepSpec, value: float) -> ModelParams:
    m = spec.fixed
    if spec.parameter == "levy_t":
        if not isinstance(m.levy, ExponentialFamily):
            raise DivbarError("levy_t sweeps need an exponential-family measure")
        return m.with_(levy=ExponentialFamily(rate=value))
    return m.with_(**{spec.parameter: value})


def run_sweep(spec: SweepSpec) -> SweepTable:
    """Solve the policy at each grid point; per-point failures are recorded
    in the table, never aborting the sweep."""
    value_cols = [f"V_at_{x:g}" for x in spec.x_values]
    header = [spec.parameter, *spec.outputs, *value_cols, "error"]
    table = SweepTable(header=header)

    if spec.parameter == "x":
        # value-function slice at the fixed model
        try:
            vf = ValueFunction(spec.fixed, solve_policy(spec.fixed))
        except DivbarError as exc:
            for x in spec.grid():
                table.rows.append([float(x)] + [""] * (len(header) - 2) + [str(exc)])
            return table
        for x in spec.grid():
            row = [float(x)]
            row += [getattr(vf.policy, name) for name in spec.outputs]
            row += [vf.psi(float(xq)) for xq in spec.x_values]
            row.append("")
            table.rows.append(row)
        return table

    for value in spec.grid():
        row = [float(value)]
        try:
            m = _model_at(spec, float(value))
            validate_params(m)
            policy = solve_policy(m)
            vf = ValueFunction(m, policy)
            row += [getattr(policy, name) for name in spec.outputs]
            row += [vf.psi(float(xq)) for xq in spec.x_values]
            row.append("")
        except DivbarError as exc:
            row = [float(value)] + [""] * (len(header) - 2) + [str(exc)]
        table.rows.append(row)
    return table


def format_cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def emit_csv(table: SweepTable, path) -> None:
    """Deterministic CSV: 17 significant digits, LF endings."""
    if not table.rows:
        raise DivbarError("refusing to emit an empty table")
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(table.header) + "\n")
            for row in table.rows:
                fh.write(",".join(format_cell(v) for v in row) + "\n")
    except OSError as exc:
        raise DivbarError(f"cannot write {path}: {exc}") from exc
