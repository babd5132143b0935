"""Request/response models for the HTTP service and conversions to the
core dataclasses."""

from __future__ import annotations

from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field

from .. import levy, model, simulate, solver, sweep


class LevySpecIn(BaseModel):
    kind: Literal["exp", "table"]
    rate: Optional[float] = None
    z: Optional[List[float]] = None
    density: Optional[List[float]] = None
    tail_rate: Optional[float] = None

    def to_core(self) -> levy.LevyMeasureSpec:
        if self.kind == "exp":
            if self.rate is None:
                raise ValueError("exponential measure needs 'rate'")
            return levy.ExponentialFamily(rate=self.rate)
        if self.z is None or self.density is None or self.tail_rate is None:
            raise ValueError("tabulated measure needs 'z', 'density' and 'tail_rate'")
        return levy.TabulatedDensity(
            z=self.z, density=self.density, tail_rate=self.tail_rate
        )


class ModelIn(BaseModel):
    mu: float
    sigma2: float
    k: float
    c: float
    beta: float = 0.8
    s: float = 0.0
    levy: LevySpecIn

    def to_core(self) -> model.ModelParams:
        return model.ModelParams(
            mu=self.mu, sigma2=self.sigma2, k=self.k, c=self.c,
            beta=self.beta, s=self.s, levy=self.levy.to_core(),
        )


class PolicyOut(BaseModel):
    gamma: float
    d_minus: float
    d_plus: float
    x0: float
    x_star: float
    c1: float
    c3: float
    c4: float

    @classmethod
    def from_core(cls, p: solver.PolicyParams) -> "PolicyOut":
        return cls(
            gamma=p.gamma, d_minus=p.d_minus, d_plus=p.d_plus,
            x0=p.x0, x_star=p.x_star, c1=p.c1, c3=p.c3, c4=p.c4,
        )

    def to_core(self) -> solver.PolicyParams:
        return solver.PolicyParams(
            gamma=self.gamma, d_minus=self.d_minus, d_plus=self.d_plus,
            x0=self.x0, x_star=self.x_star, c1=self.c1, c3=self.c3, c4=self.c4,
        )


class SolveRequest(BaseModel):
    model_params: ModelIn


class SolveResponse(BaseModel):
    policy: PolicyOut
    root_residuals: dict


class ViolationOut(BaseModel):
    x: float
    check: str
    value: float
    bound: float


class VerifyRequest(BaseModel):
    model_params: ModelIn
    n_grid: int = Field(default=500, ge=2)
    a_step: float = Field(default=0.01, gt=0, le=1)


class VerifyResponse(BaseModel):
    ok: bool
    n_grid: int
    max_residual: float
    max_residual_x: float
    violations: List[ViolationOut]
    feedback_mismatches: List[ViolationOut]
    policy: PolicyOut


class StrategyIn(BaseModel):
    kind: Literal["optimal", "constant_retention", "fixed_barrier"] = "optimal"
    a: Optional[float] = None
    barrier: Optional[float] = None

    def to_core(self, policy: solver.PolicyParams) -> simulate.Strategy:
        if self.kind == "optimal":
            return simulate.OptimalFeedback(policy=policy)
        if self.kind == "constant_retention":
            if self.a is None or self.barrier is None:
                raise ValueError("constant_retention needs 'a' and 'barrier'")
            return simulate.ConstantRetention(a=self.a, barrier=self.barrier)
        if self.barrier is None:
            raise ValueError("fixed_barrier needs 'barrier'")
        return simulate.FixedBarrier(policy=policy, barrier=self.barrier)


class SimSettingsIn(BaseModel):
    horizon: float
    dt: float = 1e-3
    n_paths: int = 10_000
    seed: int = 1
    antithetic: bool = False

    def to_core(self) -> simulate.SimConfig:
        return simulate.SimConfig(
            horizon=self.horizon, dt=self.dt, n_paths=self.n_paths,
            seed=self.seed, antithetic=self.antithetic,
        )


class SimulateRequest(BaseModel):
    model_params: ModelIn
    sim: SimSettingsIn
    strategy: StrategyIn = StrategyIn()
    x: List[float]
    # when set, also return the full (t, R, L) trace of path 0 at x[0]
    record_path: bool = False


class PathRecordOut(BaseModel):
    t: List[float]
    surplus: List[float]
    cumulative_dividends: List[float]


class OutcomeOut(BaseModel):
    x: float
    mean_discounted_dividends: float
    std_error: float
    ruin_fraction: float
    mean_ruin_time: Optional[float]
    n_paths: int
    analytic_value: float


class SimulateResponse(BaseModel):
    outcomes: List[OutcomeOut]
    policy: PolicyOut
    path_record: Optional[PathRecordOut] = None


class SweepRequest(BaseModel):
    model_params: ModelIn
    parameter: Literal["k", "mu", "sigma2", "levy_t", "x"]
    lo: float
    hi: float
    n_points: int = Field(ge=2)
    outputs: List[str] = list(sweep.SweepSpec.DEFAULT_OUTPUTS)
    x_values: List[float] = []

    def to_core(self) -> sweep.SweepSpec:
        return sweep.SweepSpec(
            parameter=self.parameter, lo=self.lo, hi=self.hi,
            n_points=self.n_points, fixed=self.model_params.to_core(),
            outputs=tuple(self.outputs), x_values=tuple(self.x_values),
        )


class SweepResponse(BaseModel):
    header: List[str]
    rows: List[List[Union[str, float]]]
    ok: bool
