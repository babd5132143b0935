"""FastAPI service exposing the solver, verifier, simulator and sweeps."""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import DivbarError
from ..solver import h_of_gamma, l_of_d, q_of_x, solve_policy
from ..sweep import run_sweep
from ..simulate import estimate_value
from ..value import ValueFunction, verify_variational_inequality
from . import schemas

app = FastAPI(title="divbar", version="0.1.0")


@app.exception_handler(DivbarError)
async def _domain_error(request: Request, exc: DivbarError):
    return JSONResponse(
        status_code=400,
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


@app.exception_handler(ValueError)
async def _value_error(request: Request, exc: ValueError):
    return JSONResponse(
        status_code=400, content={"error": "ValueError", "detail": str(exc)}
    )


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/solve", response_model=schemas.SolveResponse)
def solve(req: schemas.SolveRequest):
    m = req.model_params.to_core()
    policy = solve_policy(m)
    residuals = {
        "h_gamma": h_of_gamma(m, policy.gamma),
        "l_d_minus": l_of_d(m, policy.d_minus),
        "l_d_plus": l_of_d(m, policy.d_plus),
        "q_x_star": float(
            q_of_x(policy.gamma, policy.d_minus, policy.d_plus,
                   policy.x0, m.beta, policy.x_star)
        ),
    }
    return schemas.SolveResponse(
        policy=schemas.PolicyOut.from_core(policy), root_residuals=residuals
    )


@app.post("/verify", response_model=schemas.VerifyResponse)
def verify(req: schemas.VerifyRequest):
    m = req.model_params.to_core()
    policy = solve_policy(m)
    vf = ValueFunction(m, policy)
    report = verify_variational_inequality(
        vf, n_grid=req.n_grid, a_step=req.a_step
    )
    conv = lambda vs: [
        schemas.ViolationOut(x=v.x, check=v.check, value=v.value, bound=v.bound)
        for v in vs
    ]
    return schemas.VerifyResponse(
        ok=report.ok,
        n_grid=req.n_grid,
        max_residual=report.max_residual,
        max_residual_x=report.max_residual_x,
        violations=conv(report.violations),
        feedback_mismatches=conv(report.feedback_mismatches),
        policy=schemas.PolicyOut.from_core(policy),
    )


@app.post("/simulate", response_model=schemas.SimulateResponse)
def simulate_endpoint(req: schemas.SimulateRequest):
    m = req.model_params.to_core()
    policy = solve_policy(m)
    vf = ValueFunction(m, policy)
    strat = req.strategy.to_core(policy)
    cfg = req.sim.to_core()
    outcomes = []
    for x in req.x:
        out = estimate_value(m, strat, x, cfg)
        outcomes.append(
            schemas.OutcomeOut(
                x=x,
                mean_discounted_dividends=out.mean_discounted_dividends,
                std_error=out.std_error,
                ruin_fraction=out.ruin_fraction,
                mean_ruin_time=None if math.isnan(out.mean_ruin_time)
                else out.mean_ruin_time,
                n_paths=out.n_paths,
                analytic_value=vf.optimal_return(m.s, x),
            )
        )
    record = None
    if req.record_path and req.x:
        from ..simulate import simulate_path

        _, _, rec = simulate_path(m, strat, req.x[0], cfg, path_index=0, record=True)
        record = schemas.PathRecordOut(
            t=rec.t.tolist(),
            surplus=rec.surplus.tolist(),
            cumulative_dividends=rec.cumulative_dividends.tolist(),
        )
    return schemas.SimulateResponse(
        outcomes=outcomes,
        policy=schemas.PolicyOut.from_core(policy),
        path_record=record,
    )


@app.post("/sweep", response_model=schemas.SweepResponse)
def sweep_endpoint(req: schemas.SweepRequest):
    table = run_sweep(req.to_core())
    return schemas.SweepResponse(header=table.header, rows=table.rows, ok=table.ok)
