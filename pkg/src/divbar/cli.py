"""Command-line front end.

The CLI is a thin HTTP client of the service in ``divbar.service``.  By
default it talks to the app in-process (no daemon needed); ``--server``
points it at a running instance instead.
"""

from __future__ import annotations

import json
import os
import sys

import click

from .config import parse_config
from .errors import DivbarError
from .sweep import SweepTable, emit_csv

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_ERROR = 2


def _client(server):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=None)
    from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _post(client, path, payload):
    resp = client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            body = resp.json()
            msg = f"{body.get('error', 'error')}: {body.get('detail', resp.text)}"
        except (ValueError, json.JSONDecodeError):
            msg = resp.text
        click.echo(f"error: {msg}", err=True)
        sys.exit(EXIT_ERROR)
    return resp.json()


def _levy_payload(spec):
    from .levy import ExponentialFamily

    if isinstance(spec, ExponentialFamily):
        return {"kind": "exp", "rate": spec.rate}
    return {
        "kind": "table",
        "z": spec.z.tolist(),
        "density": spec.density.tolist(),
        "tail_rate": spec.tail_rate,
    }


def _model_payload(m):
    return {
        "mu": m.mu, "sigma2": m.sigma2, "k": m.k, "c": m.c,
        "beta": m.beta, "s": m.s, "levy": _levy_payload(m.levy),
    }


def _load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
        return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))
    except (DivbarError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)


def _write_table(header, rows, out):
    table = SweepTable(header=list(header), rows=[list(r) for r in rows])
    if out:
        emit_csv(table, out)
        click.echo(f"wrote {out}")
    else:
        click.echo(",".join(table.header))
        from .sweep import format_cell

        for row in table.rows:
            click.echo(",".join(format_cell(v) for v in row))


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; default runs in-process.")
@click.pass_context
def main(ctx, server):
    """Dividend-barrier policy solver, verifier and simulator."""
    ctx.obj = {"server": server}


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def solve(ctx, config, out):
    """Solve the policy for the model in CONFIG and emit it as CSV."""
    parsed = _load_config(config)
    client = _client(ctx.obj["server"])
    body = _post(client, "/solve", {"model_params": _model_payload(parsed.model)})
    pol = body["policy"]
    res = body["root_residuals"]
    header = list(pol.keys()) + [f"residual_{k}" for k in res]
    rows = [list(pol.values()) + list(res.values())]
    _write_table(header, rows, out)
    sys.exit(EXIT_OK)


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--grid", "grid_n", default=500, show_default=True,
              help="Number of surplus grid points.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def verify(ctx, config, grid_n, out):
    """Check the variational inequality on a grid; nonzero exit on
    violations."""
    parsed = _load_config(config)
    client = _client(ctx.obj["server"])
    body = _post(client, "/verify", {
        "model_params": _model_payload(parsed.model), "n_grid": grid_n,
    })
    viols = body["violations"]
    notes = body["feedback_mismatches"]
    click.echo(
        f"grid={grid_n} max_residual={body['max_residual']:.3e} "
        f"at x={body['max_residual_x']:.6g} violations={len(viols)} "
        f"argmax_notes={len(notes)}"
    )
    rows = [
        [v["x"], v["check"], v["value"], v["bound"]] for v in viols + notes
    ]
    if rows:
        _write_table(["x", "check", "value", "bound"], rows, out)
    elif out:
        _write_table(
            ["x", "check", "value", "bound"],
            [[0.0, "none", 0.0, 0.0]],
            out,
        )
    sys.exit(EXIT_VIOLATIONS if viols else EXIT_OK)


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--x", "x_list", default=None, metavar="LIST",
              help="Comma-separated initial surplus values; default is the "
                   "solved barrier.")
@click.option("--seed", type=int, default=None)
@click.option("--paths", type=int, default=None)
@click.option("--dt", type=float, default=None)
@click.option("--strategy", "strategy_kind",
              type=click.Choice(["optimal", "constant_retention", "fixed_barrier"]),
              default="optimal", show_default=True)
@click.option("--retention", type=float, default=None,
              help="Retention for constant_retention.")
@click.option("--barrier", type=float, default=None,
              help="Barrier for constant_retention / fixed_barrier.")
@click.option("--dump-path", type=click.Path(dir_okay=False), default=None,
              help="Also write the (t, R, L) trace of path 0 as CSV.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def simulate(ctx, config, x_list, seed, paths, dt, strategy_kind,
             retention, barrier, dump_path, out):
    """Monte Carlo estimate of expected discounted dividends."""
    parsed = _load_config(config)
    client = _client(ctx.obj["server"])
    model_payload = _model_payload(parsed.model)
    if x_list is None:
        solved = _post(client, "/solve", {"model_params": model_payload})
        xs = [solved["policy"]["x_star"]]
    else:
        xs = [float(v) for v in x_list.split(",")]
    sim = parsed.sim
    payload = {
        "model_params": model_payload,
        "sim": {
            "horizon": sim.horizon,
            "dt": dt if dt is not None else sim.dt,
            "n_paths": paths if paths is not None else sim.n_paths,
            "seed": seed if seed is not None else sim.seed,
            "antithetic": sim.antithetic,
        },
        "strategy": {"kind": strategy_kind, "a": retention, "barrier": barrier},
        "x": xs,
        "record_path": dump_path is not None,
    }
    body = _post(client, "/simulate", payload)
    header = ["x", "mean_discounted_dividends", "std_error", "ruin_fraction",
              "mean_ruin_time", "n_paths", "analytic_value"]
    rows = [
        [o["x"], o["mean_discounted_dividends"], o["std_error"],
         o["ruin_fraction"],
         "" if o["mean_ruin_time"] is None else o["mean_ruin_time"],
         o["n_paths"], o["analytic_value"]]
        for o in body["outcomes"]
    ]
    _write_table(header, rows, out)
    if dump_path and body.get("path_record"):
        rec = body["path_record"]
        _write_table(
            ["t", "R", "L"],
            list(zip(rec["t"], rec["surplus"], rec["cumulative_dividends"])),
            dump_path,
        )
    sys.exit(EXIT_OK)


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--param", required=True,
              type=click.Choice(["k", "mu", "sigma2", "levy_t", "x"]))
@click.option("--range", "range_", required=True, metavar="LO:HI:N")
@click.option("--outputs", default="x_star,gamma,d_minus,d_plus",
              show_default=True)
@click.option("--at-x", "at_x", default=None, metavar="LIST",
              help="Comma-separated x values at which to tabulate the value "
                   "function.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def sweep(ctx, config, param, range_, outputs, at_x, out):
    """Sweep one model parameter, solving the policy at each grid point."""
    parsed = _load_config(config)
    try:
        lo, hi, n = range_.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        click.echo(f"error: --range must be LO:HI:N, got {range_!r}", err=True)
        sys.exit(EXIT_ERROR)
    client = _client(ctx.obj["server"])
    payload = {
        "model_params": _model_payload(parsed.model),
        "parameter": param, "lo": lo, "hi": hi, "n_points": n,
        "outputs": [s for s in outputs.split(",") if s],
        "x_values": [float(v) for v in at_x.split(",")] if at_x else [],
    }
    body = _post(client, "/sweep", payload)
    _write_table(body["header"], body["rows"], out)
    sys.exit(EXIT_OK if body["ok"] else EXIT_VIOLATIONS)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
