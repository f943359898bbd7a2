"""Command-line client for the solver service.

Subcommands build a request, send it to the service (an in-process mount
of the FastAPI app by default, or a remote instance via ``--server``) and
persist the returned rows. Wall-clock timings are zeroed in output files
unless ``--timing`` is given, so default result files are byte-for-byte
reproducible for a fixed seed.
"""

from __future__ import annotations

import dataclasses
import json
import math
import sys
from pathlib import Path

import click
import httpx

from .harness import (
    ResultRow,
    csv_text,
    parse_config_text,
    region_weights,
    spec_from_mapping,
    summarize,
)

DEFAULT_NODES = {
    "miso": ("1", "10", "1"),
    "simo": ("2", "10", "1"),
    "mimo": ("2", "10", "1"),
    "region": ("2;2", "10;25", "0.5;0.5"),
}
DEFAULT_NT = {"miso": "2", "simo": "1", "mimo": "2", "region": "2"}


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service.app import app
    return TestClient(app)


def _post(server: str | None, path: str, payload: dict | None = None) -> dict:
    with _client(server) as client:
        response = client.post(path, json=payload)
    if response.status_code != 200:
        raise click.ClickException(
            f"service error {response.status_code}: {response.text}")
    return response.json()


def _build_spec(kind: str, config: str | None, seed, budget, engine,
                realizations, grid_points, tol):
    mapping = dict(_load_mapping(config))
    mapping.setdefault("node_n_e", DEFAULT_NODES[kind][0])
    mapping.setdefault("node_distance_m", DEFAULT_NODES[kind][1])
    mapping.setdefault("node_weight", DEFAULT_NODES[kind][2])
    mapping.setdefault("n_t", DEFAULT_NT[kind])
    overrides = {"geometry": "mimo" if kind == "region" else kind}
    if seed is not None:
        overrides["seed"] = seed
    if budget is not None:
        overrides["budgets_w"] = budget.replace(",", ";")
    if engine is not None:
        overrides["engine"] = engine
    if realizations is not None:
        overrides["realizations"] = realizations
    if grid_points is not None:
        overrides["strategy_grid_points"] = grid_points
    if tol is not None:
        overrides["tol"] = tol
    return spec_from_mapping(mapping, **overrides)


def _load_mapping(config_path: str | None) -> dict[str, str]:
    if not config_path:
        return {}
    return parse_config_text(Path(config_path).read_text(encoding="utf-8"))


def _system_payload(spec) -> dict:
    return {
        "n_t": spec.config.n_t,
        "nodes": [{"n_e": n.n_e, "distance_m": n.distance, "weight": n.weight}
                  for n in spec.config.nodes],
        "rician_factor": spec.config.rician_factor,
        "seed": spec.config.seed,
    }


def _rectenna_payload(spec) -> dict:
    return {"a": spec.rectenna.a, "b": spec.rectenna.b, "i_s": spec.rectenna.i_s,
            "r_l": spec.rectenna.r_l, "a_s_sq": spec.rectenna.a_s_sq}


def _sweep_payload(spec) -> dict:
    return {
        "geometry": spec.geometry,
        "experiment_id": spec.experiment_id,
        "system": _system_payload(spec),
        "budgets_w": list(spec.budgets),
        "weight_sweep": [list(w) for w in spec.weight_sweep]
                        if spec.weight_sweep else None,
        "engine": spec.engine,
        "realizations": spec.realizations,
        "rectenna": _rectenna_payload(spec),
        "grid_step": spec.grid_step,
        "grid_steps": spec.grid_steps,
        "strategy_grid_points": spec.strategy_grid_points,
        "tol": spec.tol,
    }


def _rows_from_payload(payload: dict) -> list[ResultRow]:
    rows = []
    for rec in payload["rows"]:
        objective = rec["objective_w"]
        rows.append(ResultRow(
            experiment_id=rec["experiment_id"],
            realization=rec["realization"],
            budget_w=rec["budget_w"],
            weights=tuple(rec["weights"]),
            node_powers_w=tuple(rec["node_powers_w"]),
            objective_w=math.nan if objective is None else objective,
            engine=rec["engine"],
            wall_time_s=rec["wall_time_s"],
            error=rec.get("error"),
        ))
    return rows


def _write_rows(rows: list[ResultRow], out: str, fmt: str, timing: bool) -> None:
    if fmt == "csv":
        Path(out).write_text(csv_text(rows, timing), encoding="utf-8")
        return
    records = []
    for row in rows:
        records.append({
            "experiment_id": row.experiment_id,
            "realization": row.realization,
            "budget_w": row.budget_w,
            "weights": list(row.weights),
            "node_powers_w": list(row.node_powers_w),
            "objective_w": None if math.isnan(row.objective_w) else row.objective_w,
            "engine": row.engine,
            "wall_time_s": row.wall_time_s if timing else 0.0,
            "error": row.error,
        })
    Path(out).write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")


def _echo_summary(rows: list[ResultRow]) -> None:
    good = [r for r in rows if r.error is None]
    if good:
        for cell in summarize(good):
            click.echo(
                f"  budget {cell.budget_w:g} W, weights "
                f"{';'.join(f'{w:g}' for w in cell.weights)}: "
                f"mean objective {cell.mean_objective_w:.6e} W "
                f"(stderr {cell.stderr_objective_w:.2e}, n={cell.n})")
    failed = len(rows) - len(good)
    if failed:
        click.echo(f"  {failed} cell(s) failed; see the error fields", err=True)


def _run_sweep(kind: str, weight_points: int, config, seed, budget, engine,
               realizations, grid_points, tol, out, fmt, server, timing):
    spec = _build_spec(kind, config, seed, budget, engine, realizations,
                       grid_points, tol)
    if kind == "region":
        if spec.config.n_nodes != 2:
            raise click.UsageError("region sweeps need exactly two nodes")
        if spec.weight_sweep is None:
            spec = dataclasses.replace(spec,
                                       weight_sweep=region_weights(weight_points))
    out = out or f"wptopt_{kind}.{fmt}"
    payload = _post(server, "/api/sweep", _sweep_payload(spec))
    rows = _rows_from_payload(payload)
    _write_rows(rows, out, fmt, timing)
    click.echo(f"wrote {len(rows)} rows to {out}")
    _echo_summary(rows)


def _common_options(fn):
    fn = click.option("--config", type=click.Path(exists=True, dir_okay=False),
                      default=None, help="Flat key=value config file.")(fn)
    fn = click.option("--seed", type=int, default=None, help="PRNG seed.")(fn)
    fn = click.option("--budget", type=str, default=None,
                      help="Comma-separated transmit power budgets in watt.")(fn)
    fn = click.option("--engine", type=click.Choice(["optimal", "suboptimal"]),
                      default=None, help="Phi engine for mimo geometry.")(fn)
    fn = click.option("--realizations", type=int, default=None,
                      help="Number of channel realizations.")(fn)
    fn = click.option("--grid-points", type=int, default=None,
                      help="Strategy-curve sample count (mimo).")(fn)
    fn = click.option("--tol", type=float, default=None,
                      help="Engine convergence tolerance.")(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None,
                      help="Output file path.")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                      default="csv", show_default=True)(fn)
    fn = click.option("--server", type=str, default=None,
                      help="Remote service URL (default: in-process).")(fn)
    fn = click.option("--timing/--no-timing", default=False, show_default=True,
                      help="Record measured wall times instead of zeros.")(fn)
    return fn


@click.group()
def main():
    """Transmit-strategy experiments for non-linear harvesting receivers."""


@main.command(help="Multi-antenna TX, single-rectenna node sweep.")
@_common_options
def miso(config, seed, budget, engine, realizations, grid_points, tol, out,
         fmt, server, timing):
    _run_sweep("miso", 11, config, seed, budget, engine, realizations,
               grid_points, tol, out, fmt, server, timing)


@main.command(help="Single-antenna TX, multi-rectenna node sweep.")
@_common_options
def simo(config, seed, budget, engine, realizations, grid_points, tol, out,
         fmt, server, timing):
    _run_sweep("simo", 11, config, seed, budget, engine, realizations,
               grid_points, tol, out, fmt, server, timing)


@main.command(help="General multi-antenna, multi-node sweep.")
@_common_options
def mimo(config, seed, budget, engine, realizations, grid_points, tol, out,
         fmt, server, timing):
    _run_sweep("mimo", 11, config, seed, budget, engine, realizations,
               grid_points, tol, out, fmt, server, timing)


@main.command(help="Two-node weight sweep tracing the harvested power region.")
@click.option("--weight-points", type=int, default=11, show_default=True,
              help="Number of weight vectors on the xi_1 axis.")
@_common_options
def region(config, seed, budget, engine, realizations, grid_points, tol, out,
           fmt, server, timing, weight_points):
    _run_sweep("region", weight_points, config, seed, budget, engine,
               realizations, grid_points, tol, out, fmt, server, timing)


@main.command(help="Dump the effective power curve Phi(nu).")
@click.option("--realization", type=int, default=0, show_default=True)
@_common_options
def curve(config, seed, budget, engine, realizations, grid_points, tol, out,
          fmt, server, timing, realization):
    mapping = _load_mapping(config)
    kind = mapping.get("geometry", "mimo")
    spec = _build_spec(kind, config, seed, budget, engine, realizations,
                       grid_points, tol)
    payload = {
        "geometry": spec.geometry,
        "system": _system_payload(spec),
        "budgets_w": list(spec.budgets),
        "realization": realization,
        "engine": spec.engine,
        "rectenna": _rectenna_payload(spec),
        "grid_step": spec.grid_step,
        "grid_steps": spec.grid_steps,
        "strategy_grid_points": spec.strategy_grid_points,
        "tol": spec.tol,
    }
    out = out or f"wptopt_curve.{fmt}"
    data = _post(server, "/api/curve", payload)
    if fmt == "csv":
        lines = ["nu_w,phi_w"]
        lines += [f"{n!r},{p!r}" for n, p in zip(data["nu_w"], data["phi_w"])]
        Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        Path(out).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    click.echo(f"wrote {len(data['nu_w'])} curve samples to {out}")


@main.command(help="Run the invariant suites.")
@click.option("--server", type=str, default=None,
              help="Remote service URL (default: in-process).")
def selftest(server):
    data = _post(server, "/api/selftest")
    for check in data["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        detail = f"  ({check['detail']})" if check.get("detail") else ""
        click.echo(f"{status} {check['name']}{detail}")
    if not data["passed"]:
        sys.exit(1)
    click.echo("all selftests passed")


@main.command(help="Run the service under uvicorn.")
@click.option("--host", type=str, default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    import uvicorn

    uvicorn.run("wptopt.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
