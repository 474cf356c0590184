"""Command-line front door: one-shot solving, path listing, benchmarks, server.

Exit codes: 0 ok, 1 solver failure, 2 usage or config error.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
import sys
import time
from pathlib import Path

import click

from . import model, orchestrator
from .formats import ParseError, write_routes
from .model import PROBLEM_TYPES, create_problem
from .orchestrator import (
    ExecutionError,
    PathValidationError,
    default_backends,
    derive_seed,
    run_complete,
    settings_digest,
)
from .routing import Tour, VrpSolution
from .strategy import UnknownStrategy, default_registry, enumerate_paths, find_path, format_path

# the four Solution Paths of the reference evaluation, by their usual numbering
PATH_ALIASES = {
    "paper-1": "direct",
    "paper-2": "two-phase/cluster-tsp",
    "paper-3": "two-phase/cluster-tsp-as-qubo/qaoa",
    "paper-4": "two-phase/cluster-tsp-as-qubo/anneal",
}

SIMULATED_QUANTUM_SOLVERS = {"qaoa", "simulated-annealing"}


def _fail(code: str, message: str, exit_code: int = 2) -> None:
    click.echo(f"error[{code}]: {message}", err=True)
    sys.exit(exit_code)


@click.group()
def main() -> None:
    """Hybrid meta-solving toolbox."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--type", "type_id", required=True, help="problem type (vrp, tsp, qubo, sat, max-cut)")
@click.option("--path", "path_spec", required=True, help="step ids joined by '/', or a 1-based path index")
@click.option("--trials", default=1, show_default=True, help="independent executions of the path")
@click.option("--seed", default=0, show_default=True)
@click.option("--max-clusterings", default=1, show_default=True)
def solve(file: Path, type_id: str, path_spec: str, trials: int, seed: int, max_clusterings: int):
    """Solve FILE along one Solution Path and write a solution file next to it."""
    if type_id not in PROBLEM_TYPES:
        _fail("UnknownProblemType", f"no problem type {type_id!r}")
    try:
        text = file.read_text()
        root_template = create_problem(type_id, text)
    except ParseError as exc:
        _fail("ParseError", str(exc))
    strategy_id = PROBLEM_TYPES[type_id].strategy_id
    try:
        path = find_path(strategy_id, PATH_ALIASES.get(path_spec, path_spec), max_clusterings=max_clusterings)
    except (ValueError, UnknownStrategy) as exc:
        _fail("InvalidPath", str(exc))

    backends = default_backends()
    best = None
    for trial in range(max(1, trials)):
        root = model.clone_tree(root_template)
        started = time.perf_counter()
        try:
            result = run_complete(root, path, trials=1, seed=derive_seed(seed, "trial", trial), backends=backends)
        except PathValidationError as exc:
            _fail("InvalidPath", str(exc))
        except ExecutionError as exc:
            click.echo(f"trial {trial}: failed: {exc}", err=True)
            continue
        wall_ms = int((time.perf_counter() - started) * 1000)
        click.echo(f"trial {trial}: cost={_fmt_cost(result.objective)} feasible={str(result.feasible).lower()} wall_ms={wall_ms}")
        if best is None or (result.feasible, -result.objective) > (best.feasible, -best.objective):
            best = result
    if best is None:
        _fail("SolverFailure", "every trial failed", exit_code=1)

    out_path = file.with_suffix(file.suffix + ".sol")
    out_path.write_text(_solution_text(best.payload, best.objective))
    click.echo(f"cost={_fmt_cost(best.objective)} feasible={str(best.feasible).lower()} solution={out_path}")
    sys.exit(0 if best.feasible else 1)


def _fmt_cost(objective: float) -> str:
    return str(int(objective)) if float(objective).is_integer() else f"{objective:.6g}"


def _solution_text(payload, objective: float) -> str:
    from .qubo import Sample
    from .sat import Assignment, solution_line

    if isinstance(payload, VrpSolution):
        return write_routes(payload.routes, payload.cost)
    if isinstance(payload, Tour):
        pivot = payload.order.index(0)
        rotated = payload.order[pivot + 1 :] + payload.order[:pivot]
        return write_routes([rotated], payload.cost)
    if isinstance(payload, Sample):
        bits = "".join(str(b) for b in payload.bits)
        return f"{bits} {payload.energy} {payload.count}\n"
    if isinstance(payload, Assignment):
        return solution_line(payload) + "\n"
    if isinstance(payload, model.Infeasibility):
        return f"UNSAT\n" if payload.reason == "unsatisfiable" else f"infeasible: {payload.reason}\n"
    return f"objective: {objective}\n"


@main.command()
@click.option("--type", "type_id", required=True)
@click.option("--max-clusterings", default=None, type=int, help="limit clustering steps per path")
@click.option("--available-only", is_flag=True, default=False)
def paths(type_id: str, max_clusterings: int | None, available_only: bool):
    """List the Solution Paths of the type's strategy, one per line."""
    if type_id not in PROBLEM_TYPES:
        _fail("UnknownProblemType", f"no problem type {type_id!r}")
    strategy_id = PROBLEM_TYPES[type_id].strategy_id
    for path in enumerate_paths(strategy_id, max_clusterings=max_clusterings, available_only=available_only):
        solvers = "+".join(solver for _, solver in path)
        click.echo(f"{format_path(path)}\t[{solvers}]")


@main.command()
@click.option("--dir", "instance_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--paths", "path_list", required=True, help="comma-separated path specs or paper-N aliases")
@click.option("--trials", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_csv", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--best-known", "sidecar", default=None, type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="CSV sidecar 'name,cost' with best-known solution costs")
@click.option("--max-clusterings", default=1, show_default=True)
def bench(instance_dir: Path, path_list: str, trials: int, seed: int, out_csv: Path,
          sidecar: Path | None, max_clusterings: int):
    """Run Solution Paths over a directory of CVRP instances; write a CSV.

    Output is a pure function of (instances, paths, trials, seed): rows are
    ordered deterministically and wall times are recorded at 0.1 s resolution
    so repeated runs produce byte-identical files.
    """
    strategy_id = PROBLEM_TYPES["vrp"].strategy_id
    specs = [PATH_ALIASES.get(tok.strip(), tok.strip()) for tok in path_list.split(",") if tok.strip()]
    try:
        resolved = [(spec, find_path(strategy_id, spec, max_clusterings=max_clusterings)) for spec in specs]
    except ValueError as exc:
        _fail("InvalidPath", str(exc))

    instances = sorted(instance_dir.glob("*.vrp"))
    if not instances:
        _fail("NoInstances", f"no .vrp files under {instance_dir}")
    best_known = _load_sidecar(sidecar) if sidecar else {}

    backends = default_backends()
    rows = []
    for instance_path in instances:
        try:
            template = create_problem("vrp", instance_path.read_text())
        except ParseError as exc:
            _fail("ParseError", f"{instance_path.name}: {exc}")
        name = template.payload.name
        for spec, path in resolved:
            digest = settings_digest(path, trials)
            for trial in range(trials):
                run_seed = derive_seed(seed, name, spec, trial)
                root = model.clone_tree(template)
                started = time.perf_counter()
                try:
                    result = run_complete(root, path, trials=1, seed=run_seed, backends=backends)
                    wall = time.perf_counter() - started
                    rows.append({
                        "instance": name, "path": spec, "trial": trial,
                        "cost": _fmt_cost(result.objective) if result.feasible else "",
                        "feasible": str(result.feasible).lower(),
                        "wall_ms": _quantize_wall(wall), "seed": run_seed, "settings_digest": digest,
                    })
                except (ExecutionError, PathValidationError):
                    wall = time.perf_counter() - started
                    rows.append({
                        "instance": name, "path": spec, "trial": trial,
                        "cost": "", "feasible": "false",
                        "wall_ms": _quantize_wall(wall), "seed": run_seed, "settings_digest": digest,
                    })

    buffer = io.StringIO()
    writer = csv.DictWriter(
        buffer,
        fieldnames=["instance", "path", "trial", "cost", "feasible", "wall_ms", "seed", "settings_digest"],
        lineterminator="\n",
    )
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    out_csv.write_text(buffer.getvalue())
    click.echo(_bench_summary(rows, best_known))


def _quantize_wall(wall_s: float) -> int:
    """Wall time in ms at 0.1 s resolution, keeping benchmark CSVs reproducible."""
    return int(wall_s * 10) * 100


def _load_sidecar(path: Path) -> dict[str, float]:
    table = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, _, cost = line.partition(",")
        try:
            table[name.strip()] = float(cost)
        except ValueError:
            _fail("ParseError", f"{path.name} line {lineno}: bad cost {cost!r}")
    return table


def _bench_summary(rows: list[dict], best_known: dict[str, float]) -> str:
    out = ["", "path summary (medians over instances and trials):"]
    for spec in sorted({r["path"] for r in rows}):
        mine = [r for r in rows if r["path"] == spec]
        walls = [r["wall_ms"] for r in mine]
        costs = [float(r["cost"]) for r in mine if r["cost"]]
        ratios = [
            float(r["cost"]) / best_known[r["instance"]]
            for r in mine
            if r["cost"] and r["instance"] in best_known and best_known[r["instance"]] > 0
        ]
        solvers = set(spec.split("/"))
        tag = " [simulated-quantum]" if solvers & {"anneal", "qaoa", "cluster-tsp-as-qubo"} else ""
        parts = [f"  {spec}{tag}:"]
        parts.append(f"median_wall_ms={statistics.median(walls):.0f}")
        if costs:
            parts.append(f"median_cost={statistics.median(costs):.0f}")
        if ratios:
            parts.append(f"median_cost_ratio={statistics.median(ratios):.4f}")
        feasible = sum(r["feasible"] == "true" for r in mine)
        parts.append(f"feasible={feasible}/{len(mine)}")
        out.append(" ".join(parts))
    return "\n".join(out)


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path(exists=True, dir_okay=False, path_type=Path))
def serve(config_path: Path | None):
    """Run the HTTP service."""
    from .service import ServiceConfig, run_server

    try:
        config = ServiceConfig.load(config_path)
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        _fail("BadConfig", str(exc))
    try:
        run_server(config)
    except OSError as exc:
        _fail("BindFailure", f"cannot serve on port {config.port}: {exc}")
    except SystemExit as exc:  # uvicorn signals startup failure via SystemExit
        if exc.code not in (0, None):
            _fail("BindFailure", f"server failed to start on port {config.port}")


if __name__ == "__main__":
    main()
