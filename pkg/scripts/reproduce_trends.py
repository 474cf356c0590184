"""Run the clustered-vs-direct comparison over the bundled instances.

Executes the evaluation-style Solution Paths (direct routing, two-phase
clustering + routing, and the two simulated-quantum QUBO paths where they
fit) on every bundled instance, five trials each, and prints per-path
medians. Writes the full per-trial table to trends.csv.

Paths that cannot run on an instance are recorded as infeasible rows, not
errors: tightly packed instances can defeat the sweep clustering, and
clusters beyond the statevector qubit cap defeat QAOA. Expect the QAOA rows
to dominate the runtime (up to a few minutes per instance whose clusters
approach the cap); that simulation overhead is the point of the comparison.

Usage: python scripts/reproduce_trends.py [--out trends.csv] [--trials 5]
"""

from __future__ import annotations

import argparse
import csv
import statistics
import time
from importlib import resources
from pathlib import Path

from metasolve.model import clone_tree, create_problem
from metasolve.orchestrator import ExecutionError, default_backends, derive_seed, run_complete
from metasolve.strategy import find_path

PATHS = [
    ("direct", "direct"),
    ("two-phase + routing", "two-phase/cluster-tsp"),
    ("two-phase + annealing [simulated-quantum]", "two-phase/cluster-tsp-as-qubo/anneal"),
    ("two-phase + qaoa [simulated-quantum]", "two-phase/cluster-tsp-as-qubo/qaoa"),
]


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", type=Path, default=Path("trends.csv"))
    parser.add_argument("--trials", type=int, default=5)
    parser.add_argument("--seed", type=int, default=20240601)
    args = parser.parse_args()

    backends = default_backends()
    instance_dir = resources.files("metasolve").joinpath("data/instances")
    rows = []
    for entry in sorted(instance_dir.iterdir(), key=lambda e: e.name):
        if not entry.name.endswith(".vrp"):
            continue
        template = create_problem("vrp", entry.read_text())
        name = template.payload.name
        for label, spec in PATHS:
            path = find_path("vrp", spec)
            for trial in range(args.trials):
                root = clone_tree(template)
                started = time.perf_counter()
                try:
                    result = run_complete(
                        root, path, trials=1,
                        seed=derive_seed(args.seed, name, spec, trial), backends=backends,
                    )
                    cost, feasible = result.objective, result.feasible
                except ExecutionError:
                    cost, feasible = None, False
                wall_ms = (time.perf_counter() - started) * 1000.0
                rows.append({
                    "instance": name, "path": label, "trial": trial,
                    "cost": cost if cost is not None else "",
                    "feasible": feasible, "wall_ms": round(wall_ms, 1),
                })
                print(f"{name:18s} {label:45s} trial {trial}: "
                      f"cost={cost if cost is not None else 'failed'} wall={wall_ms:.0f}ms")

    with args.out.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["instance", "path", "trial", "cost", "feasible", "wall_ms"])
        writer.writeheader()
        writer.writerows(rows)

    print(f"\nwrote {args.out}")
    print("\nper-path medians over all instances:")
    for label, _ in PATHS:
        mine = [r for r in rows if r["path"] == label]
        costs = [r["cost"] for r in mine if r["cost"] != ""]
        walls = [r["wall_ms"] for r in mine]
        feasible = sum(r["feasible"] for r in mine)
        cost_str = f"median_cost={statistics.median(costs):.0f}" if costs else "no solutions"
        print(f"  {label:45s} {cost_str} median_wall={statistics.median(walls):.0f}ms "
              f"feasible={feasible}/{len(mine)}")


if __name__ == "__main__":
    main()
