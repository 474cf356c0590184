"""Regenerate the bundled CVRP instances and the best-known-cost sidecar.

The two small instances are solved to proven optimality here (set-partition
enumeration over at most 7 customers with exact tours per block), so the
sidecar's costs are true optima and benchmark cost ratios are >= 1 by
construction. The larger synthetic instance exercises the clustered-vs-direct
trade-off and carries no sidecar entry.

Usage: python scripts/make_instances.py [output-dir]
"""

from __future__ import annotations

import itertools
import math
import random
import sys
from pathlib import Path

from metasolve.formats import VrpInstance, distance_matrix, parse_tsplib, write_tsplib

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "metasolve" / "data" / "instances"


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        for i in range(len(partition)):
            yield partition[:i] + [[first, *partition[i]]] + partition[i + 1 :]
        yield [[first]] + partition


def optimal_cost(vrp: VrpInstance) -> int:
    matrix = distance_matrix(vrp)
    customers = vrp.customers
    assert len(customers) <= 7
    best = None
    for partition in set_partitions(customers):
        if len(partition) > vrp.vehicles:
            continue
        if any(sum(vrp.demands[c] for c in block) > vrp.capacity for block in partition):
            continue
        total = 0
        for block in partition:
            block_best = None
            for perm in itertools.permutations(block):
                cost = matrix[0][perm[0]] + matrix[perm[-1]][0]
                cost += sum(matrix[perm[i]][perm[i + 1]] for i in range(len(perm) - 1))
                if block_best is None or cost < block_best:
                    block_best = cost
            total += block_best
        if best is None or total < best:
            best = total
    return best


def small_instance(name: str, seed: int, n_customers: int, capacity: int) -> VrpInstance:
    rng = random.Random(seed)
    pts = {(35, 35)}
    while len(pts) < n_customers + 1:
        pts.add((rng.randint(5, 65), rng.randint(5, 65)))
    coords = [(35.0, 35.0)] + sorted((float(x), float(y)) for x, y in pts - {(35, 35)})
    demands = [0] + [rng.randint(2, capacity - 2) for _ in range(n_customers)]
    vehicles = math.ceil(sum(demands) / capacity) + 1
    return VrpInstance(
        name=f"{name}-k{vehicles}", n=n_customers + 1, edge_weight_kind="euc2d",
        coords=coords, capacity=capacity, demands=demands, depot_index=0, vehicles=vehicles,
        comment="bundled synthetic instance with oracle-verified optimum",
    )


def trend_instance(seed: int = 7, n_customers: int = 49, capacity: int = 25) -> VrpInstance:
    """Uniformly scattered customers around a central depot (n=50).

    Uniform scatter keeps angular sweep clusters near-optimal (cheap
    improvement phase) while the direct solver works across the full
    instance, which is the regime where clustering buys runtime.
    """
    rng = random.Random(seed)
    pts = set()
    while len(pts) < n_customers:
        pts.add((rng.randint(0, 300), rng.randint(0, 300)))
    coords = [(150.0, 150.0)] + sorted((float(x), float(y)) for x, y in pts)
    demands = [0] + [rng.randint(1, 9) for _ in range(n_customers)]
    vehicles = math.ceil(sum(demands) / capacity) + 2
    return VrpInstance(
        name=f"synth-n{n_customers + 1}-k{vehicles}", n=n_customers + 1, edge_weight_kind="euc2d",
        coords=coords, capacity=capacity, demands=demands, depot_index=0, vehicles=vehicles,
        comment="bundled synthetic instance for clustered-vs-direct comparisons",
    )


def main(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    sidecar = []

    for name, seed, n, cap in [("S-n7", 11, 6, 16), ("S-n8", 23, 7, 14)]:
        vrp = small_instance(name, seed, n, cap)
        path = out_dir / f"{vrp.name}.vrp"
        path.write_text(write_tsplib(vrp))
        assert parse_tsplib(path.read_text()) == vrp
        optimum = optimal_cost(vrp)
        sidecar.append(f"{vrp.name},{optimum}")
        print(f"{path.name}: n={vrp.n} k={vrp.vehicles} optimum={optimum}")

    trend = trend_instance()
    trend_path = out_dir / f"{trend.name}.vrp"
    trend_path.write_text(write_tsplib(trend))
    assert parse_tsplib(trend_path.read_text()) == trend
    print(f"{trend_path.name}: n={trend.n} k={trend.vehicles}")

    (out_dir / "best-known.csv").write_text("\n".join(sidecar) + "\n")
    print(f"sidecar: {out_dir / 'best-known.csv'}")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT_OUT)
