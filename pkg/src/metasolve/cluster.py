"""Clustering steps for VRP decomposition and recomposition of cluster solutions.

Two clusterings are provided:

* ``kmeans_cluster``: Lloyd iterations over customer coordinates; each cluster
  becomes a smaller VRP sharing the depot.
* ``two_phase_cluster``: capacity-respecting creation phase (angular sweep
  around the depot) followed by an improvement phase (relocate/swap between
  clusters, scored by nearest-neighbor tour estimates); each cluster becomes a
  TSP coverable by a single vehicle.

``recompose`` folds solved sub-instances back into one solution for the
original instance, recomputing the objective from the original distances.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .formats import TspInstance, VrpInstance, distance_matrix
from .routing import Tour, VrpSolution, check_vrp_solution, solution_cost


class NotEuclidean(ValueError):
    """Clustering needs 2-D coordinates; explicit-matrix instances are rejected."""


class Infeasible(ValueError):
    pass


class MissingSubResult(ValueError):
    pass


class CoverageViolation(ValueError):
    pass


@dataclass
class ClusteringResult:
    """A partition of the customers into sub-instances that share the depot.

    ``membership`` maps each original customer index to its
    (cluster index, local node index) slot; local index 0 is the depot in
    every sub-instance.
    """

    sub_instances: list[TspInstance | VrpInstance]
    membership: dict[int, tuple[int, int]]
    kind: str  # "kmeans-vrp" | "two-phase-tsp"


def _require_coords(vrp: VrpInstance) -> None:
    if vrp.edge_weight_kind != "euc2d":
        raise NotEuclidean("clustering requires coordinate (EUC_2D) instances")


def kmeans_cluster(vrp: VrpInstance, k_clusters: int, seed: int = 0) -> ClusteringResult:
    """Partition customers by k-means; each cluster becomes a VRP instance.

    Runs Lloyd iterations to an assignment fixpoint or 300 iterations. A
    cluster that goes empty is re-seeded on the customer farthest from its
    assigned centroid.
    """
    _require_coords(vrp)
    customers = vrp.customers
    if not 1 <= k_clusters <= len(customers):
        raise ValueError(f"k_clusters must be in 1..{len(customers)}, got {k_clusters}")

    rng = random.Random(seed)
    points = {c: vrp.coords[c] for c in customers}
    centroids = [points[c] for c in rng.sample(customers, k_clusters)]
    assignment: dict[int, int] = {}

    for _ in range(300):
        new_assignment = {
            c: min(range(k_clusters), key=lambda ci: _sqdist(points[c], centroids[ci]))
            for c in customers
        }
        # re-seed empty clusters on the farthest customer
        for ci in range(k_clusters):
            if ci not in new_assignment.values():
                far = max(customers, key=lambda c: _sqdist(points[c], centroids[new_assignment[c]]))
                centroids[ci] = points[far]
                new_assignment[far] = ci
        if new_assignment == assignment:
            break
        assignment = new_assignment
        for ci in range(k_clusters):
            members = [c for c in customers if assignment[c] == ci]
            if members:
                centroids[ci] = (
                    sum(points[c][0] for c in members) / len(members),
                    sum(points[c][1] for c in members) / len(members),
                )

    clusters = [[c for c in customers if assignment[c] == ci] for ci in range(k_clusters)]
    clusters = [cl for cl in clusters if cl]
    return _build_result(vrp, clusters, kind="kmeans-vrp")


def _sqdist(a: tuple[float, float], b: tuple[float, float]) -> float:
    return (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2


def two_phase_cluster(vrp: VrpInstance, seed: int = 0) -> ClusteringResult:
    """Creation phase (angular sweep) plus improvement phase (relocate/swap).

    The sweep orders customers by polar angle around the depot and packs them
    greedily, closing a cluster when the next customer would exceed capacity.
    Packing is retried from 8 evenly spaced start angles before giving up.
    The improvement phase applies best-improvement relocate and swap moves
    between clusters, accepting only capacity-feasible moves that reduce the
    sum of nearest-neighbor tour estimates, until no move improves or 1000
    moves were applied. Every cluster fits one vehicle.
    """
    _require_coords(vrp)
    if not vrp.supply_feasible:
        raise Infeasible(
            f"total demand {vrp.total_demand} exceeds fleet capacity "
            f"{vrp.vehicles} x {vrp.capacity}"
        )

    depot = vrp.coords[vrp.depot_index]
    rng = random.Random(seed)
    base_angle = rng.uniform(0.0, 2.0 * math.pi)

    clusters = None
    for attempt in range(8):
        start = base_angle + attempt * math.pi / 4.0
        candidate = _sweep_pack(vrp, start)
        if len(candidate) <= vrp.vehicles:
            clusters = candidate
            break
    if clusters is None:
        raise Infeasible(f"sweep packing needs more than {vrp.vehicles} clusters from all 8 start angles")

    clusters = _improve_clusters(vrp, clusters)
    return _build_result(vrp, clusters, kind="two-phase-tsp")


def _sweep_pack(vrp: VrpInstance, start_angle: float) -> list[list[int]]:
    depot = vrp.coords[vrp.depot_index]

    def angle(c: int) -> float:
        dx = vrp.coords[c][0] - depot[0]
        dy = vrp.coords[c][1] - depot[1]
        return (math.atan2(dy, dx) - start_angle) % (2.0 * math.pi)

    ordered = sorted(vrp.customers, key=lambda c: (angle(c), c))
    clusters: list[list[int]] = []
    current: list[int] = []
    load = 0
    for c in ordered:
        if current and load + vrp.demands[c] > vrp.capacity:
            clusters.append(current)
            current = []
            load = 0
        current.append(c)
        load += vrp.demands[c]
    if current:
        clusters.append(current)
    return clusters


def _nn_tour_estimate(matrix, depot: int, cluster: list[int]) -> int:
    """Nearest-neighbor closed-tour cost over the depot and one cluster."""
    if not cluster:
        return 0
    unvisited = set(cluster)
    cost = 0
    last = depot
    while unvisited:
        nxt = min(unvisited, key=lambda c: (matrix[last][c], c))
        cost += matrix[last][nxt]
        unvisited.remove(nxt)
        last = nxt
    return cost + matrix[last][depot]


def _improve_clusters(vrp: VrpInstance, clusters: list[list[int]]) -> list[list[int]]:
    matrix = distance_matrix(vrp)
    depot = vrp.depot_index
    demands = vrp.demands
    capacity = vrp.capacity
    loads = [sum(demands[c] for c in cl) for cl in clusters]
    estimates = [_nn_tour_estimate(matrix, depot, cl) for cl in clusters]

    # moving a customer only changes the two touched clusters, so the best
    # candidate per cluster pair stays valid until one of the pair mutates;
    # rescanning only invalidated pairs keeps best-improvement exact and fast
    cache: dict[frozenset[int], int] = {}

    def estimate(members: list[int]) -> int:
        key = frozenset(members)
        if key not in cache:
            cache[key] = _nn_tour_estimate(matrix, depot, members)
        return cache[key]

    def best_for_pair(i: int, j: int):
        best = None  # (delta, kind, payload)
        for src, dst in ((i, j), (j, i)):
            for c in clusters[src]:
                if loads[dst] + demands[c] > capacity:
                    continue
                delta = (
                    estimate([x for x in clusters[src] if x != c])
                    + estimate(clusters[dst] + [c])
                    - estimates[src]
                    - estimates[dst]
                )
                if delta < 0 and (best is None or delta < best[0]):
                    best = (delta, "relocate", (src, dst, c))
        for a in clusters[i]:
            for b in clusters[j]:
                if loads[i] - demands[a] + demands[b] > capacity:
                    continue
                if loads[j] - demands[b] + demands[a] > capacity:
                    continue
                delta = (
                    estimate([x if x != a else b for x in clusters[i]])
                    + estimate([x if x != b else a for x in clusters[j]])
                    - estimates[i]
                    - estimates[j]
                )
                if delta < 0 and (best is None or delta < best[0]):
                    best = (delta, "swap", (i, j, a, b))
        return best

    pair_best = {
        (i, j): best_for_pair(i, j)
        for i in range(len(clusters))
        for j in range(i + 1, len(clusters))
    }

    for _ in range(1000):
        candidates = [(move[0], pair, move) for pair, move in pair_best.items() if move is not None]
        if not candidates:
            break
        _, _, best = min(candidates, key=lambda t: (t[0], t[1]))
        if best[1] == "relocate":
            i, j, c = best[2]
            clusters[i].remove(c)
            clusters[j].append(c)
            loads[i] -= demands[c]
            loads[j] += demands[c]
        else:
            i, j, a, b = best[2]
            clusters[i][clusters[i].index(a)] = b
            clusters[j][clusters[j].index(b)] = a
            loads[i] += demands[b] - demands[a]
            loads[j] += demands[a] - demands[b]
        estimates[i] = estimate(clusters[i])
        estimates[j] = estimate(clusters[j])
        for pair in pair_best:
            if i in pair or j in pair:
                pair_best[pair] = best_for_pair(*pair)

    return [cl for cl in clusters if cl]


def _build_result(vrp: VrpInstance, clusters: list[list[int]], kind: str) -> ClusteringResult:
    sub_instances: list[TspInstance | VrpInstance] = []
    membership: dict[int, tuple[int, int]] = {}
    for ci, cluster in enumerate(clusters):
        members = sorted(cluster)
        coords = [vrp.coords[vrp.depot_index]] + [vrp.coords[c] for c in members]
        for local, c in enumerate(members, start=1):
            membership[c] = (ci, local)
        if kind == "two-phase-tsp":
            sub = TspInstance(
                name=f"{vrp.name}-c{ci}",
                n=len(members) + 1,
                edge_weight_kind="euc2d",
                coords=coords,
            )
        else:
            demand = sum(vrp.demands[c] for c in members)
            sub = VrpInstance(
                name=f"{vrp.name}-c{ci}",
                n=len(members) + 1,
                edge_weight_kind="euc2d",
                coords=coords,
                capacity=vrp.capacity,
                demands=[0] + [vrp.demands[c] for c in members],
                depot_index=0,
                vehicles=max(1, math.ceil(demand / vrp.capacity)),
            )
        sub_instances.append(sub)
    return ClusteringResult(sub_instances=sub_instances, membership=membership, kind=kind)


def recompose(
    vrp: VrpInstance,
    clustering: ClusteringResult,
    sub_payloads: list[Tour | VrpSolution | None],
) -> VrpSolution:
    """Fold per-cluster solutions into one solution for the original instance.

    TSP clusters contribute one route each (the tour rotated to start at the
    depot); VRP clusters contribute their route lists. The objective is
    recomputed from the original instance's distances.
    """
    if len(sub_payloads) != len(clustering.sub_instances) or any(p is None for p in sub_payloads):
        raise MissingSubResult(
            f"need {len(clustering.sub_instances)} sub-results, got "
            f"{sum(p is not None for p in sub_payloads)}"
        )

    local_to_original: list[dict[int, int]] = [dict() for _ in clustering.sub_instances]
    for original, (ci, local) in clustering.membership.items():
        local_to_original[ci][local] = original

    routes: list[list[int]] = []
    for ci, payload in enumerate(sub_payloads):
        mapping = local_to_original[ci]
        if isinstance(payload, Tour):
            order = payload.order
            if 0 not in order:
                raise CoverageViolation(f"cluster {ci} tour misses the depot")
            pivot = order.index(0)
            rotated = order[pivot + 1 :] + order[:pivot]
            routes.append([_map_local(mapping, v, ci) for v in rotated])
        elif isinstance(payload, VrpSolution):
            for route in payload.routes:
                routes.append([_map_local(mapping, v, ci) for v in route])
        else:
            raise MissingSubResult(f"cluster {ci} carries no routing payload")

    covered = sorted(c for route in routes for c in route)
    if covered != sorted(vrp.customers):
        raise CoverageViolation("composed routes do not cover every customer exactly once")

    matrix = distance_matrix(vrp)
    solution = VrpSolution(
        routes=routes,
        cost=solution_cost(matrix, routes, vrp.depot_index),
        feasible=False,
    )
    solution.feasible = check_vrp_solution(vrp, solution)
    return solution


def _map_local(mapping: dict[int, int], local: int, ci: int) -> int:
    if local not in mapping:
        raise CoverageViolation(f"cluster {ci} visits unknown local node {local}")
    return mapping[local]
