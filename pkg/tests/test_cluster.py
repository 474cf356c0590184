import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metasolve.cluster import (
    ClusteringResult,
    CoverageViolation,
    Infeasible,
    MissingSubResult,
    NotEuclidean,
    kmeans_cluster,
    recompose,
    two_phase_cluster,
)
from metasolve.formats import VrpInstance, distance_matrix
from metasolve.routing import Tour, brute_force_tsp, solution_cost, solve_tsp_native


def make_vrp(coords, demands, capacity, vehicles, name="t"):
    return VrpInstance(
        name=name, n=len(coords), edge_weight_kind="euc2d",
        coords=[(float(x), float(y)) for x, y in coords],
        capacity=capacity, demands=list(demands), depot_index=0, vehicles=vehicles,
    )


SQUARE_VRP = make_vrp(
    coords=[(5, 5), (0, 0), (0, 10), (10, 10), (10, 0)],
    demands=[0, 1, 1, 1, 1],
    capacity=2,
    vehicles=2,
    name="square-k2",
)


def random_feasible_vrp(rng: random.Random, n_customers=None) -> VrpInstance:
    n = n_customers or rng.randint(4, 12)
    pts = set()
    while len(pts) < n + 1:
        pts.add((rng.randint(0, 50), rng.randint(0, 50)))
    coords = sorted(pts)
    capacity = rng.randint(8, 20)
    demands = [0] + [rng.randint(1, capacity) for _ in range(n)]
    vehicles = math.ceil(sum(demands) / capacity) + rng.randint(0, 2)
    return make_vrp(coords, demands, capacity, vehicles, name=f"rand-k{vehicles}")


def assert_partition(vrp: VrpInstance, result: ClusteringResult):
    # membership is a bijection customers -> (cluster, local) slots
    assert sorted(result.membership) == sorted(vrp.customers)
    slots = sorted(result.membership.values())
    assert len(set(slots)) == len(slots)
    for ci, sub in enumerate(result.sub_instances):
        locals_here = sorted(l for (c, (cj, l)) in result.membership.items() if cj == ci)
        assert locals_here == list(range(1, sub.n))
        assert sub.coords[0] == vrp.coords[vrp.depot_index]
        for original, (cj, local) in result.membership.items():
            if cj == ci:
                assert sub.coords[local] == vrp.coords[original]


class TestKmeans:
    def test_single_cluster_is_identity(self):
        result = kmeans_cluster(SQUARE_VRP, k_clusters=1, seed=0)
        assert len(result.sub_instances) == 1
        assert_partition(SQUARE_VRP, result)
        assert result.sub_instances[0].n == 5

    def test_square_corners_split_into_adjacent_pairs(self):
        # brute-force reference: best 2-partition by within-cluster variance
        customers = SQUARE_VRP.customers
        pts = {c: SQUARE_VRP.coords[c] for c in customers}

        def variance(group):
            cx = sum(pts[c][0] for c in group) / len(group)
            cy = sum(pts[c][1] for c in group) / len(group)
            return sum((pts[c][0] - cx) ** 2 + (pts[c][1] - cy) ** 2 for c in group)

        best = min(
            (
                frozenset([frozenset(g), frozenset(set(customers) - set(g))])
                for r in range(1, 4)
                for g in itertools.combinations(customers, r)
            ),
            key=lambda p: sum(variance(list(g)) for g in p),
        )

        result = kmeans_cluster(SQUARE_VRP, k_clusters=2, seed=1)
        got = frozenset(
            frozenset(c for c, (ci, _) in result.membership.items() if ci == target)
            for target in (0, 1)
        )
        assert got == best
        assert all(len(g) == 2 for g in got)

    def test_k_equals_customer_count_gives_singletons(self):
        result = kmeans_cluster(SQUARE_VRP, k_clusters=4, seed=3)
        assert len(result.sub_instances) == 4
        assert all(sub.n == 2 for sub in result.sub_instances)

    def test_sub_vrps_inherit_capacity_and_get_fleet(self):
        vrp = make_vrp(
            coords=[(0, 0), (1, 1), (1, 2), (8, 8), (9, 8)],
            demands=[0, 3, 4, 5, 6], capacity=8, vehicles=3,
        )
        result = kmeans_cluster(vrp, k_clusters=2, seed=0)
        for sub in result.sub_instances:
            assert isinstance(sub, VrpInstance)
            assert sub.capacity == 8
            assert sub.vehicles == math.ceil(sum(sub.demands) / 8)

    def test_explicit_matrix_rejected(self):
        inst = VrpInstance(
            name="m", n=3, edge_weight_kind="explicit",
            matrix=[[0, 1, 2], [1, 0, 3], [2, 3, 0]],
            capacity=5, demands=[0, 1, 1], depot_index=0, vehicles=1,
        )
        with pytest.raises(NotEuclidean):
            kmeans_cluster(inst, k_clusters=1, seed=0)

    def test_bad_k_rejected(self):
        with pytest.raises(ValueError):
            kmeans_cluster(SQUARE_VRP, k_clusters=5, seed=0)


class TestTwoPhase:
    def test_unit_demand_pigeonhole(self):
        result = two_phase_cluster(SQUARE_VRP, seed=0)
        # Q=2, four unit demands, k=2: every valid packing has two clusters of two
        assert len(result.sub_instances) == 2
        sizes = sorted(sub.n - 1 for sub in result.sub_instances)
        assert sizes == [2, 2]
        assert_partition(SQUARE_VRP, result)

    def test_full_demands_force_singletons(self):
        vrp = make_vrp(
            coords=[(0, 0), (0, 5), (5, 0), (5, 5)],
            demands=[0, 6, 6, 6], capacity=6, vehicles=3,
        )
        result = two_phase_cluster(vrp, seed=1)
        assert len(result.sub_instances) == 3
        assert all(sub.n == 2 for sub in result.sub_instances)

    def test_supply_infeasible_rejected(self):
        vrp = make_vrp(
            coords=[(0, 0), (0, 5), (5, 0), (5, 5)],
            demands=[0, 6, 6, 6], capacity=6, vehicles=2,
        )
        with pytest.raises(Infeasible):
            two_phase_cluster(vrp, seed=0)

    @given(st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_capacity_and_partition_hold_on_random_instances(self, seed):
        rng = random.Random(seed)
        vrp = random_feasible_vrp(rng)
        try:
            result = two_phase_cluster(vrp, seed=seed)
        except Infeasible:
            # greedy packing may exhaust all start angles on tight instances
            return
        assert len(result.sub_instances) <= vrp.vehicles
        assert_partition(vrp, result)
        for sub in result.sub_instances:
            members = [c for c, (ci, _) in result.membership.items()
                       if result.sub_instances[ci] is sub]
            assert sum(vrp.demands[c] for c in members) <= vrp.capacity


class TestRecompose:
    def solve_clusters(self, vrp, result):
        payloads = []
        for sub in result.sub_instances:
            if sub.n == 2:
                payloads.append(Tour(order=[0, 1], cost=2 * sub.distance(0, 1)))
            else:
                payloads.append(solve_tsp_native(sub, seed=0))
        return payloads

    def test_objectives_add_up(self):
        result = two_phase_cluster(SQUARE_VRP, seed=0)
        payloads = self.solve_clusters(SQUARE_VRP, result)
        composed = recompose(SQUARE_VRP, result, payloads)
        assert composed.feasible
        matrix = distance_matrix(SQUARE_VRP)
        assert composed.cost == solution_cost(matrix, composed.routes, 0)
        assert composed.cost == sum(p.cost for p in payloads)

    def test_single_cluster_equals_sub_solution(self):
        vrp = make_vrp(
            coords=[(0, 0), (0, 10), (10, 10), (10, 0)],
            demands=[0, 1, 1, 1], capacity=5, vehicles=1,
        )
        result = two_phase_cluster(vrp, seed=0)
        assert len(result.sub_instances) == 1
        tour = brute_force_tsp(result.sub_instances[0])
        composed = recompose(vrp, result, [tour])
        assert composed.cost == tour.cost == 40
        assert composed.routes[0][0] != 0  # depot implicit, re-rooted

    def test_missing_sub_result(self):
        result = two_phase_cluster(SQUARE_VRP, seed=0)
        with pytest.raises(MissingSubResult):
            recompose(SQUARE_VRP, result, [None, None])

    def test_coverage_violation(self):
        result = two_phase_cluster(SQUARE_VRP, seed=0)
        payloads = self.solve_clusters(SQUARE_VRP, result)
        # drop one customer from the first tour
        bad = Tour(order=payloads[0].order[:-1], cost=0)
        with pytest.raises(CoverageViolation):
            recompose(SQUARE_VRP, result, [bad, payloads[1]])
