import random
import stat

import pytest

from metasolve.formats import TspInstance, VrpInstance, distance_matrix, parse_tsplib
from metasolve.routing import (
    BinaryNotFound,
    OutputParseError,
    SubprocessFailure,
    TooLarge,
    Tour,
    VrpSolution,
    brute_force_tsp,
    check_vrp_solution,
    solution_cost,
    solve_external,
    solve_tsp_native,
    solve_vrp_native,
    tour_cost,
    two_opt_is_local_optimum,
)

from .oracles import exhaustive_tsp_cost, exhaustive_vrp_cost

SQUARE = TspInstance(
    name="square", n=4, edge_weight_kind="euc2d",
    coords=[(0.0, 0.0), (0.0, 10.0), (10.0, 10.0), (10.0, 0.0)],
)

TRIANGLE = TspInstance(
    name="tri", n=3, edge_weight_kind="euc2d",
    coords=[(0.0, 0.0), (0.0, 3.0), (4.0, 0.0)],
)


def random_tsp(n: int, seed: int) -> TspInstance:
    rng = random.Random(seed)
    pts = set()
    while len(pts) < n:
        pts.add((rng.randint(0, 100), rng.randint(0, 100)))
    return TspInstance(
        name=f"r{seed}", n=n, edge_weight_kind="euc2d",
        coords=[(float(x), float(y)) for x, y in sorted(pts)],
    )


def random_vrp(n_customers: int, seed: int, capacity: int = 20, vehicles: int | None = None) -> VrpInstance:
    rng = random.Random(seed)
    pts = set()
    while len(pts) < n_customers + 1:
        pts.add((rng.randint(0, 60), rng.randint(0, 60)))
    coords = [(float(x), float(y)) for x, y in sorted(pts)]
    demands = [0] + [rng.randint(1, capacity // 2) for _ in range(n_customers)]
    if vehicles is None:
        vehicles = max(1, -(-sum(demands) // capacity) + 1)
    return VrpInstance(
        name=f"v{seed}-k{vehicles}", n=n_customers + 1, edge_weight_kind="euc2d",
        coords=coords, capacity=capacity, demands=demands, depot_index=0, vehicles=vehicles,
    )


class TestTspNative:
    def test_square_perimeter(self):
        tour = solve_tsp_native(SQUARE, seed=1)
        assert tour.cost == 40

    def test_three_cities_single_tour(self):
        tour = solve_tsp_native(TRIANGLE, seed=0)
        assert tour.cost == 12

    def test_cost_matches_recomputation(self):
        inst = random_tsp(9, 7)
        tour = solve_tsp_native(inst, seed=3)
        assert tour.cost == tour_cost(distance_matrix(inst), tour.order)
        assert sorted(tour.order) == list(range(inst.n))

    def test_deterministic_given_seed(self):
        inst = random_tsp(10, 11)
        a = solve_tsp_native(inst, seed=5)
        b = solve_tsp_native(inst, seed=5)
        assert a.order == b.order and a.cost == b.cost

    def test_two_opt_local_optimum(self):
        inst = random_tsp(12, 23)
        tour = solve_tsp_native(inst, seed=2)
        assert two_opt_is_local_optimum(distance_matrix(inst), tour.order)

    def test_never_below_optimum_and_usually_equal(self):
        inst = random_tsp(8, 42)
        optimum = brute_force_tsp(inst).cost
        assert optimum == exhaustive_tsp_cost(inst)
        hits = 0
        for seed in range(20):
            tour = solve_tsp_native(inst, seed=seed)
            assert tour.cost >= optimum
            hits += tour.cost == optimum
        assert hits >= 15


class TestBruteForceTsp:
    def test_square(self):
        assert brute_force_tsp(SQUARE).cost == 40

    def test_triangle(self):
        assert brute_force_tsp(TRIANGLE).cost == 12

    def test_too_large(self):
        inst = random_tsp(11, 0)
        with pytest.raises(TooLarge):
            brute_force_tsp(inst)


class TestVrpNative:
    def test_two_customers_one_vehicle(self):
        vrp = VrpInstance(
            name="pair-k1", n=3, edge_weight_kind="euc2d",
            coords=[(0.0, 0.0), (0.0, 4.0), (3.0, 4.0)],
            capacity=2, demands=[0, 1, 1], depot_index=0, vehicles=1,
        )
        solution = solve_vrp_native(vrp, seed=0)
        assert solution.feasible
        assert len(solution.routes) == 1
        # better of the two visit orders: 0->1->2->0 = 4+3+5, 0->2->1->0 identical
        assert solution.cost == 12
        assert solution.cost == exhaustive_vrp_cost(vrp)

    def test_demands_equal_capacity_force_singletons(self):
        vrp = VrpInstance(
            name="singles-k3", n=4, edge_weight_kind="euc2d",
            coords=[(0.0, 0.0), (0.0, 5.0), (5.0, 0.0), (3.0, 4.0)],
            capacity=7, demands=[0, 7, 7, 7], depot_index=0, vehicles=3,
        )
        solution = solve_vrp_native(vrp, seed=0)
        assert solution.feasible
        assert sorted(map(len, solution.routes)) == [1, 1, 1]
        matrix = distance_matrix(vrp)
        assert solution.cost == sum(2 * matrix[0][c] for c in (1, 2, 3))

    def test_bundled_p_n16_k8(self, bundled_instance_dir):
        vrp = parse_tsplib((bundled_instance_dir / "P-n16-k8.vrp").read_text())
        solution = solve_vrp_native(vrp, seed=1)
        assert solution.feasible
        assert len(solution.routes) <= 8
        assert check_vrp_solution(vrp, solution)
        assert solution.cost == solution_cost(distance_matrix(vrp), solution.routes, vrp.depot_index)

    @pytest.mark.parametrize("seed", range(6))
    def test_never_below_partition_oracle(self, seed):
        vrp = random_vrp(6, seed, capacity=10)
        solution = solve_vrp_native(vrp, seed=seed)
        assert solution.feasible
        optimum = exhaustive_vrp_cost(vrp)
        assert solution.cost >= optimum

    def test_infeasible_fleet_reported(self):
        vrp = VrpInstance(
            name="tight", n=4, edge_weight_kind="euc2d",
            coords=[(0.0, 0.0), (0.0, 5.0), (5.0, 0.0), (3.0, 4.0)],
            capacity=7, demands=[0, 7, 7, 7], depot_index=0, vehicles=2,
        )
        assert not vrp.supply_feasible
        solution = solve_vrp_native(vrp, seed=0)
        assert not solution.feasible
        assert sorted(c for r in solution.routes for c in r) == [1, 2, 3]


FAKE_SOLVER = """#!/usr/bin/env python3
import sys
params = {}
for line in open(sys.argv[1]):
    if '=' in line:
        k, _, v = line.partition('=')
        params[k.strip()] = v.strip()
n = 0
for line in open(params['PROBLEM_FILE']):
    if line.upper().startswith('DIMENSION'):
        n = int(line.split(':')[1])
with open(params['TOUR_FILE'], 'w') as fh:
    fh.write('TOUR_SECTION\\n')
    for i in range(1, n + 1):
        fh.write(f'{i}\\n')
    fh.write('-1\\n')
"""


@pytest.fixture
def fake_binary(tmp_path):
    path = tmp_path / "fakesolver"
    path.write_text(FAKE_SOLVER)
    path.chmod(path.stat().st_mode | stat.S_IXUSR)
    return path


class TestExternal:
    def test_missing_binary(self, tmp_path):
        with pytest.raises(BinaryNotFound):
            solve_external(SQUARE, tmp_path / "nope")

    def test_square_via_stub(self, fake_binary):
        result = solve_external(SQUARE, fake_binary)
        assert isinstance(result, Tour)
        assert result.cost == 40  # identity order happens to be the optimum here

    def test_vrp_route_split_and_recost(self, fake_binary):
        vrp = VrpInstance(
            name="pair-k2", n=3, edge_weight_kind="euc2d",
            coords=[(0.0, 0.0), (0.0, 4.0), (3.0, 4.0)],
            capacity=1, demands=[0, 1, 1], depot_index=0, vehicles=2,
        )
        result = solve_external(vrp, fake_binary)
        assert isinstance(result, VrpSolution)
        # identity tour visits depot first: one route with both customers,
        # which violates capacity 1 and must be flagged
        assert not result.feasible

    def test_subprocess_failure(self, tmp_path):
        path = tmp_path / "broken"
        path.write_text("#!/bin/sh\necho doom >&2\nexit 3\n")
        path.chmod(0o755)
        with pytest.raises(SubprocessFailure) as err:
            solve_external(SQUARE, path)
        assert err.value.exit_code == 3

    def test_garbage_output(self, tmp_path):
        path = tmp_path / "garbage"
        path.write_text(
            "#!/usr/bin/env python3\n"
            "import sys\n"
            "params = dict(l.split('=') for l in open(sys.argv[1]) if '=' in l)\n"
            "open(params['TOUR_FILE '].strip() if 'TOUR_FILE ' in params else params['TOUR_FILE'].strip(), 'w').write('1 2 zz -1')\n"
        )
        path.chmod(0o755)
        with pytest.raises(OutputParseError):
            solve_external(SQUARE, path)
