"""TSP and VRP solving backends.

``solve_tsp_native`` and ``solve_vrp_native`` are self-contained local-search
solvers (nearest neighbor / Clarke-Wright construction, 2-opt and Or-opt /
relocate-swap improvement). ``brute_force_tsp`` is the exhaustive optimum for
small instances. ``solve_external`` shells out to a third-party routing binary
through a TSPLIB file protocol and is entirely optional.
"""

from __future__ import annotations

import itertools
import os
import random
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .formats import TspInstance, VrpInstance, distance_matrix, write_tsplib


class TooLarge(ValueError):
    pass


class BinaryNotFound(FileNotFoundError):
    pass


class SubprocessFailure(RuntimeError):
    def __init__(self, exit_code: int, stderr: str):
        self.exit_code = exit_code
        self.stderr = stderr[:500]
        super().__init__(f"external solver exited with {exit_code}: {self.stderr}")


class OutputParseError(ValueError):
    pass


@dataclass
class Tour:
    """A closed tour: a permutation of 0..n-1 and its cycle cost."""

    order: list[int]
    cost: int


@dataclass
class VrpSolution:
    """Routes as customer sequences; the depot is implicit at both ends."""

    routes: list[list[int]]
    cost: int
    feasible: bool


def tour_cost(matrix: list[list[int]], order: list[int]) -> int:
    n = len(order)
    return sum(matrix[order[i]][order[(i + 1) % n]] for i in range(n))


def route_cost(matrix: list[list[int]], route: list[int], depot: int) -> int:
    if not route:
        return 0
    cost = matrix[depot][route[0]] + matrix[route[-1]][depot]
    cost += sum(matrix[route[i]][route[i + 1]] for i in range(len(route) - 1))
    return cost


def solution_cost(matrix: list[list[int]], routes: list[list[int]], depot: int) -> int:
    return sum(route_cost(matrix, r, depot) for r in routes)


def check_vrp_solution(vrp: VrpInstance, solution: VrpSolution) -> bool:
    """Independent feasibility check: exact coverage, capacity, fleet size."""
    visited = [c for route in solution.routes for c in route]
    if sorted(visited) != sorted(vrp.customers):
        return False
    if len(solution.routes) > vrp.vehicles:
        return False
    for route in solution.routes:
        if sum(vrp.demands[c] for c in route) > vrp.capacity:
            return False
    return True


def solve_tsp_native(instance: TspInstance, seed: int = 0, budget: int | None = None) -> Tour:
    """Nearest-neighbor construction plus first-improvement 2-opt and Or-opt.

    The start city is chosen by the seed; the search runs to a local optimum
    (no improving 2-opt or Or-opt move) or until ``budget`` accepted moves.
    """
    matrix = distance_matrix(instance)
    n = instance.n
    rng = random.Random(seed)
    start = rng.randrange(n)

    order = _nearest_neighbor(matrix, n, start)
    order = _local_search_tour(matrix, order, budget if budget is not None else 200_000)
    return Tour(order=order, cost=tour_cost(matrix, order))


def _nearest_neighbor(matrix: list[list[int]], n: int, start: int) -> list[int]:
    unvisited = set(range(n))
    unvisited.remove(start)
    order = [start]
    while unvisited:
        last = order[-1]
        nxt = min(unvisited, key=lambda c: (matrix[last][c], c))
        unvisited.remove(nxt)
        order.append(nxt)
    return order


def _local_search_tour(matrix: list[list[int]], order: list[int], budget: int) -> list[int]:
    n = len(order)
    moves = 0
    improved = True
    while improved and moves < budget:
        improved = False
        # 2-opt: reverse order[i:j+1]
        for i in range(1, n - 1):
            a, b = order[i - 1], order[i]
            for j in range(i + 1, n):
                c, d = order[j], order[(j + 1) % n]
                if a == c or b == d:
                    continue
                delta = matrix[a][c] + matrix[b][d] - matrix[a][b] - matrix[c][d]
                if delta < 0:
                    order[i : j + 1] = reversed(order[i : j + 1])
                    moves += 1
                    improved = True
                    a, b = order[i - 1], order[i]
        # Or-opt: relocate segments of length 1..3, either orientation
        for seg_len in (1, 2, 3):
            if seg_len >= n:
                continue
            i = 0
            while i < n:
                seg = [order[(i + t) % n] for t in range(seg_len)]
                prev = order[(i - 1) % n]
                nxt = order[(i + seg_len) % n]
                if prev in seg or nxt in seg:
                    i += 1
                    continue
                removal = (
                    matrix[prev][seg[0]] + matrix[seg[-1]][nxt] - matrix[prev][nxt]
                )
                rest = [c for c in order if c not in seg]
                m = len(rest)
                best = None
                for pos in range(m):
                    u, v = rest[pos], rest[(pos + 1) % m]
                    for s in (seg, seg[::-1]):
                        insertion = matrix[u][s[0]] + matrix[s[-1]][v] - matrix[u][v]
                        delta = insertion - removal
                        if delta < 0 and (best is None or delta < best[0]):
                            best = (delta, pos, list(s))
                if best is not None:
                    _, pos, s = best
                    order = rest[: pos + 1] + s + rest[pos + 1 :]
                    n = len(order)
                    moves += 1
                    improved = True
                i += 1
    return order


def two_opt_is_local_optimum(matrix: list[list[int]], order: list[int]) -> bool:
    """True when no single 2-opt move improves the tour (O(n^2) check)."""
    n = len(order)
    for i in range(1, n - 1):
        a, b = order[i - 1], order[i]
        for j in range(i + 1, n):
            c, d = order[j], order[(j + 1) % n]
            if a == c or b == d:
                continue
            if matrix[a][c] + matrix[b][d] < matrix[a][b] + matrix[c][d]:
                return False
    return True


def brute_force_tsp(instance: TspInstance) -> Tour:
    """Exact optimum by enumerating (n-1)!/2 tours. Limit n <= 10."""
    if instance.n > 10:
        raise TooLarge(f"brute force capped at 10 cities, got {instance.n}")
    matrix = distance_matrix(instance)
    rest = list(range(1, instance.n))
    best_order = None
    best_cost = None
    for perm in itertools.permutations(rest):
        if len(perm) > 1 and perm[0] > perm[-1]:
            continue  # each cycle counted once per direction
        order = [0, *perm]
        cost = tour_cost(matrix, order)
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_order = order
    return Tour(order=list(best_order), cost=best_cost)


DEFAULT_VRP_STARTS = 6


def solve_vrp_native(
    vrp: VrpInstance, seed: int = 0, budget: int | None = None, starts: int = DEFAULT_VRP_STARTS
) -> VrpSolution:
    """Clarke-Wright parallel savings plus 2-opt / relocate / swap improvement.

    Runs ``starts`` seeded constructions (equal-savings ties reordered per
    start) each improved to a local optimum, keeping the best solution; this
    trades time for quality like the heavyweight engine it stands in for.
    Construction honors capacity; if the merged route count still exceeds the
    fleet size, cheapest feasible merges are forced. When no feasible merge
    remains the best-effort solution is returned with ``feasible=False``.
    """
    matrix = distance_matrix(vrp)
    depot = vrp.depot_index
    customers = vrp.customers
    budget = budget if budget is not None else 200_000

    best: VrpSolution | None = None
    for start in range(max(1, starts)):
        rng = random.Random((seed * 0x9E3779B1 + start) & 0x7FFFFFFF)
        routes = _clarke_wright(matrix, vrp, rng)
        routes = _force_fleet_size(matrix, vrp, routes)
        routes = _improve_routes(matrix, vrp, routes, budget)
        routes = [r for r in routes if r]
        routes.sort(key=lambda r: r[0])
        solution = VrpSolution(
            routes=routes,
            cost=solution_cost(matrix, routes, depot),
            feasible=len(routes) <= vrp.vehicles
            and sorted(c for r in routes for c in r) == sorted(customers),
        )
        if best is None or (not solution.feasible, solution.cost) < (not best.feasible, best.cost):
            best = solution
    return best


def _clarke_wright(matrix, vrp: VrpInstance, rng: random.Random) -> list[list[int]]:
    depot = vrp.depot_index
    customers = vrp.customers
    routes = {c: [c] for c in customers}
    load = {c: vrp.demands[c] for c in customers}
    route_of = {c: c for c in customers}

    savings = []
    for i, j in itertools.combinations(customers, 2):
        s = matrix[depot][i] + matrix[depot][j] - matrix[i][j]
        savings.append((s, i, j))
    # seeded jitter only reorders equal-savings pairs
    savings.sort(key=lambda t: (-t[0], rng.random()))

    for s, i, j in savings:
        ri, rj = route_of[i], route_of[j]
        if ri == rj:
            continue
        if load[ri] + load[rj] > vrp.capacity:
            continue
        a, b = routes[ri], routes[rj]
        if a[-1] == i and b[0] == j:
            merged = a + b
        elif b[-1] == j and a[0] == i:
            merged = b + a
        elif a[0] == i and b[0] == j:
            merged = a[::-1] + b
        elif a[-1] == i and b[-1] == j:
            merged = a + b[::-1]
        else:
            continue  # i or j interior to its route
        routes[ri] = merged
        load[ri] += load[rj]
        del routes[rj]
        del load[rj]
        for c in merged:
            route_of[c] = ri
    return list(routes.values())


def _force_fleet_size(matrix, vrp: VrpInstance, routes: list[list[int]]) -> list[list[int]]:
    depot = vrp.depot_index
    while len(routes) > vrp.vehicles:
        best = None
        for ia, ib in itertools.combinations(range(len(routes)), 2):
            a, b = routes[ia], routes[ib]
            if sum(vrp.demands[c] for c in a + b) > vrp.capacity:
                continue
            for candidate in (a + b, a + b[::-1], a[::-1] + b, b + a):
                delta = (
                    route_cost(matrix, candidate, depot)
                    - route_cost(matrix, a, depot)
                    - route_cost(matrix, b, depot)
                )
                if best is None or delta < best[0]:
                    best = (delta, ia, ib, candidate)
        if best is None:
            break  # cannot respect fleet size; caller flags infeasible
        _, ia, ib, candidate = best
        routes = [r for idx, r in enumerate(routes) if idx not in (ia, ib)]
        routes.append(candidate)
    return routes


def _improve_routes(matrix, vrp: VrpInstance, routes: list[list[int]], budget: int) -> list[list[int]]:
    depot = vrp.depot_index
    demands = vrp.demands
    loads = [sum(demands[c] for c in r) for r in routes]
    moves = 0
    improved = True
    while improved and moves < budget:
        improved = False
        # intra-route 2-opt on the open path between depot visits
        for ri, route in enumerate(routes):
            if len(route) < 2:
                continue
            path = [depot, *route, depot]
            changed = True
            while changed and moves < budget:
                changed = False
                for i in range(1, len(path) - 2):
                    for j in range(i + 1, len(path) - 1):
                        a, b = path[i - 1], path[i]
                        c, d = path[j], path[j + 1]
                        delta = matrix[a][c] + matrix[b][d] - matrix[a][b] - matrix[c][d]
                        if delta < 0:
                            path[i : j + 1] = reversed(path[i : j + 1])
                            moves += 1
                            changed = True
                            improved = True
            routes[ri] = path[1:-1]
        # inter-route relocate
        for ri in range(len(routes)):
            for ci in range(len(routes[ri])):
                cust = routes[ri][ci]
                for rj in range(len(routes)):
                    if rj == ri or loads[rj] + demands[cust] > vrp.capacity:
                        continue
                    src = routes[ri][:ci] + routes[ri][ci + 1 :]
                    gain = route_cost(matrix, routes[ri], depot) - route_cost(matrix, src, depot)
                    best_ins = None
                    for pos in range(len(routes[rj]) + 1):
                        dst = routes[rj][:pos] + [cust] + routes[rj][pos:]
                        added = route_cost(matrix, dst, depot) - route_cost(matrix, routes[rj], depot)
                        if best_ins is None or added < best_ins[0]:
                            best_ins = (added, dst)
                    if best_ins and best_ins[0] < gain:
                        routes[ri] = src
                        routes[rj] = best_ins[1]
                        loads[ri] -= demands[cust]
                        loads[rj] += demands[cust]
                        moves += 1
                        improved = True
                        break
                if improved:
                    break
            if improved:
                break
        if improved:
            continue
        # inter-route swap
        for ri, rj in itertools.combinations(range(len(routes)), 2):
            for ci in range(len(routes[ri])):
                for cj in range(len(routes[rj])):
                    a, b = routes[ri][ci], routes[rj][cj]
                    if loads[ri] - demands[a] + demands[b] > vrp.capacity:
                        continue
                    if loads[rj] - demands[b] + demands[a] > vrp.capacity:
                        continue
                    old = route_cost(matrix, routes[ri], depot) + route_cost(matrix, routes[rj], depot)
                    na = routes[ri][:ci] + [b] + routes[ri][ci + 1 :]
                    nb = routes[rj][:cj] + [a] + routes[rj][cj + 1 :]
                    new = route_cost(matrix, na, depot) + route_cost(matrix, nb, depot)
                    if new < old:
                        routes[ri], routes[rj] = na, nb
                        loads[ri] += demands[b] - demands[a]
                        loads[rj] += demands[a] - demands[b]
                        moves += 1
                        improved = True
                        break
                if improved:
                    break
            if improved:
                break
    return routes


def solve_external(
    instance: TspInstance | VrpInstance,
    binary_path: str | os.PathLike,
    time_limit_s: float = 10.0,
) -> Tour | VrpSolution:
    """Run an external routing binary over the TSPLIB file protocol.

    Writes the problem and a key-value parameter file (PROBLEM_FILE,
    TOUR_FILE, TIME_LIMIT, VEHICLES) to a fresh temp dir, invokes the binary
    with the parameter file as its single argument, and parses the tour file:
    1-based node indices, terminated by -1. Costs are always recomputed with
    our own distance function.
    """
    binary = Path(binary_path)
    if not binary.exists() or not os.access(binary, os.X_OK):
        raise BinaryNotFound(f"external solver binary not found or not executable: {binary}")

    with tempfile.TemporaryDirectory(prefix="metasolve-ext-") as tmp:
        tmp_path = Path(tmp)
        problem_file = tmp_path / "problem.vrp"
        tour_file = tmp_path / "solution.tour"
        param_file = tmp_path / "params.par"
        problem_file.write_text(write_tsplib(instance))
        params = [
            f"PROBLEM_FILE = {problem_file}",
            f"TOUR_FILE = {tour_file}",
            f"TIME_LIMIT = {time_limit_s}",
        ]
        if isinstance(instance, VrpInstance):
            params.append(f"VEHICLES = {instance.vehicles}")
        param_file.write_text("\n".join(params) + "\n")

        proc = subprocess.run(
            [str(binary), str(param_file)],
            capture_output=True,
            text=True,
            timeout=time_limit_s + 60,
        )
        if proc.returncode != 0:
            raise SubprocessFailure(proc.returncode, proc.stderr or proc.stdout)
        if not tour_file.exists():
            raise OutputParseError("external solver produced no tour file")
        return _parse_tour_file(tour_file.read_text(), instance)


def _parse_tour_file(text: str, instance: TspInstance | VrpInstance) -> Tour | VrpSolution:
    nodes: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line[0].isalpha():
            continue  # tolerate TSPLIB-style headers in the tour file
        for tok in line.split():
            try:
                value = int(tok)
            except ValueError:
                raise OutputParseError(f"bad tour token {tok!r}") from None
            if value == -1:
                break
            nodes.append(value - 1)
        else:
            continue
        break
    if not nodes:
        raise OutputParseError("tour file holds no node indices")
    if any(not 0 <= v < instance.n for v in nodes):
        raise OutputParseError("tour file references nodes outside the instance")

    matrix = distance_matrix(instance)
    if isinstance(instance, VrpInstance):
        depot = instance.depot_index
        routes: list[list[int]] = []
        current: list[int] = []
        for v in nodes:
            if v == depot:
                if current:
                    routes.append(current)
                    current = []
            else:
                current.append(v)
        if current:
            routes.append(current)
        solution = VrpSolution(
            routes=routes,
            cost=solution_cost(matrix, routes, depot),
            feasible=False,
        )
        solution.feasible = check_vrp_solution(instance, solution)
        return solution
    if sorted(nodes) != list(range(instance.n)):
        raise OutputParseError("tour is not a permutation of all nodes")
    return Tour(order=nodes, cost=tour_cost(matrix, nodes))
