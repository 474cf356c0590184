"""Solver descriptors and their implementation bindings.

Every solver a strategy can name is described here: what problem type it
consumes, which backend kind runs it, quality/speed annotations (1-5) that
drive suggestions, resource requirements, and prose pros/cons. Leaf solvers
run to a result; transform solvers expand one reformulated child and compose
its result back; clustering solvers fan out per cluster.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from . import cluster as cluster_mod
from . import qsim, qubo, routing, sat
from .formats import TspInstance, VrpInstance, distance_matrix
from .model import Infeasibility, ProblemNode


@dataclass(frozen=True)
class SolverDescriptor:
    solver_id: str
    consumes: str
    kind: str  # backend kind: local-cpu | subprocess | statevector-sim | simulated-annealer
    arity: str  # leaf | transform | clustering
    quality: int
    speed: int
    deterministic: bool
    pros: str
    cons: str
    requirements: dict[str, Any] = field(default_factory=dict)
    available: bool = True

    def __post_init__(self):
        if not (1 <= self.quality <= 5 and 1 <= self.speed <= 5):
            raise ValueError(f"{self.solver_id}: quality and speed must be within 1..5")


@dataclass
class RunOutcome:
    payload: Any
    objective: float
    feasible: bool
    settings: dict[str, Any] = field(default_factory=dict)


SOLVERS: dict[str, SolverDescriptor] = {
    d.solver_id: d
    for d in [
        SolverDescriptor(
            "vrp-native", consumes="vrp", kind="local-cpu", arity="leaf",
            quality=4, speed=4, deterministic=False,
            pros="savings construction plus local search; good routes in milliseconds",
            cons="heuristic only; no optimality gap bound",
        ),
        SolverDescriptor(
            "vrp-external", consumes="vrp", kind="subprocess", arity="leaf",
            quality=5, speed=5, deterministic=False,
            pros="state-of-the-art external routing engine",
            cons="needs a locally installed solver binary",
            requirements={"binary": True},
        ),
        SolverDescriptor(
            "tsp-native", consumes="tsp", kind="local-cpu", arity="leaf",
            quality=4, speed=4, deterministic=False,
            pros="2-opt and Or-opt local search; near-optimal on small tours",
            cons="quality degrades on large instances",
        ),
        SolverDescriptor(
            "tsp-external", consumes="tsp", kind="subprocess", arity="leaf",
            quality=5, speed=5, deterministic=False,
            pros="state-of-the-art external routing engine",
            cons="needs a locally installed solver binary",
            requirements={"binary": True},
        ),
        SolverDescriptor(
            "kmeans-clustering", consumes="vrp", kind="local-cpu", arity="clustering",
            quality=3, speed=5, deterministic=False,
            pros="splits large instances into independent VRPs quickly",
            cons="ignores capacity while clustering; may need extra vehicles",
        ),
        SolverDescriptor(
            "two-phase-clustering", consumes="vrp", kind="local-cpu", arity="clustering",
            quality=3, speed=4, deterministic=False,
            pros="capacity-aware clusters, one vehicle per cluster",
            cons="cluster boundaries cost solution quality",
        ),
        SolverDescriptor(
            "tsp-to-qubo", consumes="tsp", kind="local-cpu", arity="transform",
            quality=2, speed=3, deterministic=True,
            pros="opens the tour to binary-optimization solvers",
            cons="needs (n-1)^2 binary variables",
            requirements={"var_cap": qubo.ENCODING_CAP},
        ),
        SolverDescriptor(
            "maxcut-to-qubo", consumes="max-cut", kind="local-cpu", arity="transform",
            quality=4, speed=5, deterministic=True,
            pros="exact reformulation, one variable per node",
            cons="downstream solver still has to do the work",
        ),
        SolverDescriptor(
            "simulated-annealing", consumes="qubo", kind="simulated-annealer", arity="leaf",
            quality=3, speed=2, deterministic=False,
            pros="handles any QUBO; restarts escape local minima",
            cons="stochastic; no optimality certificate; annealer stand-in",
            requirements={"backend_vars": True},
        ),
        SolverDescriptor(
            "qaoa", consumes="qubo", kind="statevector-sim", arity="leaf",
            quality=2, speed=1, deterministic=False,
            pros="variational quantum routine; exact statevector simulation",
            cons="simulation cost doubles per variable; small models only",
            requirements={"backend_qubits": True},
        ),
        SolverDescriptor(
            "qubo-exhaustive", consumes="qubo", kind="local-cpu", arity="leaf",
            quality=5, speed=1, deterministic=True,
            pros="certified optimum",
            cons="only viable up to 20 variables",
            requirements={"var_cap": qubo.BRUTE_FORCE_CAP},
        ),
        SolverDescriptor(
            "dpll", consumes="sat", kind="local-cpu", arity="leaf",
            quality=5, speed=4, deterministic=True,
            pros="complete: proves SAT and UNSAT",
            cons="exponential worst case",
        ),
        SolverDescriptor(
            "phase-estimation", consumes="tsp", kind="statevector-sim", arity="leaf",
            quality=2, speed=1, deterministic=False,
            pros="direct quantum tour encoding",
            cons="no executable backend; works only below six cities",
            requirements={"backend_qubits": True},
            available=False,
        ),
    ]
}


def solvers_for_type(type_id: str) -> list[SolverDescriptor]:
    return [d for d in SOLVERS.values() if d.consumes == type_id]


# -- leaf implementations -----------------------------------------------------

def _trivial_tour(instance: TspInstance) -> routing.Tour:
    matrix = distance_matrix(instance)
    order = list(range(instance.n))
    return routing.Tour(order=order, cost=routing.tour_cost(matrix, order))


def _run_tsp_native(payload: TspInstance, settings: dict, seed: int, backend) -> RunOutcome:
    budget = int(settings.get("budget", 200_000))
    tour = _trivial_tour(payload) if payload.n <= 3 else routing.solve_tsp_native(payload, seed=seed, budget=budget)
    return RunOutcome(tour, float(tour.cost), True, {"budget": budget})


def _run_vrp_native(payload: VrpInstance, settings: dict, seed: int, backend) -> RunOutcome:
    budget = int(settings.get("budget", 200_000))
    solution = routing.solve_vrp_native(payload, seed=seed, budget=budget)
    return RunOutcome(solution, float(solution.cost), solution.feasible, {"budget": budget})


def _run_external(payload, settings: dict, seed: int, backend) -> RunOutcome:
    binary = backend.capabilities.get("binary_path") if backend else None
    if not binary:
        raise routing.BinaryNotFound("backend advertises no binary_path")
    limit = float(settings.get("time_limit_s", 10.0))
    result = routing.solve_external(payload, binary, time_limit_s=limit)
    feasible = result.feasible if isinstance(result, routing.VrpSolution) else True
    return RunOutcome(result, float(result.cost), feasible, {"time_limit_s": limit})


def _run_annealing(payload: qubo.QuboModel, settings: dict, seed: int, backend) -> RunOutcome:
    sweeps = int(settings.get("sweeps", qubo.DEFAULT_SWEEPS))
    trials = int(settings.get("sa_trials", qubo.DEFAULT_TRIALS))
    beta_min = float(settings.get("beta_min", qubo.DEFAULT_BETA_RANGE[0]))
    beta_max = float(settings.get("beta_max", qubo.DEFAULT_BETA_RANGE[1]))
    best, _ = qubo.simulated_annealing(
        payload, sweeps=sweeps, betas=qubo.geometric_betas(beta_min, beta_max, sweeps),
        trials=trials, seed=seed,
    )
    recorded = {"sweeps": sweeps, "sa_trials": trials, "beta_min": beta_min, "beta_max": beta_max}
    return RunOutcome(best, best.energy, True, recorded)


def _run_qaoa(payload: qubo.QuboModel, settings: dict, seed: int, backend) -> RunOutcome:
    p = int(settings.get("p", qsim.DEFAULT_QAOA_DEPTH))
    shots = int(settings.get("shots", qsim.DEFAULT_QAOA_SHOTS))
    restarts = int(settings.get("restarts", qsim.DEFAULT_QAOA_RESTARTS))
    maxfev = int(settings.get("max_evaluations", 400))
    cap = backend.capabilities.get("max_qubits", qsim.DEFAULT_QUBIT_CAP) if backend else qsim.DEFAULT_QUBIT_CAP
    result = qsim.qaoa_solve(
        payload, p=p, shots=shots, restarts=restarts, seed=seed, max_evaluations=maxfev, cap=cap
    )
    recorded = {"p": p, "shots": shots, "restarts": restarts, "max_evaluations": maxfev}
    return RunOutcome(result.best, result.best.energy, True, recorded)


def _run_exhaustive_qubo(payload: qubo.QuboModel, settings: dict, seed: int, backend) -> RunOutcome:
    best = qubo.brute_force_qubo(payload)
    return RunOutcome(best, best.energy, True, {})


def _run_dpll(payload, settings: dict, seed: int, backend) -> RunOutcome:
    assignment = sat.dpll_solve(payload)
    if assignment is None:
        return RunOutcome(Infeasibility("unsatisfiable"), 0.0, False, {})
    return RunOutcome(assignment, 0.0, True, {})


LEAF_IMPLS = {
    "tsp-native": _run_tsp_native,
    "vrp-native": _run_vrp_native,
    "tsp-external": _run_external,
    "vrp-external": _run_external,
    "simulated-annealing": _run_annealing,
    "qaoa": _run_qaoa,
    "qubo-exhaustive": _run_exhaustive_qubo,
    "dpll": _run_dpll,
}


# -- transform implementations -------------------------------------------------

def expand_transform(solver_id: str, payload, settings: dict) -> tuple[str, Any, dict]:
    """Build the reformulated child problem: (child type, payload, settings)."""
    if solver_id == "tsp-to-qubo":
        scale = float(settings.get("penalty_scale", 2.0))
        model, enc = qubo.tsp_to_qubo(payload, penalty_scale=scale)
        return "qubo", model, {"enc_n": enc.n, "enc_penalty": enc.penalty, "penalty_scale": scale}
    if solver_id == "maxcut-to-qubo":
        return "qubo", qubo.maxcut_to_qubo(payload), {}
    raise KeyError(f"no transform implementation for {solver_id}")


def compose_transform(solver_id: str, parent: ProblemNode, child: ProblemNode) -> RunOutcome:
    """Interpret the child's result in the parent problem's terms."""
    sample = child.result.payload
    if not isinstance(sample, qubo.Sample):
        return RunOutcome(Infeasibility("child produced no sample"), 0.0, False, {})
    if solver_id == "tsp-to-qubo":
        enc = qubo.TspEncoding(
            instance=parent.payload,
            n=int(child.settings["enc_n"]),
            penalty=float(child.settings["enc_penalty"]),
        )
        tour = qubo.decode_tsp_sample(sample.bits, enc)
        if tour is None:
            return RunOutcome(
                Infeasibility("lowest-energy sample violates the tour constraints"),
                0.0, False, {},
            )
        return RunOutcome(tour, float(tour.cost), True, {})
    if solver_id == "maxcut-to-qubo":
        # energy convention: cut value is -energy
        return RunOutcome(sample, sample.energy, True, {})
    raise KeyError(f"no transform implementation for {solver_id}")


# -- clustering implementations ------------------------------------------------

def expand_clustering(solver_id: str, payload: VrpInstance, settings: dict, seed: int):
    """Run the clustering; returns (ClusteringResult, child problem type)."""
    if solver_id == "kmeans-clustering":
        k = int(settings.get("clusters", payload.vehicles))
        return cluster_mod.kmeans_cluster(payload, k_clusters=k, seed=seed), "vrp"
    if solver_id == "two-phase-clustering":
        return cluster_mod.two_phase_cluster(payload, seed=seed), "tsp"
    raise KeyError(f"no clustering implementation for {solver_id}")


def compose_clustering(parent_payload: VrpInstance, clustering: cluster_mod.ClusteringResult,
                       child_payloads: list) -> RunOutcome:
    solution = cluster_mod.recompose(parent_payload, clustering, child_payloads)
    return RunOutcome(solution, float(solution.cost), solution.feasible, {})
