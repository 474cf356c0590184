"""The recursive problem tree every other layer reads and mutates.

A :class:`ProblemNode` holds one sub-problem: its typed payload, lifecycle
state, chosen solver, settings, children, and (once solved) a
:class:`SolveResult`. Trees serialize to plain JSON documents and load back
structurally identical.

Lifecycle: NeedsInput -> ReadyToSolve -> Solving -> Solved | Failed, with
Failed -> ReadyToSolve as the retry edge and Solved -> ReadyToSolve as an
explicit reset for re-solving with a different solver.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field, fields
from typing import Any, Iterator

from . import cluster as cluster_mod
from . import formats, qubo, routing, sat

# -- lifecycle ---------------------------------------------------------------

NEEDS_INPUT = "NeedsInput"
READY = "ReadyToSolve"
SOLVING = "Solving"
SOLVED = "Solved"
FAILED = "Failed"

STATES = (NEEDS_INPUT, READY, SOLVING, SOLVED, FAILED)

LEGAL_TRANSITIONS = {
    (NEEDS_INPUT, READY),
    (READY, SOLVING),
    (SOLVING, SOLVED),
    (SOLVING, FAILED),
    (FAILED, READY),
    (SOLVED, READY),  # reset: allow re-solving with a different solver
}


class IllegalTransition(ValueError):
    def __init__(self, from_state: str, to_state: str):
        self.from_state = from_state
        self.to_state = to_state
        super().__init__(f"illegal transition {from_state} -> {to_state}")


class UnknownProblemType(KeyError):
    pass


@dataclass
class Infeasibility:
    """Explicit marker payload for solves whose answer is 'no solution'."""

    reason: str


@dataclass
class SolveResult:
    payload: Any
    objective: float
    feasible: bool
    wall_ms: int
    solver_id: str
    backend_id: str
    trial: int = 0

    def __post_init__(self):
        if self.wall_ms < 0:
            raise ValueError("wall_ms must be non-negative")
        if self.feasible and not _finite(self.objective):
            raise ValueError("objective must be finite for feasible results")


def _finite(x: float) -> bool:
    return x == x and abs(x) != float("inf")


@dataclass
class ProblemNode:
    id: str
    type_id: str
    payload: Any = None
    state: str = READY
    solver_id: str | None = None
    settings: dict[str, Any] = field(default_factory=dict)
    children: list["ProblemNode"] = field(default_factory=list)
    result: SolveResult | None = None
    error: str | None = None
    trial_log: list[dict[str, Any]] = field(default_factory=list)

    def walk(self) -> Iterator["ProblemNode"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def find(self, node_id: str) -> "ProblemNode | None":
        return next((n for n in self.walk() if n.id == node_id), None)

    def parent_of(self, node_id: str) -> "ProblemNode | None":
        for node in self.walk():
            if any(c.id == node_id for c in node.children):
                return node
        return None


def new_id() -> str:
    return uuid.uuid4().hex[:12]


def transition(node: ProblemNode, new_state: str) -> ProblemNode:
    """Move the node to ``new_state``; illegal transitions leave it untouched."""
    if new_state not in STATES:
        raise IllegalTransition(node.state, new_state)
    if (node.state, new_state) not in LEGAL_TRANSITIONS:
        raise IllegalTransition(node.state, new_state)
    node.state = new_state
    return node


# -- problem types -----------------------------------------------------------

@dataclass(frozen=True)
class ProblemTypeDescriptor:
    type_id: str
    display_name: str
    input_format: str  # tsplib | dimacs | qubo-text
    strategy_id: str


PROBLEM_TYPES: dict[str, ProblemTypeDescriptor] = {
    d.type_id: d
    for d in [
        ProblemTypeDescriptor("vrp", "Vehicle Routing Problem", "tsplib", "vrp"),
        ProblemTypeDescriptor("tsp", "Traveling Salesperson Problem", "tsplib", "tsp"),
        ProblemTypeDescriptor("qubo", "Quadratic Unconstrained Binary Optimization", "qubo-text", "qubo"),
        ProblemTypeDescriptor("sat", "Boolean Satisfiability", "dimacs", "sat"),
        ProblemTypeDescriptor("max-cut", "Maximum Cut", "dimacs", "max-cut"),
    ]
}


def parse_payload(type_id: str, input_text: str) -> Any:
    if type_id not in PROBLEM_TYPES and type_id != "cluster-set":
        raise UnknownProblemType(type_id)
    if not input_text.strip():
        raise formats.ParseError(1, "empty input")
    if type_id == "vrp":
        instance = formats.parse_tsplib(input_text)
        if not isinstance(instance, formats.VrpInstance):
            raise formats.ParseError(1, "vrp input needs CAPACITY and DEMAND_SECTION")
        return instance
    if type_id == "tsp":
        instance = formats.parse_tsplib(input_text)
        if isinstance(instance, formats.VrpInstance):
            raise formats.ParseError(1, "file carries CVRP sections; submit it as type 'vrp'")
        return instance
    if type_id == "qubo":
        n, coeffs, offset = formats.parse_qubo_text(input_text)
        return qubo.QuboModel(n=n, coeffs=coeffs, offset=offset)
    if type_id == "sat":
        return formats.parse_dimacs(input_text)
    if type_id == "max-cut":
        n, edges = formats.parse_dimacs_edges(input_text)
        return qubo.Graph(n=n, edges=edges)
    raise UnknownProblemType(type_id)


def create_problem(type_id: str, input_text: str) -> ProblemNode:
    """Parse ``input_text`` per the type's format and return a ready root node."""
    payload = parse_payload(type_id, input_text)
    return ProblemNode(id=new_id(), type_id=type_id, payload=payload, state=READY)


# -- serialization -----------------------------------------------------------

def payload_to_doc(payload: Any) -> dict | None:
    if payload is None:
        return None
    if isinstance(payload, formats.VrpInstance):
        return {
            "kind": "vrp",
            "name": payload.name,
            "n": payload.n,
            "edge_weight_kind": payload.edge_weight_kind,
            "coords": payload.coords,
            "matrix": payload.matrix,
            "comment": payload.comment,
            "capacity": payload.capacity,
            "demands": payload.demands,
            "depot_index": payload.depot_index,
            "vehicles": payload.vehicles,
        }
    if isinstance(payload, formats.TspInstance):
        return {
            "kind": "tsp",
            "name": payload.name,
            "n": payload.n,
            "edge_weight_kind": payload.edge_weight_kind,
            "coords": payload.coords,
            "matrix": payload.matrix,
            "comment": payload.comment,
        }
    if isinstance(payload, qubo.QuboModel):
        return {
            "kind": "qubo",
            "n": payload.n,
            "coeffs": [[i, j, v] for (i, j), v in sorted(payload.coeffs.items())],
            "offset": payload.offset,
        }
    if isinstance(payload, formats.CnfFormula):
        return {"kind": "cnf", "num_vars": payload.num_vars, "clauses": payload.clauses}
    if isinstance(payload, qubo.Graph):
        return {"kind": "graph", "n": payload.n, "edges": [[u, v, w] for u, v, w in payload.edges]}
    if isinstance(payload, cluster_mod.ClusteringResult):
        return {
            "kind": "clustering",
            "clustering_kind": payload.kind,
            "membership": {str(c): list(slot) for c, slot in payload.membership.items()},
            "sub_instances": [payload_to_doc(s) for s in payload.sub_instances],
        }
    if isinstance(payload, routing.Tour):
        return {"kind": "tour", "order": payload.order, "cost": payload.cost}
    if isinstance(payload, routing.VrpSolution):
        return {"kind": "vrp-solution", "routes": payload.routes, "cost": payload.cost, "feasible": payload.feasible}
    if isinstance(payload, qubo.Sample):
        return {"kind": "sample", "bits": list(payload.bits), "energy": payload.energy, "count": payload.count}
    if isinstance(payload, sat.Assignment):
        return {"kind": "assignment", "values": payload.values}
    if isinstance(payload, Infeasibility):
        return {"kind": "infeasible", "reason": payload.reason}
    raise TypeError(f"cannot serialize payload of type {type(payload).__name__}")


def payload_from_doc(doc: dict | None) -> Any:
    if doc is None:
        return None
    kind = doc["kind"]
    if kind == "vrp":
        return formats.VrpInstance(
            name=doc["name"], n=doc["n"], edge_weight_kind=doc["edge_weight_kind"],
            coords=[tuple(c) for c in doc["coords"]] if doc["coords"] is not None else None,
            matrix=doc["matrix"], comment=doc.get("comment", ""),
            capacity=doc["capacity"], demands=doc["demands"],
            depot_index=doc["depot_index"], vehicles=doc["vehicles"],
        )
    if kind == "tsp":
        return formats.TspInstance(
            name=doc["name"], n=doc["n"], edge_weight_kind=doc["edge_weight_kind"],
            coords=[tuple(c) for c in doc["coords"]] if doc["coords"] is not None else None,
            matrix=doc["matrix"], comment=doc.get("comment", ""),
        )
    if kind == "qubo":
        return qubo.QuboModel(
            n=doc["n"],
            coeffs={(i, j): v for i, j, v in doc["coeffs"]},
            offset=doc["offset"],
        )
    if kind == "cnf":
        return formats.CnfFormula(num_vars=doc["num_vars"], clauses=doc["clauses"])
    if kind == "graph":
        return qubo.Graph(n=doc["n"], edges=[(u, v, w) for u, v, w in doc["edges"]])
    if kind == "clustering":
        return cluster_mod.ClusteringResult(
            sub_instances=[payload_from_doc(d) for d in doc["sub_instances"]],
            membership={int(c): tuple(slot) for c, slot in doc["membership"].items()},
            kind=doc["clustering_kind"],
        )
    if kind == "tour":
        return routing.Tour(order=doc["order"], cost=doc["cost"])
    if kind == "vrp-solution":
        return routing.VrpSolution(routes=doc["routes"], cost=doc["cost"], feasible=doc["feasible"])
    if kind == "sample":
        return qubo.Sample(bits=tuple(doc["bits"]), energy=doc["energy"], count=doc["count"])
    if kind == "assignment":
        return sat.Assignment(values=doc["values"])
    if kind == "infeasible":
        return Infeasibility(reason=doc["reason"])
    raise TypeError(f"cannot deserialize payload kind {kind!r}")


def result_to_doc(result: SolveResult | None) -> dict | None:
    if result is None:
        return None
    return {
        "payload": payload_to_doc(result.payload),
        "objective": result.objective,
        "feasible": result.feasible,
        "wall_ms": result.wall_ms,
        "solver_id": result.solver_id,
        "backend_id": result.backend_id,
        "trial": result.trial,
    }


def result_from_doc(doc: dict | None) -> SolveResult | None:
    if doc is None:
        return None
    return SolveResult(
        payload=payload_from_doc(doc["payload"]),
        objective=doc["objective"],
        feasible=doc["feasible"],
        wall_ms=doc["wall_ms"],
        solver_id=doc["solver_id"],
        backend_id=doc["backend_id"],
        trial=doc.get("trial", 0),
    )


def node_to_doc(node: ProblemNode) -> dict:
    return {
        "id": node.id,
        "type_id": node.type_id,
        "state": node.state,
        "solver_id": node.solver_id,
        "settings": node.settings,
        "payload": payload_to_doc(node.payload),
        "result": result_to_doc(node.result),
        "error": node.error,
        "trial_log": node.trial_log,
        "children": [node_to_doc(c) for c in node.children],
    }


def node_from_doc(doc: dict) -> ProblemNode:
    return ProblemNode(
        id=doc["id"],
        type_id=doc["type_id"],
        payload=payload_from_doc(doc["payload"]),
        state=doc["state"],
        solver_id=doc["solver_id"],
        settings=doc.get("settings", {}),
        children=[node_from_doc(c) for c in doc.get("children", [])],
        result=result_from_doc(doc.get("result")),
        error=doc.get("error"),
        trial_log=doc.get("trial_log", []),
    )


def tree_to_json(root: ProblemNode) -> str:
    return json.dumps(node_to_doc(root), indent=2, sort_keys=True)


def tree_from_json(text: str) -> ProblemNode:
    return node_from_doc(json.loads(text))


def clone_tree(root: ProblemNode, fresh_ids: bool = True) -> ProblemNode:
    """Deep copy via the serde path; optionally remint node ids."""
    copy = node_from_doc(node_to_doc(root))
    if fresh_ids:
        for node in copy.walk():
            node.id = new_id()
    return copy


# -- invariants --------------------------------------------------------------

def validate_tree(root: ProblemNode) -> list[str]:
    """Structural invariant check; returns a list of violations (empty = ok)."""
    problems: list[str] = []
    seen: set[str] = set()
    for node in root.walk():
        if node.id in seen:
            problems.append(f"duplicate node id {node.id}")
        seen.add(node.id)
        if node.state not in STATES:
            problems.append(f"{node.id}: unknown state {node.state}")
        if node.children and node.solver_id is None:
            problems.append(f"{node.id}: children present without a selected solver")
        if node.state == SOLVED:
            if node.result is None:
                problems.append(f"{node.id}: Solved without a result")
            elif node.result.payload is None and node.result.feasible:
                problems.append(f"{node.id}: feasible result without payload")
            for child in node.children:
                if child.state != SOLVED:
                    problems.append(f"{node.id}: Solved while child {child.id} is {child.state}")
        if node.result is not None and node.state not in (SOLVED, FAILED):
            problems.append(f"{node.id}: result attached in state {node.state}")
    return problems
