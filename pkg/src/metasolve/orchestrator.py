"""The orchestration unit: tree expansion, execution, suggestions, backends.

Execution walks the problem tree depth-first, expanding decomposition steps
(clusterings fan out one node per cluster under a cluster-set placeholder,
transforms fill their single reformulated child), solving leaves on matching
backends, and composing results upward. Sibling sub-trees run concurrently;
determinism is preserved by deriving every node's seed from
(parent seed, step id, child index, trial).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import statistics
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import model, solvers as solvers_mod
from .cluster import ClusteringResult
from .formats import TspInstance, VrpInstance
from .model import (
    FAILED,
    NEEDS_INPUT,
    READY,
    SOLVED,
    SOLVING,
    ProblemNode,
    SolveResult,
    transition,
)
from .solvers import SOLVERS, RunOutcome, SolverDescriptor
from .strategy import (
    SolutionPath,
    StrategyRegistry,
    default_registry,
    enumerate_paths,
    format_path,
    validate_path,
)

EXTERNAL_SOLVER_ENV = "METASOLVE_EXTERNAL_SOLVER"


class TypeMismatch(ValueError):
    pass


class IllegalState(RuntimeError):
    pass


class PrerequisitesUnsolved(RuntimeError):
    pass


class NoCompatibleBackend(RuntimeError):
    pass


class PathValidationError(ValueError):
    pass


class ExecutionError(RuntimeError):
    def __init__(self, message: str, node_id: str | None = None):
        self.node_id = node_id
        super().__init__(message)


# -- backends ------------------------------------------------------------------

@dataclass
class Backend:
    backend_id: str
    kind: str  # local-cpu | subprocess | statevector-sim | simulated-annealer
    capabilities: dict[str, Any] = field(default_factory=dict)
    available: bool = True


class BackendRegistry:
    """Ordered backend list; selection scans in registration order."""

    def __init__(self, backends: list[Backend] | None = None):
        self.backends = backends or []

    def add(self, backend: Backend) -> None:
        self.backends.append(backend)

    def of_kind(self, kind: str) -> list[Backend]:
        return [b for b in self.backends if b.kind == kind and b.available]

    def max_threads(self) -> int:
        for backend in self.of_kind("local-cpu"):
            if "max_threads" in backend.capabilities:
                return int(backend.capabilities["max_threads"])
        return os.cpu_count() or 1

    @classmethod
    def from_doc(cls, doc: list[dict], external_binary: str | None = None) -> "BackendRegistry":
        registry = cls()
        for entry in doc:
            backend = Backend(
                backend_id=entry["backend_id"],
                kind=entry["kind"],
                capabilities=dict(entry.get("capabilities", {})),
                available=entry.get("available", True),
            )
            if backend.kind == "subprocess":
                _bind_binary(backend, external_binary)
            registry.add(backend)
        return registry

    @classmethod
    def from_file(cls, path: str | Path, external_binary: str | None = None) -> "BackendRegistry":
        return cls.from_doc(json.loads(Path(path).read_text()), external_binary)


def _bind_binary(backend: Backend, external_binary: str | None) -> None:
    binary = external_binary or backend.capabilities.get("binary_path") or os.environ.get(EXTERNAL_SOLVER_ENV)
    ok = bool(binary) and Path(binary).exists() and os.access(binary, os.X_OK)
    backend.capabilities["binary_path"] = binary if ok else None
    backend.capabilities["binary_available"] = ok
    backend.available = ok


def default_backends(external_binary: str | None = None, max_qubits: int = 22) -> BackendRegistry:
    registry = BackendRegistry()
    registry.add(Backend("local-cpu-0", "local-cpu", {"max_threads": os.cpu_count() or 1}))
    registry.add(Backend("statevector-0", "statevector-sim", {"max_qubits": max_qubits}))
    registry.add(Backend("annealer-0", "simulated-annealer", {"max_vars": 4096}))
    subprocess_backend = Backend("external-routing-0", "subprocess", {})
    _bind_binary(subprocess_backend, external_binary)
    registry.add(subprocess_backend)
    return registry


# -- capability matching ---------------------------------------------------------

def node_metrics(node: ProblemNode) -> dict[str, Any]:
    """Size measures the suggestion and backend logic reasons about."""
    payload = node.payload
    metrics: dict[str, Any] = {"size": None, "qubits": None}
    if isinstance(payload, VrpInstance):
        metrics["size"] = payload.n
    elif isinstance(payload, TspInstance):
        metrics["size"] = payload.n
        metrics["qubits"] = (payload.n - 1) ** 2
    else:
        from .formats import CnfFormula
        from .qubo import Graph, QuboModel

        if isinstance(payload, QuboModel):
            metrics["size"] = payload.n
            metrics["qubits"] = payload.n
        elif isinstance(payload, CnfFormula):
            metrics["size"] = payload.num_vars
        elif isinstance(payload, Graph):
            metrics["size"] = payload.n
            metrics["qubits"] = payload.n
        elif isinstance(payload, ClusteringResult):
            metrics["size"] = len(payload.sub_instances)
    return metrics


def requirement_violation(
    descriptor: SolverDescriptor,
    metrics: dict[str, Any],
    backends: BackendRegistry,
) -> str | None:
    """Why this solver cannot run on this problem right now, or None."""
    if not descriptor.available:
        return f"solver unavailable: {descriptor.cons}"
    qubits = metrics.get("qubits")
    cap = descriptor.requirements.get("var_cap")
    if cap is not None and qubits is not None and qubits > cap:
        return f"needs {qubits} variables, solver cap {cap}"
    candidates = backends.of_kind(descriptor.kind)
    if not candidates:
        return f"no available {descriptor.kind} backend"
    if descriptor.requirements.get("backend_qubits") and qubits is not None:
        best = max(int(b.capabilities.get("max_qubits", 0)) for b in candidates)
        if qubits > best:
            return f"needs {qubits} qubits, max {best}"
    if descriptor.requirements.get("backend_vars") and qubits is not None:
        best = max(int(b.capabilities.get("max_vars", 0)) for b in candidates)
        if qubits > best:
            return f"needs {qubits} variables, max {best}"
    if descriptor.requirements.get("binary") and not any(
        b.capabilities.get("binary_available") for b in candidates
    ):
        return "external solver binary not configured"
    return None


def select_backend(
    descriptor: SolverDescriptor,
    metrics: dict[str, Any],
    backends: BackendRegistry,
) -> Backend:
    """First available backend of the solver's kind meeting all requirements."""
    qubits = metrics.get("qubits")
    for backend in backends.of_kind(descriptor.kind):
        if descriptor.requirements.get("backend_qubits") and qubits is not None:
            if qubits > int(backend.capabilities.get("max_qubits", 0)):
                continue
        if descriptor.requirements.get("backend_vars") and qubits is not None:
            if qubits > int(backend.capabilities.get("max_vars", 0)):
                continue
        if descriptor.requirements.get("binary") and not backend.capabilities.get("binary_available"):
            continue
        return backend
    violation = requirement_violation(descriptor, metrics, backends) or (
        f"no compatible {descriptor.kind} backend"
    )
    raise NoCompatibleBackend(f"{descriptor.solver_id}: {violation}")


# -- seeds -----------------------------------------------------------------------

def derive_seed(parent_seed: int, *parts: Any) -> int:
    digest = hashlib.blake2b(
        repr((parent_seed, *parts)).encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big") & 0x7FFFFFFFFFFFFFFF


# -- tree expansion ----------------------------------------------------------------

def select_solver(node: ProblemNode, solver_id: str, settings: dict | None = None) -> ProblemNode:
    """Attach a solver choice to a ready node and create its child slots.

    Fixed-arity solvers get their declared slots immediately (empty until the
    step executes); clusterings get a single cluster-set placeholder because
    their fan-out is unknown before execution. Re-selecting on a ready node
    replaces previous slots; repeating the identical selection is a no-op.
    """
    if node.state != READY:
        raise IllegalState(f"node {node.id} is {node.state}, not {READY}")
    descriptor = SOLVERS.get(solver_id)
    if descriptor is None:
        raise TypeMismatch(f"unknown solver {solver_id!r}")
    if descriptor.consumes != node.type_id:
        raise TypeMismatch(
            f"solver {solver_id!r} consumes {descriptor.consumes!r}, node is {node.type_id!r}"
        )
    new_settings = dict(settings or {})
    if node.solver_id == solver_id and node.settings == new_settings and node.children:
        return node  # idempotent re-selection
    node.solver_id = solver_id
    if settings is not None:
        node.settings = new_settings
    node.children = []
    node.result = None
    node.error = None
    if descriptor.arity == "clustering":
        node.children.append(
            ProblemNode(id=model.new_id(), type_id="cluster-set", state=NEEDS_INPUT, solver_id=solver_id)
        )
    elif descriptor.arity == "transform":
        child_type = "qubo"  # both built-in transforms reformulate into QUBO
        node.children.append(ProblemNode(id=model.new_id(), type_id=child_type, state=NEEDS_INPUT))
    return node


# -- step execution -----------------------------------------------------------------

def execute_step(
    node: ProblemNode,
    backends: BackendRegistry,
    seed: int = 0,
    parent: ProblemNode | None = None,
    trials: int = 1,
) -> ProblemNode:
    """Run one step of the tree.

    Leaf solvers attach a result. Decomposition solvers run in two phases:
    the first execution expands the child slots (clusterings fan the
    placeholder out into per-cluster children), the second composes child
    results into this node's result. Solver errors land in state Failed with
    a diagnostic; the tree is preserved.
    """
    if node.type_id == "cluster-set":
        return _execute_placeholder(node, backends, parent)
    if node.state != READY:
        raise IllegalState(f"node {node.id} is {node.state}")
    if node.solver_id is None:
        raise IllegalState(f"node {node.id} has no solver selected")
    descriptor = SOLVERS[node.solver_id]

    if descriptor.arity == "leaf":
        return _execute_leaf(node, descriptor, backends, seed, trials)
    if descriptor.arity == "transform":
        return _execute_transform(node, descriptor, backends, seed)
    if descriptor.arity == "clustering":
        return _execute_clustering(node, descriptor, backends, seed)
    raise IllegalState(f"solver {descriptor.solver_id} has unknown arity {descriptor.arity}")


def _fail(node: ProblemNode, message: str) -> None:
    if node.state == READY:
        transition(node, SOLVING)
    if node.state == SOLVING:
        transition(node, FAILED)
    node.error = message


def _execute_leaf(
    node: ProblemNode,
    descriptor: SolverDescriptor,
    backends: BackendRegistry,
    seed: int,
    trials: int,
) -> ProblemNode:
    metrics = node_metrics(node)
    try:
        backend = select_backend(descriptor, metrics, backends)
    except NoCompatibleBackend as exc:
        _fail(node, f"NoCompatibleBackend: {exc}")
        return node
    impl = solvers_mod.LEAF_IMPLS[descriptor.solver_id]
    runs = 1 if descriptor.deterministic else max(1, trials)
    transition(node, SOLVING)
    best: tuple[SolveResult, dict] | None = None
    node.trial_log = []
    for trial in range(runs):
        trial_seed = derive_seed(seed, "trial", trial) if runs > 1 else seed
        started = time.perf_counter()
        try:
            outcome = impl(node.payload, node.settings, trial_seed, backend)
        except Exception as exc:  # noqa: BLE001 - diagnostics belong on the node
            _fail(node, f"{type(exc).__name__}: {exc}")
            return node
        wall_ms = int((time.perf_counter() - started) * 1000)
        result = SolveResult(
            payload=outcome.payload,
            objective=outcome.objective,
            feasible=outcome.feasible,
            wall_ms=wall_ms,
            solver_id=descriptor.solver_id,
            backend_id=backend.backend_id,
            trial=trial,
        )
        node.trial_log.append(
            {"trial": trial, "objective": outcome.objective, "feasible": outcome.feasible, "wall_ms": wall_ms}
        )
        if best is None or _better(result, best[0]):
            best = (result, outcome.settings)
    result, effective = best
    node.settings = {**effective, **node.settings}
    node.result = result
    transition(node, SOLVED)
    return node


def _better(a: SolveResult, b: SolveResult) -> bool:
    return (not a.feasible, a.objective) < (not b.feasible, b.objective)


def _execute_transform(
    node: ProblemNode, descriptor: SolverDescriptor, backends: BackendRegistry, seed: int
) -> ProblemNode:
    child = node.children[0] if node.children else None
    if child is None:
        raise IllegalState(f"transform node {node.id} lost its child slot")
    if child.payload is None:  # phase 1: build the reformulated problem
        try:
            child_type, payload, child_settings = solvers_mod.expand_transform(
                descriptor.solver_id, node.payload, node.settings
            )
        except Exception as exc:  # noqa: BLE001
            _fail(node, f"{type(exc).__name__}: {exc}")
            return node
        child.type_id = child_type
        child.payload = payload
        child.settings = {**child_settings, **child.settings}
        transition(child, READY)
        return node
    if child.state != SOLVED:
        raise PrerequisitesUnsolved(f"child {child.id} is {child.state}")
    transition(node, SOLVING)
    started = time.perf_counter()
    try:
        outcome = solvers_mod.compose_transform(descriptor.solver_id, node, child)
    except Exception as exc:  # noqa: BLE001
        transition(node, FAILED)
        node.error = f"{type(exc).__name__}: {exc}"
        return node
    node.result = SolveResult(
        payload=outcome.payload,
        objective=outcome.objective,
        feasible=outcome.feasible,
        wall_ms=int((time.perf_counter() - started) * 1000) + (child.result.wall_ms if child.result else 0),
        solver_id=descriptor.solver_id,
        backend_id=child.result.backend_id if child.result else "local-cpu",
        trial=child.result.trial if child.result else 0,
    )
    transition(node, SOLVED)
    return node


def _execute_clustering(
    node: ProblemNode, descriptor: SolverDescriptor, backends: BackendRegistry, seed: int
) -> ProblemNode:
    placeholder = node.children[0] if node.children else None
    if placeholder is None or placeholder.type_id != "cluster-set":
        raise IllegalState(f"clustering node {node.id} has no cluster-set placeholder")
    if placeholder.payload is None:  # phase 1: run the clustering and fan out
        started = time.perf_counter()
        try:
            clustering, child_type = solvers_mod.expand_clustering(
                descriptor.solver_id, node.payload, node.settings, seed
            )
        except Exception as exc:  # noqa: BLE001
            _fail(node, f"{type(exc).__name__}: {exc}")
            return node
        placeholder.payload = clustering
        placeholder.settings["wall_ms"] = int((time.perf_counter() - started) * 1000)
        placeholder.children = [
            ProblemNode(id=model.new_id(), type_id=child_type, payload=sub, state=READY)
            for sub in clustering.sub_instances
        ]
        transition(placeholder, READY)
        return node
    if placeholder.state != SOLVED:
        raise PrerequisitesUnsolved(f"cluster-set {placeholder.id} is {placeholder.state}")
    transition(node, SOLVING)
    sub = placeholder.result
    node.result = SolveResult(
        payload=sub.payload,
        objective=sub.objective,
        feasible=sub.feasible,
        wall_ms=sub.wall_ms + int(placeholder.settings.get("wall_ms", 0)),
        solver_id=descriptor.solver_id,
        backend_id=sub.backend_id,
        trial=sub.trial,
    )
    transition(node, SOLVED)
    return node


def _execute_placeholder(
    node: ProblemNode, backends: BackendRegistry, parent: ProblemNode | None
) -> ProblemNode:
    if parent is None:
        raise IllegalState("cluster-set execution needs its parent node")
    if node.state != READY:
        raise IllegalState(f"cluster-set {node.id} is {node.state}")
    if any(c.state != SOLVED for c in node.children):
        raise PrerequisitesUnsolved("not all cluster children are solved")
    transition(node, SOLVING)
    started = time.perf_counter()
    try:
        outcome = solvers_mod.compose_clustering(
            parent.payload, node.payload, [c.result.payload for c in node.children]
        )
    except Exception as exc:  # noqa: BLE001
        transition(node, FAILED)
        node.error = f"{type(exc).__name__}: {exc}"
        return node
    child_wall = sum(c.result.wall_ms for c in node.children)
    node.result = SolveResult(
        payload=outcome.payload,
        objective=outcome.objective,
        feasible=outcome.feasible,
        wall_ms=child_wall + int((time.perf_counter() - started) * 1000),
        solver_id=node.solver_id or "cluster-set",
        backend_id="local-cpu",
        trial=0,
    )
    transition(node, SOLVED)
    return node


# -- complete execution ----------------------------------------------------------------

def run_complete(
    root: ProblemNode,
    path: SolutionPath,
    trials: int = 1,
    seed: int = 0,
    backends: BackendRegistry | None = None,
    strategies: StrategyRegistry | None = None,
    max_workers: int | None = None,
    cancel: threading.Event | None = None,
) -> SolveResult:
    """Apply the path's solver choices over the whole tree and execute it.

    Non-deterministic leaves repeat ``trials`` times keeping the best
    objective. Independent sub-trees run concurrently; the composed objective
    is identical for identical (payload, path, trials, seed).
    """
    backends = backends or default_backends()
    strategies = strategies or default_registry()
    strategy_id = model.PROBLEM_TYPES[root.type_id].strategy_id
    violation = validate_path(strategy_id, path, strategies)
    if violation is not None:
        raise PathValidationError(violation)
    workers = max_workers or backends.max_threads()
    pool = ThreadPoolExecutor(max_workers=max(1, workers))
    try:
        _run_node(root, list(path), seed, trials, backends, pool, cancel)
    finally:
        pool.shutdown(wait=True)
    if root.state != SOLVED or root.result is None:
        failed = next((n for n in root.walk() if n.state == FAILED), root)
        raise ExecutionError(failed.error or f"node {failed.id} did not solve", node_id=failed.id)
    return root.result


def _check_cancel(node: ProblemNode, cancel: threading.Event | None) -> None:
    if cancel is not None and cancel.is_set():
        _fail(node, "cancelled")
        raise ExecutionError("cancelled", node_id=node.id)


def _run_node(
    node: ProblemNode,
    path: list[tuple[str, str]],
    seed: int,
    trials: int,
    backends: BackendRegistry,
    pool: ThreadPoolExecutor,
    cancel: threading.Event | None,
) -> None:
    _check_cancel(node, cancel)
    if not path:
        raise ExecutionError(f"path exhausted at node {node.id} ({node.type_id})", node_id=node.id)
    step_id, solver_id = path[0]
    descriptor = SOLVERS[solver_id]
    if descriptor.consumes != node.type_id:
        raise ExecutionError(
            f"step {step_id} expects {descriptor.consumes}, node {node.id} is {node.type_id}",
            node_id=node.id,
        )
    select_solver(node, solver_id, settings=node.settings or None)

    if descriptor.arity == "leaf":
        execute_step(node, backends, seed=derive_seed(seed, step_id), trials=trials)
        _require_solved(node)
        return

    if descriptor.arity == "transform":
        execute_step(node, backends, seed=derive_seed(seed, step_id))  # phase 1
        _require_not_failed(node)
        child = node.children[0]
        _run_node(child, path[1:], derive_seed(seed, step_id, 0), trials, backends, pool, cancel)
        execute_step(node, backends)  # compose
        _require_solved(node)
        return

    # clustering
    execute_step(node, backends, seed=derive_seed(seed, step_id))  # phase 1: fan out
    _require_not_failed(node)
    placeholder = node.children[0]
    futures = [
        pool.submit(
            _run_node, child, path[1:], derive_seed(seed, step_id, index), trials, backends, pool, cancel
        )
        for index, child in enumerate(placeholder.children)
    ]
    errors = []
    for future in futures:
        try:
            future.result()
        except ExecutionError as exc:
            errors.append(exc)
    if errors:
        raise errors[0]
    execute_step(placeholder, backends, parent=node)
    _require_solved(placeholder)
    execute_step(node, backends)  # forward the composed result
    _require_solved(node)


def _require_solved(node: ProblemNode) -> None:
    if node.state != SOLVED:
        raise ExecutionError(node.error or f"node {node.id} is {node.state}", node_id=node.id)


def _require_not_failed(node: ProblemNode) -> None:
    if node.state == FAILED:
        raise ExecutionError(node.error or f"node {node.id} failed", node_id=node.id)


# -- selected-tree execution (stepless "complete" mode for the service) -----------------

def run_selected(
    root: ProblemNode,
    backends: BackendRegistry,
    seed: int = 0,
    trials: int = 1,
    strategies: StrategyRegistry | None = None,
    auto_select: bool = True,
) -> ProblemNode:
    """Execute the tree as currently selected, bottom-up, until the root solves.

    Nodes without a solver (fresh cluster children) are auto-selected with the
    suggestion engine's top feasible option when ``auto_select`` is on.
    """
    strategies = strategies or default_registry()
    for _ in range(10_000):
        if root.state in (SOLVED, FAILED):
            return root
        node, parent = _next_executable(root, None)
        if node is None:
            raise PrerequisitesUnsolved("no executable node remains but the root is unsolved")
        if node.solver_id is None and node.type_id != "cluster-set":
            if not auto_select:
                raise PrerequisitesUnsolved(f"node {node.id} has no solver selected")
            suggestion = suggest(node, backends=backends, strategies=strategies)
            choice = next((e for e in suggestion.ranked if e.feasible), None)
            if choice is None:
                _fail(node, "no feasible solver for this node")
                return root
            select_solver(node, choice.via[0] if choice.via else choice.solver_id)
        execute_step(node, backends, seed=derive_seed(seed, node.id), parent=parent, trials=trials)
        if node.state == FAILED:
            _propagate_failure(root)
            return root
    raise ExecutionError("execution did not converge")


def _next_executable(node: ProblemNode, parent: ProblemNode | None):
    """Deepest-first node that can make progress right now."""
    for child in node.children:
        found, found_parent = _next_executable(child, node)
        if found is not None:
            return found, found_parent
    if node.type_id == "cluster-set":
        if node.state == READY and node.children and all(c.state == SOLVED for c in node.children):
            return node, parent
        return None, None
    if node.state != READY:
        return None, None
    if node.solver_id is None:
        return node, parent
    descriptor = SOLVERS.get(node.solver_id)
    if descriptor is None:
        return node, parent
    if descriptor.arity == "leaf":
        return node, parent
    child = node.children[0] if node.children else None
    if child is None:
        return node, parent
    if child.payload is None:
        return node, parent  # expansion phase pending
    if child.state == SOLVED:
        return node, parent  # composition phase pending
    return None, None


def _propagate_failure(root: ProblemNode) -> None:
    failed = next((n for n in root.walk() if n.state == FAILED), None)
    if failed is not None and root.state == READY:
        _fail(root, f"sub-step {failed.id} failed: {failed.error}")


# -- parallel multi-path comparison ------------------------------------------------------

@dataclass
class ComparisonRow:
    path: str
    trial: int
    objective: float | None
    feasible: bool
    wall_ms: int


@dataclass
class PathStats:
    best_objective: float | None
    median_objective: float | None
    median_wall_ms: float
    rows: int


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow]
    per_path: dict[str, PathStats]

    @staticmethod
    def compute_stats(rows: list[ComparisonRow]) -> dict[str, PathStats]:
        per_path: dict[str, PathStats] = {}
        for spec in sorted({r.path for r in rows}):
            mine = [r for r in rows if r.path == spec]
            objectives = [r.objective for r in mine if r.feasible and r.objective is not None]
            per_path[spec] = PathStats(
                best_objective=min(objectives) if objectives else None,
                median_objective=statistics.median(objectives) if objectives else None,
                median_wall_ms=statistics.median(r.wall_ms for r in mine),
                rows=len(mine),
            )
        return per_path


def run_parallel(
    root: ProblemNode,
    paths: list[SolutionPath],
    trials: int = 1,
    seed: int = 0,
    backends: BackendRegistry | None = None,
    strategies: StrategyRegistry | None = None,
) -> ComparisonReport:
    """Run every path on its own clone of the root and compare outcomes.

    Each (path, trial) is an independent run; failures become rows with
    ``feasible=False`` and never abort sibling paths. No winner is chosen:
    the report carries metrics only.
    """
    if len(paths) < 2:
        raise PathValidationError("parallel comparison needs at least 2 paths")
    backends = backends or default_backends()
    strategies = strategies or default_registry()
    strategy_id = model.PROBLEM_TYPES[root.type_id].strategy_id
    for path in paths:
        violation = validate_path(strategy_id, path, strategies)
        if violation is not None:
            raise PathValidationError(f"{format_path(path)}: {violation}")

    jobs = [(path, trial) for path in paths for trial in range(trials)]

    # each run starts from a pristine root: same payload, no selections,
    # no children, regardless of how far the source tree has progressed
    pristine = model.ProblemNode(id=model.new_id(), type_id=root.type_id, payload=root.payload)

    def run_one(job):
        path, trial = job
        clone = model.clone_tree(pristine)
        started = time.perf_counter()
        try:
            result = run_complete(
                clone, path, trials=1, seed=derive_seed(seed, "trial", trial),
                backends=backends, strategies=strategies,
            )
            wall = int((time.perf_counter() - started) * 1000)
            return ComparisonRow(format_path(path), trial, result.objective, result.feasible, wall)
        except (ExecutionError, PathValidationError):
            wall = int((time.perf_counter() - started) * 1000)
            return ComparisonRow(format_path(path), trial, None, False, wall)

    with ThreadPoolExecutor(max_workers=max(2, backends.max_threads())) as pool:
        rows = list(pool.map(run_one, jobs))
    return ComparisonReport(rows=rows, per_path=ComparisonReport.compute_stats(rows))


# -- suggestions ---------------------------------------------------------------------------

@dataclass
class SuggestionEntry:
    solver_id: str
    score: float
    rationale: str
    feasible: bool
    via: list[str] = field(default_factory=list)


@dataclass
class Suggestion:
    ranked: list[SuggestionEntry]
    confidence: str  # "high" | "low"


CONFIDENCE_MARGIN = 0.15


def preference_score(quality: float, speed: float, speed_weight: float) -> float:
    """Blend the solver's annotations under the speed-vs-quality slider."""
    return speed_weight * speed / 5.0 + (1.0 - speed_weight) * quality / 5.0


def _option_chains(type_id: str, strategies: StrategyRegistry) -> list[tuple[str, list[str]]]:
    """Selectable options at a node of this type: (terminal solver, via-chain).

    Transform steps are looked through so downstream solvers surface with
    composed requirements; clustering steps are terminal because their
    fan-out (and therefore downstream feasibility) is unknown before they run.
    """
    from .strategy import inline_strategy

    descriptor_entry = model.PROBLEM_TYPES.get(type_id)
    if descriptor_entry is None or descriptor_entry.strategy_id not in strategies:
        return []
    strategy = strategies.get(descriptor_entry.strategy_id)
    inlined = inline_strategy(strategy, strategies)
    chains: list[tuple[str, list[str]]] = []

    def visit(node, via: list[str]):
        descriptor = SOLVERS.get(node.solver_id) if node.solver_id else None
        if node.kind == "solver-leaf":
            chains.append((node.solver_id, via))
            return
        if descriptor is not None and descriptor.arity == "clustering":
            chains.append((node.solver_id, via))
            return
        for child in node.children:
            visit(child, via + ([node.solver_id] if node.solver_id else []))

    for rootstep in inlined.roots:
        visit(rootstep, [])
    seen = set()
    unique = []
    for solver_id, via in chains:
        key = (solver_id, tuple(via))
        if key not in seen:
            seen.add(key)
            unique.append((solver_id, via))
    return unique


def suggest(
    node: ProblemNode,
    preferences: dict[str, float] | None = None,
    backends: BackendRegistry | None = None,
    strategies: StrategyRegistry | None = None,
    confidence_margin: float = CONFIDENCE_MARGIN,
) -> Suggestion:
    """Rank the solver options for this node under the user's preferences.

    Feasible options score ``w * speed/5 + (1-w) * quality/5`` where w is the
    speed weight; options whose capability requirements fail score 0 and
    carry a rationale naming the violated capability. Confidence is high when
    the top option clearly beats the runner-up.
    """
    backends = backends or default_backends()
    strategies = strategies or default_registry()
    preferences = preferences or {}
    w = float(preferences.get("speed_weight", 0.5))
    w = min(1.0, max(0.0, w))
    metrics = node_metrics(node)

    entries: list[SuggestionEntry] = []
    for solver_id, via in _option_chains(node.type_id, strategies):
        descriptor = SOLVERS.get(solver_id)
        if descriptor is None:
            continue
        violation = None
        for via_id in via:
            via_desc = SOLVERS.get(via_id)
            if via_desc is not None:
                violation = violation or requirement_violation(via_desc, metrics, backends)
        violation = violation or requirement_violation(descriptor, metrics, backends)
        if violation is None:
            score = preference_score(descriptor.quality, descriptor.speed, w)
            rationale = descriptor.pros if not via else f"via {' -> '.join(via)}; {descriptor.pros}"
            entries.append(SuggestionEntry(solver_id, score, rationale, True, via))
        else:
            entries.append(SuggestionEntry(solver_id, 0.0, violation, False, via))

    entries.sort(key=lambda e: (-int(e.feasible), -e.score, e.solver_id))
    feasible_scores = [e.score for e in entries if e.feasible]
    if not feasible_scores:
        confidence = "low"
    elif len(feasible_scores) == 1:
        confidence = "high"
    else:
        confidence = "high" if feasible_scores[0] - feasible_scores[1] >= confidence_margin else "low"
    return Suggestion(ranked=entries, confidence=confidence)


# -- settings digest (benchmark traceability) ------------------------------------------------

def settings_digest(path: SolutionPath, trials: int, extra: dict | None = None) -> str:
    """Stable digest of the effective solver settings along a path."""
    payload: dict[str, Any] = {
        "path": [list(pair) for pair in path],
        "trials": trials,
        "defaults": {},
    }
    from . import qsim, qubo

    for _, solver_id in path:
        if solver_id == "simulated-annealing":
            payload["defaults"][solver_id] = {
                "sweeps": qubo.DEFAULT_SWEEPS,
                "beta": list(qubo.DEFAULT_BETA_RANGE),
                "trials": qubo.DEFAULT_TRIALS,
            }
        elif solver_id == "qaoa":
            payload["defaults"][solver_id] = {
                "p": qsim.DEFAULT_QAOA_DEPTH,
                "shots": qsim.DEFAULT_QAOA_SHOTS,
                "restarts": qsim.DEFAULT_QAOA_RESTARTS,
            }
    if extra:
        payload["extra"] = extra
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]
