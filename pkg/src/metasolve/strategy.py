"""Declarative solver-strategy trees and Solution Path enumeration.

A strategy decomposes one problem type into a tree of steps. Sibling steps
are alternatives; a Solution Path is one root-to-leaf selection written as
(step_id, solver_id) pairs. Steps come in three kinds:

* ``solver-leaf``: a single solver finishes the sub-problem,
* ``decomposition``: a solver that expands the problem into sub-problems
  (clusterings fan out per cluster, transforms produce one reformulated child),
* ``strategy-ref``: inline another registered strategy for the child type;
  refs are transparent in enumerated paths and may exclude individual solvers
  so a composed strategy can expose a subset of the referenced one.

Strategies load from JSON documents (one file per strategy) so new steps and
solvers can be added without code changes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


class UnknownStrategy(KeyError):
    pass


class CyclicStrategyReference(ValueError):
    pass


SolutionPath = tuple[tuple[str, str], ...]  # ((step_id, solver_id), ...)


@dataclass
class StrategyNode:
    step_id: str
    kind: str  # "solver-leaf" | "decomposition" | "strategy-ref"
    consumes: str = ""
    solver_id: str | None = None
    produces: list[str] = field(default_factory=list)
    children: list["StrategyNode"] = field(default_factory=list)
    ref: str | None = None
    exclude_solvers: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.kind == "solver-leaf":
            if self.children:
                raise ValueError(f"{self.step_id}: solver-leaf must not have children")
            if not self.solver_id:
                raise ValueError(f"{self.step_id}: solver-leaf needs a solver_id")
        elif self.kind == "strategy-ref":
            if not self.ref:
                raise ValueError(f"{self.step_id}: strategy-ref needs a ref")
        elif self.kind != "decomposition":
            raise ValueError(f"{self.step_id}: unknown kind {self.kind!r}")


@dataclass
class Strategy:
    id: str
    problem_type: str
    roots: list[StrategyNode]


class StrategyRegistry:
    def __init__(self):
        self._strategies: dict[str, Strategy] = {}

    def register(self, strategy: Strategy) -> None:
        self._strategies[strategy.id] = strategy

    def get(self, strategy_id: str) -> Strategy:
        if strategy_id not in self._strategies:
            raise UnknownStrategy(strategy_id)
        return self._strategies[strategy_id]

    def ids(self) -> list[str]:
        return sorted(self._strategies)

    def __contains__(self, strategy_id: str) -> bool:
        return strategy_id in self._strategies


def node_from_doc(doc: dict, consumes: str) -> StrategyNode:
    produces = list(doc.get("produces", []))
    children_consume = produces[0] if produces else consumes
    return StrategyNode(
        step_id=doc["step_id"],
        kind=doc["kind"],
        consumes=consumes,
        solver_id=doc.get("solver_id"),
        produces=produces,
        children=[node_from_doc(c, children_consume) for c in doc.get("children", [])],
        ref=doc.get("ref"),
        exclude_solvers=list(doc.get("exclude_solvers", [])),
    )


def strategy_from_doc(doc: dict) -> Strategy:
    problem_type = doc["problem_type"]
    return Strategy(
        id=doc["id"],
        problem_type=problem_type,
        roots=[node_from_doc(n, problem_type) for n in doc["nodes"]],
    )


def load_builtin_strategies(registry: StrategyRegistry | None = None) -> StrategyRegistry:
    registry = registry or StrategyRegistry()
    base = resources.files("metasolve").joinpath("data/strategies")
    for entry in sorted(base.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            registry.register(strategy_from_doc(json.loads(entry.read_text())))
    return registry


def load_strategy_file(path: str | Path) -> Strategy:
    return strategy_from_doc(json.loads(Path(path).read_text()))


_DEFAULT: StrategyRegistry | None = None


def default_registry() -> StrategyRegistry:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_builtin_strategies()
    return _DEFAULT


# -- ref resolution ----------------------------------------------------------

def resolve_strategy_ref(
    node: StrategyNode,
    registry: StrategyRegistry | None = None,
    _stack: tuple[str, ...] = (),
) -> list[StrategyNode]:
    """Inline a strategy-ref: the referenced strategy's root steps, with any
    excluded solvers filtered out, re-typed to the ref's consumed type."""
    if node.kind != "strategy-ref":
        raise ValueError(f"{node.step_id} is not a strategy-ref")
    registry = registry or default_registry()
    if node.ref in _stack:
        raise CyclicStrategyReference(" -> ".join((*_stack, node.ref)))
    target = registry.get(node.ref)
    inlined = []
    for root in target.roots:
        filtered = _filter_excluded(root, set(node.exclude_solvers))
        if filtered is not None:
            inlined.append(filtered)
    return inlined


def _filter_excluded(node: StrategyNode, excluded: set[str]) -> StrategyNode | None:
    if node.kind == "solver-leaf" and node.solver_id in excluded:
        return None
    children = [c for c in (_filter_excluded(c, excluded) for c in node.children) if c is not None]
    if node.kind == "decomposition" and node.children and not children:
        return None  # all downstream options excluded
    copy = StrategyNode(
        step_id=node.step_id,
        kind=node.kind,
        consumes=node.consumes,
        solver_id=node.solver_id,
        produces=list(node.produces),
        children=children,
        ref=node.ref,
        exclude_solvers=list({*node.exclude_solvers, *excluded}),
    )
    return copy


def inline_strategy(strategy: Strategy, registry: StrategyRegistry | None = None) -> Strategy:
    """A copy of the strategy with every strategy-ref recursively inlined."""
    registry = registry or default_registry()

    def expand(nodes: list[StrategyNode], stack: tuple[str, ...]) -> list[StrategyNode]:
        out: list[StrategyNode] = []
        for node in nodes:
            if node.kind == "strategy-ref":
                if node.ref in stack:
                    raise CyclicStrategyReference(" -> ".join((*stack, node.ref)))
                for inlined in resolve_strategy_ref(node, registry, stack):
                    copies = expand([inlined], (*stack, node.ref))
                    out.extend(copies)
            else:
                out.append(
                    StrategyNode(
                        step_id=node.step_id,
                        kind=node.kind,
                        consumes=node.consumes,
                        solver_id=node.solver_id,
                        produces=list(node.produces),
                        children=expand(node.children, stack),
                        ref=None,
                        exclude_solvers=list(node.exclude_solvers),
                    )
                )
        return out

    return Strategy(id=strategy.id, problem_type=strategy.problem_type, roots=expand(strategy.roots, (strategy.id,)))


# -- enumeration -------------------------------------------------------------

def _solver_lookup():
    from .solvers import SOLVERS

    return SOLVERS


def _is_clustering(solver_id: str | None) -> bool:
    if solver_id is None:
        return False
    descriptor = _solver_lookup().get(solver_id)
    return descriptor is not None and descriptor.arity == "clustering"


def _is_available(solver_id: str | None) -> bool:
    if solver_id is None:
        return False
    descriptor = _solver_lookup().get(solver_id)
    return descriptor is not None and descriptor.available


def enumerate_paths(
    strategy: Strategy | str,
    max_clusterings: int | None = None,
    available_only: bool = False,
    registry: StrategyRegistry | None = None,
) -> list[SolutionPath]:
    """All root-to-leaf solver selections, depth-first in declaration order.

    ``max_clusterings`` prunes paths that apply more clustering steps than
    allowed; ``available_only`` drops paths through unavailable solvers.
    Unavailable solvers are otherwise included.
    """
    registry = registry or default_registry()
    if isinstance(strategy, str):
        strategy = registry.get(strategy)

    paths: list[SolutionPath] = []

    def visit(node: StrategyNode, prefix: list[tuple[str, str]], clusterings: int, stack: tuple[str, ...]):
        if node.kind == "strategy-ref":
            if node.ref in stack:
                raise CyclicStrategyReference(" -> ".join((*stack, node.ref)))
            for inlined in resolve_strategy_ref(node, registry, stack):
                visit(inlined, prefix, clusterings, (*stack, node.ref))
            return
        if _is_clustering(node.solver_id):
            clusterings += 1
            if max_clusterings is not None and clusterings > max_clusterings:
                return
        if available_only and not _is_available(node.solver_id):
            return
        step = [(node.step_id, node.solver_id)] if node.solver_id else []
        if node.kind == "solver-leaf":
            paths.append(tuple(prefix + step))
            return
        for child in node.children:
            visit(child, prefix + step, clusterings, stack)

    for root in strategy.roots:
        visit(root, [], 0, (strategy.id,))
    return paths


def validate_path(
    strategy: Strategy | str,
    path: SolutionPath,
    registry: StrategyRegistry | None = None,
) -> str | None:
    """None when the path walks existing edges with type-compatible solvers;
    otherwise a human-readable violation. Never raises."""
    registry = registry or default_registry()
    try:
        if isinstance(strategy, str):
            strategy = registry.get(strategy)
    except UnknownStrategy:
        return f"unknown strategy {strategy!r}"
    if not path:
        return "empty path"
    try:
        full = inline_strategy(strategy, registry)
    except (UnknownStrategy, CyclicStrategyReference) as exc:
        return f"strategy does not resolve: {exc}"

    solvers = _solver_lookup()
    options = full.roots
    consumed = strategy.problem_type
    for step_id, solver_id in path:
        match = next((n for n in options if n.step_id == step_id), None)
        if match is None:
            return f"step {step_id!r} is not reachable here (options: {[n.step_id for n in options]})"
        if match.solver_id != solver_id:
            return f"step {step_id!r} uses solver {match.solver_id!r}, not {solver_id!r}"
        descriptor = solvers.get(solver_id)
        if descriptor is None:
            return f"unknown solver {solver_id!r}"
        if descriptor.consumes != match.consumes:
            return (
                f"solver {solver_id!r} consumes {descriptor.consumes!r} "
                f"but step {step_id!r} offers {match.consumes!r}"
            )
        consumed = match.produces[0] if match.produces else consumed
        options = match.children
    if options:
        return f"path stops before a leaf (next options: {[n.step_id for n in options]})"
    return None


def find_path(
    strategy: Strategy | str,
    spec: str,
    registry: StrategyRegistry | None = None,
    max_clusterings: int | None = None,
) -> SolutionPath:
    """Resolve a CLI path spec: step ids joined by '/', or a 1-based index."""
    registry = registry or default_registry()
    if isinstance(strategy, str):
        strategy = registry.get(strategy)
    paths = enumerate_paths(strategy, max_clusterings=max_clusterings, registry=registry)
    if spec.isdigit():
        idx = int(spec) - 1
        if not 0 <= idx < len(paths):
            raise ValueError(f"path index {spec} out of range 1..{len(paths)}")
        return paths[idx]
    wanted = [tok for tok in spec.split("/") if tok]
    for path in paths:
        if [s for s, _ in path] == wanted:
            return path
    for path in paths:
        if [s for _, s in path] == wanted:  # allow solver ids as the spec
            return path
    raise ValueError(f"no path matches spec {spec!r}; try one of: " + "; ".join(format_path(p) for p in paths))


def format_path(path: SolutionPath) -> str:
    return "/".join(step for step, _ in path)


def describe_path(path: SolutionPath) -> str:
    return " -> ".join(f"{step}[{solver}]" for step, solver in path)
