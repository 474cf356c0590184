"""HTTP interface: problems, strategies, suggestions, execution, comparison.

The server owns all state. Problem trees persist as flat JSON files keyed by
problem id and survive restarts; execution is asynchronous (202 + polling the
tree). Every non-2xx response carries an ``{"code", "message"}`` error body.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from . import model, orchestrator
from .formats import ParseError
from .model import PROBLEM_TYPES, ProblemNode, UnknownProblemType
from .orchestrator import (
    BackendRegistry,
    IllegalState,
    PathValidationError,
    PrerequisitesUnsolved,
    TypeMismatch,
    default_backends,
)
from .strategy import default_registry, enumerate_paths, find_path, format_path


@dataclass
class ServiceConfig:
    port: int = 8151
    store_dir: str = "./problem-store"
    backend_registry_path: str | None = None
    external_binary: str | None = None
    max_qubits: int = 22

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ServiceConfig":
        data: dict[str, Any] = {}
        if path is not None:
            data = json.loads(Path(path).read_text())
            unknown = set(data) - {f for f in cls.__dataclass_fields__}
            if unknown:
                raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.port = int(os.environ.get("METASOLVE_PORT", cfg.port))
        cfg.store_dir = os.environ.get("METASOLVE_STORE_DIR", cfg.store_dir)
        cfg.backend_registry_path = os.environ.get("METASOLVE_BACKENDS", cfg.backend_registry_path)
        cfg.external_binary = os.environ.get(orchestrator.EXTERNAL_SOLVER_ENV, cfg.external_binary)
        return cfg

    def build_backends(self) -> BackendRegistry:
        if self.backend_registry_path:
            return BackendRegistry.from_file(self.backend_registry_path, self.external_binary)
        return default_backends(self.external_binary, max_qubits=self.max_qubits)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, **extra: Any):
        self.status = status
        self.code = code
        self.message = message
        self.extra = extra
        super().__init__(message)

    def body(self) -> dict:
        return {"code": self.code, "message": self.message, **self.extra}


class ProblemStore:
    """Flat-file problem persistence with per-problem write locks."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._trees: dict[str, tuple[str, ProblemNode]] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._registry_lock = threading.Lock()

    def lock(self, problem_id: str) -> threading.RLock:
        with self._registry_lock:
            return self._locks.setdefault(problem_id, threading.RLock())

    def put(self, type_id: str, root: ProblemNode) -> None:
        self._trees[root.id] = (type_id, root)
        self.flush(root.id)

    def get(self, type_id: str, problem_id: str) -> ProblemNode:
        if problem_id not in self._trees:
            self._load(problem_id)
        if problem_id not in self._trees:
            raise ApiError(404, "UnknownProblem", f"no problem with id {problem_id!r}")
        stored_type, root = self._trees[problem_id]
        if stored_type != type_id:
            raise ApiError(404, "UnknownProblem", f"problem {problem_id!r} is of type {stored_type!r}")
        return root

    def flush(self, problem_id: str) -> None:
        type_id, root = self._trees[problem_id]
        path = self.directory / f"{problem_id}.json"
        path.write_text(json.dumps({"type": type_id, "tree": model.node_to_doc(root)}, sort_keys=True))

    def _load(self, problem_id: str) -> None:
        path = self.directory / f"{problem_id}.json"
        if path.exists():
            doc = json.loads(path.read_text())
            self._trees[problem_id] = (doc["type"], model.node_from_doc(doc["tree"]))


def _suggestion_doc(suggestion: orchestrator.Suggestion) -> dict:
    return {
        "confidence": suggestion.confidence,
        "ranked": [asdict(e) for e in suggestion.ranked],
    }


def _report_doc(report: orchestrator.ComparisonReport) -> dict:
    return {
        "rows": [asdict(r) for r in report.rows],
        "per_path": {spec: asdict(stats) for spec, stats in report.per_path.items()},
    }


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="metasolve", version="0.1.0")
    store = ProblemStore(config.store_dir)
    backends = config.build_backends()
    strategies = default_registry()
    pool = ThreadPoolExecutor(max_workers=max(2, backends.max_threads()))
    comparisons: dict[str, dict] = {}

    app.state.store = store
    app.state.backends = backends
    app.state.pool = pool

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(Exception)
    async def handle_unexpected(request: Request, exc: Exception):
        return JSONResponse(
            status_code=500,
            content={"code": "InternalError", "message": f"{type(exc).__name__}: {exc}"},
        )

    @app.get("/problem-types")
    def problem_types() -> list[dict]:
        return [
            {
                "id": d.type_id,
                "name": d.display_name,
                "input_format": d.input_format,
                "strategy_id": d.strategy_id,
            }
            for d in PROBLEM_TYPES.values()
        ]

    @app.get("/strategies/{strategy_id}/paths")
    def strategy_paths(strategy_id: str, max_clusterings: int | None = None, available_only: bool = False):
        if strategy_id not in strategies:
            raise ApiError(404, "UnknownStrategy", f"no strategy {strategy_id!r}")
        paths = enumerate_paths(
            strategy_id, max_clusterings=max_clusterings, available_only=available_only, registry=strategies
        )
        return [{"spec": format_path(p), "steps": [list(pair) for pair in p]} for p in paths]

    async def _read_input_text(request: Request) -> str:
        raw = await request.body()
        text = raw.decode("utf-8", errors="replace")
        if request.headers.get("content-type", "").startswith("application/json"):
            try:
                doc = json.loads(text)
            except json.JSONDecodeError:
                raise ApiError(400, "ParseError", "request body is not valid JSON") from None
            if not isinstance(doc, dict) or "input" not in doc:
                raise ApiError(400, "ParseError", 'JSON bodies must carry an "input" field')
            return str(doc["input"])
        return text

    @app.post("/problems/{type_id}", status_code=201)
    async def create(type_id: str, request: Request, response: Response):
        if type_id not in PROBLEM_TYPES:
            raise ApiError(404, "UnknownProblemType", f"no problem type {type_id!r}")
        text = await _read_input_text(request)
        try:
            root = model.create_problem(type_id, text)
        except ParseError as exc:
            raise ApiError(400, "ParseError", exc.message, line=exc.line) from None
        store.put(type_id, root)
        response.headers["Location"] = f"/problems/{type_id}/{root.id}"
        return {"id": root.id, "tree": model.node_to_doc(root)}

    @app.get("/problems/{type_id}/{problem_id}")
    def fetch(type_id: str, problem_id: str):
        _require_type(type_id)
        root = store.get(type_id, problem_id)
        return {"id": root.id, "tree": model.node_to_doc(root)}

    @app.patch("/problems/{type_id}/{problem_id}/nodes/{node_id}")
    def patch_node(type_id: str, problem_id: str, node_id: str, body: dict):
        _require_type(type_id)
        with store.lock(problem_id):
            root = store.get(type_id, problem_id)
            node = root.find(node_id)
            if node is None:
                raise ApiError(404, "UnknownNode", f"no node {node_id!r} in problem {problem_id!r}")
            if node.state in (model.SOLVING, model.SOLVED):
                raise ApiError(409, "IllegalState", f"node is {node.state}; reset it before re-selecting")
            solver_id = body.get("solver_id")
            settings = body.get("settings")
            try:
                if solver_id is not None:
                    merged = {**node.settings, **(settings or {})} if settings else None
                    orchestrator.select_solver(node, solver_id, settings=merged)
                elif settings is not None:
                    node.settings.update(settings)
            except TypeMismatch as exc:
                raise ApiError(422, "TypeMismatch", str(exc)) from None
            except IllegalState as exc:
                raise ApiError(409, "IllegalState", str(exc)) from None
            store.flush(problem_id)
            return {"id": root.id, "tree": model.node_to_doc(root)}

    @app.get("/problems/{type_id}/{problem_id}/suggestions")
    def suggestions(type_id: str, problem_id: str, node: str, speed_weight: float = 0.5):
        _require_type(type_id)
        root = store.get(type_id, problem_id)
        target = root.find(node)
        if target is None:
            raise ApiError(404, "UnknownNode", f"no node {node!r}")
        if target.state != model.READY:
            raise ApiError(409, "IllegalState", f"node is {target.state}, suggestions need {model.READY}")
        suggestion = orchestrator.suggest(
            target, {"speed_weight": speed_weight}, backends=backends, strategies=strategies
        )
        return _suggestion_doc(suggestion)

    def _can_execute_now(root: ProblemNode, node: ProblemNode) -> None:
        if node.type_id == "cluster-set":
            if node.state != model.READY or not node.children or any(
                c.state != model.SOLVED for c in node.children
            ):
                raise ApiError(409, "PrerequisitesUnsolved", "cluster children are not all solved")
            return
        if node.state != model.READY:
            raise ApiError(409, "IllegalState", f"node is {node.state}, not {model.READY}")
        if node.solver_id is None:
            raise ApiError(409, "NoSolverSelected", "select a solver before executing")
        descriptor = orchestrator.SOLVERS[node.solver_id]
        if descriptor.arity != "leaf" and node.children:
            child = node.children[0]
            # unexpanded child slot = expansion phase, always runnable;
            # expanded but unsolved = composition blocked on the sub-problem
            if child.payload is not None and child.state != model.SOLVED:
                raise ApiError(409, "PrerequisitesUnsolved", f"sub-step {child.id} is {child.state}")

    @app.post("/problems/{type_id}/{problem_id}/execute", status_code=202)
    def execute(type_id: str, problem_id: str, body: dict, response: Response):
        _require_type(type_id)
        mode = body.get("mode")
        if mode not in ("stepwise", "complete"):
            raise ApiError(422, "InvalidMode", f"mode must be stepwise or complete, got {mode!r}")
        trials = int(body.get("trials", 1))
        seed = int(body.get("seed", 0))
        with store.lock(problem_id):
            root = store.get(type_id, problem_id)
            if mode == "stepwise":
                node_id = body.get("node_id")
                if not node_id:
                    raise ApiError(422, "InvalidMode", "stepwise execution needs a node_id")
                node = root.find(node_id)
                if node is None:
                    raise ApiError(404, "UnknownNode", f"no node {node_id!r}")
                _can_execute_now(root, node)

                def job_stepwise():
                    with store.lock(problem_id):
                        parent = root.parent_of(node.id)
                        try:
                            orchestrator.execute_step(
                                node, backends, seed=seed, parent=parent, trials=trials
                            )
                        except (IllegalState, PrerequisitesUnsolved) as exc:
                            node.error = str(exc)
                        store.flush(problem_id)

                pool.submit(job_stepwise)
            else:
                def job_complete():
                    with store.lock(problem_id):
                        try:
                            orchestrator.run_selected(
                                root, backends, seed=seed, trials=trials, strategies=strategies
                            )
                        except (PrerequisitesUnsolved, orchestrator.ExecutionError) as exc:
                            root.error = root.error or str(exc)
                        store.flush(problem_id)

                pool.submit(job_complete)
        location = f"/problems/{type_id}/{problem_id}"
        response.headers["Location"] = location
        return {"status": "accepted", "poll": location}

    @app.post("/problems/{type_id}/{problem_id}/compare", status_code=202)
    def compare(type_id: str, problem_id: str, body: dict, response: Response):
        _require_type(type_id)
        root = store.get(type_id, problem_id)
        specs = body.get("paths")
        if not isinstance(specs, list) or len(specs) < 2:
            raise ApiError(422, "InvalidPaths", "need a list of at least 2 paths")
        trials = int(body.get("trials", 1))
        seed = int(body.get("seed", 0))
        strategy_id = PROBLEM_TYPES[type_id].strategy_id
        paths = []
        for spec in specs:
            try:
                if isinstance(spec, str):
                    paths.append(find_path(strategy_id, spec, registry=strategies))
                else:
                    paths.append(tuple((s, v) for s, v in spec))
            except ValueError as exc:
                raise ApiError(422, "InvalidPaths", str(exc)) from None
        from .strategy import validate_path

        for path in paths:
            violation = validate_path(strategy_id, path, strategies)
            if violation is not None:
                raise ApiError(422, "InvalidPaths", f"{format_path(path)}: {violation}")

        comparison_id = uuid.uuid4().hex[:12]
        comparisons[comparison_id] = {"status": "running", "report": None}

        def job():
            snapshot = model.clone_tree(root)
            try:
                report = orchestrator.run_parallel(
                    snapshot, paths, trials=trials, seed=seed, backends=backends, strategies=strategies
                )
                comparisons[comparison_id] = {"status": "done", "report": _report_doc(report)}
            except Exception as exc:  # noqa: BLE001
                comparisons[comparison_id] = {
                    "status": "failed",
                    "report": None,
                    "message": f"{type(exc).__name__}: {exc}",
                }

        pool.submit(job)
        location = f"/problems/{type_id}/{problem_id}/comparisons/{comparison_id}"
        response.headers["Location"] = location
        return {"status": "accepted", "comparison_id": comparison_id, "poll": location}

    @app.get("/problems/{type_id}/{problem_id}/comparisons/{comparison_id}")
    def comparison(type_id: str, problem_id: str, comparison_id: str):
        _require_type(type_id)
        store.get(type_id, problem_id)
        if comparison_id not in comparisons:
            raise ApiError(404, "UnknownComparison", f"no comparison {comparison_id!r}")
        return comparisons[comparison_id]

    def _require_type(type_id: str) -> None:
        if type_id not in PROBLEM_TYPES:
            raise ApiError(404, "UnknownProblemType", f"no problem type {type_id!r}")

    return app


def run_server(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host="127.0.0.1", port=config.port, log_level="warning")
