"""Readers and writers for the standardized problem text formats.

Supported formats:

* TSPLIB for TSP and CVRP instances (EUC_2D and EXPLICIT edge weights),
* DIMACS cnf for SAT formulas,
* DIMACS edge lists for MaxCut graphs,
* a small triplet format for QUBO matrices (``qubo <n>`` header, then
  ``i j value`` lines with i <= j).

All parsers raise :class:`ParseError` with a 1-based line number. Writers
round-trip: ``parse(write(x))`` reproduces ``x`` field for field.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field


class ParseError(ValueError):
    """Input text does not conform to the expected format."""

    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


class HeaderMismatch(ParseError):
    """DIMACS header promises a different clause count than the body holds."""


class UnsupportedEdgeWeightType(ParseError):
    """TSPLIB EDGE_WEIGHT_TYPE other than EUC_2D or EXPLICIT."""


class IndexOutOfRange(IndexError):
    pass


def nint(x: float) -> int:
    """Nearest-integer rounding used by TSPLIB for EUC_2D distances."""
    return int(x + 0.5)


@dataclass
class TspInstance:
    """A symmetric TSP instance with either 2-D coordinates or an explicit matrix."""

    name: str
    n: int
    edge_weight_kind: str  # "euc2d" | "explicit"
    coords: list[tuple[float, float]] | None = None
    matrix: list[list[int]] | None = None
    comment: str = ""

    def __post_init__(self):
        # parsed inputs require 3+ nodes; clustering may build 2-node subs
        if self.n < 2:
            raise ValueError(f"need at least 2 nodes, got {self.n}")
        if self.edge_weight_kind == "euc2d":
            if self.coords is None or len(self.coords) != self.n:
                raise ValueError("euc2d instance needs one coordinate pair per node")
        elif self.edge_weight_kind == "explicit":
            m = self.matrix
            if m is None or len(m) != self.n or any(len(row) != self.n for row in m):
                raise ValueError("explicit instance needs an n x n matrix")
            for i in range(self.n):
                if m[i][i] != 0:
                    raise ValueError("matrix diagonal must be zero")
                for j in range(i):
                    if m[i][j] != m[j][i]:
                        raise ValueError("matrix must be symmetric")
        else:
            raise ValueError(f"unknown edge weight kind {self.edge_weight_kind!r}")

    def distance(self, i: int, j: int) -> int:
        return distance(self, i, j)


@dataclass
class VrpInstance(TspInstance):
    """A capacitated VRP instance: TSP fields plus capacity, demands and fleet size."""

    capacity: int = 0
    demands: list[int] = field(default_factory=list)
    depot_index: int = 0
    vehicles: int = 0

    def __post_init__(self):
        super().__post_init__()
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")
        if len(self.demands) != self.n:
            raise ValueError("need one demand per node")
        if self.demands[self.depot_index] != 0:
            raise ValueError("depot demand must be zero")
        if any(d < 0 for d in self.demands):
            raise ValueError("demands must be non-negative")
        if any(d > self.capacity for i, d in enumerate(self.demands) if i != self.depot_index):
            raise ValueError("a single demand exceeds vehicle capacity")
        if self.vehicles <= 0:
            raise ValueError("vehicle count must be positive")

    @property
    def customers(self) -> list[int]:
        return [i for i in range(self.n) if i != self.depot_index]

    @property
    def total_demand(self) -> int:
        return sum(self.demands)

    @property
    def supply_feasible(self) -> bool:
        """False when total demand exceeds what k vehicles can carry."""
        return self.total_demand <= self.vehicles * self.capacity


@dataclass
class CnfFormula:
    """A CNF formula in DIMACS convention: non-zero integer literals."""

    num_vars: int
    clauses: list[list[int]]

    def __post_init__(self):
        if self.num_vars <= 0:
            raise ValueError("num_vars must be positive")
        for clause in self.clauses:
            if not clause:
                raise ValueError("empty clause")
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range")


def distance(instance: TspInstance, i: int, j: int) -> int:
    """Edge weight between nodes i and j.

    EUC_2D uses TSPLIB nearest-integer rounding; explicit instances look the
    matrix up. Symmetric, zero on the diagonal.
    """
    if not (0 <= i < instance.n and 0 <= j < instance.n):
        raise IndexOutOfRange(f"node index out of range: ({i}, {j}) for n={instance.n}")
    if i == j:
        return 0
    if instance.edge_weight_kind == "explicit":
        return instance.matrix[i][j]
    xi, yi = instance.coords[i]
    xj, yj = instance.coords[j]
    return nint(math.hypot(xi - xj, yi - yj))


def distance_matrix(instance: TspInstance) -> list[list[int]]:
    """Full n x n weight matrix (convenience for the local-search solvers)."""
    if instance.edge_weight_kind == "explicit":
        return [row[:] for row in instance.matrix]
    n = instance.n
    mat = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = distance(instance, i, j)
            mat[i][j] = d
            mat[j][i] = d
    return mat


_K_TOKEN = re.compile(r"[-_.\s]k(\d+)", re.IGNORECASE)


def _vehicles_from_text(*texts: str) -> int | None:
    for text in texts:
        m = _K_TOKEN.search(f" {text}")
        if m:
            return int(m.group(1))
    return None


def parse_tsplib(text: str) -> TspInstance | VrpInstance:
    """Parse a TSPLIB-format instance.

    Files with CVRP sections (CAPACITY / DEMAND_SECTION / DEPOT_SECTION)
    produce a :class:`VrpInstance`; pure coordinate or matrix files produce a
    :class:`TspInstance`. The vehicle count is taken from a ``k<digits>``
    token in NAME or COMMENT when present, otherwise computed as
    ceil(total demand / capacity).
    """
    if not text.strip():
        raise ParseError(1, "empty input")

    lines = text.splitlines()
    headers: dict[str, str] = {}
    coords: list[tuple[float, float]] | None = None
    matrix_values: list[int] | None = None
    demands: dict[int, int] | None = None
    depot: int | None = None

    idx = 0
    total = len(lines)

    def current_line() -> int:
        return idx + 1

    while idx < total:
        raw = lines[idx]
        line = raw.strip()
        idx += 1
        if not line or line == "EOF":
            continue
        upper = line.upper()

        if upper.startswith("NODE_COORD_SECTION"):
            dim = _require_dimension(headers, current_line() - 1)
            coords = [(0.0, 0.0)] * dim
            seen = 0
            while idx < total and seen < dim:
                entry = lines[idx].strip()
                idx += 1
                if not entry:
                    continue
                parts = entry.split()
                if len(parts) < 3:
                    raise ParseError(idx, f"bad coordinate line: {entry!r}")
                try:
                    node = int(parts[0]) - 1
                    x, y = float(parts[1]), float(parts[2])
                except ValueError as exc:
                    raise ParseError(idx, str(exc)) from None
                if not (0 <= node < dim):
                    raise ParseError(idx, f"node id {node + 1} outside 1..{dim}")
                coords[node] = (x, y)
                seen += 1
            if seen < dim:
                raise ParseError(idx, f"expected {dim} coordinate lines, got {seen}")
        elif upper.startswith("EDGE_WEIGHT_SECTION"):
            dim = _require_dimension(headers, current_line() - 1)
            fmt = headers.get("EDGE_WEIGHT_FORMAT", "FULL_MATRIX").upper()
            if fmt == "FULL_MATRIX":
                needed = dim * dim
            elif fmt == "LOWER_DIAG_ROW":
                needed = dim * (dim + 1) // 2
            else:
                raise UnsupportedEdgeWeightType(current_line() - 1, f"EDGE_WEIGHT_FORMAT {fmt} not supported")
            matrix_values = []
            while idx < total and len(matrix_values) < needed:
                entry = lines[idx].strip()
                idx += 1
                if not entry:
                    continue
                try:
                    matrix_values.extend(int(round(float(tok))) for tok in entry.split())
                except ValueError as exc:
                    raise ParseError(idx, str(exc)) from None
            if len(matrix_values) < needed:
                raise ParseError(idx, f"expected {needed} matrix entries, got {len(matrix_values)}")
            headers["_MATRIX_FORMAT"] = fmt
        elif upper.startswith("DEMAND_SECTION"):
            dim = _require_dimension(headers, current_line() - 1)
            demands = {}
            while idx < total and len(demands) < dim:
                entry = lines[idx].strip()
                idx += 1
                if not entry:
                    continue
                parts = entry.split()
                if len(parts) < 2:
                    raise ParseError(idx, f"bad demand line: {entry!r}")
                try:
                    demands[int(parts[0]) - 1] = int(parts[1])
                except ValueError as exc:
                    raise ParseError(idx, str(exc)) from None
            if len(demands) < dim:
                raise ParseError(idx, f"expected {dim} demand lines, got {len(demands)}")
        elif upper.startswith("DEPOT_SECTION"):
            while idx < total:
                entry = lines[idx].strip()
                idx += 1
                if not entry:
                    continue
                try:
                    value = int(float(entry.split()[0]))
                except ValueError as exc:
                    raise ParseError(idx, str(exc)) from None
                if value == -1:
                    break
                depot = value - 1
        elif ":" in line:
            key, _, value = line.partition(":")
            headers[key.strip().upper()] = value.strip()
        else:
            raise ParseError(current_line() - 1, f"unrecognized line: {line!r}")

    if "DIMENSION" not in headers:
        raise ParseError(total, "missing DIMENSION header")
    n = int(headers["DIMENSION"])
    if n < 3:
        raise ParseError(total, f"instances need at least 3 nodes, got DIMENSION {n}")
    name = headers.get("NAME", "unnamed")
    comment = headers.get("COMMENT", "")
    ew_type = headers.get("EDGE_WEIGHT_TYPE", "EUC_2D").upper()

    if ew_type == "EUC_2D":
        kind = "euc2d"
        if coords is None:
            raise ParseError(total, "EUC_2D instance without NODE_COORD_SECTION")
        matrix = None
    elif ew_type == "EXPLICIT":
        kind = "explicit"
        if matrix_values is None:
            raise ParseError(total, "EXPLICIT instance without EDGE_WEIGHT_SECTION")
        matrix = _unpack_matrix(matrix_values, n, headers.get("_MATRIX_FORMAT", "FULL_MATRIX"))
        coords = None
    else:
        raise UnsupportedEdgeWeightType(total, f"EDGE_WEIGHT_TYPE {ew_type} not supported")

    is_cvrp = demands is not None or "CAPACITY" in headers or depot is not None
    if not is_cvrp:
        return TspInstance(name=name, n=n, edge_weight_kind=kind, coords=coords, matrix=matrix, comment=comment)

    if "CAPACITY" not in headers:
        raise ParseError(total, "CVRP sections present but CAPACITY header missing")
    if demands is None:
        raise ParseError(total, "CVRP instance without DEMAND_SECTION")
    capacity = int(headers["CAPACITY"])
    demand_list = [demands.get(i, 0) for i in range(n)]
    depot_index = depot if depot is not None else 0

    vehicles = _vehicles_from_text(name, comment)
    if vehicles is None:
        customer_demand = sum(d for i, d in enumerate(demand_list) if i != depot_index)
        vehicles = max(1, math.ceil(customer_demand / capacity))

    try:
        return VrpInstance(
            name=name,
            n=n,
            edge_weight_kind=kind,
            coords=coords,
            matrix=matrix,
            comment=comment,
            capacity=capacity,
            demands=demand_list,
            depot_index=depot_index,
            vehicles=vehicles,
        )
    except ValueError as exc:
        raise ParseError(total, str(exc)) from None


def _require_dimension(headers: dict[str, str], line: int) -> int:
    if "DIMENSION" not in headers:
        raise ParseError(line, "section appears before DIMENSION header")
    return int(headers["DIMENSION"])


def _unpack_matrix(values: list[int], n: int, fmt: str) -> list[list[int]]:
    mat = [[0] * n for _ in range(n)]
    it = iter(values)
    if fmt == "FULL_MATRIX":
        for i in range(n):
            for j in range(n):
                mat[i][j] = next(it)
    else:  # LOWER_DIAG_ROW
        for i in range(n):
            for j in range(i + 1):
                v = next(it)
                mat[i][j] = v
                mat[j][i] = v
    return mat


def write_tsplib(instance: TspInstance) -> str:
    """Serialize an instance back to TSPLIB text. Inverse of :func:`parse_tsplib`."""
    is_vrp = isinstance(instance, VrpInstance)
    out = [f"NAME : {instance.name}"]
    if instance.comment:
        out.append(f"COMMENT : {instance.comment}")
    out.append(f"TYPE : {'CVRP' if is_vrp else 'TSP'}")
    out.append(f"DIMENSION : {instance.n}")
    out.append(f"EDGE_WEIGHT_TYPE : {'EUC_2D' if instance.edge_weight_kind == 'euc2d' else 'EXPLICIT'}")
    if instance.edge_weight_kind == "explicit":
        out.append("EDGE_WEIGHT_FORMAT : FULL_MATRIX")
    if is_vrp:
        out.append(f"CAPACITY : {instance.capacity}")
    if instance.edge_weight_kind == "euc2d":
        out.append("NODE_COORD_SECTION")
        for i, (x, y) in enumerate(instance.coords):
            out.append(f"{i + 1} {_fmt_coord(x)} {_fmt_coord(y)}")
    else:
        out.append("EDGE_WEIGHT_SECTION")
        for row in instance.matrix:
            out.append(" ".join(str(v) for v in row))
    if is_vrp:
        out.append("DEMAND_SECTION")
        for i, d in enumerate(instance.demands):
            out.append(f"{i + 1} {d}")
        out.append("DEPOT_SECTION")
        out.append(str(instance.depot_index + 1))
        out.append("-1")
    out.append("EOF")
    return "\n".join(out) + "\n"


def _fmt_coord(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def parse_dimacs(text: str) -> CnfFormula:
    """Parse a DIMACS cnf file: ``p cnf V C`` header, 0-terminated clauses."""
    if not text.strip():
        raise ParseError(1, "empty input")
    num_vars = None
    num_clauses = None
    clauses: list[list[int]] = []
    pending: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(lineno, f"bad problem line: {line!r}")
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(lineno, f"bad problem line: {line!r}") from None
            continue
        if num_vars is None:
            raise ParseError(lineno, "clause before 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(lineno, f"bad literal {tok!r}") from None
            if lit == 0:
                if not pending:
                    raise ParseError(lineno, "empty clause")
                clauses.append(pending)
                pending = []
            else:
                if abs(lit) > num_vars:
                    raise ParseError(lineno, f"literal {lit} exceeds {num_vars} variables")
                pending.append(lit)
    if pending:
        # tolerate a missing trailing 0 on the final clause
        clauses.append(pending)
    if num_vars is None:
        raise ParseError(len(text.splitlines()), "missing 'p cnf' header")
    if num_clauses is not None and len(clauses) != num_clauses:
        raise HeaderMismatch(
            len(text.splitlines()),
            f"header promises {num_clauses} clauses, found {len(clauses)}",
        )
    return CnfFormula(num_vars=num_vars, clauses=clauses)


def write_dimacs(formula: CnfFormula) -> str:
    out = [f"p cnf {formula.num_vars} {len(formula.clauses)}"]
    for clause in formula.clauses:
        out.append(" ".join(str(l) for l in clause) + " 0")
    return "\n".join(out) + "\n"


def parse_dimacs_edges(text: str) -> tuple[int, list[tuple[int, int, float]]]:
    """Parse a DIMACS edge-list graph (``p edge N M``, ``e u v [w]`` lines).

    Returns (node count, edges as 0-based ``(u, v, weight)`` triples); the
    weight defaults to 1. Used for MaxCut input.
    """
    if not text.strip():
        raise ParseError(1, "empty input")
    n = None
    m = None
    edges: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] not in ("edge", "edges"):
                raise ParseError(lineno, f"bad problem line: {line!r}")
            n, m = int(parts[2]), int(parts[3])
        elif parts[0] == "e":
            if n is None:
                raise ParseError(lineno, "edge before 'p edge' header")
            if len(parts) not in (3, 4):
                raise ParseError(lineno, f"bad edge line: {line!r}")
            try:
                u, v = int(parts[1]) - 1, int(parts[2]) - 1
                w = float(parts[3]) if len(parts) == 4 else 1.0
            except ValueError:
                raise ParseError(lineno, f"bad edge line: {line!r}") from None
            if not (0 <= u < n and 0 <= v < n):
                raise ParseError(lineno, f"node id outside 1..{n}")
            edges.append((u, v, w))
        else:
            raise ParseError(lineno, f"unrecognized line: {line!r}")
    if n is None:
        raise ParseError(len(text.splitlines()), "missing 'p edge' header")
    if m is not None and len(edges) != m:
        raise HeaderMismatch(len(text.splitlines()), f"header promises {m} edges, found {len(edges)}")
    return n, edges


def parse_qubo_text(text: str) -> tuple[int, dict[tuple[int, int], float], float]:
    """Parse the triplet QUBO format: ``qubo <n>`` header then ``i j value``.

    Indices are 0-based with i <= j; an optional ``offset <value>`` line sets
    the constant term. Returns (n, coefficients, offset).
    """
    if not text.strip():
        raise ParseError(1, "empty input")
    n = None
    coeffs: dict[tuple[int, int], float] = {}
    offset = 0.0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("c "):
            continue
        parts = line.split()
        if parts[0] == "qubo":
            if len(parts) != 2:
                raise ParseError(lineno, f"bad header: {line!r}")
            n = int(parts[1])
        elif parts[0] == "offset":
            offset = float(parts[1])
        else:
            if n is None:
                raise ParseError(lineno, "coefficient before 'qubo <n>' header")
            if len(parts) != 3:
                raise ParseError(lineno, f"expected 'i j value': {line!r}")
            try:
                i, j, value = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ParseError(lineno, f"expected 'i j value': {line!r}") from None
            if i > j:
                raise ParseError(lineno, f"need i <= j, got {i} > {j}")
            if not (0 <= i and j < n):
                raise ParseError(lineno, f"index outside 0..{n - 1}")
            coeffs[(i, j)] = coeffs.get((i, j), 0.0) + value
    if n is None:
        raise ParseError(len(text.splitlines()), "missing 'qubo <n>' header")
    return n, coeffs, offset


def write_qubo_text(n: int, coeffs: dict[tuple[int, int], float], offset: float = 0.0) -> str:
    out = [f"qubo {n}"]
    if offset:
        out.append(f"offset {_fmt_num(offset)}")
    for (i, j) in sorted(coeffs):
        v = coeffs[(i, j)]
        if v != 0:
            out.append(f"{i} {j} {_fmt_num(v)}")
    return "\n".join(out) + "\n"


def _fmt_num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_routes(routes: list[list[int]], cost: int) -> str:
    """Solution output: one ``route v: 0 a b c 0`` line per route plus the cost."""
    out = []
    for v, route in enumerate(routes):
        body = " ".join(str(c) for c in route)
        out.append(f"route {v}: 0 {body} 0" if body else f"route {v}: 0 0")
    out.append(f"cost: {int(cost)}")
    return "\n".join(out) + "\n"
