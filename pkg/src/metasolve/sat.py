"""Complete SAT solving for DIMACS formulas via DPLL.

Unit propagation and pure-literal elimination run before every branch; the
branching variable is the one with the highest occurrence count (ties to the
lowest index), trying True first. Variables left unassigned by the search are
completed as False so results are deterministic.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .formats import CnfFormula


@dataclass
class Assignment:
    """Total truth assignment; values[i] is the value of variable i+1."""

    values: list[bool]

    def lit_true(self, lit: int) -> bool:
        value = self.values[abs(lit) - 1]
        return value if lit > 0 else not value

    def as_dimacs_line(self) -> str:
        body = " ".join(str(i + 1 if v else -(i + 1)) for i, v in enumerate(self.values))
        return f"SAT {body} 0"


def verify(formula: CnfFormula, assignment: Assignment) -> bool:
    """True iff every clause has at least one satisfied literal."""
    return all(any(assignment.lit_true(l) for l in clause) for clause in formula.clauses)


def dpll_solve(formula: CnfFormula) -> Assignment | None:
    """Complete search; returns a satisfying assignment or None for UNSAT."""
    fixed = _search(formula.clauses, {})
    if fixed is None:
        return None
    values = [fixed.get(v, False) for v in range(1, formula.num_vars + 1)]
    return Assignment(values=values)


def _search(clauses: list[list[int]], fixed: dict[int, bool]) -> dict[int, bool] | None:
    clauses, fixed, conflict = _propagate(clauses, dict(fixed))
    if conflict:
        return None
    if not clauses:
        return fixed

    counts: Counter[int] = Counter()
    for clause in clauses:
        for lit in clause:
            counts[abs(lit)] += 1
    branch = min(counts, key=lambda v: (-counts[v], v))

    for value in (True, False):
        lit = branch if value else -branch
        result = _search(_reduce(clauses, lit), {**fixed, branch: value})
        if result is not None:
            return result
    return None


def _propagate(
    clauses: list[list[int]], fixed: dict[int, bool]
) -> tuple[list[list[int]], dict[int, bool], bool]:
    """Exhaustive unit propagation plus pure-literal elimination."""
    while True:
        unit = next((c[0] for c in clauses if len(c) == 1), None)
        if unit is not None:
            fixed[abs(unit)] = unit > 0
            clauses = _reduce(clauses, unit)
            if any(not c for c in clauses):
                return clauses, fixed, True
            continue
        polarity: dict[int, int] = {}
        for clause in clauses:
            for lit in clause:
                var = abs(lit)
                sign = 1 if lit > 0 else -1
                polarity[var] = 0 if polarity.get(var, sign) != sign else sign
        pure = next((v for v, s in sorted(polarity.items()) if s != 0), None)
        if pure is None:
            return clauses, fixed, False
        lit = pure * polarity[pure]
        fixed[pure] = lit > 0
        clauses = _reduce(clauses, lit)


def _reduce(clauses: list[list[int]], lit: int) -> list[list[int]]:
    """Clauses after asserting ``lit``: satisfied ones drop, negations shrink."""
    out = []
    for clause in clauses:
        if lit in clause:
            continue
        if -lit in clause:
            out.append([l for l in clause if l != -lit])
        else:
            out.append(clause)
    return out


def solution_line(result: Assignment | None) -> str:
    """DIMACS-style output: ``SAT v1 -v2 ... 0`` or ``UNSAT``."""
    return result.as_dimacs_line() if result is not None else "UNSAT"
