"""Evaluation rules for bracket series (E1, E2, E3 and single-index elimination)."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .bracket_core import Bracket, BracketError, BracketSeries, complexity_index
from .exact_algebra import (
    AffineForm,
    GammaExpr,
    Symbol,
    SymbolKind,
    fraction_to_str,
    gamma_factor,
)


class NoAssignment(ArithmeticError):
    """The rules assign no value (singular system or negative complexity index)."""

    def __init__(self, message: str, system: "LinearSystem | None" = None):
        super().__init__(message)
        self.system = system


@dataclass(frozen=True)
class LinearSystem:
    """``matrix @ unknowns = rhs`` obtained from the vanishing of brackets."""

    unknowns: tuple
    matrix: tuple          # rows of Fraction
    rhs: tuple             # AffineForm per row

    @staticmethod
    def from_brackets(brackets: Sequence[Bracket], unknowns: Sequence[Symbol]) -> "LinearSystem":
        rows, rhs = [], []
        for b in brackets:
            rows.append(tuple(b.arg.coeff(u) for u in unknowns))
            rest = b.arg
            for u in unknowns:
                rest = rest.drop(u)
            rhs.append(-rest)
        return LinearSystem(tuple(unknowns), tuple(rows), tuple(rhs))

    def to_json(self) -> dict:
        return {
            "unknowns": [u.name for u in self.unknowns],
            "matrix": [[fraction_to_str(c) for c in row] for row in self.matrix],
            "rhs": [r.to_json() for r in self.rhs],
        }


def bareiss(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[AffineForm] | None = None):
    """Fraction-free elimination on a square system.

    Rows are first scaled to integers; the integer Bareiss recurrence then
    keeps every intermediate entry an exact integer.  Returns ``(det,
    solution)`` where ``solution`` is ``None`` when no right side is given or
    the matrix is singular (``det == 0``).
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise BracketError("bareiss needs a square matrix")
    if n == 0:
        return Fraction(1), []
    rows: list[list[int]] = []
    right: list[AffineForm] = []
    scale = Fraction(1)
    for i, row in enumerate(matrix):
        lcm = 1
        for c in row:
            c = Fraction(c)
            lcm = lcm * c.denominator // _gcd(lcm, c.denominator)
        rows.append([int(Fraction(c) * lcm) for c in row])
        scale *= lcm
        if rhs is not None:
            right.append(AffineForm.of(rhs[i]) * lcm)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if rows[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if rows[r][k] != 0), None)
            if swap is None:
                return Fraction(0), None
            rows[k], rows[swap] = rows[swap], rows[k]
            if rhs is not None:
                right[k], right[swap] = right[swap], right[k]
            sign = -sign
        piv = rows[k][k]
        for i in range(k + 1, n):
            a_ik = rows[i][k]
            for j in range(k + 1, n):
                rows[i][j] = (piv * rows[i][j] - a_ik * rows[k][j]) // prev
            if rhs is not None:
                right[i] = (right[i] * piv - right[k] * a_ik) / prev
            rows[i][k] = 0
        prev = piv
    det_int = sign * rows[n - 1][n - 1]
    det = Fraction(det_int) / scale
    if det == 0 or rhs is None:
        return det, None
    solution: list[AffineForm] = [AffineForm()] * n
    for i in range(n - 1, -1, -1):
        acc = right[i]
        for j in range(i + 1, n):
            acc = acc - solution[j] * rows[i][j]
        solution[i] = acc / rows[i][i]
    return det, solution


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def determinant(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    return bareiss(matrix)[0]


@dataclass(frozen=True)
class IndexSolution:
    bindings: dict
    determinant: Fraction

    @property
    def abs_det(self) -> Fraction:
        return abs(self.determinant)

    def to_json(self) -> dict:
        return {
            "determinant": fraction_to_str(self.determinant),
            "bindings": {s.name: f.to_json() for s, f in self.bindings.items()},
        }


def solve_system(system: LinearSystem) -> IndexSolution:
    det, sol = bareiss(system.matrix, system.rhs)
    if det == 0:
        raise NoAssignment("singular bracket system", system)
    return IndexSolution(dict(zip(system.unknowns, sol)), det)


@dataclass(frozen=True)
class ClosedForm:
    expr: GammaExpr
    divergent: bool = False
    solution: IndexSolution | None = field(default=None, compare=False)
    system: LinearSystem | None = field(default=None, compare=False)

    def to_json(self) -> dict:
        return {"expr": self.expr.to_json(), "text": str(self.expr), "divergent": self.divergent}

    def __str__(self):
        return str(self.expr) + ("  [divergent]" if self.divergent else "")


def closed_form(expr: GammaExpr, solution=None, system=None) -> ClosedForm:
    stray = [s.name for s in expr.symbols if s.kind is not SymbolKind.PARAMETER]
    if stray:
        raise BracketError(f"closed form still depends on {sorted(stray)}")
    return ClosedForm(expr, expr.is_divergent(), solution, system)


def _solved_value(s: BracketSeries, unknowns: Sequence[Symbol], brackets: Sequence[Bracket]):
    system = LinearSystem.from_brackets(brackets, unknowns)
    sol = solve_system(system)
    value = s.coefficient.substitute(sol.bindings)
    for u in unknowns:
        value = value * gamma_factor(-sol.bindings[u])
    return value / sol.abs_det, sol, system


def rule_E1(s: BracketSeries) -> ClosedForm:
    """One sum, one bracket: (1/|a|) f(n*) Gamma(-n*) with a n* + b = 0."""
    if len(s.indices) != 1 or len(s.brackets) != 1:
        raise BracketError("rule E1 needs exactly one index and one bracket")
    if s.exponents:
        raise BracketError("rule E1 needs a series with no surviving variables")
    n = s.indices[0]
    if s.brackets[0].arg.coeff(n) == 0:
        raise NoAssignment(f"index {n.name} is absent from the bracket")
    value, sol, system = _solved_value(s, s.indices, s.brackets)
    return closed_form(value, sol, system)


def rule_E2(s: BracketSeries) -> ClosedForm:
    """Index-zero series: (1/|det A|) f(n*) prod Gamma(-n_i*)."""
    if len(s.indices) != len(s.brackets) or not s.indices:
        raise BracketError("rule E2 needs as many brackets as indices (at least one)")
    if s.exponents:
        raise BracketError("rule E2 needs a series with no surviving variables")
    value, sol, system = _solved_value(s, s.indices, s.brackets)
    return closed_form(value, sol, system)


@dataclass(frozen=True)
class E3Candidate:
    solved: tuple
    free: tuple
    series: BracketSeries
    solution: IndexSolution


def rule_E3_enumerate(s: BracketSeries) -> list[E3Candidate]:
    """All maximal-rank contributions, one per non-singular index subset.

    Subsets are visited in lexicographic order of index position.  The
    candidates are returned separately; deciding which of them converges
    is left to numeric summation.
    """
    if complexity_index(s) < 0:
        raise NoAssignment("bracket series of negative index has no assignment")
    out = []
    r = len(s.brackets)
    for subset in combinations(range(len(s.indices)), r):
        unknowns = [s.indices[i] for i in subset]
        system = LinearSystem.from_brackets(s.brackets, unknowns)
        det, sol = bareiss(system.matrix, system.rhs)
        if det == 0:
            continue
        solution = IndexSolution(dict(zip(unknowns, sol)), det)
        coeff = s.coefficient.substitute(solution.bindings)
        for u in unknowns:
            coeff = coeff * gamma_factor(-solution.bindings[u])
        coeff = coeff / abs(det)
        free = tuple(n for n in s.indices if n not in unknowns)
        series = BracketSeries(
            free, coeff,
            {v: e.substitute(solution.bindings) for v, e in s.exponents}, ())
        out.append(E3Candidate(tuple(unknowns), free, series, solution))
    return out


def partial_eliminate(s: BracketSeries, target: Symbol, using: Bracket) -> BracketSeries:
    """Sum out one index against one bracket, leaving the rest of the series."""
    if using not in s.brackets:
        raise BracketError(f"{using} is not a bracket of the series")
    if target not in s.indices:
        raise BracketError(f"{target.name} is not an index of the series")
    c = using.arg.coeff(target)
    if c == 0:
        raise BracketError(f"{target.name} does not occur in {using}")
    star = -using.arg.drop(target) / c
    pos = s.brackets.index(using)
    rest = s.brackets[:pos] + s.brackets[pos + 1:]
    binding = {target: star}
    coeff = s.coefficient.substitute(binding) * gamma_factor(-star) / abs(c)
    return BracketSeries(
        tuple(n for n in s.indices if n != target), coeff,
        {v: e.substitute(binding) for v, e in s.exponents},
        tuple(b.substitute(binding) for b in rest))


def eliminate_sequence(s: BracketSeries, order: Sequence[Symbol]) -> BracketSeries:
    """Eliminate indices one at a time, each against the first bracket containing it."""
    for target in order:
        using = next((b for b in s.brackets if b.arg.coeff(target) != 0), None)
        if using is None:
            raise NoAssignment(f"no bracket left containing {target.name}")
        s = partial_eliminate(s, target, using)
    return s


def series_value(s: BracketSeries) -> ClosedForm:
    """Value of a fully eliminated (index-free, bracket-free) series."""
    if s.indices or s.brackets or s.exponents:
        raise BracketError("series still has indices, brackets or variables")
    return closed_form(s.coefficient)
