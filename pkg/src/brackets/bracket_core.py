"""Bracket series and the production rules.

A :class:`BracketSeries` stands for

    sum_{n_1..n_r >= 0} phi_{n_1..n_r} * coefficient(n) * prod_v v^{exponent_v(n)} * prod <arg_j(n)>

where ``phi_n = (-1)^n / Gamma(n+1)`` is implicit for every listed index.
While a series represents a function, ``exponents`` hold the true powers of
the continuous variables.  :func:`with_measure` adds the ``+1`` of ``dv``
exactly once before :func:`rule_P1_integrate` turns an exponent into a
bracket argument.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exact_algebra import (
    ONE,
    AffineForm,
    GammaExpr,
    Symbol,
    SymbolKind,
    affine_substitute,
    as_fraction,
    gamma_factor,
    index,
    power_factor,
)


class BracketError(ValueError):
    """Malformed bracket object or a rule applied outside its preconditions."""


@dataclass(frozen=True)
class Bracket:
    arg: AffineForm

    def __post_init__(self):
        if not self.arg.depends_on((SymbolKind.INDEX, SymbolKind.CONTOUR)):
            raise BracketError(f"bracket <{self.arg}> has no index or contour variable")

    def substitute(self, bindings: Mapping[Symbol, AffineForm]) -> "Bracket":
        return Bracket(affine_substitute(self.arg, bindings))

    def __str__(self):
        return f"<{self.arg}>"

    def to_json(self) -> dict:
        return {"arg": self.arg.to_json()}

    @staticmethod
    def from_json(data: dict) -> "Bracket":
        return Bracket(AffineForm.from_json(data["arg"]))


def _exponent_tuple(exponents) -> tuple:
    items = exponents.items() if isinstance(exponents, Mapping) else exponents
    return tuple(sorted((v, AffineForm.of(e)) for v, e in items if not AffineForm.of(e).is_zero()))


@dataclass(frozen=True)
class BracketSeries:
    indices: tuple = ()
    coefficient: GammaExpr = ONE
    exponents: tuple = ()      # sorted (variable name, AffineForm)
    brackets: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))
        object.__setattr__(self, "brackets", tuple(self.brackets))
        object.__setattr__(self, "exponents", _exponent_tuple(self.exponents))
        if len(set(self.indices)) != len(self.indices):
            raise BracketError("duplicate summation index")
        for n in self.indices:
            if n.kind is not SymbolKind.INDEX:
                raise BracketError(f"{n.name} is not an index symbol")
        used = set(self.coefficient.symbols)
        for _, e in self.exponents:
            used.update(e.symbols)
        for b in self.brackets:
            used.update(b.arg.symbols)
        for n in self.indices:
            if n not in used:
                raise BracketError(f"index {n.name} does not appear in the series")

    @property
    def exponent_map(self) -> dict[str, AffineForm]:
        return dict(self.exponents)

    def exponent(self, variable: str) -> AffineForm:
        return self.exponent_map.get(variable, AffineForm())

    def reweighted(self, factor: GammaExpr, exponents) -> "BracketSeries":
        """Same indices and brackets, coefficient times ``factor``, new exponents."""
        return BracketSeries(self.indices, self.coefficient * factor, exponents, self.brackets)

    def substitute(self, bindings: Mapping[Symbol, AffineForm]) -> "BracketSeries":
        """Substitute symbols everywhere; bound indices leave the index list."""
        return BracketSeries(
            tuple(n for n in self.indices if n not in bindings),
            self.coefficient.substitute(bindings),
            {v: affine_substitute(e, bindings) for v, e in self.exponents},
            tuple(b.substitute(bindings) for b in self.brackets),
        )

    def __str__(self):
        idx = ",".join(n.name for n in self.indices)
        head = f"sum_{{{idx}}} phi_{{{idx}}} " if self.indices else ""
        body = [f"[{self.coefficient}]"]
        body += [f"{v}^({e})" for v, e in self.exponents]
        body += [str(b) for b in self.brackets]
        return head + " ".join(body)

    def to_json(self) -> dict:
        return {
            "indices": [n.name for n in self.indices],
            "coefficient": self.coefficient.to_json(),
            "exponents": {v: e.to_json() for v, e in self.exponents},
            "brackets": [b.to_json() for b in self.brackets],
        }

    @staticmethod
    def from_json(data: dict) -> "BracketSeries":
        return BracketSeries(
            tuple(index(n) for n in data["indices"]),
            GammaExpr.from_json(data["coefficient"]),
            {v: AffineForm.from_json(e) for v, e in data["exponents"].items()},
            tuple(Bracket.from_json(b) for b in data["brackets"]),
        )


class FreshIndices:
    """Monotone supply of index names; one per pipeline run."""

    def __init__(self):
        self._count = 0
        self._used: set[str] = set()

    def fresh(self, hint: str = "n") -> Symbol:
        name = f"{hint}{self._count}"
        self._count += 1
        self._used.add(name)
        return index(name)

    def many(self, hints: Iterable[str]) -> list[Symbol]:
        return [self.fresh(h) for h in hints]


def monomial(exponents: Mapping[str, object], coefficient: GammaExpr = ONE) -> BracketSeries:
    """Index-free series ``coefficient * prod v^{e_v}``."""
    return BracketSeries((), coefficient, exponents, ())


def with_measure(s: BracketSeries, variables: Sequence[str]) -> BracketSeries:
    """Account for ``dv`` once per integration variable (v^{e} dv -> bracket <e+1>)."""
    exps = s.exponent_map
    for v in variables:
        exps[v] = exps.get(v, AffineForm()) + 1
    return replace(s, exponents=_exponent_tuple(exps))


def rule_P1_integrate(s: BracketSeries, variable: str) -> BracketSeries:
    """Integrate ``variable`` over [0, inf): its exponent becomes a bracket."""
    exps = s.exponent_map
    if variable not in exps:
        raise BracketError(f"variable {variable} does not occur in the series")
    arg = exps.pop(variable)
    return replace(s, exponents=_exponent_tuple(exps), brackets=s.brackets + (Bracket(arg),))


def rule_P2_multinomial(terms: Sequence[tuple], power, fresh_indices: Sequence[Symbol]) -> BracketSeries:
    """Bracket series of ``(a_1 + ... + a_r)^power``.

    Each term is ``(c, {variable: e})`` standing for ``c * prod v^e`` with a
    positive rational ``c`` and constant exponents ``e``.  ``power`` may be
    any affine form, including one that contains a summation index.
    """
    if not terms:
        raise BracketError("multinomial needs at least one term")
    if len(terms) != len(fresh_indices):
        raise BracketError("one fresh index per multinomial term is required")
    power = AffineForm.of(power)
    coefficient = gamma_factor(-power, -1)
    exps: dict[str, AffineForm] = {}
    bracket_arg = -power
    for (c, term_exps), n in zip(terms, fresh_indices):
        c = as_fraction(c)
        if c <= 0:
            raise BracketError("multinomial term coefficients must be positive rationals")
        if c != 1:
            coefficient = coefficient * power_factor(c, n)
        for v, e in term_exps.items():
            e = AffineForm.of(e)
            if not e.is_constant():
                raise BracketError("multinomial term exponents must be constants")
            exps[v] = exps.get(v, AffineForm()) + n * e.constant
        bracket_arg = bracket_arg + n
    return BracketSeries(tuple(fresh_indices), coefficient, exps, (Bracket(bracket_arg),))


def lemma_rescale(b: Bracket, target: Symbol) -> tuple[Bracket, Fraction]:
    """<a*t + r> = (1/|a|) <t + r/a>; returns the normalized bracket and 1/|a|."""
    a = b.arg.coeff(target)
    if a == 0:
        raise BracketError(f"{target.name} does not occur in {b}")
    return Bracket(b.arg / a), 1 / abs(a)


def rescale_bracket(s: BracketSeries, position: int, target: Symbol) -> BracketSeries:
    """Apply :func:`lemma_rescale` to one bracket of a series, keeping its value."""
    nb, factor = lemma_rescale(s.brackets[position], target)
    brackets = list(s.brackets)
    brackets[position] = nb
    return replace(s, coefficient=s.coefficient * factor, brackets=tuple(brackets))


def series_product(a: BracketSeries, b: BracketSeries) -> BracketSeries:
    clash = set(a.indices) & set(b.indices)
    if clash:
        raise BracketError(f"index collision: {sorted(n.name for n in clash)}")
    exps = a.exponent_map
    for v, e in b.exponents:
        exps[v] = exps.get(v, AffineForm()) + e
    return BracketSeries(a.indices + b.indices, a.coefficient * b.coefficient, exps,
                         a.brackets + b.brackets)


def complexity_index(s) -> int:
    """Number of sums minus number of brackets."""
    return len(s.indices) - len(s.brackets)


def relabel(s: BracketSeries, names: Sequence[str]) -> BracketSeries:
    """Rename the indices positionally to ``names``."""
    if len(names) != len(s.indices):
        raise BracketError("relabel needs one name per index")
    mapping = {old: index(new).form() for old, new in zip(s.indices, names)}
    tmp = {old: index(f"__tmp{k}").form() for k, old in enumerate(s.indices)}
    staged = BracketSeries(tuple(t.symbols[0] for t in tmp.values()), s.coefficient.substitute(tmp),
                           {v: affine_substitute(e, tmp) for v, e in s.exponents},
                           tuple(b.substitute(tmp) for b in s.brackets))
    final = {index(f"__tmp{k}"): mapping[old] for k, old in enumerate(s.indices)}
    return BracketSeries(tuple(index(n) for n in names), staged.coefficient.substitute(final),
                         {v: affine_substitute(e, final) for v, e in staged.exponents},
                         tuple(b.substitute(final) for b in staged.brackets))


def canonical_labels(s: BracketSeries, prefix: str = "i") -> BracketSeries:
    """Deterministic relabeling used when comparing series built by different routes."""
    return relabel(s, [f"{prefix}{k}" for k in range(len(s.indices))])
