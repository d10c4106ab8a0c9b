"""Series and bracket representations of K_0 and Ei(-xi).

Every representation is a bracket series in the formal variable ``xi``
(the function argument).  :func:`instantiate` distributes the ``xi`` powers
onto integration variables, e.g. ``xi = x^2 y`` gives ``{"x": 2, "y": 1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from .bracket_core import (
    BracketError,
    BracketSeries,
    rescale_bracket,
    rule_P1_integrate,
    rule_P2_multinomial,
    series_product,
    with_measure,
)
from .exact_algebra import (
    ONE,
    AffineForm,
    GammaExpr,
    Symbol,
    as_fraction,
    constant,
    contour,
    gamma_factor,
    linear_factor,
    power_factor,
)
from .series_eval import partial_eliminate
from .trace import Context

XI = "xi"


class Kind(str, Enum):
    BRACKET3 = "bracket-series-3index"
    BRACKET2 = "bracket-series-2index"
    DIVERGENT = "divergent"
    NULL = "null"
    MELLIN = "mellin-parametric"
    MB = "mellin-barnes"


@dataclass(frozen=True)
class MellinEntry:
    function_name: str
    transform: GammaExpr        # in MELLIN_S
    variable: Symbol

    def at(self, s) -> GammaExpr:
        s = AffineForm.of(s)
        if self.variable in s.symbols:
            tmp = Symbol(f"{self.variable.name}__", self.variable.kind)
            return self.transform.substitute({self.variable: tmp.form()}).substitute({tmp: s})
        return self.transform.substitute({self.variable: s})

    def to_json(self) -> dict:
        return {"function": self.function_name, "variable": self.variable.name,
                "transform": self.transform.to_json(), "text": str(self.transform)}


MELLIN_S = contour("s")

# int_0^inf xi^{s-1} f(xi) dxi
MELLIN_TABLE = {
    "Ei": MellinEntry("Ei", -(gamma_factor(MELLIN_S) * linear_factor(MELLIN_S, -1)), MELLIN_S),
    "K0": MellinEntry("K0", constant(Fraction(1, 4)) * power_factor(2, MELLIN_S)
                      * gamma_factor(MELLIN_S / 2, 2), MELLIN_S),
}


@dataclass(frozen=True)
class Representation:
    function_name: str
    kind: Kind
    series: object              # BracketSeries, or BracketIntegral for Kind.MB
    parameter_slots: tuple = ()
    hook: str | None = XI

    def to_json(self) -> dict:
        return {"function": self.function_name, "kind": self.kind.value,
                "parameters": [str(p) for p in self.parameter_slots],
                "hook": self.hook, "series": self.series.to_json(), "text": str(self.series)}


# -- elementary builders ------------------------------------------------------

def cos_series(argument: Mapping[str, int], ctx: Context) -> BracketSeries:
    """cos(w) = sum phi_n Gamma(1/2) w^{2n} / (Gamma(n+1/2) 4^n), w = prod v^{e_v}."""
    n = ctx.fresh.fresh("n")
    coeff = (gamma_factor(Fraction(1, 2)) * gamma_factor(n + Fraction(1, 2), -1)
             * power_factor(4, -n.form()))
    return BracketSeries((n,), coeff, {v: 2 * e * n.form() for v, e in argument.items()}, ())


def exp_series(argument: Mapping[str, int], ctx: Context, hint: str = "n") -> BracketSeries:
    """exp(-w) = sum phi_n w^n."""
    n = ctx.fresh.fresh(hint)
    return BracketSeries((n,), ONE, {v: e * n.form() for v, e in argument.items()}, ())


def binomial_series(terms: Sequence[tuple], power, ctx: Context, hints: Sequence[str]) -> BracketSeries:
    return ctx.apply("P2", rule_P2_multinomial, terms, power, ctx.fresh.many(hints))


def expand_power(s: BracketSeries, variable: str, terms: Sequence[tuple], ctx: Context,
                 hints: Sequence[str]) -> BracketSeries:
    """Replace ``variable^e`` in ``s`` by the multinomial series of ``(sum terms)^e``."""
    p = binomial_series(terms, s.exponent(variable), ctx, hints)
    exps = p.exponent_map
    for v, f in s.exponents:
        if v != variable:
            exps[v] = exps.get(v, AffineForm()) + f
    return BracketSeries(s.indices + p.indices, s.coefficient * p.coefficient, exps,
                         s.brackets + p.brackets)


# -- K0 and Ei ------------------------------------------------------------------

def build_rep_K0(ctx: Context) -> BracketSeries:
    """Three-index bracket series from K0(xi) = int_0^inf cos(xi t)/sqrt(t^2+1) dt."""
    cos_part = cos_series({XI: 1, "t": 1}, ctx)
    root = binomial_series([(1, {"t": 2}), (1, {})], Fraction(-1, 2), ctx, ["m", "l"])
    s = series_product(cos_part, root)
    s = with_measure(s, ["t"])
    s = ctx.apply("P1", rule_P1_integrate, s, "t")
    n = cos_part.indices[0]
    return ctx.apply("Lemma", rescale_bracket, s, len(s.brackets) - 1, n)


def build_rep_Ei(ctx: Context) -> BracketSeries:
    """Two-index bracket series from Ei(-xi) = -int_0^inf exp(-(z+xi))/(z+xi) dz."""
    e = exp_series({"w": 1}, ctx, hint="i")
    e = BracketSeries(e.indices, -e.coefficient, {"w": e.exponent("w") - 1}, ())
    s = expand_power(e, "w", [(1, {"z": 1}), (1, {XI: 1})], ctx, ["j", "k"])
    s = with_measure(s, ["z"])
    s = ctx.apply("P1", rule_P1_integrate, s, "z")
    j = s.indices[1]
    return ctx.apply("partial-eliminate", partial_eliminate, s, j, s.brackets[-1])


def divergent_K0(ctx: Context) -> BracketSeries:
    n = ctx.fresh.fresh("n")
    coeff = constant(Fraction(1, 2)) * gamma_factor(-n.form()) * power_factor(4, -n.form())
    return BracketSeries((n,), coeff, {XI: 2 * n.form()}, ())


def null_K0(ctx: Context) -> BracketSeries:
    n = ctx.fresh.fresh("n")
    coeff = (power_factor(4, n) * gamma_factor(n + Fraction(1, 2), 2)
             * gamma_factor(-n.form(), -1))
    return BracketSeries((n,), coeff, {XI: -2 * n.form() - 1}, ())


def divergent_Ei(ctx: Context) -> BracketSeries:
    l = ctx.fresh.fresh("l")
    return BracketSeries((l,), linear_factor(l, -1), {XI: l.form()}, ())


def fixture_rep_K0(ctx: Context) -> BracketSeries:
    """The three-index K0 series as displayed, for regression against the builder."""
    from .bracket_core import Bracket

    n, m, l = ctx.fresh.many("nml")
    h = Fraction(1, 2)
    coeff = constant(h) * power_factor(4, -n.form()) * gamma_factor(n + h, -1)
    return BracketSeries((n, m, l), coeff, {XI: 2 * n.form()},
                         (Bracket(m + l + h), Bracket(n + m + h)))


def fixture_rep_Ei(ctx: Context) -> BracketSeries:
    from .bracket_core import Bracket

    i, k = ctx.fresh.many("ik")
    coeff = -gamma_factor(1 - i, -1)
    return BracketSeries((i, k), coeff, {XI: k.form()}, (Bracket(k - i),))


def mellin_to_series(entry: MellinEntry, a, b, idx: Symbol) -> Representation:
    """f(xi) = |a| sum phi_n M(-a n - b)/Gamma(-n) xi^{a n + b}."""
    a = as_fraction(a)
    if a == 0:
        raise BracketError("mellin_to_series needs a != 0")
    b = AffineForm.of(b)
    power = idx * a + b
    coeff = constant(abs(a)) * entry.at(-power) * gamma_factor(-idx.form(), -1)
    series = BracketSeries((idx,), coeff, {XI: power}, ())
    return Representation(entry.function_name, Kind.MELLIN, series, (a, b))


_DEFAULT_MELLIN = {"Ei": (1, 0), "K0": (2, 0)}

CATALOG = {
    ("K0", Kind.BRACKET3), ("K0", Kind.DIVERGENT), ("K0", Kind.NULL), ("K0", Kind.MELLIN),
    ("K0", Kind.MB), ("Ei", Kind.BRACKET2), ("Ei", Kind.DIVERGENT), ("Ei", Kind.MELLIN),
    ("Ei", Kind.MB),
}


def catalog_get(name: str, kind: Kind | str, ctx: Context | None = None,
                params: tuple | None = None) -> Representation:
    """Fresh instance of a catalogued representation."""
    ctx = ctx or Context()
    kind = Kind(kind)
    if (name, kind) not in CATALOG:
        raise KeyError(f"no representation {kind.value} for {name}")
    if kind is Kind.MB:
        from .mellin_barnes import mb_from_mellin

        var = contour("s" if name == "Ei" else "z")
        bi = ctx.apply("mellin-barnes", mb_from_mellin, MELLIN_TABLE[name], var)
        return Representation(name, kind, bi)
    if kind is Kind.MELLIN:
        a, b = params or _DEFAULT_MELLIN[name]
        idx = ctx.fresh.fresh("l" if name == "Ei" else "n")
        return ctx.apply("mellin-series", mellin_to_series, MELLIN_TABLE[name], a, b, idx)
    builders = {
        ("K0", Kind.BRACKET3): build_rep_K0,
        ("K0", Kind.DIVERGENT): divergent_K0,
        ("K0", Kind.NULL): null_K0,
        ("Ei", Kind.BRACKET2): build_rep_Ei,
        ("Ei", Kind.DIVERGENT): divergent_Ei,
    }
    return Representation(name, kind, builders[(name, kind)](ctx))


def instantiate(rep, argument_exponents: Mapping[str, object], scale=None):
    """Substitute ``xi = scale * prod v^{c_v}`` into a representation.

    Works for bracket series and Mellin-Barnes integrals alike: the ``xi``
    exponent ``e`` becomes ``c_v * e`` on each variable ``v``.
    """
    target = rep.series if isinstance(rep, Representation) else rep
    hook = rep.hook if isinstance(rep, Representation) else XI
    if hook is None:
        raise BracketError("representation has no argument hook")
    exps = target.exponent_map
    e = exps.pop(hook, None)
    if e is None:
        raise BracketError(f"representation lacks the {hook} power hook")
    for v, c in argument_exponents.items():
        exps[v] = exps.get(v, AffineForm()) + e * as_fraction(c)
    factor = power_factor(scale, e) if scale is not None else ONE
    return target.reweighted(factor, exps)
