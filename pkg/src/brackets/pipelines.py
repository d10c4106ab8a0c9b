"""Seven independent evaluations of

    I(alpha, beta) = int_0^inf int_0^inf x^{alpha-1} y^{beta-1} Ei(-x^2 y) K0(x/y) dx dy

Each route combines a representation of Ei(-xi) with one of K0(xi), builds
the bracket object of the double integral and evaluates it by the rules.
Every rule application is recorded on the :class:`~brackets.trace.Context`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .bracket_core import (
    monomial,
    rescale_bracket,
    rule_P1_integrate,
    series_product,
    with_measure,
)
from .exact_algebra import (
    GammaExpr,
    constant,
    contour,
    gamma_factor,
    param,
    power_factor,
)
from .mellin_barnes import (
    BracketIntegral,
    bracketize_integral,
    contour_rescale,
    integral_product,
    rule_E4,
    rule_E5,
)
from .representations import Kind, catalog_get, instantiate
from .series_eval import ClosedForm, rule_E1, rule_E2
from .trace import Context

ALPHA = param("alpha")
BETA = param("beta")

EI_ARGUMENT = {"x": 2, "y": 1}     # Ei(-x^2 y)
K0_ARGUMENT = {"x": 1, "y": -1}    # K0(x/y)

PIPELINES = (
    "direct3",
    "divergent-divergent",
    "divergent-null",
    "mellin-param",
    "mellin-barnes",
    "mixed-mb-divergent",
    "mixed-bracketized-gamma",
)

DEFAULT_MELLIN_PARAMS = (Fraction(1), Fraction(0), Fraction(2), Fraction(0))


def expected_closed_form() -> GammaExpr:
    """Right side of the target identity, built directly from its display."""
    s = (ALPHA + BETA) / 3
    d = (ALPHA - 2 * BETA) / 6
    return (constant(Fraction(-1, 12)) * gamma_factor(s, 2) * gamma_factor(d, 2)
            * power_factor(4, -(2 * BETA - ALPHA) / 6) * gamma_factor(s + 1, -1))


@dataclass
class PipelineResult:
    pipeline: str
    closed_form: ClosedForm
    context: Context = field(repr=False)

    @property
    def trace(self) -> list:
        return self.context.records


def _measure():
    return monomial({"x": ALPHA - 1, "y": BETA - 1})


def _bracket_integrand(ctx: Context, obj):
    """Multiply by x^{alpha-1} y^{beta-1}, add dx dy and apply P1 in x then y."""
    if isinstance(obj, BracketIntegral):
        obj = ctx.apply("product", integral_product, obj, _measure())
    else:
        obj = ctx.apply("product", series_product, obj, _measure())
    obj = with_measure(obj, ["x", "y"])
    obj = ctx.apply("P1", rule_P1_integrate, obj, "x")
    return ctx.apply("P1", rule_P1_integrate, obj, "y")


def _pair(ctx: Context, ei, k0):
    ei = ctx.apply("instantiate", instantiate, ei, EI_ARGUMENT, note="Ei(-x^2 y)")
    k0 = ctx.apply("instantiate", instantiate, k0, K0_ARGUMENT, note="K0(x/y)")
    if isinstance(ei, BracketIntegral) or isinstance(k0, BracketIntegral):
        return ctx.apply("product", integral_product, ei, k0)
    return ctx.apply("product", series_product, ei, k0)


def _direct3_form(ctx: Context, **_):
    ei = catalog_get("Ei", Kind.BRACKET2, ctx)
    k0 = catalog_get("K0", Kind.BRACKET3, ctx)
    return _bracket_integrand(ctx, _pair(ctx, ei, k0))


def _divergent_divergent_form(ctx: Context, **_):
    s = _pair(ctx, catalog_get("Ei", Kind.DIVERGENT, ctx), catalog_get("K0", Kind.DIVERGENT, ctx))
    return _bracket_integrand(ctx, s)


def _divergent_null_form(ctx: Context, **_):
    s = _pair(ctx, catalog_get("Ei", Kind.DIVERGENT, ctx), catalog_get("K0", Kind.NULL, ctx))
    return _bracket_integrand(ctx, s)


def _mellin_param_form(ctx: Context, mellin_params=DEFAULT_MELLIN_PARAMS, **_):
    a, b, A, B = mellin_params
    ei = catalog_get("Ei", Kind.MELLIN, ctx, params=(a, b))
    k0 = catalog_get("K0", Kind.MELLIN, ctx, params=(A, B))
    return _bracket_integrand(ctx, _pair(ctx, ei, k0))


def _mellin_barnes_form(ctx: Context, **_):
    bi = _pair(ctx, catalog_get("Ei", Kind.MB, ctx), catalog_get("K0", Kind.MB, ctx))
    return _bracket_integrand(ctx, bi)


def _mixed_mb_divergent_form(ctx: Context, **_):
    bi = _pair(ctx, catalog_get("Ei", Kind.DIVERGENT, ctx), catalog_get("K0", Kind.MB, ctx))
    return _bracket_integrand(ctx, bi)


def _mixed_bracketized_gamma_form(ctx: Context, **_):
    s = _pair(ctx, catalog_get("Ei", Kind.DIVERGENT, ctx), k0_two_index_series(ctx))
    return _bracket_integrand(ctx, s)


def _finish_E2(ctx: Context, s) -> ClosedForm:
    return ctx.apply("E2", rule_E2, s)


def _finish_E5(ctx: Context, bi) -> ClosedForm:
    return ctx.apply("E5", rule_E5, bi)


def _finish_contour_first(ctx: Context, bi) -> ClosedForm:
    """Eliminate the contour variable against the x-bracket, then sum the last index."""
    z = bi.contour_vars[0]
    s = ctx.apply("E4", rule_E4, bi, z, bi.brackets[0])
    l = s.indices[0]
    s = ctx.apply("Lemma", rescale_bracket, s, 0, l)
    return ctx.apply("E1", rule_E1, s)


def k0_two_index_series(ctx: Context):
    """K0(xi) = 1/2 sum_{n,m} phi_{n,m} xi^{2m} 4^{-m} <n - m>, derived from its MB form."""
    bi = catalog_get("K0", Kind.MB, ctx).series
    z = bi.contour_vars[0]
    t = contour("t")
    bi = ctx.apply("substitute", contour_rescale, bi, z, t, 2, note="z = 2t")
    n = ctx.fresh.fresh("n")
    m = ctx.fresh.fresh("m")
    bi = ctx.apply("bracketize", bracketize_integral, bi, t.form(), n)
    bi = ctx.apply("bracketize", bracketize_integral, bi, t.form(), m)
    return ctx.apply("E4", rule_E4, bi, t, bi.brackets[-1])


def mixed_bracketized_gamma(ctx: Context, **_) -> ClosedForm:
    k0 = k0_two_index_series(ctx)
    s = _pair(ctx, catalog_get("Ei", Kind.DIVERGENT, ctx), k0)
    return ctx.apply("E2", rule_E2, _bracket_integrand(ctx, s))


FORMS: dict[str, Callable] = {
    "direct3": _direct3_form,
    "divergent-divergent": _divergent_divergent_form,
    "divergent-null": _divergent_null_form,
    "mellin-param": _mellin_param_form,
    "mellin-barnes": _mellin_barnes_form,
    "mixed-mb-divergent": _mixed_mb_divergent_form,
    "mixed-bracketized-gamma": _mixed_bracketized_gamma_form,
}

FINISHERS: dict[str, Callable[..., ClosedForm]] = {
    "direct3": _finish_E2,
    "divergent-divergent": _finish_E2,
    "divergent-null": _finish_E2,
    "mellin-param": _finish_E2,
    "mellin-barnes": _finish_E5,
    "mixed-mb-divergent": _finish_contour_first,
    "mixed-bracketized-gamma": _finish_E2,
}


def _check(pipeline: str):
    if pipeline not in FORMS:
        raise KeyError(f"unknown pipeline {pipeline!r}; choose from {', '.join(PIPELINES)}")


def bracket_form(pipeline: str, ctx: Context | None = None, mellin_params=DEFAULT_MELLIN_PARAMS):
    """The fully bracketed object of a route, just before its final evaluation rule."""
    _check(pipeline)
    ctx = ctx or Context()
    return FORMS[pipeline](ctx, mellin_params=tuple(Fraction(p) for p in mellin_params))


def run(pipeline: str, mellin_params=DEFAULT_MELLIN_PARAMS) -> PipelineResult:
    ctx = Context()
    obj = bracket_form(pipeline, ctx, mellin_params)
    return PipelineResult(pipeline, FINISHERS[pipeline](ctx, obj), ctx)
