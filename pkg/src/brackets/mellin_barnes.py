"""Bracket integrals over vertical contours and the rules E4/E5.

A :class:`BracketIntegral` with contour variables ``s_1..s_N`` denotes

    (1/(2 pi i))^N  int ... int  sum_{residual indices} phi * integrand
                                 * prod_v v^{exponent_v} * prod <arg_j>  ds_1..ds_N

The ``(1/(2 pi i))^N`` normalization is implied by the type, so each E4
step contributes only ``1/|beta|``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .bracket_core import Bracket, BracketError, BracketSeries, _exponent_tuple
from .exact_algebra import (
    AffineForm,
    GammaExpr,
    Symbol,
    SymbolKind,
    affine_substitute,
    as_fraction,
    gamma_factor,
)
from .series_eval import LinearSystem, closed_form, solve_system


@dataclass(frozen=True)
class BracketIntegral:
    contour_vars: tuple
    integrand: GammaExpr
    exponents: tuple = ()
    brackets: tuple = ()
    residual_indices: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "contour_vars", tuple(self.contour_vars))
        object.__setattr__(self, "brackets", tuple(self.brackets))
        object.__setattr__(self, "residual_indices", tuple(self.residual_indices))
        object.__setattr__(self, "exponents", _exponent_tuple(self.exponents))
        if not self.contour_vars:
            raise BracketError("a bracket integral needs at least one contour variable")
        used = set(self.integrand.symbols)
        for _, e in self.exponents:
            used.update(e.symbols)
        for b in self.brackets:
            used.update(b.arg.symbols)
        for v in self.contour_vars:
            if v.kind is not SymbolKind.CONTOUR:
                raise BracketError(f"{v.name} is not a contour variable")
            if v not in used:
                raise BracketError(f"contour variable {v.name} does not appear")

    @property
    def normalization(self) -> str:
        return f"(1/(2*pi*i))^{len(self.contour_vars)}"

    @property
    def exponent_map(self) -> dict[str, AffineForm]:
        return dict(self.exponents)

    def exponent(self, variable: str) -> AffineForm:
        return self.exponent_map.get(variable, AffineForm())

    def reweighted(self, factor: GammaExpr, exponents) -> "BracketIntegral":
        return replace(self, integrand=self.integrand * factor, exponents=_exponent_tuple(exponents))

    def __str__(self):
        head = f"{self.normalization} int d{','.join(v.name for v in self.contour_vars)} "
        if self.residual_indices:
            idx = ",".join(n.name for n in self.residual_indices)
            head += f"sum_{{{idx}}} phi_{{{idx}}} "
        body = [f"[{self.integrand}]"]
        body += [f"{v}^({e})" for v, e in self.exponents]
        body += [str(b) for b in self.brackets]
        return head + " ".join(body)

    def to_json(self) -> dict:
        return {
            "contour_vars": [v.name for v in self.contour_vars],
            "normalization": self.normalization,
            "integrand": self.integrand.to_json(),
            "exponents": {v: e.to_json() for v, e in self.exponents},
            "brackets": [b.to_json() for b in self.brackets],
            "residual_indices": [n.name for n in self.residual_indices],
        }

    @staticmethod
    def from_json(data: dict) -> "BracketIntegral":
        from .exact_algebra import contour, index

        return BracketIntegral(
            tuple(contour(v) for v in data["contour_vars"]),
            GammaExpr.from_json(data["integrand"]),
            {v: AffineForm.from_json(e) for v, e in data["exponents"].items()},
            tuple(Bracket.from_json(b) for b in data["brackets"]),
            tuple(index(n) for n in data["residual_indices"]),
        )


def mb_from_mellin(entry, var: Symbol) -> BracketIntegral:
    """f(xi) = (1/2 pi i) int xi^{-s} M(s) ds, with the xi power kept as a hook."""
    from .representations import MELLIN_TABLE, XI

    if entry.function_name not in MELLIN_TABLE:
        raise KeyError(f"no Mellin transform for {entry.function_name}")
    return BracketIntegral((var,), entry.at(var), {XI: -var.form()}, ())


def contour_rescale(bi: BracketIntegral, var: Symbol, new_var: Symbol, factor) -> BracketIntegral:
    """Change variables ``var = factor * new_var`` (factor > 0 keeps the contour orientation)."""
    factor = as_fraction(factor)
    if factor <= 0:
        raise BracketError("contour rescaling needs a positive factor")
    binding = {var: new_var.form() * factor}
    return BracketIntegral(
        tuple(new_var if v == var else v for v in bi.contour_vars),
        bi.integrand.substitute(binding) * factor,
        {v: affine_substitute(e, binding) for v, e in bi.exponents},
        tuple(b.substitute(binding) for b in bi.brackets),
        bi.residual_indices,
    )


def integral_product(a, b):
    """Product of two integrals, or of an integral and a bracket series."""
    def parts(x):
        if isinstance(x, BracketIntegral):
            return x.contour_vars, x.integrand, x.exponent_map, x.brackets, x.residual_indices
        return (), x.coefficient, x.exponent_map, x.brackets, x.indices

    va, fa, ea, ba, ra = parts(a)
    vb, fb, eb, bb, rb = parts(b)
    if set(va) & set(vb) or set(ra) & set(rb):
        raise BracketError("contour variable or index collision in product")
    for v, e in eb.items():
        ea[v] = ea.get(v, AffineForm()) + e
    return BracketIntegral(va + vb, fa * fb, ea, ba + bb, ra + rb)


def _collapse(vars_left, integrand, exps, brackets, residual):
    if vars_left:
        return BracketIntegral(vars_left, integrand, exps, brackets, residual)
    if residual or brackets or exps:
        return BracketSeries(residual, integrand, exps, brackets)
    return integrand


def rule_E4(bi: BracketIntegral, var: Symbol, using: Bracket):
    """int F(s) <a + b s> ds = (2 pi i/|b|) F(-a/b), with the 2 pi i absorbed.

    Returns a smaller integral, a bracket series (when only sums remain) or a
    plain gamma expression.
    """
    if using not in bi.brackets:
        raise BracketError(f"{using} is not a bracket of the integral")
    beta = using.arg.coeff(var)
    if beta == 0:
        raise BracketError(f"{var.name} does not occur in {using}")
    star = -using.arg.drop(var) / beta
    binding = {var: star}
    pos = bi.brackets.index(using)
    rest = bi.brackets[:pos] + bi.brackets[pos + 1:]
    return _collapse(
        tuple(v for v in bi.contour_vars if v != var),
        bi.integrand.substitute(binding) / abs(beta),
        {v: affine_substitute(e, binding) for v, e in bi.exponents},
        tuple(b.substitute(binding) for b in rest),
        bi.residual_indices,
    )


def rule_E5(bi: BracketIntegral):
    """N contours, N brackets: (1/|det A|) F(s_1*, ..., s_N*)."""
    if len(bi.contour_vars) != len(bi.brackets):
        raise BracketError("rule E5 needs as many brackets as contour variables")
    if bi.residual_indices or bi.exponents:
        raise BracketError("rule E5 needs a pure contour integral")
    system = LinearSystem.from_brackets(bi.brackets, bi.contour_vars)
    sol = solve_system(system)
    value = bi.integrand.substitute(sol.bindings) / sol.abs_det
    return closed_form(value, sol, system)


def gamma_bracketize(e: GammaExpr, target: AffineForm, fresh: Symbol) -> tuple[GammaExpr, Bracket]:
    """Gamma(x) = sum_n phi_n <x + n>: trade one Gamma(x) for a bracket in ``fresh``."""
    target = AffineForm.of(target)
    if e.gamma_power(target) <= 0:
        raise BracketError(f"Gamma({target}) is not a positive-power factor")
    return e * gamma_factor(target, -1), Bracket(target + fresh)


def bracketize_integral(bi: BracketIntegral, target, fresh: Symbol) -> BracketIntegral:
    integrand, bracket = gamma_bracketize(bi.integrand, target, fresh)
    return BracketIntegral(bi.contour_vars, integrand, bi.exponents,
                           bi.brackets + (bracket,), bi.residual_indices + (fresh,))
