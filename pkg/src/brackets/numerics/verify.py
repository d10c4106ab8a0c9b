"""Numeric ground truth for symbolic results."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Mapping

import numpy as np

from ..exact_algebra import DIVERGENT, Symbol, gamma_eval_numeric
from .quadrature import QuadratureResult, quad, quad_2d_unit, wynn_epsilon
from .special import eval_Ei_neg, eval_K0


def closed_form_value(cf, values: Mapping[Symbol, float]):
    """Float value of a ClosedForm (or bare GammaExpr); DIVERGENT passes through."""
    expr = cf.expr if hasattr(cf, "expr") else cf
    v = gamma_eval_numeric(expr, {s: complex(x) for s, x in values.items()})
    if v is DIVERGENT:
        return v
    return v.real if v.imag == 0 else v


def main_integrand(alpha: float, beta: float):
    """x^{a-1} y^{b-1} Ei(-x^2 y) K0(x/y) pulled back to the unit square."""

    def f(u, v):
        one_u, one_v = 1.0 - u, 1.0 - v
        x = u / one_u
        y = v / one_v
        jac = 1.0 / (one_u * one_u * one_v * one_v)
        with np.errstate(over="ignore", under="ignore"):
            ei = eval_Ei_neg(np.minimum(x * x * y, 1e300))
            k0 = eval_K0(np.minimum(x / y, 1e300))
            out = x ** (alpha - 1.0) * y ** (beta - 1.0) * ei * k0 * jac
        return np.where(np.isfinite(out), out, 0.0)

    return f


def quad_2d_main_integral(alpha: float, beta: float, tol: float = 1e-4,
                          max_evals: int = 4_000_000) -> QuadratureResult:
    """Adaptive cubature of the double integral over [0, inf)^2; ``tol`` is absolute."""
    return quad_2d_unit(main_integrand(float(alpha), float(beta)), tol=tol, max_evals=max_evals)


@dataclass(frozen=True)
class SeriesSum:
    value: float | complex | None
    terms: int
    status: str          # converged | divergent | null | not-converged
    last_term: float

    def to_json(self) -> dict:
        return {"value": self.value, "terms": self.terms, "status": self.status,
                "last_term": self.last_term}


def _phi(n: int) -> float:
    return (-1.0) ** n / math.factorial(n)


def sum_series_numeric(series, param_values: Mapping[Symbol, float] | None = None,
                       variable_values: Mapping[str, float] | None = None,
                       max_terms: int = 200, tol: float = 1e-14) -> SeriesSum:
    """Sum a bracket-free series numerically, shell by shell in total degree.

    A series whose every term hits a gamma pole is reported ``divergent``;
    one whose every term vanishes is ``null``.
    """
    if series.brackets:
        raise ValueError("numeric summation needs a series without brackets")
    param_values = dict(param_values or {})
    variable_values = dict(variable_values or {})
    missing = {s.name for s in series.coefficient.symbols
               if s not in series.indices and s not in param_values}
    for _, e in series.exponents:
        missing |= {s.name for s in e.symbols if s not in series.indices and s not in param_values}
    missing |= {v for v, _ in series.exponents if v not in variable_values}
    if missing:
        raise KeyError(f"unbound symbols {sorted(missing)}")

    r = len(series.indices)
    total = 0.0
    n_terms = 0
    n_div = n_zero = 0
    small_run = 0
    last = float("inf")
    for degree in range(max_terms):
        shell = 0.0
        for combo in product(range(degree + 1), repeat=r):
            if sum(combo) != degree:
                continue
            vals = dict(param_values)
            vals.update({n: float(k) for n, k in zip(series.indices, combo)})
            c = gamma_eval_numeric(series.coefficient, {s: complex(x) for s, x in vals.items()})
            n_terms += 1
            if c is DIVERGENT:
                n_div += 1
                continue
            if c == 0:
                n_zero += 1
                continue
            term = c
            for k in combo:
                term *= _phi(k)
            for v, e in series.exponents:
                term *= complex(variable_values[v]) ** e.evaluate({s: complex(x) for s, x in vals.items()})
            shell += term
        if r == 0:
            total = shell
            break
        total += shell
        last = abs(shell)
        if n_terms >= 3 and n_div == n_terms:
            return SeriesSum(None, n_terms, "divergent", float("inf"))
        if n_terms >= 3 and n_zero == n_terms:
            return SeriesSum(0.0, n_terms, "null", 0.0)
        if n_terms > n_div + n_zero and last <= tol * max(abs(total), 1e-300):
            small_run += 1
            if small_run >= 3:
                break
        else:
            small_run = 0
    if n_div:
        return SeriesSum(None, n_terms, "divergent", float("inf"))
    value = total.real if isinstance(total, complex) and total.imag == 0 else total
    status = "converged" if (r == 0 or small_run >= 3) else "not-converged"
    return SeriesSum(value, n_terms, status, float(last))


def mellin_moment(f, s: float, tol: float = 1e-11) -> QuadratureResult:
    """int_0^inf xi^{s-1} f(xi) dxi."""
    def g(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        ok = x > 0
        out[ok] = x[ok] ** (s - 1.0) * f(x[ok])
        return out

    return quad(g, 0.0, math.inf, tol=tol, rel_tol=tol)


def k0_cosine_integral(x: float, pieces: int = 60, tol: float = 1e-13) -> float:
    """K0(x) = int_0^inf cos(x t)/sqrt(t^2+1) dt by half-period pieces and Wynn extrapolation."""
    if x <= 0:
        raise ValueError("x must be positive")
    f = lambda t: np.cos(x * t) / np.sqrt(t * t + 1.0)
    zeros = [0.0] + [(k + 0.5) * math.pi / x for k in range(pieces)]
    partial = []
    acc = 0.0
    for a, b in zip(zeros[:-1], zeros[1:]):
        acc += quad(f, a, b, tol=tol).value
        partial.append(acc)
    return wynn_epsilon(partial)


def ei_integral(x: float, tol: float = 1e-13) -> float:
    """Ei(-x) = -int_x^inf exp(-t)/t dt."""
    return -quad(lambda t: np.exp(-t) / t, x, math.inf, tol=tol, rel_tol=tol).value


def mb_contour_numeric(bi, xi: float, c: float, tol: float = 1e-10) -> complex:
    """(1/2 pi i) int_{c - i inf}^{c + i inf} integrand(s) xi^{e(s)} ds for a one-contour integral."""
    if len(bi.contour_vars) != 1 or bi.brackets or bi.residual_indices:
        raise ValueError("numeric contour evaluation needs a plain one-variable integral")
    var = bi.contour_vars[0]
    (hook, e), = bi.exponents

    def g(y):
        y = np.atleast_1d(y)
        out = np.empty(y.shape, dtype=complex)
        for k, yk in enumerate(y):
            s = complex(c, yk)
            m = gamma_eval_numeric(bi.integrand, {var: s})
            out[k] = m * xi ** e.evaluate({var: s})
        return out

    res = quad(g, -math.inf, math.inf, tol=tol)
    return res.value / (2.0 * math.pi)
