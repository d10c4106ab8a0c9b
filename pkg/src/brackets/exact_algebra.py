"""Exact substrate for the bracket calculus.

Rationals are :class:`fractions.Fraction` throughout.  The two value types are

* :class:`AffineForm` -- ``c_1*s_1 + ... + c_k*s_k + c_0`` over named symbols,
  used for every bracket argument, exponent and gamma argument;
* :class:`GammaExpr` -- a product ``sign * constant * prod Gamma(a_i)^{k_i}
  * prod p_j^{e_j} * prod (l_m)^{r_m}`` kept in a canonical form so that
  structural equality is semantic equality for everything the rules produce.

Both are immutable and hashable.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Union

import numpy as np

from .numerics.special import loggamma

Number = Union[int, Fraction]


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {value!r}")


def fraction_to_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class SymbolKind(str, Enum):
    INDEX = "index"
    PARAMETER = "parameter"
    CONTOUR = "contour"


@dataclass(frozen=True, order=True)
class Symbol:
    name: str
    kind: SymbolKind = SymbolKind.PARAMETER

    def form(self) -> "AffineForm":
        return AffineForm.of(self)

    # arithmetic promotes to AffineForm
    def __add__(self, other):
        return self.form() + other

    __radd__ = __add__

    def __sub__(self, other):
        return self.form() - other

    def __rsub__(self, other):
        return -self.form() + other

    def __neg__(self):
        return -self.form()

    def __mul__(self, other):
        return self.form() * other

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self.form() / other

    def __str__(self):
        return self.name


def index(name: str) -> Symbol:
    return Symbol(name, SymbolKind.INDEX)


def param(name: str) -> Symbol:
    return Symbol(name, SymbolKind.PARAMETER)


def contour(name: str) -> Symbol:
    return Symbol(name, SymbolKind.CONTOUR)


class CyclicSubstitution(ValueError):
    pass


@dataclass(frozen=True)
class AffineForm:
    """Affine combination of symbols with rational coefficients.

    ``terms`` is a tuple of ``(Symbol, Fraction)`` pairs sorted by symbol with
    no zero coefficients, so dataclass equality is mathematical equality.
    """

    terms: tuple = ()
    constant: Fraction = Fraction(0)

    @staticmethod
    def build(mapping: Mapping[Symbol, Number] | Iterable = (), constant: Number = 0) -> "AffineForm":
        acc: dict[Symbol, Fraction] = {}
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        for sym, c in items:
            acc[sym] = acc.get(sym, Fraction(0)) + as_fraction(c)
        terms = tuple(sorted((s, c) for s, c in acc.items() if c != 0))
        return AffineForm(terms, as_fraction(constant))

    @staticmethod
    def of(value) -> "AffineForm":
        if isinstance(value, AffineForm):
            return value
        if isinstance(value, Symbol):
            return AffineForm(((value, Fraction(1)),), Fraction(0))
        return AffineForm((), as_fraction(value))

    @property
    def coefficients(self) -> dict[Symbol, Fraction]:
        return dict(self.terms)

    @property
    def symbols(self) -> tuple[Symbol, ...]:
        return tuple(s for s, _ in self.terms)

    def coeff(self, sym: Symbol) -> Fraction:
        for s, c in self.terms:
            if s == sym:
                return c
        return Fraction(0)

    def is_constant(self) -> bool:
        return not self.terms

    def is_zero(self) -> bool:
        return not self.terms and self.constant == 0

    def depends_on(self, kinds: Iterable[SymbolKind]) -> bool:
        kinds = set(kinds)
        return any(s.kind in kinds for s, _ in self.terms)

    def without_constant(self) -> "AffineForm":
        return AffineForm(self.terms, Fraction(0))

    def drop(self, sym: Symbol) -> "AffineForm":
        return AffineForm(tuple((s, c) for s, c in self.terms if s != sym), self.constant)

    def __add__(self, other):
        other = AffineForm.of(other)
        return AffineForm.build(list(self.terms) + list(other.terms),
                                self.constant + other.constant)

    __radd__ = __add__

    def __neg__(self):
        return AffineForm(tuple((s, -c) for s, c in self.terms), -self.constant)

    def __sub__(self, other):
        return self + (-AffineForm.of(other))

    def __rsub__(self, other):
        return AffineForm.of(other) - self

    def __mul__(self, k):
        if isinstance(k, (AffineForm, Symbol)):
            k = AffineForm.of(k)
            if not k.is_constant():
                raise TypeError("product of two non-constant affine forms is not affine")
            k = k.constant
        k = as_fraction(k)
        if k == 0:
            return AffineForm()
        return AffineForm(tuple((s, c * k) for s, c in self.terms), self.constant * k)

    __rmul__ = __mul__

    def __truediv__(self, k):
        return self * (1 / as_fraction(k))

    def substitute(self, bindings: Mapping[Symbol, "AffineForm"]) -> "AffineForm":
        return affine_substitute(self, bindings)

    def sort_key(self):
        return (tuple((s.name, s.kind.value) for s, _ in self.terms),
                tuple(c for _, c in self.terms), self.constant)

    def evaluate(self, values: Mapping[Symbol, complex]) -> complex:
        total = complex(self.constant)
        for s, c in self.terms:
            if s not in values:
                raise KeyError(f"unbound symbol {s.name}")
            total += float(c) * values[s]
        return total

    def __str__(self):
        parts = []
        for s, c in self.terms:
            mag = abs(c)
            text = s.name
            if mag.numerator != 1:
                text = f"{mag.numerator}*{text}"
            if mag.denominator != 1:
                text = f"{text}/{mag.denominator}"
            parts.append(("-" if c < 0 else "+", text))
        if self.constant != 0 or not parts:
            parts.append(("-" if self.constant < 0 else "+", fraction_to_str(abs(self.constant))))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, text in parts[1:]:
            out += f" {sign} {text}"
        return out

    def to_json(self) -> dict:
        return {
            "terms": [{"symbol": s.name, "kind": s.kind.value, "coeff": fraction_to_str(c)}
                      for s, c in self.terms],
            "constant": fraction_to_str(self.constant),
        }

    @staticmethod
    def from_json(data: dict) -> "AffineForm":
        return AffineForm.build(
            [(Symbol(t["symbol"], SymbolKind(t["kind"])), Fraction(t["coeff"])) for t in data["terms"]],
            Fraction(data["constant"]),
        )


def affine_substitute(f: AffineForm, bindings: Mapping[Symbol, AffineForm]) -> AffineForm:
    """Replace bound symbols in ``f`` and collect like terms."""
    bindings = {s: AffineForm.of(v) for s, v in bindings.items()}
    for repl in bindings.values():
        for s in repl.symbols:
            if s in bindings:
                raise CyclicSubstitution(f"symbol {s.name} is bound and also used in a replacement")
    out = AffineForm((), f.constant)
    for s, c in f.terms:
        out = out + (bindings[s] * c if s in bindings else AffineForm(((s, c),)))
    return out


# ---------------------------------------------------------------------------
# gamma products


def _factor_int(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _floor(q: Fraction) -> int:
    return q.numerator // q.denominator


class _Divergent:
    """Marker returned by numeric evaluation when a gamma pole is hit."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "DIVERGENT"

    def __bool__(self):
        return False


DIVERGENT = _Divergent()


@dataclass(frozen=True)
class GammaExpr:
    """Product of gamma factors, rational powers and linear factors.

    Construct through :func:`gamma_factor`, :func:`power_factor`,
    :func:`linear_factor`, :func:`constant` and multiplication; those always
    return canonical values.  Calling the constructor directly is allowed
    but the result is only canonical after :func:`gamma_simplify`.
    """

    sign: int = 1
    constant: Fraction = Fraction(1)
    gammas: tuple = ()     # (AffineForm, int)
    powers: tuple = ()     # (Fraction base > 0, AffineForm exponent)
    linears: tuple = ()    # (AffineForm, int)

    def __mul__(self, other):
        if not isinstance(other, GammaExpr):
            other = constant(other)
        return gamma_simplify(GammaExpr(
            self.sign * other.sign, self.constant * other.constant,
            self.gammas + other.gammas, self.powers + other.powers,
            self.linears + other.linears))

    __rmul__ = __mul__

    def inverse(self) -> "GammaExpr":
        if self.constant == 0:
            raise ZeroDivisionError("inverse of zero gamma expression")
        return gamma_simplify(GammaExpr(
            self.sign, 1 / self.constant,
            tuple((a, -k) for a, k in self.gammas),
            tuple((b, -e) for b, e in self.powers),
            tuple((f, -k) for f, k in self.linears)))

    def __truediv__(self, other):
        if not isinstance(other, GammaExpr):
            other = constant(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return constant(other) * self.inverse()

    def __neg__(self):
        return gamma_simplify(GammaExpr(-self.sign, self.constant, self.gammas, self.powers, self.linears))

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("only integer powers of gamma expressions are supported")
        if k < 0:
            return self.inverse() ** (-k)
        return gamma_simplify(GammaExpr(
            self.sign ** k, self.constant ** k,
            tuple((a, p * k) for a, p in self.gammas),
            tuple((b, e * k) for b, e in self.powers),
            tuple((f, p * k) for f, p in self.linears)))

    def substitute(self, bindings: Mapping[Symbol, AffineForm]) -> "GammaExpr":
        return gamma_simplify(GammaExpr(
            self.sign, self.constant,
            tuple((affine_substitute(a, bindings), k) for a, k in self.gammas),
            tuple((b, affine_substitute(e, bindings)) for b, e in self.powers),
            tuple((affine_substitute(f, bindings), k) for f, k in self.linears)))

    @property
    def symbols(self) -> set[Symbol]:
        out: set[Symbol] = set()
        for a, _ in self.gammas:
            out.update(a.symbols)
        for _, e in self.powers:
            out.update(e.symbols)
        for f, _ in self.linears:
            out.update(f.symbols)
        return out

    def is_zero(self) -> bool:
        return self.constant == 0

    def is_divergent(self) -> bool:
        """True when some factor is infinite for every parameter value."""
        return (any(a.is_zero() and k > 0 for a, k in self.gammas)
                or any(f.is_zero() and k < 0 for f, k in self.linears))

    def gamma_power(self, arg: AffineForm) -> int:
        for a, k in self.gammas:
            if a == arg:
                return k
        return 0

    def __str__(self):
        head = fraction_to_str(self.constant)
        parts = []
        if self.constant != 1 or not (self.gammas or self.powers or self.linears):
            parts.append(head)
        for a, k in self.gammas:
            parts.append(f"Gamma({a})" + (f"^{k}" if k != 1 else ""))
        for b, e in self.powers:
            parts.append(f"{fraction_to_str(b)}^({e})")
        for f, k in self.linears:
            parts.append(f"({f})" + (f"^{k}" if k != 1 else ""))
        return ("-" if self.sign < 0 else "") + " * ".join(parts)

    def to_json(self) -> dict:
        return {
            "sign": self.sign,
            "constant": fraction_to_str(self.constant),
            "gamma": [{"arg": a.to_json(), "power": k} for a, k in self.gammas],
            "powers": [{"base": fraction_to_str(b), "exponent": e.to_json()} for b, e in self.powers],
            "linear": [{"form": f.to_json(), "power": k} for f, k in self.linears],
        }

    @staticmethod
    def from_json(data: dict) -> "GammaExpr":
        return GammaExpr(
            int(data["sign"]), Fraction(data["constant"]),
            tuple((AffineForm.from_json(g["arg"]), int(g["power"])) for g in data["gamma"]),
            tuple((Fraction(p["base"]), AffineForm.from_json(p["exponent"])) for p in data["powers"]),
            tuple((AffineForm.from_json(lf["form"]), int(lf["power"])) for lf in data["linear"]),
        )


ONE = GammaExpr()


def constant(q: Number) -> GammaExpr:
    return gamma_simplify(GammaExpr(1, as_fraction(q)))


def gamma_factor(arg, power: int = 1) -> GammaExpr:
    return gamma_simplify(GammaExpr(gammas=((AffineForm.of(arg), power),)))


def power_factor(base: Number, exponent) -> GammaExpr:
    """``base ** exponent`` for a positive rational base."""
    return gamma_simplify(GammaExpr(powers=((as_fraction(base), AffineForm.of(exponent)),)))


def linear_factor(form, power: int = 1) -> GammaExpr:
    return gamma_simplify(GammaExpr(linears=((AffineForm.of(form), power),)))


def gamma_simplify(e: GammaExpr) -> GammaExpr:
    """Canonical form of a gamma product.

    Gamma arguments are shifted by integers, via Gamma(x+1) = x Gamma(x), to the
    representative whose constant lies in [0, 1); positive-integer constants
    collapse to factorials and every pole is expressed through Gamma(0).
    Linear factors are scaled to leading coefficient 1, constant linear
    factors fold into the rational constant, and power bases are split into
    primes with integer parts of exponents folded into the constant.
    """
    sign = e.sign
    const = e.constant
    if const < 0:
        sign, const = -sign, -const
    if const == 0:
        return GammaExpr(1, Fraction(0))

    gammas: dict[AffineForm, int] = {}
    linears_raw: list[tuple[AffineForm, int]] = list(e.linears)

    for arg, k in e.gammas:
        if k == 0:
            continue
        shift = _floor(arg.constant)
        base = arg - shift
        if arg.is_constant() and arg.constant.denominator == 1 and shift >= 1:
            const *= Fraction(math.factorial(shift - 1)) ** k
            continue
        gammas[base] = gammas.get(base, 0) + k
        if shift > 0:
            for j in range(shift):
                linears_raw.append((base + j, k))
        elif shift < 0:
            for j in range(1, -shift + 1):
                linears_raw.append((base - j, -k))

    linears: dict[AffineForm, int] = {}
    for form, k in linears_raw:
        if k == 0:
            continue
        if form.is_constant():
            c = form.constant
            if c == 0:
                if k > 0:
                    return GammaExpr(1, Fraction(0))
                linears[form] = linears.get(form, 0) + k
                continue
            if c < 0 and k % 2:
                sign = -sign
            const *= abs(c) ** k
            continue
        lead = form.terms[0][1]
        if lead < 0 and k % 2:
            sign = -sign
        const *= abs(lead) ** k
        norm = form / lead
        linears[norm] = linears.get(norm, 0) + k

    powers: dict[int, AffineForm] = {}
    for b, expo in e.powers:
        b = as_fraction(b)
        if b <= 0:
            raise ValueError("power factor base must be a positive rational")
        for p, m in _factor_int(b.numerator).items():
            powers[p] = powers.get(p, AffineForm()) + expo * m
        for p, m in _factor_int(b.denominator).items():
            powers[p] = powers.get(p, AffineForm()) - expo * m
    final_powers = []
    for p, expo in powers.items():
        ip = _floor(expo.constant)
        if ip:
            const *= Fraction(p) ** ip
            expo = expo - ip
        if not expo.is_zero():
            final_powers.append((Fraction(p), expo))

    return GammaExpr(
        sign, const,
        tuple(sorted(((a, k) for a, k in gammas.items() if k), key=lambda t: (t[0].sort_key(), t[1]))),
        tuple(sorted(final_powers, key=lambda t: (t[0], t[1].sort_key()))),
        tuple(sorted(((f, k) for f, k in linears.items() if k), key=lambda t: (t[0].sort_key(), t[1]))),
    )


def _nonpositive_integer(z: complex) -> bool:
    return z.imag == 0 and z.real <= 0 and z.real == round(z.real)


def gamma_eval_numeric(e: GammaExpr, values: Mapping[Symbol, complex] | None = None):
    """Evaluate ``e`` in floating point; returns a complex number or DIVERGENT.

    Gamma factors are combined in log space so that large intermediate
    gammas do not overflow when the product is representable.
    """
    values = {} if values is None else values
    if e.constant == 0:
        return 0j
    log_total = 0j
    zero = divergent = False
    for arg, k in e.gammas:
        z = arg.evaluate(values)
        if _nonpositive_integer(z):
            if k > 0:
                divergent = True
            else:
                zero = True
            continue
        log_total += k * complex(loggamma(z))
    for f, k in e.linears:
        z = f.evaluate(values)
        if z == 0:
            if k < 0:
                divergent = True
            else:
                zero = True
            continue
        log_total += k * cmath.log(z)
    for b, expo in e.powers:
        log_total += expo.evaluate(values) * math.log(b)
    if divergent:
        return DIVERGENT
    if zero:
        return 0j
    value = e.sign * float(e.constant) * cmath.exp(log_total)
    if all(np.isreal(v) for v in values.values()):
        value = complex(value.real, 0.0)
    return value
