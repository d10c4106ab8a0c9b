import json
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from brackets.bracket_core import (
    Bracket,
    BracketError,
    BracketSeries,
    FreshIndices,
    canonical_labels,
    complexity_index,
    lemma_rescale,
    monomial,
    relabel,
    rescale_bracket,
    rule_P1_integrate,
    rule_P2_multinomial,
    series_product,
    with_measure,
)
from brackets.exact_algebra import (
    AffineForm,
    constant,
    gamma_eval_numeric,
    gamma_factor,
    index,
    linear_factor,
    param,
    power_factor,
)
from brackets.representations import Kind, catalog_get, instantiate
from brackets.series_eval import rule_E1, rule_E2
from brackets.trace import Context

alpha, beta = param("alpha"), param("beta")
n, m, l, k, i, j = (index(c) for c in "nmlkij")
HALF = Fraction(1, 2)


def test_bracket_without_index_rejected():
    with pytest.raises(BracketError):
        Bracket(alpha + 1)


def test_index_must_appear():
    with pytest.raises(BracketError):
        BracketSeries((n,), constant(1), {}, (Bracket(m.form()),))


def test_duplicate_or_non_index_rejected():
    with pytest.raises(BracketError):
        BracketSeries((n, n), constant(1), {}, (Bracket(n.form()),))
    with pytest.raises(BracketError):
        BracketSeries((alpha,), constant(1), {}, (Bracket(n + alpha),))


# --- P1 ---------------------------------------------------------------------

def test_P1_moves_exponent_into_bracket():
    a, b = param("a"), param("b")
    s = BracketSeries((n,), constant(1), {"x": a * 0 + 3 * n + b}, ())
    out = rule_P1_integrate(s, "x")
    assert out.exponents == ()
    assert out.brackets == (Bracket(3 * n + b),)


def test_P1_on_integrand_exponents():
    s = BracketSeries((n, k), constant(1), {"x": alpha + 2 * n + 2 * k}, ())
    assert rule_P1_integrate(s, "x").brackets == (Bracket(alpha + 2 * n + 2 * k),)
    s = BracketSeries((l, m), constant(1), {"y": beta + l - 2 * m}, ())
    assert rule_P1_integrate(s, "y").brackets == (Bracket(beta + l - 2 * m),)


def test_P1_absent_variable_rejected():
    with pytest.raises(BracketError):
        rule_P1_integrate(BracketSeries((n,), constant(1), {"x": n.form()}, ()), "y")


def test_measure_adds_one_once():
    s = with_measure(monomial({"x": alpha - 1}), ["x"])
    assert s.exponent("x") == alpha.form()


# --- P2 ---------------------------------------------------------------------

def test_P2_square_root_expansion():
    s = rule_P2_multinomial([(1, {"t": 2}), (1, {})], -HALF, [m, l])
    assert s.indices == (m, l)
    assert s.exponent("t") == 2 * m
    assert s.brackets == (Bracket(m + l + HALF),)
    assert s.coefficient == gamma_factor(HALF, -1)


def test_P2_power_carrying_an_index():
    s = rule_P2_multinomial([(1, {"z": 1}), (1, {"xi": 1})], i - 1, [j, k])
    assert s.exponent("z") == j.form() and s.exponent("xi") == k.form()
    assert s.brackets == (Bracket(1 - i + j + k),)
    assert s.coefficient == gamma_factor(1 - i, -1)


def test_P2_rejects_empty():
    with pytest.raises(BracketError):
        rule_P2_multinomial([], alpha, [])


@pytest.mark.parametrize("a,c", [(3, Fraction(5, 2)), (Fraction(1, 2), Fraction(-1, 3)), (7, Fraction(4))])
def test_P2_single_term_then_E1_recovers_power(a, c):
    s = rule_P2_multinomial([(a, {})], c, [n])
    assert rule_E1(s).expr == power_factor(a, c)


def test_P2_single_term_symbolic_power():
    s = rule_P2_multinomial([(5, {})], alpha, [n])
    assert rule_E1(s).expr == power_factor(5, alpha)


# --- Lemma ----------------------------------------------------------------------

def test_lemma_examples():
    assert lemma_rescale(Bracket(2 * n + 2 * m + 1), n) == (Bracket(n + m + HALF), HALF)
    assert lemma_rescale(Bracket(beta + alpha + 3 * l), l) == (Bracket((alpha + beta) / 3 + l), Fraction(1, 3))
    assert lemma_rescale(Bracket(n.form()), n) == (Bracket(n.form()), 1)
    assert lemma_rescale(Bracket(-2 * n + 1), n) == (Bracket(n - HALF), HALF)


def test_lemma_zero_coefficient_rejected():
    with pytest.raises(BracketError):
        lemma_rescale(Bracket(n + 1), m)


def test_lemma_preserves_E1_value_at_random_points():
    rng = random.Random(7)
    for _ in range(100):
        a = Fraction(rng.choice([-3, -2, -1, 1, 2, 3, 5]), rng.randint(1, 4))
        c = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
        coeff = gamma_factor(n + alpha) * power_factor(3, n) * linear_factor(n + beta, -1)
        s = BracketSeries((n,), coeff, {}, (Bracket(a * n + c + alpha / 2),))
        before = rule_E1(s).expr
        after = rule_E1(rescale_bracket(s, 0, n)).expr
        pt = {alpha: complex(rng.uniform(0.1, 3)), beta: complex(rng.uniform(0.1, 3))}
        u, v = gamma_eval_numeric(before, pt), gamma_eval_numeric(after, pt)
        if before.is_divergent():
            assert after.is_divergent() and u is v
            continue
        assert abs(u - v) <= 1e-10 * abs(u)


# --- products and complexity -----------------------------------------------------

def test_product_identity_element():
    s = catalog_get("K0", Kind.DIVERGENT).series
    assert series_product(s, monomial({})) == s
    assert series_product(monomial({}), s) == s


def test_product_collision_rejected():
    s = catalog_get("K0", Kind.DIVERGENT).series
    with pytest.raises(BracketError):
        series_product(s, s)


def test_product_of_divergent_forms():
    ctx = Context()
    ei = instantiate(catalog_get("Ei", Kind.DIVERGENT, ctx), {"x": 2, "y": 1})
    k0 = instantiate(catalog_get("K0", Kind.DIVERGENT, ctx), {"x": 1, "y": -1})
    s = series_product(series_product(ei, k0), monomial({"x": alpha, "y": beta}))
    lx, nx = s.indices
    assert s.exponent("x") == alpha + 2 * lx + 2 * nx
    assert s.exponent("y") == beta + lx - 2 * nx
    expected = gamma_factor(-nx.form()) * power_factor(4, -nx.form()) * linear_factor(lx.form(), -1) * HALF
    assert s.coefficient == expected


def test_product_of_integral_representations_has_five_brackets_after_integration():
    ctx = Context()
    ei = instantiate(catalog_get("Ei", Kind.BRACKET2, ctx), {"x": 2, "y": 1})
    k0 = instantiate(catalog_get("K0", Kind.BRACKET3, ctx), {"x": 1, "y": -1})
    s = series_product(ei, k0)
    assert len(s.indices) == 5
    assert len(s.brackets) == 3
    full = with_measure(series_product(s, monomial({"x": alpha - 1, "y": beta - 1})), ["x", "y"])
    full = rule_P1_integrate(rule_P1_integrate(full, "x"), "y")
    assert complexity_index(full) == 0


def test_complexity_index_counts():
    assert complexity_index(BracketSeries((n,), gamma_factor(n.form()), {"x": n.form()}, ())) == 1
    assert complexity_index(BracketSeries((n,), constant(1), {}, (Bracket(n.form()), Bracket(n + 1)))) == -1


small = st.integers(-2, 2)


@st.composite
def small_series(draw, names):
    idx = [index(nm) for nm in names]
    exps = {"x": AffineForm.build({s: draw(small) for s in idx}, draw(small)) + idx[0]}
    nb = draw(st.integers(0, len(idx)))
    brackets = tuple(Bracket(AffineForm.build({s: draw(small) for s in idx[:-1]}, draw(small))
                             + idx[-1] * draw(st.integers(1, 3)))
                     for _ in range(nb))
    coeff = gamma_factor(idx[0] + alpha) * power_factor(2, idx[-1].form())
    return BracketSeries(tuple(idx), coeff, exps, brackets)


@given(small_series(["a1", "a2"]), small_series(["b1"]), small_series(["c1", "c2"]))
def test_product_associative_up_to_relabeling(a, b, c):
    left = series_product(series_product(a, b), c)
    right = series_product(a, series_product(b, c))
    assert canonical_labels(left) == canonical_labels(right)


@given(small_series(["a1", "a2"]), small_series(["b1", "b2"]))
def test_complexity_index_additive(a, b):
    assert complexity_index(series_product(a, b)) == complexity_index(a) + complexity_index(b)


def test_relabel_swaps_without_clobbering():
    s = BracketSeries((n, m), gamma_factor(n - m), {"x": n + 2 * m}, (Bracket(n + m + 1),))
    r = relabel(s, ["m", "n"])
    assert r.indices == (m, n)
    assert r.exponent("x") == m + 2 * n
    assert r.coefficient == gamma_factor(m - n)


def test_fresh_indices_monotone():
    f = FreshIndices()
    names = [f.fresh(h).name for h in "nmn"]
    assert names == ["n0", "m1", "n2"]


def test_series_json_round_trip():
    s = catalog_get("K0", Kind.BRACKET3).series
    assert BracketSeries.from_json(json.loads(json.dumps(s.to_json()))) == s
    assert rule_E2 is not None
