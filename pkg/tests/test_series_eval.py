import itertools
import json
import random
from fractions import Fraction

import pytest

from brackets.bracket_core import Bracket, BracketError, BracketSeries, canonical_labels, rescale_bracket
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
from brackets.pipelines import ALPHA, BETA, bracket_form, expected_closed_form
from brackets.representations import XI, fixture_rep_Ei
from brackets.series_eval import (
    LinearSystem,
    NoAssignment,
    bareiss,
    determinant,
    eliminate_sequence,
    partial_eliminate,
    rule_E1,
    rule_E2,
    rule_E3_enumerate,
    series_value,
)
from brackets.trace import Context

HALF = Fraction(1, 2)
n, m, l, k, i, j = (index(c) for c in "nmlkij")
xi = param("xi")


def cofactor_det(a):
    """Laplace expansion along the first row; independent of the solver."""
    size = len(a)
    if size == 1:
        return Fraction(a[0][0])
    total = Fraction(0)
    for col in range(size):
        minor = [row[:col] + row[col + 1:] for row in a[1:]]
        total += (-1) ** col * Fraction(a[0][col]) * cofactor_det(minor)
    return total


# --- E1 ---------------------------------------------------------------------

def test_E1_gamma_bracket_series():
    s = BracketSeries((n,), constant(1), {}, (Bracket(xi + n),))
    assert rule_E1(s).expr == gamma_factor(xi)


def test_E1_binomial_degenerate_case():
    a, c = Fraction(3, 7), param("c")
    s = BracketSeries((n,), power_factor(a, n) * gamma_factor(-c.form(), -1), {}, (Bracket(n - c),))
    assert rule_E1(s).expr == power_factor(a, c)


def test_E1_on_contour_first_route():
    bi = bracket_form("mixed-mb-divergent")
    from brackets.mellin_barnes import rule_E4

    s = rule_E4(bi, bi.contour_vars[0], bi.brackets[0])
    lx = s.indices[0]
    s = rescale_bracket(s, 0, lx)
    assert s.brackets[0].arg.coeff(lx) == 1
    assert s.brackets[0].arg.drop(lx) == (ALPHA + BETA) / 3
    assert rule_E1(s).expr == expected_closed_form()


def test_E1_preconditions():
    with pytest.raises(BracketError):
        rule_E1(BracketSeries((n, m), constant(1), {}, (Bracket(n + m),)))
    with pytest.raises(BracketError):
        rule_E1(BracketSeries((n,), constant(1), {"x": n.form()}, (Bracket(n + 1),)))


def test_E1_reads_gamma_at_the_solution():
    s = BracketSeries((n,), constant(1), {}, (Bracket(2 * n + 3),))
    # n* = -3/2, so the value is (1/2) Gamma(3/2)
    assert rule_E1(s).expr == constant(HALF) * gamma_factor(Fraction(3, 2))


# --- E2 -----------------------------------------------------------------------

def test_E2_five_by_five():
    s = bracket_form("direct3")
    assert len(s.indices) == 5 and len(s.brackets) == 5
    cf = rule_E2(s)
    assert cf.expr == expected_closed_form()
    assert cf.solution.abs_det == 6
    assert cofactor_det(cf.system.matrix) == cf.solution.determinant
    b = {u.name[0]: v for u, v in cf.solution.bindings.items()}
    assert b["i"] == b["k"] == -(ALPHA + BETA) / 3
    assert b["n"] == b["l"] == -(ALPHA - 2 * BETA) / 6
    assert b["m"] == (ALPHA - 2 * BETA) / 6 - HALF
    for br in s.brackets:
        assert br.arg.substitute(cf.solution.bindings).is_zero()


def test_E2_two_by_two_divergent_forms():
    s = bracket_form("divergent-divergent")
    lx, nx = s.indices
    assert set(s.brackets) == {Bracket(ALPHA + 2 * lx + 2 * nx), Bracket(BETA + lx - 2 * nx)}
    assert rule_E2(s).expr == expected_closed_form()


def test_E2_singular_raises_with_system():
    s = BracketSeries((n, m), constant(1), {}, (Bracket(n + m), Bracket(2 * n + 2 * m - 1)))
    with pytest.raises(NoAssignment) as err:
        rule_E2(s)
    assert err.value.system is not None


def test_E2_rejects_rectangular():
    with pytest.raises(BracketError):
        rule_E2(BracketSeries((n, m), constant(1), {}, (Bracket(n + m),)))


def test_E2_equals_E1_on_one_by_one_instances():
    rng = random.Random(11)
    for _ in range(60):
        a = Fraction(rng.choice([-4, -3, -2, -1, 1, 2, 3]), rng.randint(1, 3))
        c = AffineForm.build({ALPHA: Fraction(rng.randint(-3, 3), 2)}, Fraction(rng.randint(-4, 4), 3))
        coeff = gamma_factor(n + BETA, rng.choice([1, 2])) * power_factor(rng.choice([2, 3, 5]), n)
        s = BracketSeries((n,), coeff, {}, (Bracket(a * n + c),))
        assert rule_E2(s) == rule_E1(s)
        assert rule_E2(s).expr == rule_E1(s).expr


# --- Bareiss ---------------------------------------------------------------------

def test_bareiss_against_cofactor_on_random_systems():
    rng = random.Random(2024)
    params = [ALPHA, BETA]
    checked = 0
    while checked < 200:
        size = rng.randint(1, 4)
        mat = [[Fraction(rng.randint(-3, 3)) for _ in range(size)] for _ in range(size)]
        ref = cofactor_det(mat)
        if ref == 0:
            assert determinant(mat) == 0
            continue
        rhs = [AffineForm.build({p: rng.randint(-3, 3) for p in params}, Fraction(rng.randint(-5, 5), rng.randint(1, 3)))
               for _ in range(size)]
        det, sol = bareiss(mat, rhs)
        assert det == ref
        for row, r in zip(mat, rhs):
            lhs = AffineForm()
            for c, x in zip(row, sol):
                lhs = lhs + x * c
            assert lhs - r == AffineForm()
        checked += 1


def test_bareiss_rational_entries():
    mat = [[HALF, Fraction(1, 3)], [Fraction(2, 5), Fraction(-7, 4)]]
    assert determinant(mat) == cofactor_det(mat)


def test_linear_system_json():
    s = bracket_form("divergent-divergent")
    sysm = LinearSystem.from_brackets(s.brackets, s.indices)
    data = json.loads(json.dumps(sysm.to_json()))
    assert len(data["matrix"]) == 2 and data["unknowns"] == [u.name for u in s.indices]


# --- E3 --------------------------------------------------------------------------

def test_E3_two_index_one_bracket():
    c = param("c")
    coeff = gamma_factor(n + HALF) * power_factor(2, m)
    s = BracketSeries((n, m), coeff, {"x": n + m}, (Bracket(n + m - c),))
    cands = rule_E3_enumerate(s)
    assert [cd.free for cd in cands] == [(m,), (n,)]
    assert cands[0].solution.bindings[n] == c - m
    assert cands[1].solution.bindings[m] == c - n
    first = cands[0].series
    assert first.indices == (m,)
    assert first.coefficient == (gamma_factor(c - m + HALF) * power_factor(2, m)
                                 * gamma_factor(m - c))


def test_E3_negative_index_is_no_assignment():
    s = BracketSeries((n,), constant(1), {}, (Bracket(n + 1), Bracket(n - ALPHA)))
    with pytest.raises(NoAssignment):
        rule_E3_enumerate(s)


def test_E3_completeness_random():
    rng = random.Random(99)
    names = [index(f"u{q}") for q in range(5)]
    for _ in range(40):
        kk = rng.randint(2, 5)
        bb = rng.randint(1, kk - 1)
        idx = names[:kk]
        brackets = []
        for _ in range(bb):
            form = AffineForm.build({u: rng.randint(-2, 2) for u in idx}, Fraction(rng.randint(-3, 3), 2)) + ALPHA
            if not any(form.coeff(u) for u in idx):
                form = form + idx[0]
            brackets.append(Bracket(form))
        coeff = gamma_factor(idx[0] + BETA)
        for u in idx:
            coeff = coeff * power_factor(3, u)
        s = BracketSeries(tuple(idx), coeff, {}, tuple(brackets))
        expected = 0
        for subset in itertools.combinations(range(kk), bb):
            sub = [[b.arg.coeff(idx[c]) for c in subset] for b in brackets]
            if cofactor_det(sub) != 0:
                expected += 1
        cands = rule_E3_enumerate(s)
        assert len(cands) == expected
        for cd in cands:
            for b in brackets:
                assert b.arg.substitute(cd.solution.bindings).is_zero()


# --- partial elimination -----------------------------------------------------------

def test_partial_eliminate_exp_triple_series():
    triple = BracketSeries((i, j, k), -gamma_factor(1 - i, -1), {XI: k.form()},
                           (Bracket(1 - i + j + k), Bracket(j + 1)))
    out = partial_eliminate(triple, j, Bracket(j + 1))
    assert out.indices == (i, k)
    assert out.brackets == (Bracket(k - i),)
    assert out.coefficient == -gamma_factor(1 - i, -1)
    assert out.exponent(XI) == k.form()
    assert canonical_labels(out) == canonical_labels(fixture_rep_Ei(Context()))


def test_partial_eliminate_rejects_absent_target():
    s = BracketSeries((n, m), constant(1), {}, (Bracket(n + 1), Bracket(m + 2)))
    with pytest.raises(BracketError):
        partial_eliminate(s, m, Bracket(n + 1))


@pytest.mark.parametrize("pipeline", ["direct3", "mixed-bracketized-gamma", "divergent-null"])
def test_elimination_order_independence(pipeline):
    s = bracket_form(pipeline)
    reference = rule_E2(s).expr
    for order in itertools.permutations(s.indices):
        out = eliminate_sequence(s, order)
        assert series_value(out).expr == reference


def test_elimination_order_independence_random_instances():
    rng = random.Random(5)
    names = [index(f"v{q}") for q in range(3)]
    done = 0
    while done < 50:
        size = rng.randint(1, 3)
        idx = names[:size]
        mat = [[rng.randint(-2, 2) for _ in range(size)] for _ in range(size)]
        if cofactor_det(mat) == 0:
            continue
        brackets = tuple(Bracket(AffineForm.build(dict(zip(idx, row)), Fraction(rng.randint(-3, 3), 2))
                                 + ALPHA * rng.randint(-1, 1) + BETA)
                         for row in mat)
        coeff = linear_factor(idx[0] + ALPHA, -1) * power_factor(2, idx[-1].form())
        for u in idx:
            coeff = coeff * gamma_factor(u + HALF)
        s = BracketSeries(tuple(idx), coeff, {}, brackets)
        reference = rule_E2(s).expr
        order = list(idx)
        rng.shuffle(order)
        assert series_value(eliminate_sequence(s, order)).expr == reference
        done += 1


def test_closed_form_value_sanity():
    cf = rule_E2(bracket_form("direct3"))
    v = gamma_eval_numeric(cf.expr, {ALPHA: 7, BETA: 2})
    assert abs(v.real + 3.141592653589793 / 9) < 1e-14
