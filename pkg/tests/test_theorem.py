import random
from fractions import Fraction

import pytest

from kowtype.closed_forms import cubic_coefficients, modal_coefficients
from kowtype.errors import EvaluationAtSingularLocus
from kowtype.families import cubic_family, modal_family
from kowtype.poly import BiPoly
from kowtype.theorem import (
    MINUS,
    PLUS,
    BFunction,
    ExponentProfile,
    thm1_coefficients,
    verify_coefficient_system,
    verify_E_quadratic,
)

KEYS = ("p1", "p2", "q1", "q2", "r1", "r2", "E", "F", "G")


def _points(seed, n=100):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        x1 = Fraction(rng.randint(-30, 30), rng.randint(1, 7))
        x2 = Fraction(rng.randint(-30, 30), rng.randint(1, 7))
        if x1 and x2 and x1 != x2 and x1 != -x2:
            out.append((x1, x2))
    return out


def _modal(g2=0, g3=0, branch=PLUS):
    fam = modal_family(g2, g3)
    return fam, thm1_coefficients((2, 0, 2, 0), fam.A, fam.C, fam.P, B=fam.B, branch=branch)


def _cubic(a=0, b=0, c=0, branch=MINUS):
    fam = cubic_family(a, b, c)
    return fam, thm1_coefficients((1, 0, 1, 0), fam.A, fam.C, fam.P, B=fam.B, branch=branch)


def test_profile_hypothesis():
    with pytest.raises(ValueError):
        ExponentProfile(1, 1, 2, 2)
    ExponentProfile(1, 1, 2, 0)


def test_modal_examples_at_1_2():
    _, cs = _modal()
    assert cs.p1(1, 2) == Fraction(1, 9)
    assert cs.E(1, 2) == Fraction(2, 3)


def test_cubic_example_at_1_2():
    _, cs = _cubic()
    assert cs.E(1, 2) == 6


def test_singular_locus():
    _, cs = _modal()
    with pytest.raises(EvaluationAtSingularLocus):
        cs.p1(1, -1)
    _, cs = _cubic()
    with pytest.raises(EvaluationAtSingularLocus):
        cs.E(2, 2)


@pytest.mark.parametrize("branch", [PLUS, MINUS])
def test_modal_six_equations_vanish(branch):
    fam, cs = _modal(Fraction(3, 10), Fraction(-4, 3), branch)
    for x1, x2 in _points(1):
        assert all(r == 0 for r in verify_coefficient_system(cs, x1, x2))
        assert verify_E_quadratic(cs, fam.C, x1, x2) == 0


@pytest.mark.parametrize("branch", [PLUS, MINUS])
def test_cubic_six_equations_vanish(branch):
    fam, cs = _cubic(Fraction(1, 2), Fraction(-3), Fraction(5, 4), branch)
    for x1, x2 in _points(2):
        assert all(r == 0 for r in verify_coefficient_system(cs, x1, x2))
        assert verify_E_quadratic(cs, fam.C, x1, x2) == 0


def test_q_squared_is_p_times_r():
    _, cs = _modal(Fraction(1, 3), Fraction(2))
    for x1, x2 in _points(3, 30):
        t = cs.table(x1, x2)
        assert t["q1"] ** 2 == t["p1"] * t["r1"]
        assert t["q2"] ** 2 == t["p2"] * t["r2"]


def test_branches_differ_where_B_nonzero():
    _, plus = _modal(Fraction(1), Fraction(1), PLUS)
    _, minus = _modal(Fraction(1), Fraction(1), MINUS)
    assert plus.E(1, 2) != minus.E(1, 2)


def test_displayed_and_solved_F_G_agree():
    _, cs = _cubic(Fraction(2), Fraction(1), Fraction(-1), PLUS)
    for x1, x2 in _points(4, 30):
        assert cs.F(x1, x2) == cs.F_solved(x1, x2)
        assert cs.G(x1, x2) == cs.G_solved(x1, x2)


def test_modal_closed_form():
    g2, g3 = Fraction(7, 5), Fraction(-1, 3)
    _, cs = _modal(g2, g3)
    closed = modal_coefficients(g2, g3)
    for x1, x2 in _points(5):
        t, ref = cs.table(x1, x2), closed(x1, x2)
        assert all(t[k] == ref[k] for k in KEYS)


def test_modal_closed_form_with_opposite_g3_sign_disagrees():
    g2, g3 = Fraction(7, 5), Fraction(-1, 3)
    _, cs = _modal(g2, g3)
    wrong = modal_coefficients(g2, g3, variant=True)
    assert cs.G(1, 2) != wrong(1, 2)["G"]
    assert cs.G(1, 2) - wrong(1, 2)["G"] == -g3


@pytest.mark.parametrize("branch", ["minus", "plus"])
def test_cubic_closed_forms(branch):
    a, b, c = Fraction(3, 2), Fraction(-2, 3), Fraction(5)
    _, cs = _cubic(a, b, c, MINUS if branch == "minus" else PLUS)
    closed = cubic_coefficients(a, b, c, branch)
    for x1, x2 in _points(6):
        t, ref = cs.table(x1, x2), closed(x1, x2)
        assert all(t[k] == ref[k] for k in KEYS)


def test_cubic_F2_variant_disagrees():
    a, b, c = Fraction(3, 2), Fraction(-2, 3), Fraction(5)
    _, cs = _cubic(a, b, c, PLUS)
    assert cs.F(1, 2) != cubic_coefficients(a, b, c, "plus", variant=True)(1, 2)["F"]


def test_zero_A_reduces_equations():
    # A = 0 makes the first and fourth equations read 0 = 0 at any coefficients
    fam = modal_family()
    zero = BiPoly.zero()
    cs = thm1_coefficients((2, 0, 2, 0), zero, fam.C, fam.P, B=fam.B)
    res = verify_coefficient_system(cs, Fraction(1), Fraction(2))
    assert res[0] == 0 and res[3] == 0


def test_sqrt_B_function():
    fam = modal_family()
    B = BFunction.from_sqrt(fam.A, fam.C, fam.P)
    v = B(Fraction(1), Fraction(2))
    assert v**2 == 4 * fam.A(1, 2) * fam.C(1, 2) + 4 * fam.P(1) * fam.P(2)


def test_relations_reproduce_modal_display():
    g2, g3 = Fraction(1, 2), Fraction(1, 3)
    _, cs = _modal(g2, g3)
    x1, x2, e1, e2 = Fraction(1), Fraction(2), Fraction(5), Fraction(-1)
    r2, rg, gg = cs.relations(x1, x2, e1, e2)
    S = x1 + x2
    assert r2 == 2 / S + (e1 + e2) / S**2
    assert rg == (4 * x1 * x2 - g2) / (4 * S) - (x2**2 * e1 + x1**2 * e2) / S**2
    assert gg == -x1 * x2 * g2 / (2 * S) + (x2**4 * e1 + x1**4 * e2) / S**2 - g3 / 2
