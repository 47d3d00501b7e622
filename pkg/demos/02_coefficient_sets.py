"""Build the coefficient functions for a separable family and check them exactly.

Given a profile (m1, n1, m2, n2) and a family (A, B, C, P), the coefficient set
supplies the functions p1, p2, q1, q2, r1, r2, E, F, G of (x1, x2).  They
satisfy a small system of identities, and that system is checked here with
rational arithmetic, so every residual is exactly zero.
"""

from fractions import Fraction

from kowtype import ExponentProfile, modal_family, thm1_coefficients
from kowtype.closed_forms import modal_coefficients
from kowtype.theorem import MINUS, PLUS, verify_coefficient_system, verify_E_quadratic

g2, g3 = Fraction(3, 10), Fraction(1, 5)
fam = modal_family(g2, g3)
profile = ExponentProfile(2, 0, 2, 0)
x1, x2 = Fraction(3, 2), Fraction(-2, 7)

for branch in (PLUS, MINUS):
    cs = thm1_coefficients(profile, fam.A, fam.C, fam.P, B=fam.B, branch=branch)
    res = verify_coefficient_system(cs, x1, x2)
    print(f"branch {branch}: residuals {[str(r) for r in res]}, quadratic in E: {verify_E_quadratic(cs, fam.C, x1, x2)}")
    t = cs.table(x1, x2)
    print("   " + "  ".join(f"{k}={v}" for k, v in t.items() if k in ("E", "F", "G")))

# The same functions written out in closed form for the modal family.
cs = thm1_coefficients(profile, fam.A, fam.C, fam.P, B=fam.B, branch=PLUS)
closed = modal_coefficients(g2, g3)(x1, x2)
print("\nclosed form agrees with the generic construction:", closed == cs.table(x1, x2))

# The relations r^2, r*gamma3, gamma3^2 as functions of (x1, x2, e1, e2).
e1, e2 = Fraction(1, 3), Fraction(4)
rr, rg, gg = cs.relations(x1, x2, e1, e2)
print(f"at e1={e1}, e2={e2}:  r^2 = {rr},  r*gamma3 = {rg},  gamma3^2 = {gg}")
print("and (r*gamma3)^2 - r^2 * gamma3^2 =", rg * rg - rr * gg)
