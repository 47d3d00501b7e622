"""Discriminant separability of the two standard families, in exact arithmetic.

For a polynomial F(x1, x2, s) that is quadratic in each variable, eliminating
one variable leaves a discriminant in the other two.  When every such
discriminant splits as a product of one-variable factors, F defines a
separable curve, and the factors tell you which polynomial carries the
separation.
"""

from fractions import Fraction

from kowtype import TriQuadPoly, check_separable, cubic_family, kowalevski_q, modal_family


def show(title, F):
    rep = check_separable(F)
    print(f"\n{title}")
    print(f"  separable: {rep.is_separable}   same factor in all slots: {rep.is_strong}")
    for var, entry in rep.entries.items():
        print(f"  D_{var}: {entry.multiplier} * ({entry.factor1}) * ({entry.factor2})")
    return rep


modal = modal_family(Fraction(3, 10), Fraction(1, 5))
print("modal family, P(x) =", modal.P)
show("the modal family", modal.F)

# The cubic family is separable, but the s-slot carries P(-s) instead of P(s).
cubic = cubic_family(-3, 2, -1)
print("\ncubic family, P(x) =", cubic.P)
rep = show("the cubic family", cubic.F)
print("  the third factor is the monic form of P(-s), so the family is not strong as written")

# Negating the middle coefficient B reflects s and restores a common factor.
reflected = TriQuadPoly.from_quadratic(cubic.A, -cubic.B, cubic.C)
show("the reflected cubic family (B -> -B)", reflected)

# The Kowalevski fixture: separable, with a different third factor J(s).
fx = kowalevski_q(1, 1, 2, 1)
show("the Kowalevski polynomial Q", fx.Q)
print("  P(x) =", fx.P, " (leading coefficient -1, hence the sign of the multipliers)")
print("  J(s) =", fx.J)
