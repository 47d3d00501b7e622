"""Concrete polynomial families used throughout the package.

Three fixtures:

* the cubic family attached to the modal Kowalevski-type system, with
  parameters ``g2, g3`` (``A = (x1 - x2)**2``, ``P = 2x^3 - g2 x/2 - g3/2``);
* the cubic family ``P = 2x^3 + a x^2 + b x + c`` of the parameter-free
  system;
* Kowalevski's fundamental equation ``Q(x1, x2, s)`` with the top's
  constants ``l1, l, c, k`` (a separability test fixture only).

Rational parameters give exact-mode polynomials; floats or complex values
give float-mode ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .poly import BiPoly, TriQuadPoly, UniPoly

__all__ = ["Family", "modal_family", "cubic_family", "kowalevski_q", "KowalevskiFixture"]


def _q(v):
    # ints become Fractions so half-integers stay exact
    return Fraction(v) if isinstance(v, int) else v


@dataclass(frozen=True)
class Family:
    """``F(x1, x2, s) = A s^2 + B s + C`` together with its curve polynomial ``P``."""

    name: str
    A: BiPoly
    B: BiPoly
    C: BiPoly
    P: UniPoly

    @property
    def F(self) -> TriQuadPoly:
        return TriQuadPoly.from_quadratic(self.A, self.B, self.C)

    def P_in(self, var: str) -> UniPoly:
        return self.P.with_vars((var,))


def _vars():
    return BiPoly.variable(0), BiPoly.variable(1)


def modal_family(g2=0, g3=0) -> Family:
    g2, g3 = _q(g2), _q(g3)
    x1, x2 = _vars()
    A = (x1 - x2) ** 2
    B = -2 * x1 * x2 * (x1 + x2) + (x1 + x2) * (g2 / 2) + g3
    C = x1**2 * x2**2 + x1 * x2 * (g2 / 2) + (x1 + x2) * g3 + g2**2 / 16
    P = UniPoly([-g3 / 2, -g2 / 2, 0, 2])
    return Family("modal", A, B, C, P)


def cubic_family(a=0, b=0, c=0) -> Family:
    a, b, c = _q(a), _q(b), _q(c)
    x1, x2 = _vars()
    A = (x1 - x2) ** 2
    B = 2 * x1 * x2 * (x1 + x2) + x1 * x2 * (2 * a) + (x1 + x2) * b + 2 * c
    C = x1**2 * x2**2 - x1 * x2 * b - (x1 + x2) * (2 * c) + b**2 / 4 - a * c
    P = UniPoly([c, b, a, 2])
    return Family("cubic", A, B, C, P)


@dataclass(frozen=True)
class KowalevskiFixture:
    R: BiPoly
    R1: BiPoly
    Q: TriQuadPoly
    P: UniPoly
    J: UniPoly


def kowalevski_q(l1=1, l=1, c=2, k=1) -> KowalevskiFixture:
    """Kowalevski's fundamental equation ``(x1-x2)^2 s^2 - 2 R s - R1``.

    ``P`` is the quartic ``-x^4 + 6 l1 x^2 + 4 l c x + c^2 - k^2`` and ``J`` the
    cubic ``s^3 + 3 l1 s^2 + (c^2 - k^2) s + 3 l1 (c^2 - k^2) - 2 l^2 c^2``.
    """
    l1, l, c, k = _q(l1), _q(l), _q(c), _q(k)
    x1, x2 = _vars()
    h = c**2 - k**2
    R = -(x1**2) * x2**2 + x1 * x2 * (6 * l1) + (x1 + x2) * (2 * l * c) + h
    R1 = (
        x1**2 * x2**2 * (-6 * l1)
        - (x1 + x2) ** 2 * h
        - x1 * x2 * (x1 + x2) * (4 * l * c)
        + 6 * l1 * h
        - 4 * c**2 * l**2
    )
    Q = TriQuadPoly.from_quadratic((x1 - x2) ** 2, -2 * R, -R1)
    P = UniPoly([h, 4 * l * c, 6 * l1, 0, -1])
    J = UniPoly([3 * l1 * h - 2 * l**2 * c**2, h, 3 * l1, 1], "s")
    return KowalevskiFixture(R, R1, Q, P, J)
