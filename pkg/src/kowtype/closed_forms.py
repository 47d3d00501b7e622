"""Closed-form relation coefficients for the two worked families.

Each function returns a callable ``(x1, x2) -> dict`` with keys ``p1, p2,
q1, q2, r1, r2, E, F, G`` in the convention of
:class:`~kowtype.theorem.CoefficientSet`.  Exact for rational input.

The ``variant`` switches flip the single sign that distinguishes a known
alternative form from the one produced by the theorem engine; they exist so
the disagreement can be reproduced, not for use.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = ["modal_coefficients", "cubic_coefficients"]


def _q(v):
    return Fraction(v) if isinstance(v, int) else v


def modal_coefficients(g2=0, g3=0, variant=False):
    """Profile ``(2, 0, 2, 0)`` with the modal family, plus branch.

    ``G = -x1 x2 g2 / (2 (x1 + x2)) - g3/2``; ``variant`` uses ``+ g3/2``.
    """
    g2, g3 = _q(g2), _q(g3)
    sign = 1 if variant else -1

    def table(x1, x2):
        x1, x2 = _q(x1), _q(x2)
        S = x1 + x2
        S2 = S * S
        return {
            "p1": 1 / S2,
            "p2": 1 / S2,
            "q1": x1**2 / S2,
            "q2": x2**2 / S2,
            "r1": x1**4 / S2,
            "r2": x2**4 / S2,
            "E": 2 / S,
            "F": (4 * x1 * x2 - g2) / (4 * S),
            "G": -x1 * x2 * g2 / (2 * S) + sign * g3 / 2,
        }

    return table


def cubic_coefficients(a=0, b=0, c=0, branch="minus", variant=False):
    """Profile ``(1, 0, 1, 0)`` with the cubic family.

    The minus branch gives the polynomial set ``E = 2(x1 + x2) + a``,
    ``F = -x1 x2 + b/2``, ``G = c``; the plus branch the rational one.
    ``variant`` flips the sign of the ``b, c`` part of the plus-branch ``F``.
    """
    a, b, c = _q(a), _q(b), _q(c)

    def table(x1, x2):
        x1, x2 = _q(x1), _q(x2)
        S = x1 + x2
        base = {"p1": Fraction(1), "p2": Fraction(1), "q1": x1, "q2": x2, "r1": x1 * x1, "r2": x2 * x2}
        if branch == "minus":
            base.update(E=2 * S + a, F=-x1 * x2 + b / 2, G=c)
            return base
        D = (x1 - x2) ** 2
        lead = -(2 * x1 * x2 * (3 * x1**2 + 2 * x1 * x2 + 3 * x2**2) + 4 * a * x1 * x2 * S) / (2 * D)
        tail = (b * (x1**2 + 6 * x1 * x2 + x2**2) + 4 * c * S) / (2 * D)
        base.update(
            E=(2 * S * (x1**2 + x2**2) + a * S * S + 2 * b * S + 4 * c) / D,
            F=lead + tail if variant else lead - tail,
            G=(4 * x1**2 * x2**2 * (S + a) + 2 * b * x1 * x2 * S + c * S * S) / D,
        )
        return base

    return table
