"""First-integral coefficients for Kowalevski-type systems with ``f_i = x_i^m_i r + x_i^n_i gamma3``.

Given an exponent profile ``(m1, n1, m2, n2)`` and the polynomials ``A``,
``C``, ``P`` of a system of Kowalevski type, :func:`thm1_coefficients`
returns the functions ``p_i, q_i, r_i, E, F, G`` of ``(x1, x2)`` for which

    r^2       = E + p2 e1 + p1 e2
    r gamma3  = F - q2 e1 - q1 e2
    gamma3^2  = G + r2 e1 + r1 e2

hold.  Everything is evaluated pointwise; with rational inputs and a
polynomial ``B`` the evaluation is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import EvaluationAtSingularLocus
from .poly import BiPoly, UniPoly, evaluate
from .separability import rational_sqrt

__all__ = [
    "ExponentProfile",
    "BFunction",
    "CoefficientSet",
    "thm1_coefficients",
    "verify_coefficient_system",
    "verify_E_quadratic",
    "phi",
    "PLUS",
    "MINUS",
]

PLUS = "plus"
MINUS = "minus"


@dataclass(frozen=True)
class ExponentProfile:
    m1: int
    n1: int
    m2: int
    n2: int

    def __post_init__(self):
        if self.m1 == self.n1 and self.m2 == self.n2:
            raise ValueError("need m1 != n1 or m2 != n2")

    def denominator(self, x1, x2):
        """``x1^m1 x2^n2 - x2^m2 x1^n1`` (squared in most coefficients)."""
        return _pow(x1, self.m1) * _pow(x2, self.n2) - _pow(x2, self.m2) * _pow(x1, self.n1)


def _pow(x, k):
    if k < 0 and x == 0:
        raise EvaluationAtSingularLocus("negative power of zero")
    if isinstance(x, int):
        x = Fraction(x)
    return x**k


def _q(x):
    return Fraction(x) if isinstance(x, int) else x


@dataclass(frozen=True)
class BFunction:
    """The coefficient ``B`` with ``B^2 = 4AC + 4P(x1)P(x2)``.

    Either a known polynomial (``poly``) or the square root of
    ``4AC + 4P(x1)P(x2)`` with a fixed sign (``sign`` = +1 or -1 applied to
    the principal root).
    """

    poly: BiPoly | None = None
    A: BiPoly | None = None
    C: BiPoly | None = None
    P: UniPoly | None = None
    sign: int = 1

    @classmethod
    def from_sqrt(cls, A, C, P, sign=1):
        return cls(None, A, C, P, sign)

    def __call__(self, x1, x2):
        if self.poly is not None:
            return evaluate(self.poly, (x1, x2))
        sq = 4 * evaluate(self.A, (x1, x2)) * evaluate(self.C, (x1, x2)) + 4 * evaluate(self.P, (x1,)) * evaluate(self.P, (x2,))
        return self.sign * rational_sqrt(sq)


@dataclass(frozen=True)
class CoefficientSet:
    """Evaluators for ``p1, p2, q1, q2, r1, r2, E, F, G`` on the chosen ``E`` branch."""

    profile: ExponentProfile
    A: BiPoly
    P: UniPoly
    B: Callable
    branch: str

    def _setup(self, x1, x2):
        x1, x2 = _q(x1), _q(x2)
        d = self.profile.denominator(x1, x2)
        if d == 0:
            raise EvaluationAtSingularLocus(f"x1^m1 x2^n2 = x2^m2 x1^n1 at ({x1}, {x2})")
        return x1, x2, d * d, evaluate(self.A, (x1, x2))

    def p1(self, x1, x2):
        x1, x2, d2, a = self._setup(x1, x2)
        return a * _pow(x1, 2 * self.profile.n1) / d2

    def p2(self, x1, x2):
        x1, x2, d2, a = self._setup(x1, x2)
        return a * _pow(x2, 2 * self.profile.n2) / d2

    def q1(self, x1, x2):
        x1, x2, d2, a = self._setup(x1, x2)
        pr = self.profile
        return a * _pow(x1, pr.n1 + pr.m1) / d2

    def q2(self, x1, x2):
        x1, x2, d2, a = self._setup(x1, x2)
        pr = self.profile
        return a * _pow(x2, pr.n2 + pr.m2) / d2

    def r1(self, x1, x2):
        x1, x2, d2, a = self._setup(x1, x2)
        return a * _pow(x1, 2 * self.profile.m1) / d2

    def r2(self, x1, x2):
        x1, x2, d2, a = self._setup(x1, x2)
        return a * _pow(x2, 2 * self.profile.m2) / d2

    def E(self, x1, x2):
        x1, x2, d2, _ = self._setup(x1, x2)
        m1, n1, m2, n2 = _unpack(self.profile)
        sgn = 1 if self.branch == PLUS else -1
        P1, P2 = evaluate(self.P, (x1,)), evaluate(self.P, (x2,))
        return (_pow(x2, 2 * n2) * P1 + _pow(x1, 2 * n1) * P2 + sgn * self.B(x1, x2) * _pow(x1, n1) * _pow(x2, n2)) / d2

    def F(self, x1, x2):
        x1, x2, _, _ = self._setup(x1, x2)
        m1, n1, m2, n2 = _unpack(self.profile)
        E = self.E(x1, x2)
        P1, P2 = evaluate(self.P, (x1,)), evaluate(self.P, (x2,))
        num = E * (_pow(x1, 2 * m1) * _pow(x2, 2 * n2) - _pow(x1, 2 * n1) * _pow(x2, 2 * m2)) + _pow(x1, 2 * n1) * P2 - _pow(x2, 2 * n2) * P1
        den = 2 * _pow(x1, n1) * _pow(x2, n2) * (_pow(x1, n1) * _pow(x2, m2) - _pow(x1, m1) * _pow(x2, n2))
        return num / den

    def G(self, x1, x2):
        x1, x2, _, _ = self._setup(x1, x2)
        m1, n1, m2, n2 = _unpack(self.profile)
        E = self.E(x1, x2)
        P1, P2 = evaluate(self.P, (x1,)), evaluate(self.P, (x2,))
        lead = _pow(x1, m1) * _pow(x2, n2) - _pow(x1, n1) * _pow(x2, m2)
        num = E * _pow(x1, m1) * _pow(x2, m2) * lead + _pow(x1, m1 + n1) * P2 - _pow(x2, m2 + n2) * P1
        return num / (_pow(x1, n1) * _pow(x2, n2) * lead)

    # F and G as solved inside the proof, kept as an independent cross-check
    def F_solved(self, x1, x2):
        x1, x2, _, _ = self._setup(x1, x2)
        m1, n1, m2, n2 = _unpack(self.profile)
        E = self.E(x1, x2)
        P1, P2 = evaluate(self.P, (x1,)), evaluate(self.P, (x2,))
        num = (_pow(x2, 2 * n2) * _pow(x1, 2 * m1) - _pow(x1, 2 * n1) * _pow(x2, 2 * m2)) * E + _pow(x1, 2 * n1) * P2 - _pow(x2, 2 * n2) * P1
        den = 2 * (_pow(x1, 2 * n1) * _pow(x2, m2 + n2) - _pow(x2, 2 * n2) * _pow(x1, m1 + n1))
        return num / den

    def G_solved(self, x1, x2):
        x1, x2, _, _ = self._setup(x1, x2)
        m1, n1, m2, n2 = _unpack(self.profile)
        E = self.E(x1, x2)
        P1, P2 = evaluate(self.P, (x1,)), evaluate(self.P, (x2,))
        num = (_pow(x2, m2 + n2) * _pow(x1, 2 * m1) - _pow(x2, 2 * m2) * _pow(x1, m1 + n1)) * E - _pow(x2, m2 + n2) * P1 + _pow(x1, m1 + n1) * P2
        den = _pow(x1, 2 * n1) * _pow(x2, m2 + n2) - _pow(x2, 2 * n2) * _pow(x1, m1 + n1)
        return -num / den

    def table(self, x1, x2) -> dict:
        names = ("p1", "p2", "q1", "q2", "r1", "r2", "E", "F", "G")
        return {n: getattr(self, n)(x1, x2) for n in names}

    def relations(self, x1, x2, e1, e2) -> tuple:
        """Right-hand sides ``(r^2, r gamma3, gamma3^2)`` at a point."""
        t = self.table(x1, x2)
        return (
            t["E"] + t["p2"] * e1 + t["p1"] * e2,
            t["F"] - t["q2"] * e1 - t["q1"] * e2,
            t["G"] + t["r2"] * e1 + t["r1"] * e2,
        )


def _unpack(pr):
    return pr.m1, pr.n1, pr.m2, pr.n2


def thm1_coefficients(profile, A: BiPoly, C: BiPoly, P: UniPoly, B=None, branch=PLUS) -> CoefficientSet:
    """Coefficient set for a profile; ``B`` defaults to ``+sqrt(4AC + 4P(x1)P(x2))``.

    ``B`` may be a :class:`BiPoly` (e.g. the middle coefficient of a
    discriminantly separable ``A s^2 + B s + C``) or a :class:`BFunction`.
    """
    if not isinstance(profile, ExponentProfile):
        profile = ExponentProfile(*profile)
    if branch not in (PLUS, MINUS):
        raise ValueError(f"branch must be {PLUS!r} or {MINUS!r}")
    if B is None:
        B = BFunction.from_sqrt(A, C, P)
    elif isinstance(B, BiPoly):
        B = BFunction(poly=B)
    return CoefficientSet(profile, A, P, B, branch)


def verify_coefficient_system(cs: CoefficientSet, x1, x2) -> list:
    """Signed residuals of the six equations obtained by matching powers of ``e_i``.

    For ``f_i^2 = P(x_i) + e_i A`` with the relations substituted, the
    coefficients of ``e2``, ``e1`` and ``1`` must agree separately for
    ``i = 1`` and ``i = 2``.
    """
    x1, x2 = _q(x1), _q(x2)
    m1, n1, m2, n2 = _unpack(cs.profile)
    t = cs.table(x1, x2)
    a = evaluate(cs.A, (x1, x2))
    P1, P2 = evaluate(cs.P, (x1,)), evaluate(cs.P, (x2,))
    X1 = lambda k: _pow(x1, k)  # noqa: E731
    X2 = lambda k: _pow(x2, k)  # noqa: E731
    return [
        t["p2"] * X1(2 * m1) - 2 * t["q2"] * X1(m1 + n1) + t["r2"] * X1(2 * n1) - a,
        t["p1"] * X1(2 * m1) - 2 * t["q1"] * X1(m1 + n1) + t["r1"] * X1(2 * n1),
        t["E"] * X1(2 * m1) + 2 * t["F"] * X1(m1 + n1) + t["G"] * X1(2 * n1) - P1,
        t["p1"] * X2(2 * m2) - 2 * t["q1"] * X2(m2 + n2) + t["r1"] * X2(2 * n2) - a,
        t["p2"] * X2(2 * m2) - 2 * t["q2"] * X2(m2 + n2) + t["r2"] * X2(2 * n2),
        t["E"] * X2(2 * m2) + 2 * t["F"] * X2(m2 + n2) + t["G"] * X2(2 * n2) - P2,
    ]


def phi(profile: ExponentProfile, P: UniPoly, x1, x2, E):
    """The quadratic in ``E`` left after the ``e_i^2`` terms cancel."""
    m1, n1, m2, n2 = _unpack(profile)
    P1, P2 = evaluate(P, (x1,)), evaluate(P, (x2,))
    lead = (_pow(x1, m1 - n1) - _pow(x2, m2 - n2)) ** 2 / 4
    mid = (P1 / _pow(x1, 2 * n1) + P2 / _pow(x2, 2 * n2)) / 2
    tail_den = 4 * _pow(x1, 2 * n1) * _pow(x2, 2 * n2) * (_pow(x1, n1) * _pow(x2, m2) - _pow(x1, m1) * _pow(x2, n2)) ** 2
    tail = (P1 * _pow(x2, 2 * n2) - P2 * _pow(x1, 2 * n1)) ** 2 / tail_den
    return -E * E * lead + E * mid - tail


def verify_E_quadratic(cs: CoefficientSet, C: BiPoly, x1, x2):
    """``phi(E) + C A / denominator^2`` on the coefficient set's branch."""
    x1, x2, d2, a = cs._setup(x1, x2)
    return phi(cs.profile, cs.P, x1, x2, cs.E(x1, x2)) + evaluate(C, (x1, x2)) * a / d2
