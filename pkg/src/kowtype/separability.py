"""Discriminant separability of polynomials of degree two in each of three variables."""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

from .errors import AllSectionsDegenerate, NotSeparable
from .poly import EXACT, BiPoly, TriQuadPoly, UniPoly, evaluate, outer

__all__ = [
    "discriminant_in",
    "is_degenerate_in",
    "factor_as_product",
    "check_separable",
    "surface_gradient_check",
    "VariableEntry",
    "SeparabilityReport",
    "SECTION_POINTS",
]

SECTION_POINTS = tuple(range(1, 9))


def discriminant_in(F: TriQuadPoly, var) -> BiPoly:
    """``b**2 - 4*a*c`` where ``F = a*var**2 + b*var + c``.

    When ``a`` vanishes identically the result is ``b**2``; callers that care
    use :func:`is_degenerate_in`.
    """
    a, b, c = F.quadratic_parts(var)
    return b * b - 4 * a * c


def is_degenerate_in(F: TriQuadPoly, var) -> bool:
    return F.quadratic_parts(var)[0].is_zero()


def _monic(p: UniPoly) -> UniPoly:
    return p / p.leading_coefficient()


def factor_as_product(D: BiPoly):
    """Split ``D(u, v) = lam * P1(u) * P2(v)`` with monic ``P1``, ``P2``.

    Candidates come from integer sections ``D(u, v0)`` and ``D(u0, v)``; the
    product is then checked coefficient by coefficient, so a returned
    factorization is always exact in rational mode.
    """
    u, v = D.vars
    sec1 = _first_nonzero_section(D, v)
    sec2 = _first_nonzero_section(D, u)
    P1, P2 = _monic(sec1), _monic(sec2)
    lam = D[P1.degree(), P2.degree()]
    if D != outer(P1, P2) * lam:
        raise NotSeparable(f"{D!r} is not a product of a polynomial in {u} and one in {v}")
    return P1, P2, lam


def _first_nonzero_section(D: BiPoly, fixed) -> UniPoly:
    for value in SECTION_POINTS:
        sec = D.section(fixed, Fraction(value) if D.mode == EXACT else float(value))
        if not sec.is_zero():
            return sec
    raise AllSectionsDegenerate(f"every section {fixed} = 1..{len(SECTION_POINTS)} vanishes")


@dataclass
class VariableEntry:
    """Factorization of the discriminant with respect to one variable."""

    var: str
    discriminant: BiPoly
    factor1: UniPoly | None = None
    factor2: UniPoly | None = None
    multiplier: object = None
    exact_identity_holds: bool = False
    degenerate_quadratic: bool = False
    error: str | None = None

    def to_json(self):
        return {
            "var": self.var,
            "discriminant": self.discriminant.to_json(),
            "factor1": self.factor1.to_json() if self.factor1 is not None else None,
            "factor2": self.factor2.to_json() if self.factor2 is not None else None,
            "multiplier": None if self.multiplier is None else str(self.multiplier),
            "exact_identity_holds": self.exact_identity_holds,
            "degenerate_quadratic": self.degenerate_quadratic,
            "error": self.error,
        }


@dataclass
class SeparabilityReport:
    """Outcome of :func:`check_separable`.

    ``entries`` is keyed by the eliminated variable.  ``P1``, ``P2``, ``J`` are
    the monic factor families (in the first, second and third variable of
    ``F``).  ``is_strong`` compares them up to a scalar; ``is_strong_raw``
    additionally asks that all three multipliers agree, i.e. that a single
    polynomial ``P`` gives all three discriminants without extra constants.
    """

    entries: dict
    is_separable: bool
    is_strong: bool
    is_strong_raw: bool
    P1: UniPoly | None = None
    P2: UniPoly | None = None
    J: UniPoly | None = None
    normalization: str = "monic factors, scalar multiplier carries all scale"
    notes: list = field(default_factory=list)

    def multiplier(self, var):
        return self.entries[var].multiplier

    def to_json(self):
        return {
            "is_separable": self.is_separable,
            "is_strong": self.is_strong,
            "is_strong_raw": self.is_strong_raw,
            "normalization": self.normalization,
            "P1": self.P1.to_json() if self.P1 is not None else None,
            "P2": self.P2.to_json() if self.P2 is not None else None,
            "J": self.J.to_json() if self.J is not None else None,
            "entries": {k: e.to_json() for k, e in self.entries.items()},
            "notes": list(self.notes),
        }


def check_separable(F: TriQuadPoly) -> SeparabilityReport:
    u, v, w = F.vars
    entries = {}
    for var in (w, u, v):
        D = discriminant_in(F, var)
        entry = VariableEntry(var, D, degenerate_quadratic=is_degenerate_in(F, var))
        try:
            entry.factor1, entry.factor2, entry.multiplier = factor_as_product(D)
            entry.exact_identity_holds = True
        except (NotSeparable, AllSectionsDegenerate) as exc:
            entry.error = f"{type(exc).__name__}: {exc}"
        entries[var] = entry

    notes = []
    ok = all(e.exact_identity_holds for e in entries.values())
    P1 = P2 = J = None
    if ok:
        # D_w = P1(u) P2(v),  D_u = P2(v) J(w),  D_v = P1(u) J(w)
        P1, P2 = entries[w].factor1, entries[w].factor2
        J = entries[u].factor2
        consistent = (
            entries[u].factor1 == P2
            and entries[v].factor1 == P1
            and entries[v].factor2 == J
        )
        if not consistent:
            notes.append("factor families disagree between discriminants")
        ok = consistent
    strong = strong_raw = False
    if ok:
        same = [p.coeffs.tolist() for p in (P1, P2, J)]
        strong = same[0] == same[1] == same[2]
        mults = [entries[x].multiplier for x in (w, u, v)]
        strong_raw = strong and mults[0] == mults[1] == mults[2]
    return SeparabilityReport(entries, ok, strong, strong_raw, P1, P2, J, notes=notes)


def rational_sqrt(z):
    """Exact square root for rational perfect squares, complex ``sqrt`` otherwise."""
    if isinstance(z, Fraction) and z >= 0:
        n, d = z.numerator, z.denominator
        rn, rd = isqrt(n), isqrt(d)
        if rn * rn == n and rd * rd == d:
            return Fraction(rn, rd)
    return cmath.sqrt(complex(z))


def _roots(a, b, c):
    """Roots of ``a t^2 + b t + c``; exact when the discriminant is a rational square."""
    if a == 0:
        return [] if b == 0 else [-c / b]
    r = rational_sqrt(b * b - 4 * a * c)
    return [(-b - r) / (2 * a), (-b + r) / (2 * a)]


def surface_gradient_check(F: TriQuadPoly, x1, x2) -> list:
    """Residuals ``|dF/dvar ** 2 - D_var F|`` at surface points over ``(x1, x2)``.

    First the roots ``s*`` of ``F(x1, x2, .)`` are found, then for each of them
    the identity is checked in ``s`` at ``(x1, x2, s*)``, and in ``x1`` and
    ``x2`` at the remaining roots of ``F`` in that variable with the other two
    held fixed.  Returns a list of dicts ``{"var", "point", "residual"}``;
    sections with a vanishing leading coefficient are reported with
    ``"skipped": True``.
    """
    u, v, w = F.vars
    a, b, c = F.quadratic_parts(w)
    out = []
    s_roots = _roots(evaluate(a, (x1, x2)), evaluate(b, (x1, x2)), evaluate(c, (x1, x2)))
    if evaluate(a, (x1, x2)) == 0:
        out.append({"var": w, "point": (x1, x2, None), "residual": None, "skipped": True})
    for s in s_roots:
        point = (x1, x2, s)
        for axis, var in ((2, w), (0, u), (1, v)):
            pa, pb, pc = F.quadratic_parts(var)
            rest = tuple(point[k] for k in range(3) if k != axis)
            A_, B_, C_ = (evaluate(p, rest) for p in (pa, pb, pc))
            if A_ == 0:
                out.append({"var": var, "point": point, "residual": None, "skipped": True})
                continue
            disc = B_ * B_ - 4 * A_ * C_
            for t in _roots(A_, B_, C_):
                grad = 2 * A_ * t + B_
                pt = list(point)
                pt[axis] = t
                out.append({"var": var, "point": tuple(pt), "residual": abs(grad * grad - disc), "skipped": False})
    return out
