"""Dense polynomials in one, two or three variables.

Coefficients live in a numpy array indexed by exponents, ``coeffs[i, j]``
being the coefficient of ``x1**i * x2**j``.  Two modes are supported:

* ``"exact"``: an object array of :class:`fractions.Fraction`;
* ``"float"``: a ``float64`` or ``complex128`` array.

Storage is capped per variable (8 for univariate, 4 for bivariate, 2 for
trivariate polynomials); exceeding the cap raises :class:`DegreeOverflow`
rather than truncating.  Instances are immutable.
"""

from __future__ import annotations

import itertools
import numbers
from fractions import Fraction

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ArityMismatch, DegreeOverflow

EXACT = "exact"
FLOAT = "float"

__all__ = [
    "EXACT",
    "FLOAT",
    "Poly",
    "UniPoly",
    "BiPoly",
    "TriQuadPoly",
    "evaluate",
    "outer",
    "embed",
    "poly_from_json",
]


def _is_inexact(c) -> bool:
    return isinstance(c, (float, complex, np.floating, np.complexfloating))


def _exact(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (complex, np.complexfloating)):
        raise TypeError("complex coefficients require float mode")
    if isinstance(c, numbers.Integral):
        return Fraction(int(c))
    return Fraction(c)


class Poly:
    """Base class; use :class:`UniPoly`, :class:`BiPoly` or :class:`TriQuadPoly`."""

    max_degree: tuple[int, ...] = ()
    default_vars: tuple[str, ...] = ()
    float_tol = 1e-12

    __slots__ = ("_c", "vars", "mode")

    def __init__(self, coeffs, vars=None, mode=None):
        nvars = len(self.max_degree)
        if isinstance(coeffs, np.ndarray) and coeffs.dtype != object:
            raw = coeffs
        else:
            raw = np.empty(np.shape(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs.shape, dtype=object)
            flat = list(_flatten(coeffs, raw.ndim))
            for idx, val in zip(np.ndindex(raw.shape), flat):
                raw[idx] = val
        if raw.ndim != nvars:
            if raw.size == 0:
                raw = raw.reshape((0,) * nvars)
            else:
                raise ArityMismatch(f"{type(self).__name__} needs {nvars}-d coefficients, got {raw.ndim}-d")
        if mode is None:
            if raw.dtype != object:
                mode = FLOAT
            else:
                mode = FLOAT if any(_is_inexact(c) for c in raw.flat) else EXACT
        if mode == EXACT:
            arr = np.empty(raw.shape, dtype=object)
            for idx in np.ndindex(raw.shape):
                arr[idx] = _exact(raw[idx])
        elif mode == FLOAT:
            vals = [complex(c) for c in raw.flat]
            dtype = complex if any(c.imag != 0 for c in vals) else float
            arr = np.array(vals if dtype is complex else [c.real for c in vals], dtype=dtype).reshape(raw.shape)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        arr = _trim(arr, mode)
        for axis, cap in enumerate(self.max_degree):
            if arr.shape[axis] - 1 > cap:
                raise DegreeOverflow(
                    f"degree {arr.shape[axis] - 1} in {self._var_names(vars)[axis]} exceeds storage bound {cap}"
                )
        arr.flags.writeable = False
        object.__setattr__(self, "_c", arr)
        object.__setattr__(self, "vars", self._var_names(vars))
        object.__setattr__(self, "mode", mode)

    def __setattr__(self, name, value):
        raise AttributeError("polynomials are immutable")

    @classmethod
    def _var_names(cls, vars):
        names = tuple(vars) if vars is not None else cls.default_vars
        if len(names) != len(cls.max_degree):
            raise ArityMismatch(f"expected {len(cls.max_degree)} variable names, got {names}")
        return names

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, vars=None, mode=EXACT):
        return cls(np.zeros((0,) * len(cls.max_degree), dtype=object if mode == EXACT else float), vars, mode)

    @classmethod
    def constant(cls, c, vars=None, mode=None):
        return cls(np.full((1,) * len(cls.max_degree), c, dtype=object), vars, mode)

    @classmethod
    def monomial(cls, exps, c=1, vars=None, mode=None):
        arr = np.zeros(tuple(e + 1 for e in exps), dtype=object)
        arr[tuple(exps)] = c
        return cls(arr, vars, mode)

    @classmethod
    def from_terms(cls, terms: dict, vars=None, mode=None):
        """Build from ``{exponent tuple: coefficient}``."""
        n = len(cls.max_degree)
        if not terms:
            return cls.zero(vars, mode or EXACT)
        shape = [0] * n
        for exps in terms:
            exps = (exps,) if isinstance(exps, int) else exps
            for k, e in enumerate(exps):
                shape[k] = max(shape[k], e + 1)
        arr = np.zeros(shape, dtype=object)
        for exps, c in terms.items():
            exps = (exps,) if isinstance(exps, int) else exps
            arr[tuple(exps)] += c
        return cls(arr, vars, mode)

    @classmethod
    def variable(cls, index, vars=None, mode=None):
        exps = [0] * len(cls.max_degree)
        exps[index] = 1
        return cls.monomial(exps, 1, vars, mode)

    # -- inspection -----------------------------------------------------------

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def nvars(self) -> int:
        return len(self.max_degree)

    @property
    def shape(self):
        return self._c.shape

    def is_zero(self) -> bool:
        return self._c.size == 0

    def degree(self, var=None) -> int:
        """Degree in one variable (index or name); -1 for the zero polynomial."""
        if var is None:
            if self.nvars != 1:
                raise ArityMismatch("degree() needs a variable for multivariate polynomials")
            var = 0
        axis = self._axis(var)
        return self._c.shape[axis] - 1 if self._c.size else -1

    def total_degree(self) -> int:
        if self.is_zero():
            return -1
        return max(sum(idx) for idx, c in self.terms())

    def _axis(self, var) -> int:
        if isinstance(var, str):
            try:
                return self.vars.index(var)
            except ValueError:
                raise ArityMismatch(f"{var!r} is not a variable of {self.vars}") from None
        return int(var)

    def __getitem__(self, exps):
        exps = (exps,) if isinstance(exps, int) else tuple(exps)
        if any(e < 0 or e >= s for e, s in zip(exps, self._c.shape)) or self._c.size == 0:
            return Fraction(0) if self.mode == EXACT else 0.0
        return self._c[exps]

    def terms(self):
        """Yield ``(exponents, coefficient)`` for nonzero coefficients."""
        for idx in np.ndindex(self._c.shape):
            c = self._c[idx]
            if c != 0:
                yield idx, c

    def leading_coefficient(self):
        if self.nvars != 1:
            raise ArityMismatch("leading coefficient is defined for univariate polynomials")
        return self._c[-1] if self._c.size else self[0]

    # -- conversions ----------------------------------------------------------

    def to_float(self):
        if self.mode == FLOAT:
            return self
        if self._c.size == 0:
            return type(self)(np.zeros(self._c.shape), self.vars, FLOAT)
        return type(self)(np.array([float(c) for c in self._c.flat]).reshape(self._c.shape), self.vars, FLOAT)

    def to_exact(self):
        if self.mode == EXACT:
            return self
        if np.iscomplexobj(self._c):
            raise TypeError("complex polynomial has no exact form")
        return type(self)(self._c.astype(object), self.vars, EXACT)

    def with_vars(self, vars):
        return type(self)(self._c, vars, self.mode)

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Poly):
            if type(other) is not type(self):
                raise ArityMismatch(f"cannot combine {type(self).__name__} with {type(other).__name__}")
            return other
        if isinstance(other, (numbers.Number, np.number)):
            return type(self).constant(other, self.vars)
        return NotImplemented

    @staticmethod
    def _result_mode(a, b):
        return EXACT if a.mode == EXACT and b.mode == EXACT else FLOAT

    def _array(self, mode):
        if mode == self.mode:
            return self._c
        return np.array([float(c) for c in self._c.flat], dtype=float).reshape(self._c.shape)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        mode = self._result_mode(self, other)
        a, b = self._array(mode), other._array(mode)
        shape = tuple(max(s, t) for s, t in zip(a.shape, b.shape))
        out = _zeros(shape, mode, a, b)
        out[tuple(slice(0, s) for s in a.shape)] += a
        out[tuple(slice(0, s) for s in b.shape)] += b
        return type(self)(out, self.vars, mode)

    __radd__ = __add__

    def __neg__(self):
        return type(self)(-self._c if self.mode == FLOAT else np.array([-c for c in self._c.flat], dtype=object).reshape(self._c.shape), self.vars, self.mode)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (numbers.Number, np.number)) and not isinstance(other, Poly):
            mode = FLOAT if (_is_inexact(other) or self.mode == FLOAT) else EXACT
            c = _exact(other) if mode == EXACT else other
            arr = self._array(mode)
            out = _zeros(arr.shape, mode, arr, np.asarray(other))
            for idx in np.ndindex(arr.shape):
                out[idx] = arr[idx] * c
            return type(self)(out, self.vars, mode)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        mode = self._result_mode(self, other)
        a, b = self._array(mode), other._array(mode)
        if a.size == 0 or b.size == 0:
            return type(self).zero(self.vars, mode)
        shape = tuple(s + t - 1 for s, t in zip(a.shape, b.shape))
        for axis, (cap, s) in enumerate(zip(self.max_degree, shape)):
            if s - 1 > cap:
                raise DegreeOverflow(f"product has degree {s - 1} in {self.vars[axis]}, bound is {cap}")
        out = _zeros(shape, mode, a, b)
        for idx in np.ndindex(a.shape):
            c = a[idx]
            if c == 0:
                continue
            window = tuple(slice(i, i + t) for i, t in zip(idx, b.shape))
            out[window] += c * b
        return type(self)(out, self.vars, mode)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Poly):
            raise TypeError("polynomial division is not supported")
        inv = Fraction(1) / _exact(other) if self.mode == EXACT and not _is_inexact(other) else 1 / other
        return self * inv

    def __pow__(self, n: int):
        if not isinstance(n, numbers.Integral) or n < 0:
            raise ValueError("power must be a non-negative integer")
        result = type(self).constant(1, self.vars, self.mode)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def deriv(self, var=0):
        axis = self._axis(var)
        if self._c.shape[axis] <= 1:
            return type(self).zero(self.vars, self.mode)
        src = np.moveaxis(self._c, axis, 0)
        out = np.empty((src.shape[0] - 1,) + src.shape[1:], dtype=src.dtype)
        for k in range(1, src.shape[0]):
            out[k - 1] = src[k] * k
        return type(self)(np.moveaxis(out, 0, axis), self.vars, self.mode)

    # -- comparison -----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (numbers.Number, np.number)):
            other = type(self).constant(other, self.vars)
        if not isinstance(other, Poly) or type(other) is not type(self):
            return NotImplemented
        if self.mode == EXACT and other.mode == EXACT:
            return self._c.shape == other._c.shape and all(x == y for x, y in zip(self._c.flat, other._c.flat))
        return (self - other).max_abs() <= self.float_tol

    def __hash__(self):
        if self.mode != EXACT:
            raise TypeError("float-mode polynomials are unhashable")
        return hash((type(self).__name__, self._c.shape, tuple(self._c.flat)))

    def max_abs(self) -> float:
        if self._c.size == 0:
            return 0.0
        return float(max(abs(complex(c)) for c in self._c.flat))

    def is_proportional(self, other) -> bool:
        """True when ``self == t * other`` for some nonzero scalar ``t``."""
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        if self._c.shape != other._c.shape:
            return False
        pivot = next(idx for idx, c in other.terms())
        t = self._c[pivot] / other._c[pivot]
        return t != 0 and self == other * t

    # -- evaluation -----------------------------------------------------------

    def __call__(self, *point):
        return evaluate(self, point)

    def evaluate_array(self, *arrays):
        """Vectorized evaluation over broadcastable numpy arrays (float mode)."""
        if len(arrays) != self.nvars:
            raise ArityMismatch(f"expected {self.nvars} arrays, got {len(arrays)}")
        c = self.to_float()._c
        if c.size == 0:
            return np.zeros(np.broadcast(*arrays).shape)
        if self.nvars == 1:
            return npoly.polyval(arrays[0], c)
        if self.nvars == 2:
            return npoly.polyval2d(*np.broadcast_arrays(*arrays), c)
        return npoly.polyval3d(*np.broadcast_arrays(*arrays), c)

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        """``{"vars": [...], "mode": ..., "coeffs": [[exps], num, den] list}``.

        Float coefficients are written as the exact binary fraction they
        hold, so the round trip is exact in both modes.  Complex float
        coefficients use ``[[exps], [re_num, re_den], [im_num, im_den]]``.
        """
        terms = []
        for idx, c in self.terms():
            if self.mode == FLOAT and isinstance(c, (complex, np.complexfloating)):
                re, im = Fraction(float(c.real)), Fraction(float(c.imag))
                terms.append([list(idx), [re.numerator, re.denominator], [im.numerator, im.denominator]])
            else:
                f = Fraction(c) if self.mode == EXACT else Fraction(float(c))
                terms.append([list(idx), f.numerator, f.denominator])
        return {"kind": type(self).__name__, "vars": list(self.vars), "mode": self.mode, "coeffs": terms}

    @classmethod
    def from_json(cls, data: dict):
        mode = data.get("mode", EXACT)
        terms = {}
        for entry in data["coeffs"]:
            exps = tuple(entry[0])
            if isinstance(entry[1], list):
                c = complex(Fraction(*entry[1]), Fraction(*entry[2]))
            else:
                c = Fraction(entry[1], entry[2])
                if mode == FLOAT:
                    c = float(c)
            terms[exps] = c
        if not terms:
            return cls.zero(data["vars"], mode)
        return cls.from_terms(terms, data["vars"], mode)

    # -- display --------------------------------------------------------------

    def __repr__(self):
        if self.is_zero():
            body = "0"
        else:
            parts = []
            for idx, c in self.terms():
                mono = "*".join(
                    v if e == 1 else f"{v}^{e}" for v, e in zip(self.vars, idx) if e
                )
                parts.append(f"({c})" + (f"*{mono}" if mono else ""))
            body = " + ".join(parts)
        return f"{type(self).__name__}[{','.join(self.vars)}]({body})"


class UniPoly(Poly):
    max_degree = (8,)
    default_vars = ("x",)
    __slots__ = ()

    def __init__(self, coeffs, vars=None, mode=None):
        if isinstance(vars, str):
            vars = (vars,)
        super().__init__(coeffs, vars, mode)

    @property
    def var(self) -> str:
        return self.vars[0]

    def coefficient_list(self) -> list:
        return list(self._c)

    def compose_linear(self, scale, shift=0):
        """Return ``p(scale * x + shift)``."""
        x = UniPoly([shift, scale], self.vars)
        out = UniPoly.zero(self.vars, self.mode)
        for k in range(self._c.shape[0] - 1, -1, -1):
            out = out * x + self._c[k]
        return out


class BiPoly(Poly):
    max_degree = (4, 4)
    default_vars = ("x1", "x2")
    __slots__ = ()

    def section(self, var, value) -> UniPoly:
        """Fix one variable at ``value``; return the univariate remainder."""
        axis = self._axis(var)
        other = 1 - axis
        arr = np.moveaxis(self._c, other, 0)
        if self._c.size == 0:
            return UniPoly.zero(self.vars[other], self.mode)
        coeffs = [evaluate(UniPoly(row, self.vars[axis], self.mode), (value,)) for row in arr]
        return UniPoly(coeffs, self.vars[other])

    def as_matrix(self) -> np.ndarray:
        return self._c


class TriQuadPoly(Poly):
    max_degree = (2, 2, 2)
    default_vars = ("x1", "x2", "s")
    __slots__ = ()

    def quadratic_parts(self, var) -> tuple[BiPoly, BiPoly, BiPoly]:
        """Write ``self = a*var**2 + b*var + c``; returns ``(a, b, c)``."""
        axis = self._axis(var)
        rest = tuple(v for k, v in enumerate(self.vars) if k != axis)
        arr = np.moveaxis(self._c, axis, 0)
        parts = []
        for k in (2, 1, 0):
            if k < arr.shape[0]:
                parts.append(BiPoly(arr[k], rest, self.mode))
            else:
                parts.append(BiPoly.zero(rest, self.mode))
        return tuple(parts)

    @classmethod
    def from_quadratic(cls, a: BiPoly, b: BiPoly, c: BiPoly, var="s", vars=None):
        """Assemble ``a*var**2 + b*var + c`` where ``var`` is the new last axis by default."""
        vars = tuple(vars) if vars is not None else tuple(a.vars) + (var,)
        axis = vars.index(var)
        mode = EXACT if all(p.mode == EXACT for p in (a, b, c)) else FLOAT
        shape = [max(p.shape[k] for p in (a, b, c)) for k in range(2)]
        slabs = []
        for p in (c, b, a):
            slab = _zeros(shape, mode, p._array(mode))
            if p._c.size:
                slab[tuple(slice(0, s) for s in p.shape)] = p._array(mode)
            slabs.append(slab)
        arr = np.stack(slabs, axis=axis)
        return cls(arr, vars, mode)


def _flatten(obj, depth):
    if depth == 0:
        yield obj
        return
    for item in obj:
        yield from _flatten(item, depth - 1)


def _zeros(shape, mode, *like):
    if mode == EXACT:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    dtype = complex if any(np.iscomplexobj(x) for x in like) else float
    return np.zeros(shape, dtype=dtype)


def _trim(arr: np.ndarray, mode) -> np.ndarray:
    if arr.size == 0:
        return arr.reshape((0,) * arr.ndim)
    nz = np.array([c != 0 for c in arr.flat], dtype=bool).reshape(arr.shape)
    if not nz.any():
        return arr[tuple(slice(0, 0) for _ in range(arr.ndim))]
    idx = np.nonzero(nz)
    return arr[tuple(slice(0, int(k.max()) + 1) for k in idx)]


def evaluate(p: Poly, point):
    """Horner evaluation at a point; exact when the polynomial and point are rational."""
    point = tuple(point)
    if len(point) != p.nvars:
        raise ArityMismatch(f"{type(p).__name__} in {p.vars} evaluated at {len(point)} coordinates")
    if p.mode == EXACT:
        point = tuple(
            _exact(v) if isinstance(v, (numbers.Rational, Fraction)) and not isinstance(v, bool) else v
            for v in point
        )
    if p._c.size == 0:
        return sum((0 * v for v in point), Fraction(0) if p.mode == EXACT else 0.0)
    return _horner(p._c, point)


def _horner(arr, point):
    x = point[0]
    if arr.ndim == 1:
        acc = arr[-1]
        for c in arr[-2::-1]:
            acc = acc * x + c
        return acc
    acc = _horner(arr[-1], point[1:])
    for k in range(arr.shape[0] - 2, -1, -1):
        acc = acc * x + _horner(arr[k], point[1:])
    return acc


def outer(p: UniPoly, q: UniPoly, vars=None) -> BiPoly:
    """``p(u) * q(v)`` as a bivariate polynomial in ``(p.var, q.var)``."""
    vars = vars or (p.var, q.var)
    if vars[0] == vars[1]:
        raise ArityMismatch("outer product needs distinct variables")
    mode = EXACT if p.mode == EXACT and q.mode == EXACT else FLOAT
    a, b = p._array(mode), q._array(mode)
    if a.size == 0 or b.size == 0:
        return BiPoly.zero(vars, mode)
    out = _zeros((a.shape[0], b.shape[0]), mode, a, b)
    for i, j in itertools.product(range(a.shape[0]), range(b.shape[0])):
        out[i, j] = a[i] * b[j]
    return BiPoly(out, vars, mode)


def embed(p: Poly, cls, vars) -> Poly:
    """Re-express ``p`` in a polynomial class with more variables.

    ``vars`` names the target variables; every variable of ``p`` must
    appear among them.
    """
    vars = tuple(vars)
    axes = [vars.index(v) for v in p.vars]
    terms = {}
    for idx, c in p.terms():
        exps = [0] * len(vars)
        for a, e in zip(axes, idx):
            exps[a] = e
        terms[tuple(exps)] = c
    if not terms:
        return cls.zero(vars, p.mode)
    return cls.from_terms(terms, vars, p.mode)


_KINDS = {"UniPoly": UniPoly, "BiPoly": BiPoly, "TriQuadPoly": TriQuadPoly}


def poly_from_json(data: dict) -> Poly:
    if "kind" in data:
        return _KINDS[data["kind"]].from_json(data)
    return {1: UniPoly, 2: BiPoly, 3: TriQuadPoly}[len(data["vars"])].from_json(data)
