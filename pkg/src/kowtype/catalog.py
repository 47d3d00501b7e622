"""The four catalogued Kowalevski-type systems.

=============  ===========================================  =========================
id             state (chart)                                vector field parameters
=============  ===========================================  =========================
S1_REAL        ``p, q, r, gamma1, gamma2, gamma3`` (real)    ``g2``
S1_COMPLEX     ``x1, x2, e1, e2, r, gamma3`` (complex)       ``g2``
S2_TWOPARAM    ``x1, x2, e1, e2, r, gamma3`` (complex)       ``g2, g3``
S3_CUBIC       ``x1, x2, e1, e2, r, gamma3`` (complex)       none
=============  ===========================================  =========================

Complex states are stored as 12 interleaved reals ``(re, im, re, im, ...)``
so that the integrator only ever sees real vectors.  Every field function
broadcasts over trailing axes, which keeps the finite-difference checks
vectorized.

The real modal system is the pull-back of the complex one through
``x1 = p + i q``, ``x2 = p - i q``, ``e1 = x1^2 + gamma1 + i gamma2``,
``e2 = x2^2 + gamma1 - i gamma2``.  :func:`s1_real_variant_field` is a
variant whose gamma2 and gamma3 rows are not that pull-back; it is kept for
comparison only.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .errors import NoConsistentState, NoKnownDensity, ProjectionFailed, SingularState

__all__ = [
    "SystemId",
    "SystemParams",
    "State",
    "IntegralValue",
    "vector_field",
    "complex_field",
    "s1_real_variant_field",
    "change_chart",
    "inverse_chart",
    "pushforward",
    "integral_set",
    "relation_values",
    "relation_names",
    "s1_relations_variant",
    "divergence",
    "numerical_divergence",
    "measure_density",
    "sample_initial_state",
    "fill_labels",
    "project_s2",
    "CATALOG",
    "default_eps_sing",
]

FIRST_INTEGRAL = "first_integral"
INVARIANT_RELATION = "invariant_relation"
NOT_INVARIANT = "not_invariant"


class SystemId(str, enum.Enum):
    S1_REAL = "S1_REAL"
    S1_COMPLEX = "S1_COMPLEX"
    S2_TWOPARAM = "S2_TWOPARAM"
    S3_CUBIC = "S3_CUBIC"

    @property
    def is_complex(self) -> bool:
        return self is not SystemId.S1_REAL

    @property
    def dim(self) -> int:
        return 12 if self.is_complex else 6


def default_eps_sing() -> float:
    return float(os.environ.get("KOWTYPE_EPS_SING", "1e-6"))


@dataclass(frozen=True)
class SystemParams:
    """Parameters of a catalogued system.

    ``g2`` enters the modal fields, ``g2`` and ``g3`` the two-parameter one.
    For the modal systems ``g3`` is a label of the invariant set fixed by the
    initial data.  ``a, b, c, d`` are the integration constants of S3_CUBIC
    and ``k`` the value with ``e1 e2 = k^2``.  Labels may be complex.
    """

    g2: float = 0.0
    g3: complex = 0.0
    a: complex = 0.0
    b: complex = 0.0
    c: complex = 0.0
    k: complex | None = None
    d: complex | None = None
    eps_sing: float = field(default_factory=default_eps_sing)

    @property
    def k2(self):
        if self.k is None:
            raise ValueError("k is not set; sample an initial state or pass k explicitly")
        return self.k * self.k

    def to_json(self):
        out = {}
        for key in ("g2", "g3", "a", "b", "c", "k", "d", "eps_sing"):
            out[key] = _json_number(getattr(self, key))
        return out

    @classmethod
    def from_json(cls, data):
        kw = {}
        for key, val in data.items():
            kw[key] = _from_json_number(val)
        return cls(**kw)


def _json_number(v):
    if v is None:
        return None
    v = complex(v)
    return v.real if v.imag == 0 else [v.real, v.imag]


def _from_json_number(v):
    if isinstance(v, list):
        return complex(v[0], v[1])
    return v


@dataclass(frozen=True)
class State:
    """A point of a chart: the system it belongs to and its flat real vector."""

    system: SystemId
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (SystemId(self.system).dim,):
            raise ValueError(f"{self.system} state needs {SystemId(self.system).dim} reals, got shape {vals.shape}")
        vals.flags.writeable = False
        object.__setattr__(self, "system", SystemId(self.system))
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_complex(cls, system, z):
        return cls(system, to_real(np.asarray(z, dtype=complex)))

    @property
    def z(self) -> np.ndarray:
        """The six complex coordinates (complex charts only)."""
        if not self.system.is_complex:
            raise TypeError("S1_REAL states are real")
        return to_complex(self.values)


@dataclass(frozen=True)
class IntegralValue:
    name: str
    value: complex
    kind: str | None = None


def to_complex(y):
    y = np.asarray(y, dtype=float)
    return y[0::2] + 1j * y[1::2]


def to_real(z):
    z = np.asarray(z, dtype=complex)
    out = np.empty((2 * z.shape[0],) + z.shape[1:], dtype=float)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def _guard(eps, **quantities):
    for name, q in quantities.items():
        m = np.min(np.abs(q))
        if m < eps:
            raise SingularState(f"|{name}| = {m:.3g} below eps_sing = {eps:g}", name, float(m))


# -- vector fields --------------------------------------------------------------


def _s1_real(params, y):
    p, q, r, g1, g2_, g3 = y
    _guard(params.eps_sing, p=p)
    G2 = params.g2
    return np.array(
        [
            p * q * r,
            -0.5 * ((p**2 - q**2) * r + g3),
            -0.5 * (p * q - q * (p**2 + q**2) + q * g1 - p * g2_) / p**2,
            (p**2 + q**2) * q * r + 2 * p * r * g2_ - q * g3,
            p * g3 - p * r * (2 * g1 + p**2 + q**2),
            (G2 * p * q + 4 * q * (p**2 + q**2) ** 2 + 4 * q * g1 * (3 * p**2 - q**2) - 4 * p * g2_ * (p**2 - 3 * q**2))
            / (8 * p**2),
        ]
    )


def s1_real_variant_field(params, y):
    """Variant real modal field: the gamma2 row has ``-2 p q^2 r - p r gamma1`` in
    place of ``-p r (2 gamma1 + p^2 + q^2)`` and the ``gamma2`` term of the
    gamma3 row has the opposite sign."""
    p, q, r, g1, g2_, g3 = np.asarray(y, dtype=float)
    _guard(params.eps_sing, p=p)
    G2 = params.g2
    return np.array(
        [
            p * q * r,
            -0.5 * ((p**2 - q**2) * r + g3),
            -0.5 * (p * q - q * (p**2 + q**2) + q * g1 - p * g2_) / p**2,
            (p**2 + q**2) * q * r + 2 * p * r * g2_ - q * g3,
            -2 * p * q**2 * r + p * g3 - p * r * g1,
            (G2 * p * q + 4 * q * (p**2 + q**2) ** 2 + 4 * q * g1 * (3 * p**2 - q**2) + 4 * p * g2_ * (p**2 - 3 * q**2))
            / (8 * p**2),
        ]
    )


def _s1_complex(params, z):
    x1, x2, e1, e2, r, g3 = z
    S = x1 + x2
    _guard(params.eps_sing, **{"x1+x2": S})
    g2 = params.g2
    return np.array(
        [
            -0.5j * (x1**2 * r + g3),
            0.5j * (x2**2 * r + g3),
            -1j * S * r * e1,
            1j * S * r * e2,
            0.5j * (x1**2 - x2**2 + 2 * e2 * x1 - 2 * e1 * x2) / S**2,
            -0.125j * (g2 * (x1**2 - x2**2) + 8 * e2 * x1**3 - 8 * e1 * x2**3) / S**2,
        ]
    )


def _s2_bracket(z):
    x1, x2, e1, e2, r, g3 = z
    return (x2**2 * r + g3) ** 2 * e1 - (x1**2 * r + g3) ** 2 * e2


def _s2_m(params, z):
    x1, x2, e1, e2, r, g3 = z
    g2, G3 = params.g2, params.g3
    S = x1 + x2
    I = 1j
    big = (
        (
            S**3
            * (
                2 * x1**2 * x2**2 * S**2 * r**3
                + g3 * (6 * x1**2 * x2 * (1 + x2) + 4 * x1 * x2 * (x1**2 + x2**2) + 5 * x2**4 - 3 * x2**2 + 2 * x1**4) * r**2
                + 2 * g3**2 * (5 * (x1**2 + x2**2) + 2 * x1 * x2) * r
                + 8 * g3**3
            )
            * g2
        )
        + (
            8 * x1**2 * x2**2 * (x1**2 + x2**2) * S**2 * r**3
            + 8
            * g3
            * (
                2 * x2**6 - x1**2 * x2**2 + x1**6 + 2 * x1**3 * x2**2 + 3 * x1**4 * x2**2 + 2 * x2**3 * x1**2
                - x1 * x2**3 - x2**4 + 2 * x1**4 * x2 + 3 * x2**5 * x1 + 2 * x1**5 * x2 + 4 * x2**4 * x1**2
                + 6 * x2**3 * x1**3
            )
            * r**2
            + 8 * g3**2 * (4 * x2**4 + 4 * x1**2 * x2**2 - x2**2 + 6 * x1**3 * x2 + 6 * x1 * x2**3 + 3 * x1**4 + 2 * x2 * x1**2) * r
            + 16 * g3**3 * S**2
        )
        * G3
        - 4
        * S**3
        * (
            8 * r**3 * x1**4 * x2**4
            + 2 * x1 * x2**2 * g3 * (-2 * x1**2 * x2 + 5 * x1 * x2**2 - 2 * x2 + 2 * x2**3 + 5 * x1**3 + 4 * x1**2) * r**2
            + g3**2 * (2 * x1**4 + 4 * x1**3 * x2 + x2**4 + x2**2 - 2 * x1**2 * x2 + 4 * x1 * x2**3 + 14 * x1**2 * x2**2) * r
            + 2 * g3**3 * S**2
        )
    )
    return S * r * I + big / (4 * I * S**2 * (x1 - x2) ** 3 * _s2_bracket(z))


def _s2(params, z):
    x1, x2, e1, e2, r, g3 = z
    S, D = x1 + x2, x1 - x2
    _guard(params.eps_sing, **{"x1+x2": S, "x1-x2": D, "r": r, "gamma3": g3, "bracket": _s2_bracket(z)})
    g2, G3 = params.g2, params.g3
    I = 1j
    m = _s2_m(params, z)
    rdot = (
        -I * e1 * (r * (x2 - x1) - I * m) / (2 * S**2 * r)
        - I * e2 * (r * (x2 - x1) + I * m) / (2 * S**2 * r)
        + I * g2 * (3 * (x1**2 + x2**2) * r - 2 * x1 * x2 * r + 4 * g3) / (4 * (x2 - x1) ** 3 * (x2 + x1) * r)
        + 2 * I * ((x1**2 - x1 * x2 + x2**2) * r + g3) * G3 / (r * S**2 * (x2 - x1) ** 3)
        - I * ((x1**4 + x2**4 + 6 * x1**2 * x2**2) * r + 2 * S**2 * g3) / (2 * (x2 - x1) ** 3 * S * r)
    )
    gdot = (
        I * (S * x2 * r + m * I * x2 + 2 * g3) * x2**3 * e1 / (g3 * S**2)
        - I * (S * x1 * r + m * I * x1 + 2 * g3) * x1**3 * e2 / (g3 * S**2)
        - I * (r * x1 * x2 + g3) * (x1 - I * x2) * (x1 + I * x2) * x1 * x2 * G3 / (g3 * S**2 * D**3)
        - I * ((x1**4 + 6 * x1**2 * x2**2 + x2**4) * g3 + 2 * x1**2 * x2**2 * S**2 * r) * g2 / (8 * g3 * S * D**3)
        + I * (3 * (x1**2 + x2**2) * g3 - 2 * x1 * x2 * g3 + 4 * x1**2 * x2**2 * r) * x1**2 * x2**2 / (g3 * S * D**3)
    )
    return np.array(
        [
            -0.5j * (x1**2 * r + g3),
            0.5j * (x2**2 * r + g3),
            -m * e1,
            m * e2,
            rdot,
            gdot,
        ]
    )


def _s3(params, z):
    x1, x2, e1, e2, r, g3 = z
    return np.array(
        [
            -0.5j * (r * x1 + g3),
            0.5j * (r * x2 + g3),
            -1j * r * e1,
            1j * r * e2,
            0.5j * (x2 - x1 + e2 - e1),
            0.5j * (e1 * x2 - e2 * x1),
        ]
    )


_COMPLEX_FIELDS = {
    SystemId.S1_COMPLEX: _s1_complex,
    SystemId.S2_TWOPARAM: _s2,
    SystemId.S3_CUBIC: _s3,
}


def complex_field(system, params, z):
    """Right-hand side in complex coordinates; ``z`` has shape ``(6, ...)``."""
    system = SystemId(system)
    if system is SystemId.S1_REAL:
        raise TypeError("S1_REAL is a real chart; use vector_field")
    return _COMPLEX_FIELDS[system](params, np.asarray(z, dtype=complex))


def vector_field(system, params, state):
    """Time derivative of a state as a flat real vector (same layout as the state).

    ``state`` may be a :class:`State` or a raw real array of the chart's size
    (optionally with extra trailing axes for vectorized evaluation).
    """
    if isinstance(state, State):
        system, y = state.system, state.values
    else:
        system, y = SystemId(system), np.asarray(state, dtype=float)
    if system is SystemId.S1_REAL:
        return _s1_real(params, y)
    return to_real(_COMPLEX_FIELDS[system](params, to_complex(y)))


# -- chart between the two modal systems ---------------------------------------


def change_chart(y):
    """Real modal state ``(p, q, r, gamma1, gamma2, gamma3)`` to complex coordinates."""
    p, q, r, g1, g2, g3 = np.asarray(y, dtype=float)
    x1 = p + 1j * q
    x2 = p - 1j * q
    e1 = x1**2 + g1 + 1j * g2
    e2 = x2**2 + g1 - 1j * g2
    return np.array([x1, x2, e1, e2, r + 0j, g3 + 0j])


def inverse_chart(z, tol=1e-12):
    """Inverse of :func:`change_chart`; rejects points off the real slice."""
    x1, x2, e1, e2, r, g3 = np.asarray(z, dtype=complex)
    scale = 1.0 + np.max(np.abs(z))
    checks = {
        "x2 - conj(x1)": x2 - np.conj(x1),
        "e2 - conj(e1)": e2 - np.conj(e1),
        "Im r": r.imag,
        "Im gamma3": g3.imag,
    }
    for name, v in checks.items():
        if np.max(np.abs(v)) > tol * scale:
            raise ValueError(f"not a real modal state: |{name}| = {np.max(np.abs(v)):.3g}")
    p = ((x1 + x2) / 2).real
    q = ((x1 - x2) / 2j).real
    w = e1 - x1**2
    return np.array([p, q, r.real, w.real, w.imag, g3.real])


def pushforward(y, ydot):
    """Apply the chart differential to a real tangent vector at ``y``."""
    p, q, r, g1, g2, g3 = np.asarray(y, dtype=float)
    dp, dq, dr, dg1, dg2, dg3 = np.asarray(ydot, dtype=float)
    x1 = p + 1j * q
    x2 = p - 1j * q
    dx1 = dp + 1j * dq
    dx2 = dp - 1j * dq
    return np.array([dx1, dx2, 2 * x1 * dx1 + dg1 + 1j * dg2, 2 * x2 * dx2 + dg1 - 1j * dg2, dr + 0j, dg3 + 0j])


# -- relations and integrals ----------------------------------------------------


def _s1_relations(params, z, g3_sign=1):
    x1, x2, e1, e2, r, g3 = z
    S = x1 + x2
    _guard(params.eps_sing, **{"x1+x2": S})
    g2, G3 = params.g2, params.g3
    return [
        r**2 - 2 / S - (e1 + e2) / S**2,
        r * g3 - (4 * x1 * x2 - g2) / (4 * S) + (x2**2 * e1 + x1**2 * e2) / S**2,
        g3**2 + x1 * x2 * g2 / (2 * S) - (x2**4 * e1 + x1**4 * e2) / S**2 + g3_sign * G3 / 2,
        e1 * e2 - params.k2,
    ]


def s1_relations_variant(params, z):
    """Modal relations with ``- g3/2`` in place of ``+ g3/2`` in the third residual."""
    return _s1_relations(params, np.asarray(z, dtype=complex), g3_sign=-1)


def _s2_relations(params, z):
    x1, x2, e1, e2, r, g3 = z
    S, D = x1 + x2, x1 - x2
    _guard(params.eps_sing, **{"x1+x2": S, "x1-x2": D})
    g2, G3 = params.g2, params.g3
    D2 = (x1**2 - x2**2) ** 2
    return [
        r**2 - (2 * S * (x1**2 + x2**2 - g2 / 2) - 2 * G3) / D2 - (e1 + e2) / S**2,
        r * g3 - (S**3 * g2 + 4 * (x1**2 + x2**2) * G3 - 4 * x1 * x2 * S**3) / (4 * D2) + (x2**2 * e1 + x1**2 * e2) / S**2,
        g3**2
        - (-x1 * x2 * S * (x1**2 + x2**2) * g2 - (x1**2 + x2**2) ** 2 * G3 + 8 * x1**3 * x2**3 * S) / (2 * D2)
        + (x2**4 * e1 + x1**4 * e2) / S**2,
        e1 * e2 - params.k2,
    ]


def _s3_values(params, z):
    x1, x2, e1, e2, r, g3 = z
    return [
        r**2 - 2 * (x1 + x2) - e1 - e2,
        2 * (r * g3 + x1 * x2 + x2 * e1 + x1 * e2),
        g3**2 - x2**2 * e1 - x1**2 * e2,
        e1 * e2,
    ]


_NAMES = {
    SystemId.S1_REAL: ("r^2", "r*gamma3", "gamma3^2", "e1*e2"),
    SystemId.S1_COMPLEX: ("r^2", "r*gamma3", "gamma3^2", "e1*e2"),
    SystemId.S2_TWOPARAM: ("r^2", "r*gamma3", "gamma3^2", "e1*e2"),
    SystemId.S3_CUBIC: ("a", "b", "c", "d^2"),
}


def relation_names(system):
    return _NAMES[SystemId(system)]


def relation_values(system, params, y):
    """Relation residuals (S1, S2) or integral values (S3) for a real state array.

    ``y`` may carry trailing axes; returns a complex array of shape ``(4, ...)``.
    """
    system = SystemId(system)
    y = np.asarray(y, dtype=float)
    if system is SystemId.S1_REAL:
        z = change_chart(y)
        return np.array(_s1_relations(params, z))
    z = to_complex(y)
    if system is SystemId.S1_COMPLEX:
        return np.array(_s1_relations(params, z))
    if system is SystemId.S2_TWOPARAM:
        return np.array(_s2_relations(params, z))
    return np.array(_s3_values(params, z))


def integral_set(system, params, state):
    """Named relation residuals / integral values at one state.

    For the modal systems the entries are ``r^2 - (...)``, ``r gamma3 - (...)``,
    ``gamma3^2 - (...)`` and ``e1 e2 - k^2`` (zero on the invariant set); for
    S3_CUBIC they are the values of the integrals ``a, b, c, d^2``.  ``kind`` is
    left unset: it is decided by the verifier, not assumed here.
    """
    if isinstance(state, State):
        system, y = state.system, state.values
    else:
        y = state
    vals = relation_values(system, params, y)
    return [IntegralValue(n, complex(v)) for n, v in zip(relation_names(system), vals)]


# -- divergence and densities ---------------------------------------------------


def numerical_divergence(system, params, y, h=1e-3, weight=None):
    """Richardson-extrapolated central-difference divergence of ``weight * X``.

    ``y`` is a real state array, optionally with trailing axes.  For complex
    charts the divergence is the holomorphic one, ``sum_k d(X_k)/d(z_k)``.
    """
    system = SystemId(system)
    y = np.asarray(y, dtype=float)

    def g(yy):
        if system is SystemId.S1_REAL:
            out = _s1_real(params, yy)
        else:
            out = _COMPLEX_FIELDS[system](params, to_complex(yy))
        if weight is not None:
            out = out * weight(system, yy)
        return out

    def central(step):
        total = 0
        ncoord = 6
        for k in range(ncoord):
            e = np.zeros_like(y)
            idx = k if system is SystemId.S1_REAL else 2 * k
            e[idx] = step
            total = total + (g(y + e)[k] - g(y - e)[k]) / (2 * step)
        return total

    return (4 * central(h / 2) - central(h)) / 3


def divergence(system, params, state):
    """Divergence of the field: ``2 q r`` for S1_REAL, 0 for S3_CUBIC, numerical otherwise."""
    if isinstance(state, State):
        system, y = state.system, state.values
    else:
        system, y = SystemId(system), np.asarray(state, dtype=float)
    if system is SystemId.S1_REAL:
        _guard(params.eps_sing, p=y[0])
        return 2 * y[1] * y[2]
    if system is SystemId.S3_CUBIC:
        return np.zeros(np.shape(y)[1:]) + 0j if np.ndim(y) > 1 else 0j
    return numerical_divergence(system, params, y)


def measure_density(system, state):
    """Density of the known invariant measure.

    ``1/(4 p^2)`` for S1_REAL, ``1/(x1 + x2)^2`` for S1_COMPLEX, ``1`` for
    S3_CUBIC (standard measure).  S2_TWOPARAM has none.
    """
    if isinstance(state, State):
        system, y = state.system, state.values
    else:
        system, y = SystemId(system), np.asarray(state, dtype=float)
    eps = default_eps_sing()
    if system is SystemId.S1_REAL:
        _guard(eps, p=y[0])
        return 1 / (4 * y[0] ** 2)
    if system is SystemId.S1_COMPLEX:
        z = to_complex(y)
        S = z[0] + z[1]
        _guard(eps, **{"x1+x2": S})
        return 1 / S**2
    if system is SystemId.S3_CUBIC:
        return np.ones(np.shape(y)[1:]) if np.ndim(y) > 1 else 1.0
    raise NoKnownDensity(f"no invariant density is known for {system.value}")


# -- initial states -------------------------------------------------------------

REAL_BOX = {"p": (0.5, 2.0), "other": (-1.0, 1.0)}
COMPLEX_BOX = {"re": (0.5, 1.5), "im": (-0.5, 0.5)}
MAX_TRIES = 100


def _complex_draw(rng, n):
    lo, hi = COMPLEX_BOX["re"]
    ilo, ihi = COMPLEX_BOX["im"]
    return rng.uniform(lo, hi, n) + 1j * rng.uniform(ilo, ihi, n)


def _solve_s1(params, x1, x2, e1, e2):
    """``r`` and ``gamma3`` from the first two modal relations, and the implied ``g3`` label."""
    S = x1 + x2
    r = np.sqrt(2 / S + (e1 + e2) / S**2 + 0j)
    r = np.where(r.real < 0, -r, r)
    g3 = ((4 * x1 * x2 - params.g2) / (4 * S) - (x2**2 * e1 + x1**2 * e2) / S**2) / r
    label = -2 * (g3**2 + x1 * x2 * params.g2 / (2 * S) - (x2**4 * e1 + x1**4 * e2) / S**2)
    return r, g3, label


def sample_initial_state(system, params=None, seed=0, on_invariant_set=False):
    """Draw a non-singular state; returns ``(State, params)``.

    Coordinates are uniform in fixed boxes: ``p`` in [0.5, 2] and the other
    real coordinates in [-1, 1] for S1_REAL; real parts in [0.5, 1.5] and
    imaginary parts in [-0.5, 0.5] for complex charts.  With
    ``on_invariant_set`` the modal systems solve their relations for ``r``
    and ``gamma3`` (root with positive real part) and record the implied
    ``g3`` label and ``k``.  For S2_TWOPARAM, ``e2`` is then adjusted so the
    third relation holds too.  S3_CUBIC states always define their own
    ``a, b, c, d``; the returned params carry them.
    """
    system = SystemId(system)
    params = params or SystemParams()
    rng = np.random.default_rng(seed)
    for _ in range(MAX_TRIES):
        try:
            state, new_params = _draw(system, params, rng, on_invariant_set)
        except (SingularState, NoConsistentState, ProjectionFailed):
            continue
        return state, new_params
    raise NoConsistentState(f"no admissible {system.value} state after {MAX_TRIES} draws")


def fill_labels(system, params, state):
    """``params`` with ``k`` (and ``d`` for S3_CUBIC) set from the initial ``e1 e2`` when missing."""
    system = SystemId(system)
    y = state.values if isinstance(state, State) else np.asarray(state, dtype=float)
    z = change_chart(y) if system is SystemId.S1_REAL else to_complex(y)
    root = complex(np.sqrt(complex(z[2] * z[3])))
    if params.k is None:
        params = replace(params, k=root)
    if system is SystemId.S3_CUBIC and params.d is None:
        params = replace(params, d=root)
    return params


def _draw(system, params, rng, on_set):
    eps = params.eps_sing
    if system is SystemId.S1_REAL:
        p = rng.uniform(*REAL_BOX["p"])
        q, r, g1, g2, g3 = rng.uniform(*REAL_BOX["other"], 5)
        y = np.array([p, q, r, g1, g2, g3])
        if on_set:
            z = change_chart(y)
            x1, x2, e1, e2 = z[:4]
            r2 = (2 / (x1 + x2) + (e1 + e2) / (x1 + x2) ** 2).real
            if r2 <= 0:
                raise NoConsistentState("r^2 < 0 on the real slice")
            r = np.sqrt(r2)
            rr, gg, label = _solve_s1(params, x1, x2, e1, e2)
            y = np.array([p, q, r, g1, g2, gg.real])
            params = replace(params, g3=float(label.real), k=float(abs(e1)))
        else:
            z = change_chart(y)
            params = replace(params, k=params.k if params.k is not None else float(abs(z[2])))
        _guard(eps, p=p)
        return State(system, y), params

    x1, x2, e1, e2, r, g3 = _complex_draw(rng, 6)
    if system is SystemId.S3_CUBIC:
        if on_set and params.d is not None:
            e2 = params.d**2 / e1
        z = np.array([x1, x2, e1, e2, r, g3])
        a, b, c, d2 = _s3_values(params, z)
        new = replace(params, a=complex(a), b=complex(b), c=complex(c), d=complex(np.sqrt(d2)), k=complex(np.sqrt(d2)))
        return State.from_complex(system, z), new

    _guard(eps, **{"x1+x2": x1 + x2})
    if system is SystemId.S2_TWOPARAM:
        _guard(eps, **{"x1-x2": x1 - x2})
    if params.k is not None:
        e2 = params.k2 / e1
    if not on_set:
        z = np.array([x1, x2, e1, e2, r, g3])
        new = params if params.k is not None else replace(params, k=complex(np.sqrt(e1 * e2)))
        complex_field(system, new, z)
        return State.from_complex(system, z), new

    if system is SystemId.S1_COMPLEX:
        r, g3, label = _solve_s1(params, x1, x2, e1, e2)
        new = replace(params, g3=complex(label), k=params.k if params.k is not None else complex(np.sqrt(e1 * e2)))
        z = np.array([x1, x2, e1, e2, r, g3])
        complex_field(system, new, z)
        return State.from_complex(system, z), new

    z = project_s2(params, x1, x2, e1, e2)
    new = params if params.k is not None else replace(params, k=complex(np.sqrt(z[2] * z[3])))
    complex_field(system, new, z)
    return State.from_complex(system, z), new


def _s2_solve_rg(params, x1, x2, e1, e2):
    S = x1 + x2
    D2 = (x1**2 - x2**2) ** 2
    g2, G3 = params.g2, params.g3
    r = np.sqrt((2 * S * (x1**2 + x2**2 - g2 / 2) - 2 * G3) / D2 + (e1 + e2) / S**2 + 0j)
    r = np.where(np.real(r) < 0, -r, r)
    rg = (S**3 * g2 + 4 * (x1**2 + x2**2) * G3 - 4 * x1 * x2 * S**3) / (4 * D2) - (x2**2 * e1 + x1**2 * e2) / S**2
    return r, rg / r


def project_s2(params, x1, x2, e1, e2=None):
    """Point on the joint zero set of the three S2 relations over ``(x1, x2, e1)``.

    ``r`` and ``gamma3`` come from the first two relations; ``e2`` is then
    found by a secant iteration on the third (``e1`` is rescaled afterwards
    when ``k`` is fixed, so only ``x1, x2`` and the product constraint are
    honoured exactly in that case).  Works elementwise on arrays.
    """
    x1, x2, e1 = (np.asarray(v, dtype=complex) for v in (x1, x2, e1))
    fixed_k = params.k is not None

    def third(e2_):
        if fixed_k:
            e1_ = params.k2 / e2_
        else:
            e1_ = e1
        r, g = _s2_solve_rg(params, x1, x2, e1_, e2_)
        return _s2_relations(replace(params, k=0.0), np.array([x1, x2, e1_, e2_, r, g]))[2]

    start = np.asarray(e2 if e2 is not None else e1, dtype=complex)
    try:
        with np.errstate(all="ignore"):
            root = optimize.newton(third, start, tol=1e-14, maxiter=100)
    except (RuntimeError, ZeroDivisionError) as exc:
        raise ProjectionFailed(str(exc)) from exc
    root = np.asarray(root, dtype=complex)
    e1_ = params.k2 / root if fixed_k else e1
    r, g = _s2_solve_rg(params, x1, x2, e1_, root)
    z = np.array([x1, x2, e1_ + 0 * root, root, r, g])
    resid = np.abs(_s2_relations(replace(params, k=0.0), z)[2])
    if not np.all(np.isfinite(z)) or np.max(resid) > 1e-9 * (1 + np.max(np.abs(z)) ** 4):
        raise ProjectionFailed(f"S2 projection residual {np.max(resid):.3g}")
    return z


# -- catalog metadata -----------------------------------------------------------

CATALOG = {
    SystemId.S1_REAL: {
        "equation": "eq. (3)",
        "chart": ["p", "q", "r", "gamma1", "gamma2", "gamma3"],
        "field_parameters": ["g2"],
        "integrals": ["r^2", "r*gamma3", "gamma3^2", "e1*e2"],
        "integrals_equation": "eq. (18) via eq. (5)",
        "density": "1/(4 p^2)",
        "notes": "gamma2, gamma3 rows are the pull-back of the complex field",
    },
    SystemId.S1_COMPLEX: {
        "equation": "eq. (6)",
        "chart": ["x1", "x2", "e1", "e2", "r", "gamma3"],
        "field_parameters": ["g2"],
        "integrals": ["r^2", "r*gamma3", "gamma3^2", "e1*e2"],
        "integrals_equation": "eq. (18)",
        "density": "1/(x1+x2)^2",
        "notes": "g3 labels the invariant set",
    },
    SystemId.S2_TWOPARAM: {
        "equation": "unnumbered",
        "chart": ["x1", "x2", "e1", "e2", "r", "gamma3"],
        "field_parameters": ["g2", "g3"],
        "integrals": ["r^2", "r*gamma3", "gamma3^2", "e1*e2"],
        "integrals_equation": "unlabelled display preceding the system",
        "density": None,
        "notes": "r*gamma3 and gamma3^2 classify as not_invariant",
    },
    SystemId.S3_CUBIC: {
        "equation": "eq. (34)",
        "chart": ["x1", "x2", "e1", "e2", "r", "gamma3"],
        "field_parameters": [],
        "integrals": ["a", "b", "c", "d^2"],
        "integrals_equation": "eq. (33)",
        "density": "1 (standard measure)",
        "notes": "",
    },
}
