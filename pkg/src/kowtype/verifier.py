"""Measured checks of the analytic claims along trajectories.

* :func:`drift_report` - conservation of the integral set;
* :func:`classify_relation` - first integral, invariant relation or neither;
* :func:`separation_roots` - the roots ``s1, s2`` of ``F(x1, x2, s) = 0``;
* :func:`viete_residuals`, :func:`velocity_identity`;
* :func:`quadrature_residuals`, :func:`kowch_residuals` - the differential
  relations among ``dx_i`` and ``ds_i``, by central differences.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .catalog import (
    CATALOG,
    State,
    SystemId,
    SystemParams,
    change_chart,
    relation_names,
    relation_values,
    sample_initial_state,
    to_complex,
    vector_field,
)
from .errors import BranchTrackingLost, DegenerateQuadratic, SingularState
from .families import Family, cubic_family, modal_family
from .integrator import Trajectory, resample

__all__ = [
    "DriftEntry",
    "DriftReport",
    "drift_report",
    "Classification",
    "classify_relation",
    "Attribution",
    "attribute_failure",
    "SeparationTrack",
    "separation_roots",
    "default_family",
    "viete_residuals",
    "velocity_identity",
    "QuadratureResult",
    "quadrature_residuals",
    "kowch_residuals",
    "convergence_order",
    "FIRST_INTEGRAL",
    "INVARIANT_RELATION",
    "NOT_INVARIANT",
]

FIRST_INTEGRAL = "first_integral"
INVARIANT_RELATION = "invariant_relation"
NOT_INVARIANT = "not_invariant"

CLASSIFY_SAMPLES = 200
CLASSIFY_THRESHOLD = 1e-6
MIN_MOTION = 1e-6


def _cplx(v):
    v = complex(v)
    return [v.real, v.imag]


def _z(traj: Trajectory):
    """Complex coordinates ``(6, N)`` of a trajectory (real modal states via the chart)."""
    if traj.system is SystemId.S1_REAL:
        return change_chart(traj.states.T)
    return to_complex(traj.states.T)


# -- drift ----------------------------------------------------------------------


@dataclass(frozen=True)
class DriftEntry:
    name: str
    initial: complex
    max_drift: float
    reference: str
    kind: str | None = None

    def to_json(self):
        return {
            "name": self.name,
            "initial": _cplx(self.initial),
            "max_drift": self.max_drift,
            "reference": self.reference,
            "kind": self.kind,
        }


@dataclass(frozen=True)
class DriftReport:
    system: SystemId
    entries: tuple

    @property
    def max_drift(self):
        return max(e.max_drift for e in self.entries)

    def __getitem__(self, name):
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_json(self):
        return {"system": self.system.value, "entries": [e.to_json() for e in self.entries]}


def drift_report(traj: Trajectory, classify=False, seed=0) -> DriftReport:
    """Maximum deviation of every integral along ``traj``.

    S3_CUBIC integrals are compared with their initial values; relation
    residuals of the other systems are compared with zero, which is their value
    on the invariant set.  With ``classify`` each entry also gets its
    :func:`classify_relation` outcome.
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    vals = relation_values(traj.system, traj.params, traj.states.T)
    ref = "initial" if traj.system is SystemId.S3_CUBIC else "zero"
    entries = []
    for i, name in enumerate(relation_names(traj.system)):
        base = vals[i, 0] if ref == "initial" else 0.0
        drift = float(np.max(np.abs(vals[i] - base)))
        kind = classify_relation(traj.system, traj.params, i, seed).kind if classify else None
        entries.append(DriftEntry(name, complex(vals[i, 0]), drift, ref, kind))
    return DriftReport(traj.system, tuple(entries))


# -- classification -------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    system: SystemId
    relation: str
    kind: str
    generic_max: float
    on_set_max: float
    threshold: float
    n_generic: int
    n_on_set: int

    def to_json(self):
        return {
            "system": self.system.value,
            "relation": self.relation,
            "kind": self.kind,
            "generic_max": self.generic_max,
            "on_set_max": self.on_set_max,
            "threshold": self.threshold,
            "n_generic": self.n_generic,
            "n_on_set": self.n_on_set,
        }


def _lie_derivative(system, params, y, index, h=1e-3):
    """Normalized derivative of relation ``index`` along the field at ``y``."""
    f = vector_field(system, params, y)
    scale = 1.0 + float(np.max(np.abs(f)))
    u = f / scale

    def d(step):
        return (relation_values(system, params, y + step * u)[index] - relation_values(system, params, y - step * u)[index]) / (
            2 * step
        )

    return abs((4 * d(h / 2) - d(h)) / 3)


def classify_relation(system, params=None, index=0, seed=0, n=CLASSIFY_SAMPLES, threshold=CLASSIFY_THRESHOLD):
    """Classify relation ``index`` of ``system`` by its derivative along the flow.

    The derivative (per unit speed) is measured at ``n`` generic states and at
    ``n`` states on the joint zero set of all relations.  It vanishing at
    generic states means a first integral; vanishing only on the set, an
    invariant relation; otherwise the relation is ``not_invariant``.
    """
    system = SystemId(system)
    params = params or SystemParams()
    rng = np.random.default_rng(seed)
    maxima = []
    counts = []
    for on_set in (False, True):
        worst, count = 0.0, 0
        for s in rng.integers(0, 2**31, size=n):
            try:
                st, pp = sample_initial_state(system, replace(params, k=None), int(s), on_invariant_set=on_set)
                worst = max(worst, _lie_derivative(system, pp, st.values, index))
                count += 1
            except SingularState:
                continue
        maxima.append(worst)
        counts.append(count)
    if maxima[0] <= threshold:
        kind = FIRST_INTEGRAL
    elif maxima[1] <= threshold:
        kind = INVARIANT_RELATION
    else:
        kind = NOT_INVARIANT
    return Classification(system, relation_names(system)[index], kind, maxima[0], maxima[1], threshold, *counts)


def _component_contributions(system, params, y, index, h=1e-3):
    """Per-component terms of the normalized derivative of relation ``index`` at ``y``.

    Component ``j`` contributes ``dR/dz_j * X_j``.  Real systems split by real
    coordinate; complex systems by complex coordinate, which is exact for the
    holomorphic relations of the catalog.
    """
    f = vector_field(system, params, y)
    u = f / (1.0 + float(np.max(np.abs(f))))
    width = 2 if SystemId(system).is_complex else 1
    out = []
    for j in range(len(y) // width):
        e = np.zeros_like(u)
        e[width * j : width * (j + 1)] = u[width * j : width * (j + 1)]

        def d(step):
            hi = relation_values(system, params, y + step * e)[index]
            lo = relation_values(system, params, y - step * e)[index]
            return (hi - lo) / (2 * step)

        out.append(abs((4 * d(h / 2) - d(h)) / 3))
    return np.array(out)


@dataclass
class Attribution:
    """Which field components a failing relation cannot be blamed on.

    A component is *cleared* when some preserved relation depends on it along
    the flow: that relation could not be preserved if the component were
    wrong.  The *implicated* components feed a failing relation and are not
    cleared.
    """

    system: SystemId
    failing: list
    preserved: list
    contributions: dict
    cleared: list
    implicated: list

    def to_json(self):
        return {
            "system": self.system.value,
            "failing": list(self.failing),
            "preserved": list(self.preserved),
            "contributions": {k: dict(v) for k, v in self.contributions.items()},
            "cleared": list(self.cleared),
            "implicated": list(self.implicated),
        }


def attribute_failure(system, params=None, seed=0, n=20, threshold=CLASSIFY_THRESHOLD):
    """Locate the field components responsible for relations that are not preserved.

    Relations are classified first, then component contributions are taken
    as maxima over ``n`` states on the joint zero set.
    """
    system = SystemId(system)
    params = params or SystemParams()
    names = relation_names(system)
    comps = CATALOG[system]["chart"]
    kinds = [classify_relation(system, params, i, seed, n=n, threshold=threshold).kind for i in range(len(names))]
    failing = [i for i, k in enumerate(kinds) if k == NOT_INVARIANT]
    preserved = [i for i, k in enumerate(kinds) if k != NOT_INVARIANT]
    worst = np.zeros((len(names), len(comps)))
    rng = np.random.default_rng(seed + 1)
    for s in rng.integers(0, 2**31, size=n):
        try:
            st, pp = sample_initial_state(system, replace(params, k=None), int(s), on_invariant_set=True)
            for i in range(len(names)):
                worst[i] = np.maximum(worst[i], _component_contributions(system, pp, st.values, i))
        except SingularState:
            continue
    # a contribution counts when it is far above the classification noise
    live = worst > 1e3 * threshold
    cleared = [c for j, c in enumerate(comps) if any(live[i, j] for i in preserved)]
    implicated = [c for j, c in enumerate(comps) if c not in cleared and any(live[i, j] for i in failing)]
    contributions = {names[i]: {c: float(worst[i, j]) for j, c in enumerate(comps)} for i in range(len(names))}
    return Attribution(system, [names[i] for i in failing], [names[i] for i in preserved], contributions, cleared, implicated)


# -- separation variables -------------------------------------------------------


def default_family(system, params):
    """The polynomial family whose roots separate ``system``.

    For S3_CUBIC this is the cubic family with ``s`` replaced by ``-s``: its
    ``x_i``-discriminants are ``4 P(x_j) P(s)`` rather than ``4 P(x_j) P(-s)``,
    which is what the differential relations need.
    """
    system = SystemId(system)
    if system in (SystemId.S1_REAL, SystemId.S1_COMPLEX):
        return modal_family(float(params.g2), complex(params.g3))
    if system is SystemId.S3_CUBIC:
        fam = cubic_family(complex(params.a), complex(params.b), complex(params.c))
        return Family("cubic_reflected", fam.A, -fam.B, fam.C, fam.P)
    raise ValueError(f"no separating family is catalogued for {system.value}")


@dataclass(frozen=True)
class SeparationTrack:
    """Roots ``s1, s2`` of ``A s^2 + B s + C`` along a trajectory.

    ``swaps[j]`` records whether the raw quadratic-formula pair was exchanged
    at sample ``j`` to keep both roots continuous; ``sqrt_disc`` is the
    continued branch of the square root of the discriminant, so that
    ``s2 - s1 = sqrt_disc / A``.
    """

    times: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    sqrt_disc: np.ndarray
    swaps: np.ndarray
    quadratic_residual: float
    continuity: float
    degenerate: np.ndarray = field(default=None)

    def to_csv(self, quad=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["t", "re_s1", "im_s1", "re_s2", "im_s2"]
        if quad is not None:
            head += ["re_res1", "im_res1", "re_res2", "im_res2"]
        w.writerow(head)
        for j, t in enumerate(self.times):
            row = [t, self.s1[j].real, self.s1[j].imag, self.s2[j].real, self.s2[j].imag]
            if quad is not None:
                r1, r2 = quad.res1_at(j), quad.res2_at(j)
                row += [r1.real, r1.imag, r2.real, r2.imag]
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    def to_json(self):
        return {
            "times": self.times.tolist(),
            "s1": [_cplx(v) for v in self.s1],
            "s2": [_cplx(v) for v in self.s2],
            "swaps": int(np.sum(self.swaps)),
            "quadratic_residual": self.quadratic_residual,
            "continuity": self.continuity,
        }


def separation_roots(traj: Trajectory, F=None, eps=None) -> SeparationTrack:
    """Track the roots of ``F(x1(t), x2(t), s) = 0``.

    ``F`` is a :class:`~kowtype.poly.TriQuadPoly` in ``(x1, x2, s)`` or a
    family with ``A, B, C`` attributes; it defaults to :func:`default_family`.
    At the first sample ``s1`` takes the minus sign of the square root; later
    samples keep whichever labelling moves the roots least.
    """
    eps = traj.params.eps_sing if eps is None else eps
    fam = F if F is not None else default_family(traj.system, traj.params)
    if hasattr(fam, "quadratic_parts"):
        Ap, Bp, Cp = fam.quadratic_parts("s")
    else:
        Ap, Bp, Cp = fam.A, fam.B, fam.C
    z = _z(traj)
    x1, x2 = z[0], z[1]
    A, B, C = (p.evaluate_array(x1, x2).astype(complex) for p in (Ap, Bp, Cp))
    degenerate = np.abs(A) < eps
    if degenerate[0]:
        raise DegenerateQuadratic(f"|A| = {abs(A[0]):.3g} at t = {traj.times[0]!r}")
    n = len(A)
    disc = B * B - 4 * A * C
    root = np.sqrt(disc)
    sq = np.empty(n, dtype=complex)
    swaps = np.zeros(n, dtype=bool)
    sq[0] = root[0]
    for j in range(1, n):
        cand = root[j]
        if abs(cand - sq[j - 1]) > abs(-cand - sq[j - 1]):
            cand = -cand
        sq[j] = cand
        swaps[j] = cand != root[j]
    with np.errstate(all="ignore"):
        s1 = (-B - sq) / (2 * A)
        s2 = (-B + sq) / (2 * A)
    ok = ~degenerate
    s1 = np.where(ok, s1, np.nan)
    s2 = np.where(ok, s2, np.nan)
    scale = np.abs(A) * np.abs(s1) ** 2 + np.abs(B) * np.abs(s1) + np.abs(C)
    res = np.abs(A * s1 * s1 + B * s1 + C) / np.maximum(scale, 1.0)
    res2 = np.abs(A * s2 * s2 + B * s2 + C) / np.maximum(np.abs(A) * np.abs(s2) ** 2 + np.abs(B) * np.abs(s2) + np.abs(C), 1.0)
    qres = float(np.nanmax(np.concatenate([res, res2]))) if n else 0.0
    if n > 1:
        jumps = np.maximum(np.abs(np.diff(s1)), np.abs(np.diff(s2)))
        gap = np.abs(s1 - s2)[:-1]
        with np.errstate(all="ignore"):
            ratio = np.where(gap > 0, jumps / gap, np.where(jumps > 0, np.inf, 0.0))
        ratio = ratio[np.isfinite(jumps)]
        cont = float(np.max(ratio)) if ratio.size else 0.0
    else:
        cont = 0.0
    return SeparationTrack(traj.times, s1, s2, x1, x2, A, B, C, sq, swaps, qres, cont, degenerate)


def _continue_sqrt(values, start_sign=1.0, times=None, check=True):
    """Square roots of ``values`` chosen continuously along the sequence.

    The sign choice is only trustworthy while the radicand turns by less than
    a quarter turn between samples; a larger jump raises
    :class:`BranchTrackingLost` when ``check`` is set.
    """
    values = values.astype(complex)
    roots = np.sqrt(values)
    out = np.empty_like(roots)
    out[0] = start_sign * roots[0]
    for j in range(1, len(roots)):
        cand = roots[j]
        if abs(cand - out[j - 1]) > abs(-cand - out[j - 1]):
            cand = -cand
        prev, cur = values[j - 1], values[j]
        if check and prev != 0 and cur != 0 and np.isfinite(prev) and np.isfinite(cur):
            jump = abs(np.angle(cur / prev))
            if jump > math.pi / 2:
                t = None if times is None else float(times[j])
                raise BranchTrackingLost(f"radicand phase jump {jump:.3f} at t = {t!r}", t)
        out[j] = cand
    return out


@dataclass(frozen=True)
class VieteResult:
    sum_residual: np.ndarray
    diff_residual: np.ndarray

    @property
    def max_sum(self):
        return float(np.nanmax(self.sum_residual))

    @property
    def max_diff(self):
        return float(np.nanmax(self.diff_residual))

    def to_json(self):
        return {"max_sum_residual": self.max_sum, "max_diff_residual": self.max_diff}


def viete_residuals(track: SeparationTrack, traj: Trajectory = None, P=None) -> VieteResult:
    """``|s1 + s2 + B/A|`` and ``|(s2 - s1) A - sqrt(4 P(x1) P(x2))|`` per sample."""
    if P is None:
        P = default_family(traj.system, traj.params).P
    P1 = P.evaluate_array(track.x1).astype(complex)
    P2 = P.evaluate_array(track.x2).astype(complex)
    with np.errstate(all="ignore"):
        sres = np.abs(track.s1 + track.s2 + track.B / track.A)
    root = _continue_sqrt(4 * P1 * P2, times=track.times, check=False)
    if abs(root[0] - track.sqrt_disc[0]) > abs(root[0] + track.sqrt_disc[0]):
        root = -root
    dres = np.abs((track.s2 - track.s1) * track.A - root)
    return VieteResult(sres, dres)


def velocity_identity(traj: Trajectory, P=None):
    """``|-4 x_i'^2 - P(x_i) - (x1 - x2)^2 e_i|`` for ``i = 1, 2``, with ``x_i'`` from the field."""
    if traj.system not in (SystemId.S1_COMPLEX, SystemId.S1_REAL):
        raise ValueError("the velocity identity concerns the modal systems")
    if P is None:
        P = default_family(traj.system, traj.params).P
    z = _z(traj)
    if traj.system is SystemId.S1_REAL:
        f = vector_field(traj.system, traj.params, traj.states.T)
        xd1, xd2 = f[0] + 1j * f[1], f[0] - 1j * f[1]
    else:
        f = to_complex(vector_field(traj.system, traj.params, traj.states.T))
        xd1, xd2 = f[0], f[1]
    x1, x2, e1, e2 = z[:4]
    A = (x1 - x2) ** 2
    r1 = np.abs(-4 * xd1**2 - P.evaluate_array(x1) - A * e1)
    r2 = np.abs(-4 * xd2**2 - P.evaluate_array(x2) - A * e2)
    return r1, r2


# -- differential relations -----------------------------------------------------


@dataclass(frozen=True)
class QuadratureResult:
    """Residual series of a pair of differential relations at interior samples.

    ``res1``/``res2`` are in differential form (``ds`` is the central
    difference over one sample, the target of a ``dt`` term is ``i*dt``);
    ``order1``/``order2`` are convergence orders of the rates ``res/dt`` when
    the sampling interval is halved (``None`` if not measured).
    """

    name: str
    times: np.ndarray
    res1: np.ndarray
    res2: np.ndarray
    dt: float
    signs: tuple
    static: bool = False
    order1: float | None = None
    order2: float | None = None
    max1_half: float | None = None
    max2_half: float | None = None

    @property
    def max1(self):
        return float(np.max(np.abs(self.res1))) if self.res1.size else 0.0

    @property
    def max2(self):
        return float(np.max(np.abs(self.res2))) if self.res2.size else 0.0

    def res1_at(self, j):
        return self.res1[j - 1] if 0 < j <= len(self.res1) else complex("nan")

    def res2_at(self, j):
        return self.res2[j - 1] if 0 < j <= len(self.res2) else complex("nan")

    def to_json(self):
        return {
            "name": self.name,
            "dt": self.dt,
            "static": self.static,
            "max_res1": self.max1,
            "max_res2": self.max2,
            "max_res1_half_dt": self.max1_half,
            "max_res2_half_dt": self.max2_half,
            "order1": self.order1,
            "order2": self.order2,
            "initial_signs": list(self.signs),
        }


def convergence_order(coarse, fine, ratio=2.0):
    if fine == 0 or coarse == 0:
        return math.inf if fine == 0 else 0.0
    return math.log(coarse / fine) / math.log(ratio)


def _uniform_dt(traj):
    if traj.sample_dt is None or len(traj) < 3:
        raise ValueError("differential checks need a uniformly sampled trajectory with at least 3 samples")
    return float(traj.sample_dt)


def _is_static(traj):
    f = vector_field(traj.system, traj.params, traj.states[0])
    return float(np.max(np.abs(f))) < MIN_MOTION


def _quadrature_once(track, traj, P):
    dt = _uniform_dt(traj)
    z = _z(traj)
    k2 = z[2, 0] * z[3, 0]
    s1, s2 = track.s1, track.s2
    ds1 = (s1[2:] - s1[:-2]) / 2
    ds2 = (s2[2:] - s2[:-2]) / 2
    si1, si2 = s1[1:-1], s2[1:-1]
    phi1 = P.evaluate_array(si1) * (si1 * si1 - k2)
    phi2 = P.evaluate_array(si2) * (si2 * si2 - k2)
    times = track.times[1:-1]
    static = _is_static(traj)
    w1 = _continue_sqrt(phi1, times=times, check=not static)
    w2 = _continue_sqrt(phi2, times=times, check=not static)
    target = 1j * dt

    def residuals(a, b):
        u1, u2 = a * w1, b * w2
        with np.errstate(all="ignore"):
            return ds1 / u1 + ds2 / u2, si1 * ds1 / u1 + si2 * ds2 / u2 - target

    best = None
    for a, b in itertools.product((1.0, -1.0), repeat=2):
        r1, r2 = residuals(a, b)
        key = (round(abs(r1[0]) / dt, 6), abs(r2[0]))
        if best is None or key < best[0]:
            best = (key, (a, b), r1, r2)
    _, signs, r1, r2 = best
    return QuadratureResult("quadrature", times, r1, r2, dt, signs, static)


def _kowch_once(track, traj, P):
    dt = _uniform_dt(traj)
    z = _z(traj)
    x1, x2 = z[0], z[1]
    s1, s2 = track.s1, track.s2

    def cd(v):
        return (v[2:] - v[:-2]) / 2

    dx1, dx2, ds1, ds2 = cd(x1), cd(x2), cd(s1), cd(s2)
    times = track.times[1:-1]
    static = _is_static(traj)
    roots = [
        _continue_sqrt(P.evaluate_array(v[1:-1]), times=times, check=not static) for v in (x1, x2, s1, s2)
    ]

    def residuals(sg):
        a, b, c, d = (sg[i] * roots[i] for i in range(4))
        with np.errstate(all="ignore"):
            return dx1 / a + dx2 / b - ds1 / c, dx1 / a - dx2 / b + ds2 / d

    best = None
    for sg in itertools.product((1.0, -1.0), repeat=3):
        sg = (1.0,) + sg
        r1, r2 = residuals(sg)
        key = abs(r1[0]) + abs(r2[0])
        if best is None or key < best[0]:
            best = (key, sg, r1, r2)
    _, signs, r1, r2 = best
    return QuadratureResult("kowch", times, r1, r2, dt, signs, static)


def _with_order(once, track, traj, P, measure_order, F):
    res = once(track, traj, P)
    if not measure_order or res.static:
        return res
    fine = resample(traj, traj.sample_dt / 2)
    res_f = once(separation_roots(fine, F), fine, P)
    o1 = convergence_order(res.max1 / res.dt, res_f.max1 / res_f.dt)
    o2 = convergence_order(res.max2 / res.dt, res_f.max2 / res_f.dt)
    return replace(res, order1=o1, order2=o2, max1_half=res_f.max1, max2_half=res_f.max2)


def quadrature_residuals(track: SeparationTrack, traj: Trajectory, params=None, P=None, measure_order=True, F=None):
    """Residuals of ``ds1/sqrt(Phi(s1)) + ds2/sqrt(Phi(s2)) = 0`` and
    ``s1 ds1/sqrt(Phi(s1)) + s2 ds2/sqrt(Phi(s2)) = i dt``, ``Phi(s) = P(s)(s^2 - k^2)``.

    ``k^2`` is the initial ``e1 e2``.  Square roots are continued sample to
    sample; their initial signs minimize the first residual, then the second,
    at the first interior sample.  With ``measure_order`` the run is repeated
    at half the sampling interval to measure the convergence order.
    """
    if params is not None and params is not traj.params:
        traj = replace(traj, params=params)
    if P is None:
        P = default_family(traj.system, traj.params).P
    return _with_order(_quadrature_once, track, traj, P, measure_order, F)


def kowch_residuals(track: SeparationTrack, traj: Trajectory, P=None, measure_order=True, F=None):
    """Residuals of ``dx1/sqrt(P(x1)) + dx2/sqrt(P(x2)) = ds1/sqrt(P(s1))`` and
    ``dx1/sqrt(P(x1)) - dx2/sqrt(P(x2)) = -ds2/sqrt(P(s2))``.

    Initial square-root signs (up to an overall one) minimize the two residuals
    at the first interior sample.
    """
    if P is None:
        P = default_family(traj.system, traj.params).P
    return _with_order(_kowch_once, track, traj, P, measure_order, F)
