"""Adaptive Dormand–Prince 5(4) integration of catalogued systems.

The tableau and the fourth-order dense-output matrix are scipy's
(:class:`scipy.integrate.RK45`).  Step control is a PI controller on the
error per unit step (the embedded estimate divided by ``min(h, 1)``), which
makes the global error shrink faster than the tolerance.  Any
:class:`~kowtype.errors.SingularState` raised while evaluating the field ends
the run with ``termination="singularity"`` and a partial trajectory.
Complex charts are integrated as their 12 interleaved reals.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import RK45

from .catalog import State, SystemId, SystemParams, relation_names, relation_values, vector_field
from .errors import SingularState, StepUnderflow

__all__ = [
    "TolSpec",
    "Trajectory",
    "integrate",
    "integrate_rhs",
    "refine",
    "resample",
    "COMPLETED",
    "SINGULARITY",
    "STEP_UNDERFLOW",
]

COMPLETED = "completed"
SINGULARITY = "singularity"
STEP_UNDERFLOW = "step_underflow"

_A = RK45.A
_B = RK45.B
_C = RK45.C
_E = RK45.E
_P = RK45.P
_STAGES = RK45.n_stages

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0
BETA = 0.04
ALPHA = 0.25 - 0.75 * BETA
ERR_FLOOR = 1e-4
SINGULAR_RETRIES = 20


@dataclass(frozen=True)
class TolSpec:
    """Tolerances and step bounds; ``h_init=None`` picks a starting step, ``h_max=None`` means unbounded."""

    rtol: float = 1e-10
    atol: float = 1e-12
    h_init: float | None = None
    h_min: float = 1e-13
    h_max: float | None = None

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if not self.h_min > 0:
            raise ValueError("h_min must be positive")
        if self.h_init is not None and self.h_init < self.h_min:
            raise ValueError("h_init < h_min")
        if self.h_max is not None:
            if self.h_max < self.h_min or (self.h_init is not None and self.h_init > self.h_max):
                raise ValueError("need h_min <= h_init <= h_max")

    def scaled(self, factor):
        return replace(self, rtol=self.rtol / factor, atol=self.atol / factor)

    def to_json(self):
        return {"rtol": self.rtol, "atol": self.atol, "h_init": self.h_init, "h_min": self.h_min, "h_max": self.h_max}


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of one run.

    ``times``/``states`` are the uniform samples (rows are flat real state
    vectors); ``step_times``/``step_states`` are the accepted step endpoints.
    ``reverse`` marks a run of the negated field.
    """

    system: SystemId
    params: SystemParams
    times: np.ndarray
    states: np.ndarray
    step_stats: dict
    termination: str
    tol: TolSpec
    sample_dt: float
    t_end: float
    step_times: np.ndarray = field(default_factory=lambda: _frozen([]))
    step_states: np.ndarray = field(default_factory=lambda: _frozen(np.empty((0, 0))))
    reverse: bool = False
    message: str = ""

    def __post_init__(self):
        object.__setattr__(self, "system", SystemId(self.system))
        for name in ("times", "states", "step_times", "step_states"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def state(self, i) -> State:
        return State(self.system, self.states[i])

    @property
    def initial_state(self) -> State:
        return self.state(0)

    @property
    def complex_states(self) -> np.ndarray:
        """Samples as an ``(N, 6)`` complex array (complex charts only)."""
        if not self.system.is_complex:
            raise TypeError("S1_REAL trajectories are real")
        return self.states[:, 0::2] + 1j * self.states[:, 1::2]

    # -- export / import ------------------------------------------------------

    def to_json(self):
        return {
            "system": self.system.value,
            "params": self.params.to_json(),
            "tol": self.tol.to_json(),
            "sample_dt": self.sample_dt,
            "t_end": self.t_end,
            "reverse": self.reverse,
            "termination": self.termination,
            "message": self.message,
            "step_stats": self.step_stats,
            "times": self.times.tolist(),
            "states": self.states.tolist(),
        }

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        system = SystemId(data["system"])
        states = np.asarray(data["states"], dtype=float).reshape(-1, system.dim)
        return cls(
            system=system,
            params=SystemParams.from_json(data["params"]),
            times=np.asarray(data["times"], dtype=float),
            states=states,
            step_stats=dict(data["step_stats"]),
            termination=data["termination"],
            tol=TolSpec(**data["tol"]),
            sample_dt=data["sample_dt"],
            t_end=data["t_end"],
            reverse=data.get("reverse", False),
            message=data.get("message", ""),
        )

    def column_names(self):
        names = ["t"]
        if self.system.is_complex:
            for n in ("x1", "x2", "e1", "e2", "r", "gamma3"):
                names += [f"re_{n}", f"im_{n}"]
        else:
            names += ["p", "q", "r", "gamma1", "gamma2", "gamma3"]
        for n in relation_names(self.system):
            names += [f"re_I[{n}]", f"im_I[{n}]"]
        return names

    def _integral_rows(self):
        try:
            return relation_values(self.system, self.params, self.states.T).T
        except SingularState:
            pass
        rows = []
        for y in self.states:
            try:
                rows.append(relation_values(self.system, self.params, y))
            except SingularState:
                rows.append(np.full(len(relation_names(self.system)), complex("nan")))
        return np.array(rows)

    def to_csv(self) -> str:
        """CSV rows ``t, state..., integral values...`` (17 significant digits)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.column_names())
        vals = self._integral_rows() if len(self) else None
        for i, t in enumerate(self.times):
            row = [t, *self.states[i]]
            for v in vals[i]:
                row += [v.real, v.imag]
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


# -- core stepper ---------------------------------------------------------------


def _rms_norm(x):
    return math.sqrt(float(np.mean(x * x))) if x.size else 0.0


def _initial_step(fun, t0, y0, f0, rtol, atol, t_span):
    scale = atol + np.abs(y0) * rtol
    d0, d1 = _rms_norm(y0 / scale), _rms_norm(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, t_span)
    y1 = y0 + h0 * f0
    f1 = fun(t0 + h0, y1)
    d2 = _rms_norm((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, t_span)


def _dense(y_old, h, K, theta):
    Q = K.T @ _P
    p = np.cumprod(np.full(_P.shape[1], theta))
    return y_old + h * (Q @ p)


def integrate_rhs(fun, y0, t_end, tol=None, sample_dt=None):
    """Integrate ``y' = fun(t, y)`` on ``[0, t_end]``.

    Returns ``(sample_times, samples, step_times, step_states, stats,
    termination, message)``.  Samples are at multiples of ``sample_dt`` (and
    at every accepted step when it is ``None``).  A :class:`SingularState`
    raised by ``fun`` rejects the step and shrinks it; once the step would drop
    below ``h_min`` the run ends with ``termination="singularity"``.
    """
    tol = tol or TolSpec()
    y = np.array(y0, dtype=float)
    n = y.size
    t = 0.0
    rtol, atol = tol.rtol, tol.atol
    h_max = tol.h_max if tol.h_max is not None else t_end
    f = np.asarray(fun(t, y), dtype=float)
    nfev = 1
    h = tol.h_init if tol.h_init is not None else _initial_step(fun, t, y, f, rtol, atol, t_end)
    nfev += tol.h_init is None
    h = min(max(h, tol.h_min), h_max)

    if sample_dt is not None:
        nsamp = int(math.floor(t_end / sample_dt + 1e-9)) + 1
        grid = sample_dt * np.arange(nsamp)
    else:
        grid = None
    out_t, out_y = [0.0], [y.copy()]
    next_sample = 1
    step_t, step_y = [0.0], [y.copy()]
    stats = {"accepted": 0, "rejected": 0, "nfev": nfev, "h_min": math.inf, "h_max": 0.0}
    err_old = ERR_FLOOR
    rejected_last = False
    termination, message = COMPLETED, ""
    K = np.empty((_STAGES + 1, n))
    singular_hits = 0

    while t < t_end:
        if t + h > t_end or t_end - (t + h) < 1e-12 * max(1.0, t_end):
            h = t_end - t
        K[0] = f
        try:
            for s in range(1, _STAGES):
                dy = K[:s].T @ _A[s, :s] * h
                K[s] = fun(t + _C[s] * h, y + dy)
            y_new = y + h * (K[:_STAGES].T @ _B)
            f_new = np.asarray(fun(t + h, y_new), dtype=float)
        except SingularState as exc:
            stats["nfev"] += _STAGES
            stats["rejected"] += 1
            singular_hits += 1
            h *= 0.25
            if h < tol.h_min or singular_hits > SINGULAR_RETRIES:
                termination, message = SINGULARITY, f"t={t!r}: {exc}"
                break
            rejected_last = True
            continue
        stats["nfev"] += _STAGES
        K[_STAGES] = f_new
        err_vec = h * (K.T @ _E)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms_norm(err_vec / scale) / min(h, 1.0)
        if not np.isfinite(err):
            err = math.inf

        if err <= 1.0:
            t_new = t + h if h != t_end - t else t_end
            if grid is not None:
                while next_sample < len(grid) and grid[next_sample] <= t_new + 1e-12 * max(1.0, t_end):
                    ts = grid[next_sample]
                    if abs(ts - t_new) <= 1e-12 * max(1.0, t_end):
                        out_y.append(y_new.copy())
                    else:
                        out_y.append(_dense(y, h, K, (ts - t) / h))
                    out_t.append(ts)
                    next_sample += 1
            else:
                out_t.append(t_new)
                out_y.append(y_new.copy())
            stats["accepted"] += 1
            stats["h_min"] = min(stats["h_min"], h)
            stats["h_max"] = max(stats["h_max"], h)
            step_t.append(t_new)
            step_y.append(y_new.copy())
            fac = SAFETY * max(err, 1e-16) ** -ALPHA * err_old**BETA if err > 0 else FAC_MAX
            fac = min(FAC_MAX if not rejected_last else 1.0, max(FAC_MIN, fac))
            err_old = max(err, ERR_FLOOR)
            t, y, f = t_new, y_new, f_new
            h = min(h * fac, h_max)
            rejected_last = False
            singular_hits = 0
        else:
            stats["rejected"] += 1
            h *= max(FAC_MIN, SAFETY * err ** -ALPHA) if np.isfinite(err) else FAC_MIN
            rejected_last = True
        if h < tol.h_min and t < t_end:
            termination, message = STEP_UNDERFLOW, f"t={t!r}: step {h:.3g} below h_min {tol.h_min:.3g}"
            break

    if stats["h_min"] is math.inf:
        stats["h_min"] = 0.0
    return (np.array(out_t), np.array(out_y), np.array(step_t), np.array(step_y), stats, termination, message)


def integrate(system, params, state0, t_end, tol=None, sample_dt=None, reverse=False, raise_on_underflow=False):
    """Integrate a catalogued system from ``state0`` for time ``t_end``.

    ``state0`` is a :class:`State` or a raw real vector.  A singular initial
    state raises :class:`SingularState`; later singularities and step
    underflow end the run early and are recorded in ``termination``
    (``raise_on_underflow`` turns the latter into :class:`StepUnderflow`).
    ``reverse`` integrates the negated field, so that following a forward
    run with a reverse one from its final state returns to the start.
    """
    if isinstance(state0, State):
        system, y0 = state0.system, state0.values
    else:
        system = SystemId(system)
        y0 = State(system, state0).values
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if sample_dt is not None and not sample_dt > 0:
        raise ValueError("sample_dt must be positive")
    tol = tol or TolSpec()
    sign = -1.0 if reverse else 1.0

    def fun(t, y):
        return sign * vector_field(system, params, y)

    fun(0.0, y0)  # SingularState at t = 0 propagates
    times, states, st, sy, stats, term, msg = integrate_rhs(fun, y0, t_end, tol, sample_dt)
    if term == STEP_UNDERFLOW and raise_on_underflow:
        raise StepUnderflow(msg)
    return Trajectory(system, params, times, states, stats, term, tol, sample_dt, t_end, st, sy, reverse, msg)


def refine(traj: Trajectory, factor=10.0) -> Trajectory:
    """Re-run ``traj`` from its initial state with ``rtol``/``atol`` divided by ``factor``."""
    if not factor > 1:
        raise ValueError("factor must exceed 1")
    return integrate(
        traj.system, traj.params, traj.states[0], traj.t_end, traj.tol.scaled(factor), traj.sample_dt, traj.reverse
    )


def resample(traj: Trajectory, sample_dt) -> Trajectory:
    """Re-run ``traj`` with the same tolerances and a different sampling interval."""
    return integrate(traj.system, traj.params, traj.states[0], traj.t_end, traj.tol, sample_dt, traj.reverse)
