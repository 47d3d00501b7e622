"""``kowtype`` command line: ``catalog``, ``simulate`` and ``verify``.

Exit codes: 0 success, 1 a check failed (or integration underflowed),
2 bad configuration, 3 a singular state stopped an integration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import catalog as cat
from .catalog import SystemId, SystemParams
from .errors import ConfigError, SingularState
from .integrator import COMPLETED, SINGULARITY, TolSpec, Trajectory, integrate
from .suite import TARGETS, SingularAbort, SuiteConfig, run_target
from .verifier import drift_report

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SINGULAR = 0, 1, 2, 3

PARAM_KEYS = ("g2", "g3", "a", "b", "c", "k", "d", "eps_sing")
TOL_KEYS = ("rtol", "atol", "h_init", "h_min", "h_max")
INITIAL_KEYS = ("seed", "on_invariant_set", "state")
SUITE_KEYS = ("rational_instances", "theorem_points", "measure_states")
TOP_KEYS = ("system", "params", "initial", "t_end", "tol", "sample_dt", "out", "checks", "suite")

DEFAULT_PARAMS = {"g2": 0.3}


@dataclass(frozen=True)
class RunConfig:
    """A complete run description.

    Defaults: every applicable system for ``verify`` (S1_COMPLEX for
    ``simulate``), ``g2 = 0.3``, seeded sampling on the invariant set with
    seed 0, ``t_end = 5``, ``rtol = 1e-10``, ``atol = 1e-12``,
    ``sample_dt = 1e-3``, all verification targets.
    """

    system: SystemId | None = None
    params: SystemParams = field(default_factory=lambda: SystemParams(**DEFAULT_PARAMS))
    seed: int = 0
    on_invariant_set: bool = True
    state: tuple | None = None
    t_end: float = 5.0
    tol: TolSpec = field(default_factory=TolSpec)
    sample_dt: float = 1e-3
    out: str | None = None
    checks: tuple = TARGETS
    suite: dict = field(default_factory=dict)

    def suite_config(self):
        return SuiteConfig(
            systems=None if self.system is None else (self.system,),
            params=self.params,
            seed=self.seed,
            t_end=self.t_end,
            tol=self.tol,
            sample_dt=self.sample_dt,
            initial_state=self.state,
            on_invariant_set=self.on_invariant_set,
            **self.suite,
        )

    def to_json(self):
        return {
            "system": None if self.system is None else self.system.value,
            "params": self.params.to_json(),
            "initial": {"seed": self.seed, "on_invariant_set": self.on_invariant_set, "state": None if self.state is None else list(self.state)},
            "t_end": self.t_end,
            "tol": self.tol.to_json(),
            "sample_dt": self.sample_dt,
            "out": self.out,
            "checks": list(self.checks),
            "suite": dict(self.suite),
        }


# -- config parsing -------------------------------------------------------------


def _expect_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError("expected an object", where)
    for key in obj:
        if key not in allowed:
            raise ConfigError("unknown key", f"{where}.{key}")


def _number(v, where, positive=False, allow_none=False, allow_complex=False):
    if v is None and allow_none:
        return None
    if allow_complex and isinstance(v, list) and len(v) == 2 and all(_is_real(x) for x in v):
        return complex(v[0], v[1])
    if not _is_real(v):
        raise ConfigError("expected a number", where)
    if positive and not v > 0:
        raise ConfigError("expected a positive number", where)
    return float(v)


def _is_real(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _system(v, where):
    try:
        return SystemId(v)
    except ValueError:
        raise ConfigError(f"unknown system {v!r}; expected one of {[s.value for s in SystemId]}", where) from None


def parse_config(data) -> RunConfig:
    """Build a :class:`RunConfig` from a parsed JSON document; raises :class:`ConfigError`."""
    _expect_keys(data, TOP_KEYS, "$")
    kw = {}
    if data.get("system") is not None:
        kw["system"] = _system(data["system"], "$.system")
    if "params" in data:
        _expect_keys(data["params"], PARAM_KEYS, "$.params")
        p = dict(DEFAULT_PARAMS)
        for key, val in data["params"].items():
            where = f"$.params.{key}"
            if key == "eps_sing":
                p[key] = _number(val, where, positive=True)
            elif key == "g2":
                p[key] = _number(val, where)
            else:
                p[key] = _number(val, where, allow_none=key in ("k", "d"), allow_complex=True)
        kw["params"] = SystemParams(**p)
    if "initial" in data:
        ini = data["initial"]
        _expect_keys(ini, INITIAL_KEYS, "$.initial")
        if "seed" in ini:
            if not isinstance(ini["seed"], int) or isinstance(ini["seed"], bool) or ini["seed"] < 0:
                raise ConfigError("expected a non-negative integer", "$.initial.seed")
            kw["seed"] = ini["seed"]
        if "on_invariant_set" in ini:
            if not isinstance(ini["on_invariant_set"], bool):
                raise ConfigError("expected true or false", "$.initial.on_invariant_set")
            kw["on_invariant_set"] = ini["on_invariant_set"]
        if ini.get("state") is not None:
            kw["state"] = _state(ini["state"], "$.initial.state")
    for key in ("t_end", "sample_dt"):
        if key in data:
            kw[key] = _number(data[key], f"$.{key}", positive=True)
    if "tol" in data:
        _expect_keys(data["tol"], TOL_KEYS, "$.tol")
        t = {}
        for key, val in data["tol"].items():
            t[key] = _number(val, f"$.tol.{key}", positive=True, allow_none=key in ("h_init", "h_max"))
        try:
            kw["tol"] = TolSpec(**t)
        except ValueError as exc:
            raise ConfigError(f"{exc}", "$.tol") from None
    if "out" in data:
        if data["out"] is not None and not isinstance(data["out"], str):
            raise ConfigError("expected a path string", "$.out")
        kw["out"] = data["out"]
    if "checks" in data:
        checks = data["checks"]
        if not isinstance(checks, list):
            raise ConfigError("expected a list", "$.checks")
        for i, c in enumerate(checks):
            if c not in TARGETS:
                raise ConfigError(f"unknown target {c!r}", f"$.checks[{i}]")
        kw["checks"] = tuple(sorted(set(checks)))
    if "suite" in data:
        _expect_keys(data["suite"], SUITE_KEYS, "$.suite")
        for key, val in data["suite"].items():
            if not isinstance(val, int) or isinstance(val, bool) or val < 1:
                raise ConfigError("expected a positive integer", f"$.suite.{key}")
        kw["suite"] = dict(data["suite"])
    cfg = RunConfig(**kw)
    if cfg.state is not None:
        if cfg.system is None:
            raise ConfigError("an explicit state needs $.system", "$.initial.state")
        if len(cfg.state) != cfg.system.dim:
            raise ConfigError(f"{cfg.system.value} needs {cfg.system.dim} reals", "$.initial.state")
    return cfg


def _state(v, where):
    if not isinstance(v, list):
        raise ConfigError("expected a list", where)
    flat = []
    for i, x in enumerate(v):
        if isinstance(x, list):
            if len(x) != 2 or not all(_is_real(c) for c in x):
                raise ConfigError("expected [re, im]", f"{where}[{i}]")
            flat += [float(x[0]), float(x[1])]
        elif _is_real(x):
            flat.append(float(x))
        else:
            raise ConfigError("expected a number", f"{where}[{i}]")
    return tuple(flat)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{exc.strerror}", str(path)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}: {exc.msg}", f"line {exc.lineno}") from None
    return parse_config(data)


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    kw = {}
    if getattr(args, "system", None):
        kw["system"] = _system(args.system, "--system")
    if getattr(args, "seed", None) is not None:
        if args.seed < 0:
            raise ConfigError("expected a non-negative integer", "--seed")
        kw["seed"] = args.seed
    if getattr(args, "t_end", None) is not None:
        kw["t_end"] = _number(args.t_end, "--t-end", positive=True)
    if getattr(args, "sample_dt", None) is not None:
        kw["sample_dt"] = _number(args.sample_dt, "--sample-dt", positive=True)
    if getattr(args, "tol", None) is not None:
        r = _number(args.tol, "--tol", positive=True)
        kw["tol"] = replace(cfg.tol, rtol=r, atol=r / 100)
    if getattr(args, "out", None) is not None:
        kw["out"] = args.out
    cfg = replace(cfg, **kw)
    if cfg.state is not None and (cfg.system is None or len(cfg.state) != cfg.system.dim):
        raise ConfigError("state does not fit the selected system", "$.initial.state")
    return cfg


# -- output ---------------------------------------------------------------------


def _clean(obj):
    """Make ``obj`` JSON-ready: complex to ``[re, im]``, numpy scalars to Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    if hasattr(obj, "item"):
        return _clean(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def dumps(obj) -> str:
    """Deterministic JSON (sorted keys, shortest round-trip floats)."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _write(out_dir, name, text):
    path = Path(out_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return str(path)


# -- commands -------------------------------------------------------------------


def cmd_catalog(args):
    entries = []
    for sid in SystemId:
        meta = cat.CATALOG[sid]
        entries.append({"id": sid.value, "dim_real": sid.dim, **meta})
    if args.json:
        sys.stdout.write(dumps({"systems": entries}))
    else:
        for e in entries:
            density = e["density"] or "none known"
            print(f"{e['id']:<12} {e['equation']:<10} chart ({', '.join(e['chart'])})")
            print(f"{'':<12} parameters: {', '.join(e['field_parameters']) or 'none'}; integrals: {', '.join(e['integrals'])}; density: {density}")
    return EXIT_OK


def _simulate_initial(cfg):
    system = cfg.system or SystemId.S1_COMPLEX
    if cfg.state is not None:
        st = cat.State(system, cfg.state)
        return system, st, cat.fill_labels(system, cfg.params, st)
    st, pp = cat.sample_initial_state(system, cfg.params, cfg.seed, on_invariant_set=cfg.on_invariant_set)
    return system, st, pp


def cmd_simulate(cfg: RunConfig, as_json):
    out_dir = cfg.out or "kowtype-out"
    system, st, pp = _simulate_initial(cfg)
    try:
        traj = integrate(system, pp, st, cfg.t_end, cfg.tol, cfg.sample_dt)
    except SingularState as exc:
        traj = Trajectory(system, pp, [0.0], [st.values], {"accepted": 0, "rejected": 0}, SINGULARITY, cfg.tol, cfg.sample_dt, cfg.t_end, message=str(exc))
    files = [_write(out_dir, "trajectory.json", dumps(traj.to_json())), _write(out_dir, "trajectory.csv", traj.to_csv())]
    summary = {"system": system.value, "termination": traj.termination, "message": traj.message, "samples": len(traj), "files": files}
    if traj.termination != SINGULARITY or len(traj) > 1:
        try:
            drift = drift_report(traj)
            files.append(_write(out_dir, "drift.json", dumps(drift.to_json())))
            summary["max_drift"] = {e.name: e.max_drift for e in drift.entries}
        except SingularState:
            pass
    if as_json:
        sys.stdout.write(dumps(summary))
    else:
        print(f"{system.value}: {traj.termination} after {len(traj)} samples; wrote {', '.join(files)}")
        if traj.message:
            print(f"  {traj.message}")
    if traj.termination == COMPLETED:
        return EXIT_OK
    return EXIT_SINGULAR if traj.termination == SINGULARITY else EXIT_FAIL


def cmd_verify(cfg: RunConfig, target, as_json):
    scfg = cfg.suite_config()
    targets = cfg.checks if target == "all" else (target,)
    checks, aborted = [], None
    for t in targets:
        try:
            checks += run_target(t, scfg)
        except SingularAbort as exc:
            checks += exc.checks
            aborted = str(exc)
            break
    counts = {s: sum(c.status == s for c in checks) for s in ("pass", "fail", "finding")}
    if aborted is not None:
        code = EXIT_SINGULAR
    elif counts["fail"]:
        code = EXIT_FAIL
    else:
        code = EXIT_OK
    report = {
        "target": target,
        "config": cfg.to_json(),
        "checks": [c.to_json() for c in checks],
        "summary": counts,
        "aborted": aborted,
        "exit_code": code,
    }
    text = dumps(report)
    if cfg.out:
        _write(cfg.out, f"verify-{target}.json", text)
    if as_json:
        sys.stdout.write(text)
    else:
        for c in checks:
            val = "" if c.value is None else f" value={c.value:.3g}" if isinstance(c.value, float) else f" value={c.value}"
            thr = "" if c.threshold is None else f" threshold={c.threshold:g}"
            print(f"{c.status.upper():<8} [{c.target}] {c.name}: {c.identity}{val}{thr}")
        print(f"{counts['pass']} pass, {counts['fail']} fail, {counts['finding']} finding" + (f"; aborted: {aborted}" if aborted else ""))
    return code


# -- entry point ----------------------------------------------------------------


def _common(p):
    p.add_argument("--config", metavar="PATH", help="JSON run configuration")
    p.add_argument("--system", metavar="ID", help="system id (S1_REAL, S1_COMPLEX, S2_TWOPARAM, S3_CUBIC)")
    p.add_argument("--seed", type=int, metavar="N", help="seed of the initial-state sampler")
    p.add_argument("--t-end", type=float, metavar="T", help="integration time")
    p.add_argument("--tol", type=float, metavar="R", help="relative tolerance (absolute tolerance is R/100)")
    p.add_argument("--sample-dt", type=float, metavar="D", help="output sampling interval")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--json", action="store_true", help="print JSON")


def build_parser():
    parser = argparse.ArgumentParser(prog="kowtype", description="Kowalevski-type systems: simulate and verify.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("catalog", help="list the catalogued systems")
    p.add_argument("--json", action="store_true", help="print JSON")
    p = sub.add_parser("simulate", help="integrate one system and export the trajectory")
    _common(p)
    p = sub.add_parser("verify", help="run verification checks")
    p.add_argument("target", choices=(*TARGETS, "all"))
    _common(p)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "catalog":
        return cmd_catalog(args)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = _apply_flags(cfg, args)
    except ConfigError as exc:
        print(f"kowtype: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "simulate":
        return cmd_simulate(cfg, args.json)
    return cmd_verify(cfg, args.target, args.json)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
