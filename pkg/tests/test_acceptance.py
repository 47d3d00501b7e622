"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Each criterion test evaluates its identities exactly as stated, so a stated
identity that does not hold makes the test fail.  Where that happens a
``*_corrected`` test checks the form that does hold.

Run alone with ``python tests/test_acceptance.py`` or through pytest; the
pytest summary lists every criterion line.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction

import numpy as np
import pytest

from kowtype import catalog as cat
from kowtype import verifier as ver
from kowtype.catalog import State, SystemId, SystemParams
from kowtype.cli import main as cli_main
from kowtype.closed_forms import cubic_coefficients, modal_coefficients
from kowtype.families import cubic_family, kowalevski_q, modal_family
from kowtype.integrator import TolSpec, integrate, refine
from kowtype.poly import UniPoly, outer
from kowtype.separability import discriminant_in
from kowtype.theorem import MINUS, PLUS, thm1_coefficients, verify_coefficient_system, verify_E_quadratic

RESULTS: dict = {}

LIMITS = {1: 5.0, 2: 10.0, 3: 5.0, 4: 20.0, 5: 15.0, 6: 30.0, 7: 2.0, 8: 90.0}


def record(crit, name, ok, detail=""):
    RESULTS.setdefault(crit, []).append((name, bool(ok), detail))
    print(f"  C{crit} {'pass' if ok else 'FAIL'}  {name}  {detail}")


def summary_lines():
    lines = []
    for crit in sorted(RESULTS):
        subs = RESULTS[crit]
        literal = [s for s in subs if not s[0].startswith("corrected")]
        ok = all(s[1] for s in literal)
        failing = ", ".join(s[0] for s in literal if not s[1])
        lines.append(f"CRITERION {crit}: {'PASS' if ok else 'FAIL'}" + (f"  (failing: {failing})" if failing else ""))
        for name, good, detail in subs:
            lines.append(f"    {'pass' if good else 'FAIL'}  {name}  {detail}")
    return lines


def _gate(crit, start):
    elapsed = time.perf_counter() - start
    record(crit, "runtime", elapsed < LIMITS[crit], f"{elapsed:.2f} s < {LIMITS[crit]:g} s")
    bad = [s[0] for s in RESULTS[crit] if not s[1] and not s[0].startswith("corrected")]
    assert not bad, f"criterion {crit} failing: {bad}"


def _q(rng):
    return Fraction(rng.randint(-20, 20), rng.randint(1, 9))


def _on(P, var):
    return P.with_vars((var,))


# -- criterion 1 ------------------------------------------------------------------


def _criterion1_data(n=20, seed=0):
    rng = random.Random(seed)
    modal_bad = cubic_unit_bad = cubic_true_bad = 0
    for _ in range(n):
        fam = modal_family(_q(rng), _q(rng))
        F, P = fam.F, fam.P
        modal_bad += not (
            discriminant_in(F, "s") == outer(_on(P, "x1"), _on(P, "x2")) * 4
            and discriminant_in(F, "x1") == outer(_on(P, "x2"), _on(P, "s")) * 4
            and discriminant_in(F, "x2") == outer(_on(P, "x1"), _on(P, "s")) * 4
        )
        a, b, c = _q(rng), _q(rng), _q(rng)
        fam = cubic_family(a, b, c)
        F, P = fam.F, fam.P
        Ds, Dx1, Dx2 = (discriminant_in(F, v) for v in ("s", "x1", "x2"))
        cubic_unit_bad += not (
            Ds == outer(_on(P, "x1"), _on(P, "x2"))
            and Dx1 == outer(_on(P, "x2"), _on(P, "s"))
            and Dx2 == outer(_on(P, "x1"), _on(P, "s"))
        )
        Pm = UniPoly([c, -b, a, -2], "s")
        cubic_true_bad += not (
            Ds == outer(_on(P, "x1"), _on(P, "x2")) * 4
            and Dx1 == outer(_on(P, "x2"), Pm) * 4
            and Dx2 == outer(_on(P, "x1"), Pm) * 4
        )
    fx = kowalevski_q(1, 1, 2, 1)
    Q = fx.Q
    q_s = discriminant_in(Q, "s") == outer(_on(fx.P, "x1"), _on(fx.P, "x2")) * 4
    Dx1 = discriminant_in(Q, "x1")
    Dx2 = discriminant_in(Q, "x2")
    q_minus8 = Dx1 == outer(_on(fx.P, "x2"), fx.J) * -8 and Dx2 == outer(_on(fx.P, "x1"), fx.J) * -8
    q_plus8 = Dx1 == outer(_on(fx.P, "x2"), fx.J) * 8 and Dx2 == outer(_on(fx.P, "x1"), fx.J) * 8
    return modal_bad, cubic_unit_bad, cubic_true_bad, q_s, q_minus8, q_plus8


def test_criterion_1_separability():
    start = time.perf_counter()
    n = 20
    modal_bad, unit_bad, _, q_s, q_minus8, _ = _criterion1_data(n)
    record(1, "modal D_s, D_x1, D_x2 = 4 P P", modal_bad == 0, f"{n - modal_bad}/{n} instances exact")
    record(1, "cubic discriminants with multiplier 1", unit_bad == 0, f"{n - unit_bad}/{n} instances exact")
    record(1, "Q: D_s Q = 4 P(x1) P(x2)", q_s)
    record(1, "Q: D_x1 Q = -8 J(s) P(x2)", q_minus8)
    _gate(1, start)


def test_criterion_1_corrected():
    n = 20
    _, _, true_bad, _, _, q_plus8 = _criterion1_data(n)
    record(1, "corrected: cubic multiplier 4 with P(-s) in the s-factor", true_bad == 0, f"{n - true_bad}/{n} instances exact")
    record(1, "corrected: Q: D_x1 Q = +8 J(s) P(x2)", q_plus8)
    assert true_bad == 0 and q_plus8


# -- criterion 2 ------------------------------------------------------------------

KEYS = ("p1", "p2", "q1", "q2", "r1", "r2", "E", "F", "G")


def _points(seed, n=100):
    rng = random.Random(seed)
    pts = []
    while len(pts) < n:
        x1, x2 = _q(rng), _q(rng)
        if x1 and x2 and x1 != x2 and x1 != -x2:
            pts.append((x1, x2))
    return pts


def _third_equations(table, P, x1, x2, m=(2, 0)):
    # E x^{2m} + 2 F x^{m+n} + G x^{2n} = P(x) for both coordinates
    mm, nn = m
    return [table["E"] * x ** (2 * mm) + 2 * table["F"] * x ** (mm + nn) + table["G"] * x ** (2 * nn) - P(x) for x in (x1, x2)]


def _criterion2_data(seed=0):
    rng = random.Random(seed)
    g2, g3 = _q(rng), _q(rng)
    while g3 == 0:
        g3 = _q(rng)
    a, b, c = _q(rng), _q(rng), _q(rng)
    while b == 0 and c == 0:
        b = _q(rng)
    modal, cubic = modal_family(g2, g3), cubic_family(a, b, c)
    pts = _points(seed + 1)
    out = {}
    for label, prof, fam, branches in (("modal", (2, 0, 2, 0), modal, (PLUS, MINUS)), ("cubic", (1, 0, 1, 0), cubic, (MINUS, PLUS))):
        sys_bad = quad_bad = 0
        for branch in branches:
            cs = thm1_coefficients(prof, fam.A, fam.C, fam.P, B=fam.B, branch=branch)
            for x1, x2 in pts:
                sys_bad += any(r != 0 for r in verify_coefficient_system(cs, x1, x2))
                quad_bad += verify_E_quadratic(cs, fam.C, x1, x2) != 0
        out[label] = (sys_bad, quad_bad)

    def mismatch(cs, closed):
        return sum(any(cs.table(x1, x2)[k] != closed(x1, x2)[k] for k in KEYS) for x1, x2 in pts)

    def off_system(closed, P, m):
        return sum(any(r != 0 for r in _third_equations(closed(x1, x2), P, x1, x2, m)) for x1, x2 in pts)

    cs_m = thm1_coefficients((2, 0, 2, 0), modal.A, modal.C, modal.P, B=modal.B, branch=PLUS)
    cs_c1 = thm1_coefficients((1, 0, 1, 0), cubic.A, cubic.C, cubic.P, B=cubic.B, branch=MINUS)
    cs_c2 = thm1_coefficients((1, 0, 1, 0), cubic.A, cubic.C, cubic.P, B=cubic.B, branch=PLUS)
    printed18 = modal_coefficients(g2, g3, variant=True)
    printed33 = cubic_coefficients(a, b, c, "plus", variant=True)
    out["eq18 printed"] = (mismatch(cs_m, printed18), off_system(printed18, modal.P, (2, 0)))
    out["eq18 corrected"] = (mismatch(cs_m, modal_coefficients(g2, g3)), 0)
    out["eq32"] = (mismatch(cs_c1, cubic_coefficients(a, b, c, "minus")), off_system(cubic_coefficients(a, b, c, "minus"), cubic.P, (1, 0)))
    out["eq33 printed"] = (mismatch(cs_c2, printed33), off_system(printed33, cubic.P, (1, 0)))
    out["eq33 corrected"] = (mismatch(cs_c2, cubic_coefficients(a, b, c, "plus")), 0)
    out["points"] = len(pts)
    return out


def test_criterion_2_theorem():
    start = time.perf_counter()
    d = _criterion2_data()
    n = d["points"]
    for label in ("modal", "cubic"):
        sys_bad, quad_bad = d[label]
        record(2, f"{label}: six proof equations = 0, both branches", sys_bad == 0, f"{2 * n - sys_bad}/{2 * n} exact")
        record(2, f"{label}: phi(E) quadratic = 0, both branches", quad_bad == 0, f"{2 * n - quad_bad}/{2 * n} exact")
    m, off = d["eq18 printed"]
    record(2, "coefficient set reproduces the modal relations as displayed (+g3/2)", m == 0, f"{m}/{n} points differ; printed set violates E x^4 + G = P(x) at {off}/{n}")
    m, off = d["eq32"]
    record(2, "coefficient set reproduces E1, F1, G1", m == 0, f"{m}/{n} points differ")
    m, off = d["eq33 printed"]
    record(2, "coefficient set reproduces E2, F2, G2 as displayed", m == 0, f"{m}/{n} points differ; printed set violates E x^2 + 2 F x + G = P(x) at {off}/{n}")
    _gate(2, start)


def test_criterion_2_corrected():
    d = _criterion2_data()
    record(2, "corrected: modal relations with -g3/2", d["eq18 corrected"][0] == 0)
    record(2, "corrected: F2 with the b, c part subtracted", d["eq33 corrected"][0] == 0)
    assert d["eq18 corrected"][0] == 0 and d["eq33 corrected"][0] == 0


# -- criterion 3 ------------------------------------------------------------------


def _states(system, n, seed, params):
    rng = np.random.default_rng(seed)
    return np.array([cat.sample_initial_state(system, params, int(s))[0].values for s in rng.integers(0, 2**31, n)]).T


def test_criterion_3_measure():
    start = time.perf_counter()
    params = SystemParams(g2=0.3)
    n = 1000
    y = _states(SystemId.S1_REAL, n, 0, params)
    # both signs of p
    y[0, ::2] *= -1
    v = np.max(np.abs(cat.numerical_divergence(SystemId.S1_REAL, params, y, weight=lambda s, yy: 1 / (4 * yy[0] ** 2))))
    record(3, "S1_REAL: |div(X/(4p^2))| <= 1e-8", v <= 1e-8, f"max {v:.2e} over {n} states")
    v = np.max(np.abs(cat.numerical_divergence(SystemId.S1_REAL, params, y) - 2 * y[1] * y[2]))
    record(3, "S1_REAL: div X = 2qr to 1e-8", v <= 1e-8, f"max {v:.2e}")
    y = _states(SystemId.S1_COMPLEX, n, 1, params)

    def mu(s, yy):
        z = cat.to_complex(yy)
        return 1 / (z[0] + z[1]) ** 2

    v = np.max(np.abs(cat.numerical_divergence(SystemId.S1_COMPLEX, params, y, weight=mu)))
    record(3, "S1_COMPLEX: |div(X/(x1+x2)^2)| <= 1e-8", v <= 1e-8, f"max {v:.2e}")
    y = _states(SystemId.S3_CUBIC, n, 2, params)
    v = np.max(np.abs(cat.numerical_divergence(SystemId.S3_CUBIC, params, y)))
    record(3, "S3_CUBIC: div X = 0 to 1e-8", v <= 1e-8, f"max {v:.2e}")
    _gate(3, start)


# -- criterion 4 ------------------------------------------------------------------


def test_criterion_4_conservation():
    start = time.perf_counter()
    tol = TolSpec(rtol=1e-10, atol=1e-12)
    runs = []
    st = State.from_complex(SystemId.S3_CUBIC, [1, 0, 1, 1, 1, 0])
    runs.append(("S3_CUBIC from (1,0,1,1,1,0)", integrate(SystemId.S3_CUBIC, SystemParams(), st, 5.0, tol, 1e-3), 1e-8))
    st, pp = cat.sample_initial_state(SystemId.S3_CUBIC, SystemParams(), 0)
    runs.append(("S3_CUBIC seed 0", integrate(SystemId.S3_CUBIC, pp, st, 5.0, tol, 1e-3), 1e-8))
    st, pp = cat.sample_initial_state(SystemId.S1_COMPLEX, SystemParams(g2=0.3), 0, on_invariant_set=True)
    runs.append(("S1_COMPLEX seed 0 on the invariant set", integrate(SystemId.S1_COMPLEX, pp, st, 5.0, tol, 1e-3), 1e-7))
    for label, tr, thr in runs:
        rep = ver.drift_report(tr)
        detail = ", ".join(f"{e.name} {e.max_drift:.1e}" for e in rep.entries)
        record(4, f"{label}: drift <= {thr:g}", tr.termination == "completed" and rep.max_drift <= thr, detail)
        fine = ver.drift_report(refine(tr, 10))
        ratios = [e.max_drift / max(f.max_drift, 1e-300) for e, f in zip(rep.entries, fine.entries) if e.max_drift > 1e-14]
        worst = min(ratios)
        record(4, f"{label}: tolerance / 10 shrinks drift >= 10x", worst >= 10, f"smallest ratio {worst:.1f}")
    _gate(4, start)


# -- criterion 5 ------------------------------------------------------------------


def test_criterion_5_classification():
    start = time.perf_counter()
    params = SystemParams(g2=0.3, g3=0.2)
    outcomes = {}
    for system in (SystemId.S1_COMPLEX, SystemId.S2_TWOPARAM, SystemId.S3_CUBIC):
        for i, name in enumerate(cat.relation_names(system)):
            outcomes[(system, name)] = ver.classify_relation(system, params, i, seed=0)
    for system in (SystemId.S1_COMPLEX, SystemId.S2_TWOPARAM, SystemId.S3_CUBIC):
        name = cat.relation_names(system)[3]
        cl = outcomes[(system, name)]
        record(5, f"{system.value}: {name} is a first integral", cl.kind == ver.FIRST_INTEGRAL, f"generic max {cl.generic_max:.1e}")
    for name in ("a", "b", "c"):
        cl = outcomes[(SystemId.S3_CUBIC, name)]
        record(5, f"S3_CUBIC: {name} is a first integral", cl.kind == ver.FIRST_INTEGRAL, f"generic max {cl.generic_max:.1e}")
    for name in ("r^2", "r*gamma3", "gamma3^2"):
        cl = outcomes[(SystemId.S1_COMPLEX, name)]
        record(5, f"S1_COMPLEX: {name} is preserved", cl.kind != ver.NOT_INVARIANT, f"{cl.kind}; generic {cl.generic_max:.1e}, on set {cl.on_set_max:.1e}")
    for name in ("r^2", "r*gamma3", "gamma3^2"):
        cl = outcomes[(SystemId.S2_TWOPARAM, name)]
        # attempted; not_invariant is an accepted outcome that is recorded, not failed
        record(5, f"S2_TWOPARAM: {name} attempted (outcome recorded)", True, f"{cl.kind}; generic {cl.generic_max:.1e}, on set {cl.on_set_max:.1e}")
    _gate(5, start)


# -- criterion 6 ------------------------------------------------------------------


def test_criterion_6_quadrature():
    start = time.perf_counter()
    st, pp = cat.sample_initial_state(SystemId.S1_COMPLEX, SystemParams(g2=0.3), 0, on_invariant_set=True)
    tr = integrate(SystemId.S1_COMPLEX, pp, st, 5.0, TolSpec(), 1e-3)
    track = ver.separation_roots(tr)
    vi = ver.viete_residuals(track, tr)
    record(6, "Viete sum <= 1e-9", vi.max_sum <= 1e-9, f"{vi.max_sum:.1e}")
    record(6, "Viete difference <= 1e-9", vi.max_diff <= 1e-9, f"{vi.max_diff:.1e}")
    r1, r2 = ver.velocity_identity(tr)
    v = float(max(r1.max(), r2.max()))
    record(6, "velocity identity <= 1e-8", v <= 1e-8, f"{v:.1e}")
    q = ver.quadrature_residuals(track, tr)
    kw = ver.kowch_residuals(track, tr)
    record(6, "quadrature res1 order >= 1.8", q.order1 >= 1.8, f"order {q.order1:.2f} (max {q.max1:.1e} -> {q.max1_half:.1e})")
    record(6, "quadrature res2 (target i dt) order >= 1.8", q.order2 >= 1.8, f"order {q.order2:.2f} (max {q.max2:.1e} -> {q.max2_half:.1e})")
    record(6, "differential relation 1 order >= 1.8", kw.order1 >= 1.8, f"order {kw.order1:.2f}")
    record(6, "differential relation 2 order >= 1.8", kw.order2 >= 1.8, f"order {kw.order2:.2f}")
    _gate(6, start)


# -- criterion 7 ------------------------------------------------------------------


def _real_states(n, seed):
    rng = np.random.default_rng(seed)
    return np.vstack([rng.uniform(0.5, 2.0, n) * rng.choice([-1, 1], n), rng.uniform(-1, 1, (5, n))]).T


def _pushforward_gap(field, params, ys):
    worst = 0.0
    for y in ys:
        lhs = cat.pushforward(y, field(params, y))
        rhs = cat.complex_field(SystemId.S1_COMPLEX, params, cat.change_chart(y))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def test_criterion_7_chart():
    start = time.perf_counter()
    params = SystemParams(g2=0.3)
    ys = _real_states(100, 0)
    rt = max(float(np.max(np.abs(cat.inverse_chart(cat.change_chart(y)) - y))) for y in ys)
    record(7, "chart round trip <= 1e-14", rt <= 1e-14, f"{rt:.1e}")
    gap = _pushforward_gap(cat.s1_real_variant_field, params, ys)
    record(7, "pushforward of the real field as displayed = complex field", gap <= 1e-12, f"max {gap:.2e} over 100 states")
    _gate(7, start)


def test_criterion_7_corrected():
    params = SystemParams(g2=0.3)
    gap = _pushforward_gap(lambda p, y: cat.vector_field(SystemId.S1_REAL, p, y), params, _real_states(100, 0))
    record(7, "corrected: pushforward of the catalogued real field", gap <= 1e-12, f"max {gap:.2e}")
    assert gap <= 1e-12


# -- criterion 8 ------------------------------------------------------------------


def test_criterion_8_full_suite(capsys):
    start = time.perf_counter()
    code = cli_main(["verify", "all"])
    out = capsys.readouterr().out
    tail = out.strip().splitlines()[-1] if out.strip() else ""
    with capsys.disabled():
        record(8, "verify all exits 0", code == 0, f"exit {code}; {tail}")
    _gate(8, start)


if __name__ == "__main__":  # pragma: no cover
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
