import json

import numpy as np
import pytest

from kowtype import catalog as cat
from kowtype.catalog import State, SystemId, SystemParams
from kowtype.errors import NoKnownDensity, SingularState


def _real_states(n, seed=0):
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.5, 2.0, n) * rng.choice([-1, 1], n)
    rest = rng.uniform(-1, 1, (5, n))
    return np.vstack([p, rest])


def test_system_dimensions():
    assert SystemId.S1_REAL.dim == 6
    assert all(s.dim == 12 for s in SystemId if s is not SystemId.S1_REAL)


def test_state_is_read_only_and_checked():
    st = State(SystemId.S3_CUBIC, np.zeros(12))
    with pytest.raises(ValueError):
        st.values[0] = 1.0
    with pytest.raises(ValueError):
        State(SystemId.S3_CUBIC, np.zeros(6))


def test_s1_real_field_example():
    y = cat.vector_field(SystemId.S1_REAL, SystemParams(g2=0.0), State(SystemId.S1_REAL, [1, 1, 1, 0, 0, 0]))
    np.testing.assert_allclose(y, [1, 0, 0.5, 2, -2, 2], atol=0)


def test_s1_real_equilibrium_family():
    y = cat.vector_field(SystemId.S1_REAL, SystemParams(g2=0.7), State(SystemId.S1_REAL, [1.3, 0, 0, -0.4, 0, 0]))
    assert np.all(y == 0)


def test_s3_field_example():
    z = np.array([1, 0, 1, 1, 1, 0], dtype=complex)
    dz = cat.complex_field(SystemId.S3_CUBIC, SystemParams(), z)
    np.testing.assert_allclose(dz, [-0.5j, 0, -1j, 1j, -0.5j, -0.5j], atol=0)


def test_singular_guards():
    with pytest.raises(SingularState):
        cat.vector_field(SystemId.S1_REAL, SystemParams(), State(SystemId.S1_REAL, [1e-9, 1, 1, 0, 0, 0]))
    z = np.array([1, -1, 1, 1, 1, 1], dtype=complex)
    with pytest.raises(SingularState):
        cat.complex_field(SystemId.S1_COMPLEX, SystemParams(), z)
    z = np.array([1, 1, 1, 2, 1, 1], dtype=complex)
    with pytest.raises(SingularState):
        cat.complex_field(SystemId.S2_TWOPARAM, SystemParams(), z)


def test_eps_sing_from_environment(monkeypatch):
    monkeypatch.setenv("KOWTYPE_EPS_SING", "0.5")
    params = SystemParams()
    assert params.eps_sing == 0.5
    with pytest.raises(SingularState):
        cat.vector_field(SystemId.S1_REAL, params, State(SystemId.S1_REAL, [0.4, 1, 1, 0, 0, 0]))


def test_chart_example():
    z = cat.change_chart([1, 1, 0, 0, 0, 0])
    np.testing.assert_allclose(z[:4], [1 + 1j, 1 - 1j, 2j, -2j])
    assert z[2] * z[3] == 4


def test_chart_round_trip():
    ys = _real_states(200, 1)
    worst = max(np.max(np.abs(cat.inverse_chart(cat.change_chart(y)) - y)) for y in ys.T)
    assert worst <= 1e-14


def test_inverse_chart_rejects_non_real_points():
    z = cat.change_chart([1, 1, 0, 0, 0, 0])
    z[1] += 0.1
    with pytest.raises(ValueError):
        cat.inverse_chart(z)


def test_pushforward_matches_complex_field():
    params = SystemParams(g2=0.37)
    worst = 0.0
    for y in _real_states(100, 2).T:
        lhs = cat.pushforward(y, cat.vector_field(SystemId.S1_REAL, params, y))
        rhs = cat.complex_field(SystemId.S1_COMPLEX, params, cat.change_chart(y))
        worst = max(worst, np.max(np.abs(lhs - rhs)))
    assert worst <= 1e-12


def test_variant_real_field_does_not_push_forward():
    params = SystemParams(g2=0.37)
    y = np.array([1.2, 0.3, -0.4, 0.5, 0.7, -0.2])
    lhs = cat.pushforward(y, cat.s1_real_variant_field(params, y))
    rhs = cat.complex_field(SystemId.S1_COMPLEX, params, cat.change_chart(y))
    assert np.max(np.abs(lhs - rhs)) > 1e-3


def test_s3_integral_values_example():
    st = State.from_complex(SystemId.S3_CUBIC, [1, 0, 1, 1, 1, 0])
    vals = {iv.name: iv.value for iv in cat.integral_set(SystemId.S3_CUBIC, SystemParams(), st)}
    assert vals == {"a": -3, "b": 2, "c": -1, "d^2": 1}


def test_s1_relations_vanish_on_sampled_set():
    for seed in range(5):
        st, params = cat.sample_initial_state(SystemId.S1_COMPLEX, SystemParams(g2=0.3), seed, on_invariant_set=True)
        res = [abs(iv.value) for iv in cat.integral_set(SystemId.S1_COMPLEX, params, st)]
        assert max(res) <= 1e-12


def test_s1_g3_label_from_chart_point():
    # r and gamma3 solved from the first two relations; the third one then fixes g3
    x1, x2 = 1 + 1j, 1 - 1j
    e1, e2 = 2j, -2j
    params = SystemParams(g2=0.0)
    r, g3, label = cat._solve_s1(params, np.array(x1), np.array(x2), np.array(e1), np.array(e2))
    z = np.array([x1, x2, e1, e2, r, g3])
    res = cat.relation_values(SystemId.S1_COMPLEX, SystemParams(g2=0.0, g3=complex(label), k=2), cat.to_real(z))
    assert np.max(np.abs(res)) <= 1e-14


def test_s2_sampler_projects_onto_relations():
    st, params = cat.sample_initial_state(SystemId.S2_TWOPARAM, SystemParams(g2=0.3, g3=0.2), 3, on_invariant_set=True)
    res = [abs(iv.value) for iv in cat.integral_set(SystemId.S2_TWOPARAM, params, st)]
    assert max(res) <= 1e-10


def test_sampler_is_deterministic():
    for system in SystemId:
        a, pa = cat.sample_initial_state(system, SystemParams(g2=0.3), 11, on_invariant_set=True)
        b, pb = cat.sample_initial_state(system, SystemParams(g2=0.3), 11, on_invariant_set=True)
        assert np.array_equal(a.values, b.values) and pa == pb


def test_sampler_boxes():
    st, _ = cat.sample_initial_state(SystemId.S1_REAL, SystemParams(), 5)
    assert 0.5 <= st.values[0] <= 2.0
    st, params = cat.sample_initial_state(SystemId.S3_CUBIC, SystemParams(), 0)
    vals = [iv.value for iv in cat.integral_set(SystemId.S3_CUBIC, params, st)]
    assert vals[0] == pytest.approx(params.a) and vals[3] == pytest.approx(params.d**2)


def test_divergence_values():
    params = SystemParams(g2=0.2)
    assert cat.divergence(SystemId.S1_REAL, params, State(SystemId.S1_REAL, [1, 1, 1, 0, 0, 0])) == 2
    st, _ = cat.sample_initial_state(SystemId.S3_CUBIC, params, 1)
    assert cat.divergence(SystemId.S3_CUBIC, params, st) == 0


def test_numerical_divergence_matches_2qr_at_two_steps():
    params = SystemParams(g2=0.2)
    y = _real_states(50, 3)
    exact = 2 * y[1] * y[2]
    e1 = np.max(np.abs(cat.numerical_divergence(SystemId.S1_REAL, params, y, h=1e-2) - exact))
    e2 = np.max(np.abs(cat.numerical_divergence(SystemId.S1_REAL, params, y, h=5e-3) - exact))
    # the diagonal entries are low-degree in their own variable, so both steps sit at round-off
    assert max(e1, e2) <= 1e-10


def test_s3_divergence_free_numerically():
    rng = np.random.default_rng(7)
    y = rng.uniform(-1, 1, (12, 1000))
    assert np.max(np.abs(cat.numerical_divergence(SystemId.S3_CUBIC, SystemParams(), y))) <= 1e-8


def test_weighted_divergences_vanish():
    params = SystemParams(g2=0.4)
    y = _real_states(300, 4)
    rho = lambda s, yy: 1 / (4 * yy[0] ** 2)  # noqa: E731
    assert np.max(np.abs(cat.numerical_divergence(SystemId.S1_REAL, params, y, weight=rho))) <= 1e-8
    zs = np.array([cat.change_chart(c) for c in y.T]).T
    mu = lambda s, yy: 1 / (cat.to_complex(yy)[0] + cat.to_complex(yy)[1]) ** 2  # noqa: E731
    v = cat.numerical_divergence(SystemId.S1_COMPLEX, params, cat.to_real(zs), weight=mu)
    assert np.max(np.abs(v)) <= 1e-8


def test_measure_densities():
    assert cat.measure_density(SystemId.S1_REAL, State(SystemId.S1_REAL, [1, 0, 0, 0, 0, 0])) == 0.25
    assert cat.measure_density(SystemId.S1_REAL, State(SystemId.S1_REAL, [-2, 0, 0, 0, 0, 0])) == 1 / 16
    st = State.from_complex(SystemId.S1_COMPLEX, [1, 1, 0, 0, 0, 0])
    assert cat.measure_density(SystemId.S1_COMPLEX, st) == 0.25
    with pytest.raises(NoKnownDensity):
        cat.measure_density(SystemId.S2_TWOPARAM, State(SystemId.S2_TWOPARAM, np.ones(12)))


def test_params_json_round_trip():
    p = SystemParams(g2=0.3, g3=1 - 2j, k=0.5 + 0.25j, eps_sing=1e-7)
    assert SystemParams.from_json(json.loads(json.dumps(p.to_json()))) == p


def test_catalog_metadata():
    assert list(cat.CATALOG) == [s.value for s in SystemId]
    assert cat.CATALOG["S3_CUBIC"]["equation"] == "eq. (34)"
