"""Smoke tests for the python module: every exposed operation does something
sane on a small input. Numerical depth lives in the C++ suites."""

import math

import numpy as np
import pytest

import streamthin as st


def test_criteria_round_trip():
    m = np.array([[2.0, 0.0], [0.0, 0.5]])
    assert st.phi(m) == pytest.approx(0.0)
    assert np.allclose(st.grad_phi(m), np.diag([0.5, 2.0]))
    assert st.score(m, np.array([1.0, 0.0])) == pytest.approx(0.5 - 2.0)
    assert st.d_efficiency(m, m) == pytest.approx(1.0)
    assert st.phi(np.zeros((2, 2))) == -math.inf


def test_quantile_tracks_a_normal_tail():
    cfg = st.QuantileConfig(alpha=0.1)
    rng = np.random.default_rng(7)
    warm = rng.standard_normal(50)
    state = st.quantile_init(cfg, list(warm))
    for z in rng.standard_normal(20000):
        st.quantile_step(state, cfg, float(z))
    assert abs(state.c_hat - 1.2816) < 0.1
    assert state.k == 20050


def test_thinner_selects_at_rate():
    t = st.Thinner(dim=3, alpha=0.3)
    rng = np.random.default_rng(3)
    for i in range(4000):
        d = t.observe(rng.standard_normal(3))
        assert d.k == i + 1
    assert not t.collecting
    assert 0.2 < t.n_selected / t.seen < 0.4
    assert t.m.shape == (3, 3)
    assert math.isfinite(t.threshold)


def test_thinner_quota_mode_is_exact():
    t = st.Thinner(dim=2, alpha=0.2, mode="force", n_target=50, horizon=250)
    rng = np.random.default_rng(11)
    for _ in range(250):
        t.observe(rng.standard_normal(2))
    assert t.n_selected == 50


def test_replay_returns_frozen_pair():
    rng = np.random.default_rng(5)
    pts = [rng.standard_normal(2) for _ in range(500)]
    m, threshold = st.run_replay(pts, alpha=0.2, passes=2, seed=9)
    assert m.shape == (2, 2)
    assert math.isfinite(threshold)


def test_scramble_indices_is_a_permutation():
    out = st.scramble_indices(100, 8, seed=4)
    assert sorted(out) == list(range(100))


def test_exchange_improves_and_fills():
    ex = st.Exchange(dim=2, n=10, rule="exact")
    rng = np.random.default_rng(13)
    for _ in range(500):
        ex.consider(rng.standard_normal(2))
    assert ex.full
    assert len(ex.active) == 10
    assert math.isfinite(ex.phi)


def test_iboss_picks_extremes():
    pts = [np.array([x]) for x in [-3.0, -1.0, 0.0, 2.0, 5.0]]
    assert st.iboss_select(pts, 2) == [4, 0]


def test_v_iboss_matches_closed_form():
    v = st.v_iboss_asymptotic(st.uniform_marginal(-1.0, 1.0), alpha=0.5, d=2)
    assert v[0, 0] == pytest.approx(0.4791666667)
    assert v[1, 1] == pytest.approx(0.5185185185)
    # full-selection limit is the plain second moment
    v1 = st.v_iboss_asymptotic(st.normal_marginal(), alpha=1.0, d=3)
    assert np.allclose(v1, np.eye(3))


def test_oracles_agree_with_pinned_values():
    r = st.oracle_multilinear_normal(0.5, 2)
    assert r.phi_star == pytest.approx(2 * math.log(1 - math.log(0.5)))
    assert r.c_star == pytest.approx(-2 * math.log(0.5) / (1 - math.log(0.5)) - 2)
    assert st.multilinear_rho_quadrature(0.5, 2) == pytest.approx(1 - math.log(0.5))
    q = st.oracle_quad_normal(0.5)
    assert abs(q.phi_star - 1.6354) < 5e-4
    assert q.m_star.shape == (3, 3)
    assert dict(zip(q.region_names, q.region)).keys() == {"a", "b"}
    assert st.oracle_quad01_iboss(1.0) == pytest.approx(1 / 240)
    assert st.oracle_three_spheres(0.2, 3, 3.0, 2.0, 1.0).phi_star == pytest.approx(
        3 * math.log(3.0)
    )
    assert np.allclose(st.oracle_uniform_square(1.0).m_star, np.diag([1, 1 / 3, 1 / 3]))
    assert st.uniform_square_iboss(0.5)[1, 1] == pytest.approx(0.4791666667)


def test_run_experiment_end_to_end():
    s = st.run("quad-normal", n_total=20000, seed=1, alpha=0.5, oracle="quad-normal")
    assert s.n_seen == 20000
    assert abs(s.n_selected / s.n_seen - 0.5) < 0.05
    assert s.d_eff is not None and s.d_eff > 0.8
    assert s.probes[-1].k == 20000
    assert abs(s.final_phi - 1.6354) < 0.2


def test_replicate_aggregates():
    agg = st.replicate("quad-normal", n_total=2000, reps=3, alpha=0.5, oracle="quad-normal")
    assert agg.reps == 3
    assert len(agg.final_phi) == 3
    assert agg.sd_final_phi >= 0.0
    assert len(agg.grid_k) == len(agg.mean_eff)


def test_histogram_integrates_to_one():
    table = st.emit_histogram([0.0, 0.5, 1.0], bandwidth=0.2)
    xs = [x for x, _ in table]
    ys = [y for _, y in table]
    mass = np.trapezoid(ys, xs)
    assert abs(mass - 1.0) < 1e-2


def test_errors_are_python_exceptions():
    with pytest.raises(ValueError):
        st.Thinner(dim=2, alpha=0.5, mode="sometimes")
    with pytest.raises(ValueError):
        st.oracle_quad_normal(0.0)
    with pytest.raises(ValueError):
        st.run("pareto", n_total=10)
