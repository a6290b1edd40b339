import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pglayout import engine
from pglayout.engine import (LayoutConfig, StepOutcome, init_layout, layout_step, make_schedule,
                             run_layout, run_layout_reuse, schedule_from_bounds, sgd_update)
from pglayout.errors import DegenerateGraph, InvalidParameter
from pglayout.graph import build_graph, generate_synthetic_pangenome, total_update_steps
from pglayout.metrics import sampled_path_stress
from pglayout.rng import seed_worker


def line_stress(vi, vj, d):
    return ((math.hypot(vi[0] - vj[0], vi[1] - vj[1]) - d) / d) ** 2


def fd_gradient(f, v, h=1e-6):
    g = np.zeros(2)
    for k in range(2):
        up, dn = np.array(v, float), np.array(v, float)
        up[k] += h
        dn[k] -= h
        g[k] = (f(up) - f(dn)) / (2 * h)
    return g


# ---------------------------------------------------------------- schedule

def test_schedule_two_iterations():
    assert np.allclose(schedule_from_bounds(100, 1, 2).etas, [100, 1], rtol=1e-12)


def test_schedule_three_iterations_is_geometric():
    s = schedule_from_bounds(100, 1, 3)
    assert s.lam == pytest.approx(math.log(10))
    assert np.allclose(s.etas, [100, 10, 1], rtol=1e-12)


def test_schedule_from_graph():
    g = build_graph([5, 3], [], {"x": [(0, "+"), (1, "+")]})
    s = make_schedule(g, LayoutConfig(eta_min_eps=0.01))
    assert s.eta_max == 64
    assert s.eta_min == 0.01


@pytest.mark.parametrize("n_iters", [2, 5, 30, 101])
def test_schedule_invariants(n_iters):
    s = schedule_from_bounds(1e6, 0.01, n_iters)
    assert s.etas[0] == 1e6
    assert s.etas[-1] == pytest.approx(0.01, rel=1e-9)
    assert np.all(np.diff(s.etas) < 0)


def test_schedule_degenerate_graph():
    g = build_graph([5, 3], [], {"x": [(0, "+")], "y": [(1, "+")]})
    with pytest.raises(DegenerateGraph):
        make_schedule(g, LayoutConfig())
    with pytest.raises(DegenerateGraph):
        run_layout(g, LayoutConfig())


# ---------------------------------------------------------------- init

def test_init_layout_x_follows_offsets():
    g = build_graph([5, 3], [], {"x": [(0, "+"), (1, "+")]})
    lay = init_layout(g, 1)
    assert list(lay.coords[:, 0]) == [0, 5]
    assert list(lay.coords[:, 2]) == [5, 8]
    assert list(lay.records[:, 0]) == [5, 3]


def test_init_layout_deterministic_and_bounded():
    g = generate_synthetic_pangenome(2, 500, 3, 0.1)
    a, b = init_layout(g, 9), init_layout(g, 9)
    assert a == b
    assert a != init_layout(g, 10)
    assert a.is_finite()
    bound = math.sqrt(g.total_nucleotides)
    assert np.abs(a.coords[:, 1::2]).max() <= bound


# ---------------------------------------------------------------- update rule

def test_update_lands_on_reference_distance():
    vi, vj = sgd_update((0, 0), (0, 10), 5, eta=1e9)
    assert np.allclose(vi, (0, 2.5)) and np.allclose(vj, (0, 7.5))
    assert math.dist(vi, vj) == 5


def test_update_at_reference_distance_is_fixed_point():
    vi, vj = sgd_update((1, 2), (4, 6), 5, eta=3.0)
    assert list(vi) == [1, 2] and list(vj) == [4, 6]


def test_update_coincident_points_get_random_direction():
    vi, vj = sgd_update((3, 3), (3, 3), 2, eta=1e9, rng=seed_worker(1, 0))
    assert math.dist(vi, vj) == pytest.approx(2, abs=1e-12)
    assert np.allclose((np.array(vi) + vj) / 2, (3, 3))


def test_update_matches_finite_difference_gradient():
    r = np.random.default_rng(0)
    for _ in range(100):
        vi, vj = r.uniform(-50, 50, 2), r.uniform(-50, 50, 2)
        d = r.uniform(1, 100)
        eta = r.uniform(0.01, 0.99) * d * d   # mu = eta / d^2 < 1
        ni, nj = sgd_update(vi, vj, d, eta)
        gi = fd_gradient(lambda v: line_stress(v, vj, d), vi)
        gj = fd_gradient(lambda v: line_stress(vi, v, d), vj)
        # each point moves by a quarter of eta times its stress gradient
        assert np.allclose(ni - vi, -eta * gi / 4, rtol=1e-6, atol=1e-9)
        assert np.allclose(nj - vj, -eta * gj / 4, rtol=1e-6, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(coords=st.lists(st.floats(-1e4, 1e4), min_size=4, max_size=4),
       d=st.floats(0.5, 1e4), mu=st.floats(0.01, 1.0))
def test_update_symmetry(coords, d, mu):
    vi, vj = np.array(coords[:2]), np.array(coords[2:])
    ni, nj = sgd_update(vi, vj, d, mu * d * d)
    di, dj = ni - vi, nj - vj
    assert np.allclose(di, -dj, rtol=0, atol=1e-12 * max(1.0, np.abs(di).max()))
    if mu == 1.0:
        assert math.dist(ni, nj) == pytest.approx(d, rel=1e-9, abs=1e-9)


def test_update_rejects_zero_reference():
    with pytest.raises(InvalidParameter):
        sgd_update((0, 0), (1, 1), 0, 1.0)


# ---------------------------------------------------------------- single step

def test_layout_step_zero_dref_leaves_layout_alone():
    g = build_graph([4, 6], [], {"x": [(0, "+"), (1, "+")]})
    lay = init_layout(g, 1)
    state = seed_worker(3, 0)
    seen = {o: 0 for o in StepOutcome}
    for _ in range(400):
        before = lay.copy()
        out = layout_step(g, lay, state, eta=0.5, cooling=False)
        seen[out] += 1
        if out is not StepOutcome.APPLIED:
            assert lay == before
        else:
            assert lay != before
    # end of step 0 abuts start of step 1: 1 of 4 endpoint combos
    assert 0.15 < seen[StepOutcome.SKIPPED_ZERO_DREF] / 400 < 0.35
    assert seen[StepOutcome.APPLIED] > 0


def test_layout_step_single_step_path_is_skipped():
    g = build_graph([4], [], {"x": [(0, "+")]})
    lay = init_layout(g, 1)
    for cooling in (False, True):
        assert layout_step(g, lay, seed_worker(1, 0), 1.0, cooling) is StepOutcome.SKIPPED_SAME_STEP


def test_layout_step_rejects_nonpositive_eta():
    g = build_graph([4, 6], [], {"x": [(0, "+"), (1, "+")]})
    with pytest.raises(InvalidParameter):
        layout_step(g, init_layout(g, 1), seed_worker(1, 0), 0.0, False)


def test_cooling_step_stays_within_window():
    # one long path whose nodes sit far apart; a cooling step can only move
    # nodes within zipf_space_max steps of the selected one
    g = build_graph([1] * 200, [], {"x": [(k, "+") for k in range(200)]})
    lay = init_layout(g, 1)
    state = seed_worker(2, 0)
    for _ in range(300):
        before = lay.coords.copy()
        layout_step(g, lay, state, eta=1.0, cooling=True, zipf_space_max=3)
        moved = np.flatnonzero((lay.coords != before).any(axis=1))
        if len(moved):
            assert len(moved) == 2 and moved[1] - moved[0] <= 3


# ---------------------------------------------------------------- full runs

@pytest.fixture(scope="module")
def small_graph():
    return generate_synthetic_pangenome(5, 300, 4, 0.1)


def test_worker_budgets():
    assert engine.worker_budgets(10, 3) == [4, 3, 3]
    assert sum(engine.worker_budgets(599_360, 8)) == 599_360


def test_single_thread_runs_are_identical(small_graph):
    cfg = LayoutConfig(n_iters=6, threads=1, global_seed=3)
    a = run_layout(small_graph, cfg)
    b = run_layout(small_graph, cfg)
    assert a.records.tobytes() == b.records.tobytes()
    assert a.is_finite()


def test_multithreaded_run_is_finite(small_graph):
    lay = run_layout(small_graph, LayoutConfig(n_iters=6, threads=4))
    assert lay.is_finite()


@pytest.mark.parametrize("drf, srf", [(1, 1), (2, 2), (4, 4), (2, 1)])
def test_step_accounting(small_graph, drf, srf):
    per_iter = []
    cfg = LayoutConfig(n_iters=4, threads=3, drf=drf, srf=srf)
    run_layout(small_graph, cfg, on_iteration=lambda it, eta, lay, c: per_iter.append(c.copy()))
    expected_primary = total_update_steps(small_graph) // srf
    for c in per_iter:
        total = c.sum(axis=0)
        assert total[engine.C_STEPS] == expected_primary
        assert (total[engine.C_APPLIED] + total[engine.C_ZERO_DREF] + total[engine.C_SAME_STEP]
                == expected_primary)
        paired = expected_primary - total[engine.C_SAME_STEP]
        assert total[engine.C_EXTRA_APPLIED] + total[engine.C_EXTRA_ZERO] == (drf - 1) * paired
        assert list(c[:, engine.C_STEPS]) == engine.worker_budgets(expected_primary, 3)


def test_reuse_halves_primary_steps(small_graph):
    counts = []
    run_layout_reuse(small_graph, LayoutConfig(n_iters=1, drf=2, srf=2),
                     on_iteration=lambda it, eta, lay, c: counts.append(c.sum(axis=0)))
    c = counts[0]
    n_steps = total_update_steps(small_graph)
    assert c[engine.C_STEPS] == n_steps // 2
    attempted = c[engine.C_STEPS] + c[engine.C_EXTRA_APPLIED] + c[engine.C_EXTRA_ZERO]
    assert abs(attempted - n_steps) <= c[engine.C_SAME_STEP] + 1


@pytest.mark.parametrize("drf, srf", [(1, 2), (8, 2), (2, 0)])
def test_reuse_rejects_bad_factors(small_graph, drf, srf):
    with pytest.raises(InvalidParameter):
        run_layout_reuse(small_graph, LayoutConfig(drf=drf, srf=srf))


@pytest.mark.parametrize("field, value", [("n_iters", 0), ("threads", 0), ("batch_size", 0),
                                          ("drf", 3), ("srf", 0), ("zipf_theta", 0.0)])
def test_config_validation(field, value):
    with pytest.raises(InvalidParameter):
        LayoutConfig(**{field: value}).validate()


def test_cooling_fraction_per_batch():
    # batch_size 1 gives one branch decision per step: 20 000 per iteration
    g = build_graph([3] * 100, [], [(f"p{k}", [(n, "+") for n in range(100)]) for k in range(20)])
    rows = []
    run_layout(g, LayoutConfig(n_iters=10, batch_size=1, threads=2),
               on_iteration=lambda it, eta, lay, c: rows.append(c.sum(axis=0)))
    first = np.sum(rows[:5], axis=0)
    assert first[engine.C_BATCHES] >= 10**5
    frac = first[engine.C_COOLING_BATCHES] / first[engine.C_BATCHES]
    assert abs(frac - 0.5) <= 0.01
    for r in rows[5:]:
        assert r[engine.C_COOLING_BATCHES] == r[engine.C_BATCHES]


def test_cooling_forced_from_half_of_odd_iteration_count():
    g = build_graph([3] * 50, [], [("p", [(n, "+") for n in range(50)])])
    rows = []
    run_layout(g, LayoutConfig(n_iters=5, batch_size=4),
               on_iteration=lambda it, eta, lay, c: rows.append(c.sum(axis=0)))
    forced = [r[engine.C_COOLING_BATCHES] == r[engine.C_BATCHES] for r in rows]
    # iterations 0..2 (ceil(5/2) of them) flip coins, 3..4 always cool
    assert forced[3:] == [True, True]
    assert not all(forced[:3])


def test_stress_trend_is_non_increasing():
    for seed in (1, 2):
        g = generate_synthetic_pangenome(seed, 400, 5, 0.05)
        n = 20
        checkpoints = {0: sampled_path_stress(g, init_layout(g, seed), 7).mean}

        def grab(it, eta, lay, c):
            if it + 1 in (n // 4, n // 2, n):
                checkpoints[it + 1] = sampled_path_stress(g, lay, 7).mean

        run_layout(g, LayoutConfig(n_iters=n, global_seed=seed), on_iteration=grab)
        values = [checkpoints[k] for k in sorted(checkpoints)]
        for a, b in zip(values, values[1:]):
            assert b <= 1.1 * a


def test_initial_layout_argument(small_graph):
    start = init_layout(small_graph, 99)
    a = run_layout(small_graph, LayoutConfig(n_iters=2), initial=start)
    assert a != start
    assert start == init_layout(small_graph, 99)
