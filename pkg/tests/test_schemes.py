"""Adaptive scheme recursions: tracker, staircase bin-size update, zoom."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quantstab import (DeltaModState, GGPolicy, GGState, LatticeSpacing,
                       SourceKind, SourceSpec, check_delta_mod_stability,
                       delta_mod_ensemble, delta_mod_step, gg_ensemble,
                       gg_step, lattice_reachability, make_zoom_state,
                       required_rate, zoom_step)
from quantstab.schemes import linear_paths


def iid(**kw):
    return SourceSpec(kind=SourceKind.IID, coefficients=(), **kw)


# ---------------------------------------------------------------------------
# tracker


def test_delta_mod_step_examples():
    s = DeltaModState(0.0)
    s = delta_mod_step(s, 3.0, 1.0)
    assert s.s == 1.0
    s = delta_mod_step(s, 1.0, 1.0)   # tie x - s = 0 quantizes up
    assert s.s == 2.0
    s = delta_mod_step(s, -5.0, 1.0)
    assert s.s == 1.0


def test_delta_mod_path_bound():
    # |s_n - s_0| <= n * m, and every level is s0 + integer * m
    x, s = delta_mod_ensemble(iid(seed=3), m=0.25, n_trajs=8, horizon=500,
                              s0=1.0, master_seed=3)
    steps = np.diff(s, axis=1)
    assert np.all(np.abs(steps) == 0.25)
    n = np.arange(s.shape[1])
    assert np.all(np.abs(s - 1.0) <= n * 0.25 + 1e-12)
    lattice = np.round((s - 1.0) / 0.25)
    np.testing.assert_allclose(s, 1.0 + lattice * 0.25, atol=1e-12)


def test_delta_mod_ensemble_reproducible():
    a = delta_mod_ensemble(iid(seed=9), m=1.0, n_trajs=4, horizon=100,
                           master_seed=9)
    b = delta_mod_ensemble(iid(seed=9), m=1.0, n_trajs=4, horizon=100,
                           master_seed=9)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_precheck_standard_normal():
    # P(X >= 1) = 0.15866, P(X <= -1) the same by symmetry
    pre = check_delta_mod_stability(iid(seed=1), m=1.0, n_samples=100_000)
    assert pre.passed
    assert pre.analytic_upper == pytest.approx(0.158655, abs=1e-6)
    assert pre.analytic_lower == pytest.approx(0.158655, abs=1e-6)
    assert abs(pre.p_upper - pre.analytic_upper) < 3 * pre.halfwidth


def test_precheck_shifted_fails():
    # mean 3: P(X >= 1) = P(Z >= -2) = 0.97725 > 1/2
    pre = check_delta_mod_stability(iid(seed=1, mean_shift=3.0), m=1.0,
                                    n_samples=100_000)
    assert not pre.passed
    assert pre.analytic_upper == pytest.approx(0.977250, abs=1e-6)


def test_precheck_validation():
    with pytest.raises(Exception):
        check_delta_mod_stability(iid(seed=1), m=0.0, n_samples=100_000)
    with pytest.raises(Exception):
        check_delta_mod_stability(iid(seed=1), m=1.0, n_samples=100)


# ---------------------------------------------------------------------------
# staircase bin-size update


def two_cell_policy(**kw):
    # Q2(r) = 1/2 for r <= 1, 4 for r > 1 on the unit lattice
    return GGPolicy(thresholds=(1.0,), log_steps=(-1, 2),
                    spacing=LatticeSpacing(1, 1), **kw)


def test_gg_step_examples():
    policy = two_cell_policy()
    state = GGState(log_index=0)
    assert state.delta == 1.0
    shrunk = gg_step(state, policy, 0.5)      # |x|/delta = 0.5 <= 1
    assert shrunk.log_index == -1 and shrunk.delta == 0.5
    grown = gg_step(state, policy, 1.5)       # 1.5 > 1
    assert grown.log_index == 2 and grown.delta == 4.0
    edge = gg_step(state, policy, 1.0)        # threshold belongs to the lower cell
    assert edge.log_index == -1


def test_gg_policy_validation():
    with pytest.raises(Exception):
        GGPolicy(thresholds=(1.0,), log_steps=(2, -1))    # not nondecreasing
    with pytest.raises(Exception):
        GGPolicy(thresholds=(1.0,), log_steps=(1, 2))     # first must shrink
    with pytest.raises(Exception):
        GGPolicy(thresholds=(1.0,), log_steps=(-1, -1))   # last must grow
    with pytest.raises(Exception):
        GGPolicy(thresholds=(1.0,), log_steps=(-2, 2), require_coprime=True)
    # same steps are fine when coprimality is not demanded
    assert not GGPolicy(thresholds=(1.0,), log_steps=(-2, 2)).coprime


def test_gg_q2_values():
    policy = two_cell_policy()
    assert list(policy.q2_values()) == [0.5, 4.0]


def test_gg_ensemble_matches_scalar_recurrence():
    policy = two_cell_policy()
    source = iid(seed=21)
    x, j = gg_ensemble(source, policy, n_trajs=3, horizon=200, j0=1,
                       log2_b=0.5, master_seed=21)
    for traj in range(3):
        state = GGState(log_index=1, log2_b=0.5, spacing=policy.spacing)
        for t in range(200):
            assert j[traj, t] == state.log_index
            state = gg_step(state, policy, float(x[traj, t]))
        assert j[traj, 200] == state.log_index


def test_gg_float_delta_reconstruction():
    # delta from the integer index equals the direct float product to 1 ulp
    policy = two_cell_policy()
    x, j = gg_ensemble(iid(seed=33), policy, n_trajs=1, horizon=300,
                       master_seed=33)
    delta_exact = np.ldexp(1.0, j[0].astype(np.int64))
    delta_float = np.empty_like(delta_exact)
    delta_float[0] = 1.0
    q2 = policy.q2_values()
    for t in range(300):
        r = abs(x[0, t]) / delta_float[t]
        mult = q2[0] if r <= policy.thresholds[0] else q2[1]
        delta_float[t + 1] = delta_float[t] * mult
    np.testing.assert_allclose(delta_float, delta_exact, rtol=4e-16)


def test_lattice_reachability_coprime():
    reach = lattice_reachability((-1, 2), 40)
    assert set(range(-10, 11)) <= reach


def test_lattice_reachability_even_only():
    reach = lattice_reachability((-2, 2), 40)
    assert all(r % 2 == 0 for r in reach)
    assert {0, 2, -2, 40, -40} <= reach


def test_lattice_reachability_oracle_small():
    # horizon 2 with steps {-1, 2}: sums of at most two steps
    assert lattice_reachability((-1, 2), 2) == {0, -1, 2, -2, 1, 4}
    assert lattice_reachability((0,), 5) == {0}


@settings(max_examples=50, deadline=None)
@given(h=st.integers(1, 12))
def test_lattice_reachability_monotone_in_horizon(h):
    assert lattice_reachability((-1, 2), h) <= lattice_reachability((-1, 2), h + 1)


# ---------------------------------------------------------------------------
# zoom


def test_make_zoom_state_exact_powers():
    state, notes = make_zoom_state(a=2.0, b=1.0, K=3, alpha=0.5, zoom_out=4.0,
                                   L=1.0, delta0=1.0)
    assert notes == []
    assert state.alpha == 0.5 and state.zoom_out == 4.0
    assert state.delta == 1.0 and state.L == 1.0
    assert state.coprime  # steps 2 and -1


def test_make_zoom_state_rounding_notes():
    state, notes = make_zoom_state(a=2.0, b=1.0, K=3, alpha=0.4, zoom_out=3.0,
                                   L=1.0, delta0=1.0)
    assert len(notes) == 2
    assert state.alpha == 0.5       # log2 0.4 = -1.32 rounds to -1
    assert state.zoom_out == 4.0    # log2 3 = 1.58 rounds to 2


def test_make_zoom_state_non_coprime_note():
    _, notes = make_zoom_state(a=2.0, b=1.0, K=3, alpha=0.25, zoom_out=4.0,
                               L=1.0, delta0=1.0)
    assert any("not relatively prime" in n for n in notes)


def test_zoom_step_overflow_expands():
    state, _ = make_zoom_state(a=2.0, b=1.0, K=3, alpha=0.5, zoom_out=4.0,
                               L=1.0, delta0=1.0)
    new, u = zoom_step(state, 10.0)   # |x| > K*delta/2 = 1.5
    assert new.delta == 4.0
    assert new.xhat == 0.0 and u == 0.0


def test_zoom_step_granular_contracts():
    state, _ = make_zoom_state(a=2.0, b=1.0, K=3, alpha=0.5, zoom_out=4.0,
                               L=1.0, delta0=4.0)
    new, u = zoom_step(state, 1.2)    # inside [-6, 6], delta 4 >= L
    assert new.delta == 2.0
    assert new.xhat == 0.0            # K = 3 center cell covers [-2, 2)
    state2, _ = make_zoom_state(a=2.0, b=1.0, K=3, alpha=0.5, zoom_out=4.0,
                                L=1.0, delta0=4.0)
    new2, u2 = zoom_step(state2, 3.0)
    assert new2.xhat == 4.0 and u2 == -8.0


def test_zoom_step_floor_holds():
    state, _ = make_zoom_state(a=2.0, b=1.0, K=3, alpha=0.5, zoom_out=4.0,
                               L=1.0, delta0=0.5)
    new, _ = zoom_step(state, 0.1)    # granular but delta 0.5 < L
    assert new.delta == 0.5


def test_zoom_state_validation():
    with pytest.raises(Exception):
        make_zoom_state(a=0.5, b=1.0, K=3, alpha=0.5, zoom_out=4.0)   # |a| < 1
    with pytest.raises(Exception):
        make_zoom_state(a=2.0, b=0.0, K=3, alpha=0.5, zoom_out=4.0)
    with pytest.raises(Exception):
        make_zoom_state(a=2.0, b=1.0, K=3, alpha=2.0, zoom_out=4.0)   # no zoom-in
    with pytest.raises(Exception):
        make_zoom_state(a=2.0, b=1.0, K=3, alpha=0.5, zoom_out=2.0)   # <= |a|


def test_required_rate_examples():
    k_min, threshold = required_rate(2.0)
    assert threshold == pytest.approx(math.log2(3))
    assert k_min == 3
    k_min, threshold = required_rate(1.0)
    assert threshold == 1.0 and k_min == 2
    k_min, threshold = required_rate(3.5)
    assert threshold == pytest.approx(math.log2(5))
    assert k_min == 5
    with pytest.raises(Exception):
        required_rate(0.9)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(1.0, 40.0))
def test_required_rate_exceeds_threshold(a):
    k_min, threshold = required_rate(a)
    assert math.log2(k_min + 1) > threshold
    assert k_min == 2 or math.log2(k_min) <= threshold


# ---------------------------------------------------------------------------
# linear test scheme


def test_linear_paths_contraction_and_absorbing():
    x = np.zeros((2, 5))
    s = linear_paths(x, 0.5, 0.0, [8.0, -4.0])
    np.testing.assert_allclose(s[0], 8.0 * 0.5 ** np.arange(6))
    np.testing.assert_allclose(s[1], -4.0 * 0.5 ** np.arange(6))
    frozen = linear_paths(x, 1.0, 0.0, 3.0)
    assert np.all(frozen == 3.0)
