"""Perception pipeline tests: history ring, cadence, normalization, reward."""

import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chemoswim import (ConfigurationError, PerceptionHistory, PerceptionRecord,
                       action_interval, action_interval_steps, average_period,
                       compute_reward, normalize_input)
from chemoswim.qnet import format_float

from helpers import default_actions, tg_flow


def history_from_concentrations(cs, kappas):
    """Build a history from newest-first concentration/curvature lists."""
    records = [PerceptionRecord(c, k) for c, k in zip(cs, kappas)]
    return PerceptionHistory(records)


class TestHistory:
    def test_bootstrap_fills_all_slots(self):
        record = PerceptionRecord(20.0, 3.0)
        history = PerceptionHistory.bootstrap(record, 4)
        assert len(history) == 4
        assert all(r == record for r in history.records)

    def test_push_keeps_newest_first(self):
        history = PerceptionHistory.bootstrap(PerceptionRecord(1.0, 3.0), 3)
        history.push(PerceptionRecord(2.0, 5.0))
        history.push(PerceptionRecord(3.0, 3.0))
        assert history.concentrations() == [3.0, 2.0, 1.0]
        assert history.newest.c == 3.0
        assert history.oldest.c == 1.0
        assert len(history) == 3


class TestCadence:
    def test_average_period_table_values(self):
        actions = default_actions()
        assert average_period(actions, 1.0) == pytest.approx(math.pi / 2.0, rel=1e-12)

    def test_average_period_equal_curvatures(self):
        fake = SimpleNamespace(kappa1=4.0, kappa2=4.0)
        assert average_period(fake, 2.0) == pytest.approx(math.pi / 4.0, rel=1e-12)

    def test_average_period_adaptive_fast_leg(self):
        actions = default_actions(adaptive=True)
        assert average_period(actions, 1.1) == pytest.approx(2.0 * math.pi / 4.4, rel=1e-6)

    @pytest.mark.parametrize("n_t,expected_steps", [(2, 39), (4, 19), (8, 9)])
    def test_action_interval_floor(self, n_t, expected_steps):
        interval = action_interval(math.pi / 2.0, n_t, 0.02)
        assert action_interval_steps(math.pi / 2.0, n_t, 0.02) == expected_steps
        assert interval == expected_steps * 0.02

    def test_interval_too_coarse(self):
        with pytest.raises(ConfigurationError):
            action_interval(math.pi / 2.0, 8, 0.5)


class TestNormalizeInput:
    def test_two_slice_example(self):
        history = history_from_concentrations([21.0, 20.0], [3.0, 5.0])
        vec = normalize_input(history, default_actions(), 1.0)
        assert np.array_equal(vec, np.array([2.0, -1.0, -2.0, 1.0]))

    def test_equal_concentrations_center_to_zero(self):
        history = history_from_concentrations([7.0] * 4, [3.0, 5.0, 3.0, 5.0])
        vec = normalize_input(history, default_actions(), 1.0)
        assert np.all(vec[0::2] == 0.0)

    def test_flow_aware_layout_and_scaling(self):
        # at (5, 0): u = (0, -u0), omega0 = 0
        spec = tg_flow()
        record = PerceptionRecord(20.0, 3.0, u_x=0.0, u_y=-spec.u0, omega0=0.0)
        history = PerceptionHistory.bootstrap(record, 2)
        vec = normalize_input(history, default_actions(), 1.0, spec)
        assert vec.shape == (10,)
        assert np.array_equal(vec, np.array([0.0, -1.0, 0.0, -1.0, 0.0] * 2))

    def test_flow_scaling_general(self):
        spec = tg_flow()
        record = PerceptionRecord(20.0, 5.0, u_x=0.05, u_y=-0.02, omega0=-0.01)
        history = PerceptionHistory.bootstrap(record, 2)
        vec = normalize_input(history, default_actions(), 1.0, spec)
        assert vec[2] == pytest.approx(0.05 / spec.u0, rel=1e-12)
        assert vec[3] == pytest.approx(-0.02 / spec.u0, rel=1e-12)
        assert vec[4] == pytest.approx(-0.01 / (spec.u0 * spec.k), rel=1e-12)

    def test_bad_gradient_rejected(self):
        history = history_from_concentrations([1.0, 2.0], [3.0, 5.0])
        with pytest.raises(ConfigurationError):
            normalize_input(history, default_actions(), 0.0)

    def test_flow_aware_needs_flow(self):
        from chemoswim import NO_FLOW
        history = history_from_concentrations([1.0, 2.0], [3.0, 5.0])
        with pytest.raises(ConfigurationError):
            normalize_input(history, default_actions(), 1.0, NO_FLOW)

    @settings(max_examples=100, deadline=None)
    @given(cs=st.lists(st.floats(-50.0, 50.0), min_size=2, max_size=8),
           seed=st.integers(0, 2**31))
    def test_centering_sums_to_zero(self, cs, seed):
        rng = np.random.default_rng(seed)
        kappas = rng.choice([3.0, 5.0], size=len(cs))
        vec = normalize_input(history_from_concentrations(cs, kappas),
                              default_actions(), 1.0)
        assert abs(vec[0::2].sum()) < 1e-12 * max(1.0, np.abs(cs).max())
        assert set(np.unique(vec[1::2])) <= {-1.0, 1.0}

    def test_kappa_map_is_monotone(self):
        history = history_from_concentrations([1.0, 2.0], [5.0, 3.0])
        vec = normalize_input(history, default_actions(), 1.0)
        assert vec[1] == 1.0 and vec[3] == -1.0

    def test_serialized_vector_round_trips(self):
        history = history_from_concentrations([21.3, 20.0, 19.77, 23.1],
                                              [3.0, 5.0, 5.0, 3.0])
        vec = normalize_input(history, default_actions(), 1.0)
        text = " ".join(format_float(v) for v in vec)
        back = np.array([float(tok) for tok in text.split()])
        assert np.array_equal(back, vec)


class TestReward:
    def test_reward_example(self):
        history = history_from_concentrations([4.5, 4.0], [3.0, 5.0])
        reward = compute_reward(5.0, history, default_actions(), 1.0)
        assert reward == pytest.approx(3.75, rel=1e-12)

    def test_zero_change_zero_reward(self):
        history = history_from_concentrations([4.5, 4.0], [3.0, 5.0])
        assert compute_reward(4.0, history, default_actions(), 1.0) == 0.0

    def test_negative_reward_example(self):
        history = history_from_concentrations([4.7, 4.6, 4.2, 5.0],
                                              [3.0, 5.0, 3.0, 5.0])
        reward = compute_reward(4.5, history, default_actions(), 1.0)
        assert reward == pytest.approx(-0.9375, rel=1e-12)

    def test_equal_curvatures_rejected(self):
        history = history_from_concentrations([4.5, 4.0], [4.0, 4.0])
        fake = SimpleNamespace(kappa1=4.0, kappa2=4.0)
        with pytest.raises(ConfigurationError):
            compute_reward(5.0, history, fake, 1.0)

    @settings(max_examples=100, deadline=None)
    @given(cs=st.lists(st.floats(-20.0, 20.0), min_size=2, max_size=8),
           c_new=st.floats(-20.0, 20.0), shift=st.floats(-30.0, 30.0))
    def test_shift_invariance(self, cs, c_new, shift):
        actions = default_actions()
        kappas = [3.0] * len(cs)
        base = compute_reward(c_new, history_from_concentrations(cs, kappas),
                              actions, 1.0)
        moved = compute_reward(c_new + shift,
                               history_from_concentrations([c + shift for c in cs], kappas),
                               actions, 1.0)
        assert moved == pytest.approx(base, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(cs=st.lists(st.floats(-20.0, 20.0), min_size=2, max_size=8),
           c_new=st.floats(-20.0, 20.0))
    def test_telescoped_window_mean_identity(self, cs, c_new):
        # closed form equals the difference of the two window means
        actions = default_actions()
        n_t = len(cs)
        history = history_from_concentrations(cs, [3.0] * n_t)
        closed = compute_reward(c_new, history, actions, 1.0)
        new_window = [c_new] + cs[:-1]
        switch = abs(1.0 / actions.kappa1 - 1.0 / actions.kappa2)
        telescoped = (sum(new_window) / n_t - sum(cs) / n_t) / switch
        assert closed == pytest.approx(telescoped, abs=1e-12)
