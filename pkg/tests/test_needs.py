from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from needmind.errors import ConfigurationError
from needmind.needs import (
    NEEDS,
    S_MAX,
    Need,
    NeedEvent,
    NeedHierarchy,
    SatisfactionState,
    WeightParams,
    all_weights,
    apply_event,
    arisen,
    corner_minimum,
    decay_tick,
    friendship_satisfaction,
    is_dead,
    min_delta,
    needs_at,
    safety_satisfaction,
    weight,
)

H = NeedHierarchy.default()
sat_value = st.floats(min_value=0.0, max_value=S_MAX, allow_nan=False)
sat_vectors = st.lists(sat_value, min_size=len(NEEDS), max_size=len(NEEDS))


def level1_params(alpha=-1.0, delta1=10.0) -> WeightParams:
    return WeightParams.per_level(
        {1: (alpha, -0.1, 0.1), 2: (-1.0, -0.2, 0.1), 3: (-1.0, -0.1, 0.05), 4: (-1.0, -0.1, 0.05)},
        {1: delta1, 2: 10.0, 3: 10.0, 4: 10.0},
    )


def state(**sat) -> SatisfactionState:
    full = {n: 10.0 for n in NEEDS}
    full.update({Need(k): v for k, v in sat.items()})
    return SatisfactionState(full)


def hand_weight(alpha, beta, gamma, delta, own, sons, lower):
    return alpha * own + beta * sum(sons) + gamma * sum(lower) + delta


class TestWeight:
    def test_level1_energy_partly_satisfied(self):
        assert weight(level1_params(), H, state(energy=3), Need.ENERGY) == pytest.approx(7.0, abs=1e-9)

    def test_level1_energy_full(self):
        assert weight(level1_params(), H, state(energy=10), Need.ENERGY) == pytest.approx(0.0, abs=1e-9)

    def test_personal_safety_hand_value(self):
        s = state(personal_safety=4, sleep=6, energy=5, water=7, breed=8)
        expected = hand_weight(-1, -0.2, 0.1, 10, 4, [6, 5, 7], [6, 5, 7, 8])
        assert expected == pytest.approx(5.0)
        assert weight(level1_params(), H, s, Need.PERSONAL_SAFETY) == pytest.approx(5.0, abs=1e-9)

    def test_vector_form_agrees(self):
        s = state(personal_safety=4, sleep=6, energy=5, water=7, breed=8)
        assert all_weights(level1_params(), H, s)[Need.PERSONAL_SAFETY] == pytest.approx(5.0, abs=1e-9)

    def test_uniform_full_state(self):
        w = all_weights(level1_params(), H, state())
        for need in needs_at(1):
            assert w[need] == pytest.approx(10.0 + -1.0 * S_MAX)

    def test_argmax_level1(self):
        s = state(energy=2, sleep=9, water=9, breed=9)
        w = all_weights(level1_params(), H, s)
        assert w.argmax(needs_at(1)) == Need.ENERGY
        assert w[Need.ENERGY] == pytest.approx(8.0)

    def test_argmax_tie_goes_to_canonical_order(self):
        w = all_weights(level1_params(), H, state(sleep=1, energy=1))
        assert w.argmax(needs_at(1)) == Need.SLEEP

    def test_unknown_need_rejected(self):
        with pytest.raises(ConfigurationError):
            weight(level1_params(), H, state(), "appetite")

    @given(sat_value)
    def test_level1_identity(self, s):
        assert weight(level1_params(), H, state(water=s), Need.WATER) == 10.0 - s

    @given(sat_vectors)
    def test_vector_matches_scalar(self, sats):
        s = SatisfactionState(dict(zip(NEEDS, sats)))
        w = all_weights(WeightParams.default(), H, s)
        for need in NEEDS:
            assert w[need] == pytest.approx(weight(WeightParams.default(), H, s, need), abs=1e-9)

    @given(sat_vectors, st.sampled_from(NEEDS), st.floats(0.01, 5.0))
    def test_less_satisfied_weighs_more(self, sats, need, bump):
        s = SatisfactionState(dict(zip(NEEDS, sats)))
        params = WeightParams.default()
        lower = s.with_sat({need: max(0.0, s.sat[need] - bump)})
        assert weight(params, H, lower, need) >= weight(params, H, s, need)

    @given(sat_vectors, st.sampled_from([n for n in NEEDS if n.level > 1]))
    def test_well_fed_body_raises_higher_needs(self, sats, need):
        # with gamma > |beta| a better satisfied level below makes a higher need count for more
        params = level1_params()
        s = SatisfactionState(dict(zip(NEEDS, sats)))
        fed = s.with_sat({j: S_MAX for j in H.lower(need) if j not in H.sons[need]})
        assert weight(params, H, fed, need) >= weight(params, H, s, need) - 1e-9


class TestMinDelta:
    def test_default_params_keep_corners_nonnegative(self):
        params = WeightParams.default()
        for need, low in corner_minimum(params, H).items():
            assert low >= -1e-9, need

    @settings(max_examples=50)
    @given(
        st.floats(-2, -0.01),
        st.floats(-1, -0.001),
        st.floats(0.001, 1),
    )
    def test_min_delta_matches_corner_oracle(self, a, b, g):
        raw = WeightParams.per_level({lvl: (a, b, g) for lvl in (1, 2, 3, 4)}, {1: 0, 2: 0, 3: 0, 4: 0})
        lifted = raw.with_min_delta(H, levels=(1, 2, 3, 4))
        corners = corner_minimum(lifted, H)
        for level in (1, 2, 3, 4):
            lowest = min(corners[n] for n in needs_at(level))
            # the offset is the smallest one: the worst corner lands on zero
            assert lowest == pytest.approx(0.0, abs=1e-9)
            assert min_delta(raw, H, level) >= 0


class TestDecayAndEvents:
    def test_decay_reaches_threshold(self):
        s = SatisfactionState({**{n: 10.0 for n in NEEDS}, Need.ENERGY: 5.1}, {Need.ENERGY: 0.1})
        assert decay_tick(s)[Need.ENERGY] == pytest.approx(5.0)

    def test_decay_clamps_at_zero(self):
        s = SatisfactionState({**{n: 10.0 for n in NEEDS}, Need.ENERGY: 0.05}, {Need.ENERGY: 0.1})
        assert decay_tick(s)[Need.ENERGY] == 0.0

    def test_zero_rate_is_identity(self):
        s = SatisfactionState({**{n: 10.0 for n in NEEDS}, Need.SLEEP: 5.0}, {Need.SLEEP: 0.0})
        assert decay_tick(s)[Need.SLEEP] == 5.0

    def test_decay_leaves_higher_levels(self):
        s = SatisfactionState({n: 3.0 for n in NEEDS}, {n: 1.0 for n in NEEDS})
        after = decay_tick(s)
        assert all(after[n] == 3.0 for n in NEEDS if n.level > 1)

    def test_ate_fills_energy(self):
        assert apply_event(state(energy=2.3), NeedEvent("ate"))[Need.ENERGY] == S_MAX

    def test_recover_clamps_at_ceiling(self):
        assert apply_event(state(), NeedEvent.recover(Need.PERSONAL_SAFETY))[Need.PERSONAL_SAFETY] == S_MAX

    def test_predator_at_view_edge_sits_on_threshold(self):
        s = apply_event(state(), NeedEvent.predator_proximity(23, 23))
        assert s[Need.PERSONAL_SAFETY] == pytest.approx(5.0)

    def test_friend_threat_sets_friendship(self):
        s = apply_event(state(), NeedEvent.friend_threat(0, 16))
        assert s[Need.FRIENDSHIP] == 0.0

    @pytest.mark.parametrize("event", [NeedEvent("ate_twice"), NeedEvent("predator_proximity"), NeedEvent("recover")])
    def test_malformed_event_rejected(self, event):
        before = state(energy=4)
        with pytest.raises(ValueError):
            apply_event(before, event)
        assert before[Need.ENERGY] == 4

    @pytest.mark.parametrize("d, expected", [(0, 0.0), (46, 10.0), (23, 5.0), (100, 10.0)])
    def test_safety_map(self, d, expected):
        assert safety_satisfaction(d, 23) == pytest.approx(expected)
        assert friendship_satisfaction(d, 23) == pytest.approx(expected)

    def test_zero_radius_is_a_configuration_fault(self):
        with pytest.raises(ConfigurationError):
            safety_satisfaction(1, 0)

    @given(st.floats(0, 1000), st.floats(0.1, 100))
    def test_safety_map_is_bounded(self, d, r):
        assert 0.0 <= safety_satisfaction(d, r) <= S_MAX

    def test_death_only_at_level1(self):
        assert not is_dead(state(sleep=5, energy=5, water=5, breed=5))
        assert is_dead(state(water=0))
        assert not is_dead(state(personal_safety=0))

    def test_arisen_below_threshold(self):
        assert arisen(state(energy=4.99, water=5.0)) == [Need.ENERGY]


class TestConfiguration:
    def test_son_must_be_one_level_lower(self):
        with pytest.raises(ConfigurationError):
            NeedHierarchy({Need.RESPECT: {Need.ENERGY}})

    def test_positive_alpha_rejected(self):
        with pytest.raises(ConfigurationError):
            level1_params(alpha=0.5)

    def test_labels_round_trip(self):
        for need in NEEDS:
            assert Need.from_label(need.label) is need
        assert Need.ENERGY.label == "hungry"
