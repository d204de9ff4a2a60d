import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from footplan.gait import (
    BehaviorParams,
    advance,
    gait_state_at,
    initial_gait_state,
    stance_duration,
    swing_reference_height,
)


def circular_close(a, b, tol=1e-9):
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d) <= tol


class TestStanceDuration:
    def test_half_duty_at_two_hertz(self):
        assert stance_duration(2.0, 0.5) == 0.25

    def test_direct_evaluation(self):
        assert stance_duration(4.0, 0.6) == 0.6 / 4.0
        assert stance_duration(4.0, 0.6) == pytest.approx(0.15)

    def test_duty_one_rejected_near_one_allowed(self):
        with pytest.raises(ValueError):
            stance_duration(1.0, 1.0)
        assert stance_duration(1.0, 0.999) == 0.999

    def test_nonpositive_frequency_rejected(self):
        with pytest.raises(ValueError):
            stance_duration(0.0, 0.5)
        with pytest.raises(ValueError):
            stance_duration(-2.0, 0.5)


class TestBehaviorParams:
    def test_vector_has_13_scalars(self):
        assert len(BehaviorParams().as_vector()) == 13

    def test_leg_offsets_prepend_zero(self):
        params = BehaviorParams(phase_offsets=(0.5, 0.75, 0.25))
        assert params.leg_offsets() == (0.0, 0.5, 0.75, 0.25)

    def test_validation(self):
        with pytest.raises(ValueError):
            BehaviorParams(frequency_hz=0.0)
        with pytest.raises(ValueError):
            BehaviorParams(duty_factor=1.0)
        with pytest.raises(ValueError):
            BehaviorParams(phase_offsets=(0.5, 1.0, 0.25))
        with pytest.raises(ValueError):
            BehaviorParams(swing_height=-0.01)


class TestAdvance:
    def test_full_period_returns_same_phases(self):
        params = BehaviorParams(frequency_hz=2.0)
        state = gait_state_at(0.3, params)
        after = advance(state, params, dt=1.0 / params.frequency_hz)
        assert circular_close(after.global_phase, state.global_phase)
        for a, b in zip(after.per_leg_phase, state.per_leg_phase):
            assert circular_close(a, b)
        assert after.in_contact == state.in_contact

    def test_three_beat_support_with_quarter_offsets(self):
        params = BehaviorParams(duty_factor=0.75, phase_offsets=(0.25, 0.5, 0.75))
        for k in range(997):
            state = gait_state_at(k / 997, params)
            assert sum(state.in_contact) == 3

    def test_phase_exactly_at_duty_boundary_is_swing_start(self):
        params = BehaviorParams(duty_factor=0.5)
        state = gait_state_at(0.5, params)
        assert not state.in_contact[0]
        assert state.swing_progress[0] == 0.0

    def test_contact_iff_phase_below_duty(self):
        params = BehaviorParams()
        state = gait_state_at(0.37, params)
        for leg in range(4):
            assert state.in_contact[leg] == (state.per_leg_phase[leg] < params.duty_factor)

    def test_stance_progress_is_zero(self):
        state = initial_gait_state(BehaviorParams())
        for leg in range(4):
            if state.in_contact[leg]:
                assert state.swing_progress[leg] == 0.0

    @given(
        phase=st.floats(0, 1, exclude_max=True),
        dt1=st.floats(1e-4, 5.0),
        dt2=st.floats(1e-4, 5.0),
    )
    def test_advance_is_additive(self, phase, dt1, dt2):
        params = BehaviorParams()
        state = gait_state_at(phase, params)
        two_hops = advance(advance(state, params, dt1), params, dt2)
        one_hop = advance(state, params, dt1 + dt2)
        assert circular_close(two_hops.global_phase, one_hop.global_phase, tol=1e-9)

    def test_contact_fraction_equals_duty(self):
        params = BehaviorParams(duty_factor=0.5)
        n = 40_000
        counts = [0] * 4
        for k in range(n):
            state = gait_state_at(k / n, params)
            for leg in range(4):
                counts[leg] += state.in_contact[leg]
        for leg in range(4):
            assert counts[leg] / n == pytest.approx(params.duty_factor, abs=1e-4)

    def test_nonpositive_dt_rejected(self):
        params = BehaviorParams()
        with pytest.raises(ValueError):
            advance(initial_gait_state(params), params, 0.0)


class TestSwingReferenceHeight:
    def test_endpoints_sit_exactly_at_margin(self):
        assert swing_reference_height(0.0, 0.09) == 0.02
        assert swing_reference_height(1.0, 0.09) == 0.02
        assert swing_reference_height(0.0, 0.09, 0.05) == 0.05

    def test_apex_at_half(self):
        s = 0.09
        assert swing_reference_height(0.5, s) == s + 0.02

    def test_quarter_point_value(self):
        # sqrt(sin(pi/4)) = sqrt(sqrt(2)/2) ~= 0.8409
        s = 0.09
        expected = s * math.sqrt(math.sqrt(2.0) / 2.0) + 0.02
        assert swing_reference_height(0.25, s) == pytest.approx(expected, abs=1e-12)
        assert swing_reference_height(0.25, 1.0, 0.0) == pytest.approx(0.8409, abs=5e-5)

    def test_out_of_range_progress_rejected(self):
        with pytest.raises(ValueError):
            swing_reference_height(-0.01, 0.09)
        with pytest.raises(ValueError):
            swing_reference_height(1.01, 0.09)

    def test_profile_dominates_plain_sine(self):
        # the sqrt shaping rises faster than the sine it wraps
        for k in range(0, 1001):
            phi = k / 1000
            lifted = swing_reference_height(phi, 1.0, 0.0)
            assert lifted >= math.sin(math.pi * phi) - 1e-12

    def test_continuous_and_unimodal(self):
        s = 0.13
        zs = [swing_reference_height(k / 2000, s) for k in range(2001)]
        apex = max(zs)
        assert apex == pytest.approx(s + 0.02, abs=1e-9)
        rising = zs[: zs.index(apex) + 1]
        falling = zs[zs.index(apex) :]
        assert all(b >= a - 1e-12 for a, b in zip(rising, rising[1:]))
        assert all(b <= a + 1e-12 for a, b in zip(falling, falling[1:]))
