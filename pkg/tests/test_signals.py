import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pendulab.signals import (
    ConstantDisturbance,
    ConstantReference,
    JoystickReference,
    LowPassState,
    NoDisturbance,
    NoiseSpec,
    NoiseStream,
    RangeMap,
    SineDisturbance,
    SineReference,
    adc_to_range,
    disturbance_at,
    lowpass_step,
    reference_at,
)

TORQUE = RangeMap(-5.0, 5.0)
REF = RangeMap(-math.pi, math.pi)


class TestAdc:
    def test_endpoints_exact(self):
        assert adc_to_range(0, TORQUE) == -5.0
        assert adc_to_range(1023, TORQUE) == 5.0
        assert adc_to_range(1023, REF) == math.pi

    def test_midpoint(self):
        assert adc_to_range(512, TORQUE) == pytest.approx(0.00489, abs=1e-5)

    @given(st.integers(0, 1022))
    def test_monotone(self, raw):
        assert adc_to_range(raw, TORQUE) < adc_to_range(raw + 1, TORQUE)

    def test_out_of_range_rejected(self):
        for raw in (-1, 1024, 2000):
            with pytest.raises(ValueError):
                adc_to_range(raw, TORQUE)


class TestLowPass:
    def test_step_response(self):
        st0 = LowPassState(y=0.0, tau_f=0.05)
        out = lowpass_step(st0, 1.0, dt=0.05)
        assert out.y == pytest.approx(1 - math.exp(-1))

    def test_fixed_point(self):
        st0 = LowPassState(y=0.7, tau_f=0.05)
        assert lowpass_step(st0, 0.7, dt=0.01).y == 0.7

    def test_tiny_dt_stays_near_state(self):
        st0 = LowPassState(y=0.0, tau_f=0.05)
        assert lowpass_step(st0, 1.0, dt=1e-9).y < 1e-6

    @given(
        st.floats(-10, 10),
        st.floats(-10, 10),
        st.floats(1e-6, 10),
    )
    def test_convex_combination(self, y, u, dt):
        out = lowpass_step(LowPassState(y=y, tau_f=0.05), u, dt).y
        assert min(y, u) - 1e-12 <= out <= max(y, u) + 1e-12


class TestNoise:
    def test_zero_stds_zero_noise(self):
        stream = NoiseStream(NoiseSpec(0.0, 0.0, 0.0, seed=1))
        assert stream.sample() == (0.0, 0.0, 0.0)

    def test_same_seed_identical(self):
        a = NoiseStream(NoiseSpec(0.1, 0.01, 0.01, seed=9))
        b = NoiseStream(NoiseSpec(0.1, 0.01, 0.01, seed=9))
        for _ in range(100):
            assert a.sample() == b.sample()

    def test_different_seeds_differ(self):
        a = NoiseStream(NoiseSpec(0.1, 0.01, 0.01, seed=1))
        b = NoiseStream(NoiseSpec(0.1, 0.01, 0.01, seed=2))
        draws_a = [a.sample() for _ in range(100)]
        draws_b = [b.sample() for _ in range(100)]
        assert draws_a != draws_b

    def test_sample_mean_near_zero(self):
        stream = NoiseStream(NoiseSpec(input_std=0.1, seed=3))
        n = 100_000
        total = sum(stream.sample()[0] for _ in range(n))
        assert abs(total / n) < 0.1 * 3 / math.sqrt(n)

    def test_negative_std_rejected(self):
        with pytest.raises(ValueError):
            NoiseSpec(input_std=-0.1)


class TestDisturbance:
    def test_values(self):
        assert disturbance_at(NoDisturbance(), 3.0) == 0.0
        assert disturbance_at(ConstantDisturbance(0.2), 17.0) == 0.2
        assert disturbance_at(SineDisturbance(0.1, 0.5, 0.0), 0.5) == pytest.approx(0.1)


class TestReference:
    def test_constant(self):
        assert reference_at(ConstantReference(math.pi), 2.0) == math.pi

    def test_sine(self):
        assert reference_at(SineReference(amp=1.0, freq=0.2, offset=0.0), 1.25) == pytest.approx(1.0)

    def test_joystick_endpoint(self):
        assert reference_at(JoystickReference(), 0.0, latest_adc=1023) == math.pi

    def test_joystick_without_frames_is_centered(self):
        assert reference_at(JoystickReference(), 0.0, latest_adc=None) == 0.0

    @given(st.floats(-100, 100), st.floats(0.01, 10), st.floats(-10, 10), st.floats(0, 1e4))
    def test_never_exceeds_pi(self, amp, freq, offset, t):
        r = reference_at(SineReference(amp=amp, freq=freq, offset=offset), t)
        assert -math.pi <= r <= math.pi

    def test_constant_clamped(self):
        assert reference_at(ConstantReference(10.0), 0.0) == math.pi
        assert reference_at(ConstantReference(-10.0), 0.0) == -math.pi
