import math

import pytest
from hypothesis import given, strategies as st

from pendulab.controllers import (
    FPID,
    PD,
    PID,
    BangBang,
    ControllerState,
    P,
    TorqueLimits,
    bang_bang,
    compute_torque,
    fpid_step,
    initial_state,
    p_control,
    pd_control,
    pid_step,
    saturate,
)

finite = st.floats(-100, 100, allow_nan=False)


class TestBangBang:
    def test_paper_switching_rows(self):
        assert bang_bang(math.pi, 0.0, 5.0) == 5.0
        assert bang_bang(1.0, 1.0, 5.0) == 0.0
        assert bang_bang(0.0, 0.5, 5.0) == -5.0

    @given(finite, finite)
    def test_output_set_and_oddness(self, r, theta):
        out = bang_bang(r, theta, 5.0)
        assert out in (-5.0, 0.0, 5.0)
        assert out == -bang_bang(theta, r, 5.0)

    @given(finite, finite, st.floats(1e-6, 1e6))
    def test_error_scaling_invariance(self, r, theta, scale):
        e = r - theta
        assert bang_bang(scale * e, 0.0, 5.0) == bang_bang(e, 0.0, 5.0)

    def test_dead_band(self):
        assert bang_bang(0.1, 0.0, 5.0, dead_band=0.2) == 0.0
        assert bang_bang(0.3, 0.0, 5.0, dead_band=0.2) == 5.0


class TestPControl:
    def test_values(self):
        assert p_control(2.0, math.pi / 2, 0.0) == pytest.approx(math.pi)
        assert p_control(2.0, 1.3, 1.3) == 0.0
        assert p_control(0.0, 3.0, -1.0) == 0.0


class TestPDControl:
    def test_pure_damping(self):
        assert pd_control(2.0, 0.1, math.pi, math.pi, 3.0) == pytest.approx(-0.3)

    def test_pure_proportional(self):
        assert pd_control(2.0, 0.1, 1.0, 0.0, 0.0) == pytest.approx(2.0)

    @given(finite, finite, finite)
    def test_kd_zero_reduces_to_p(self, r, theta, omega):
        assert pd_control(2.0, 0.0, r, theta, omega) == p_control(2.0, r, theta)


class TestPID:
    def test_one_step_hand_value(self):
        spec = PID(kp=1.0, ki=0.5, kd=0.0)
        tau, cs = pid_step(spec, initial_state(), r=1.0, theta=0.0, omega=0.0, dt=1e-3)
        assert cs.sigma == pytest.approx(5e-4)
        assert tau == pytest.approx(1.0005)

    @given(finite, finite, finite)
    def test_ki_zero_reduces_to_pd(self, r, theta, omega):
        spec = PID(kp=2.0, ki=0.0, kd=0.2)
        tau, _ = pid_step(spec, initial_state(), r, theta, omega, dt=1e-3)
        assert tau == pd_control(2.0, 0.2, r, theta, omega)

    @given(finite, finite, finite, finite, finite, finite)
    def test_affine_superposition(self, e1, w1, e2, w2, a, b):
        # with ki=0 the law is linear in (error, omega)
        spec = PID(kp=2.0, ki=0.0, kd=0.2)

        def law(e, w):
            tau, _ = pid_step(spec, initial_state(), e, 0.0, w, dt=1e-3)
            return tau

        lhs = law(a * e1 + b * e2, a * w1 + b * w2)
        rhs = a * law(e1, w1) + b * law(e2, w2)
        assert lhs == pytest.approx(rhs, abs=1e-6)

    def test_integrator_clamp(self):
        spec = PID(kp=0.0, ki=100.0, kd=0.0, sigma_limit=1.0)
        cs = initial_state()
        for _ in range(100):
            _, cs = pid_step(spec, cs, r=1.0, theta=0.0, omega=0.0, dt=0.01)
        assert cs.sigma == 1.0

    def test_determinism(self):
        spec = PID(kp=2.0, ki=1.0, kd=0.2)
        runs = []
        for _ in range(2):
            cs = initial_state()
            taus = []
            for k in range(50):
                tau, cs = pid_step(spec, cs, 1.0, 0.01 * k, -0.1, dt=1e-3)
                taus.append(tau)
            runs.append(taus)
        assert runs[0] == runs[1]


class TestFPID:
    def test_zero_history_zero_error(self):
        spec = FPID(kp=2.0, ki=1.0, kd=0.2, lam=0.5, mu=0.5)
        cs = initial_state()
        for _ in range(20):
            tau, cs = fpid_step(spec, cs, r=1.0, theta=1.0, omega=0.0, dt=0.01)
            assert tau == 0.0

    def test_half_derivative_of_error_ramp(self):
        # e(t) = t up to t = 1: D^0.5 contribution is kd * 2*sqrt(1/pi)
        spec = FPID(kp=0.0, ki=1e-12, kd=1.0, lam=0.5, mu=0.5)
        dt = 0.01
        cs = initial_state()
        tau = 0.0
        for k in range(101):
            tau, cs = fpid_step(spec, cs, r=k * dt, theta=0.0, omega=0.0, dt=dt)
        assert tau == pytest.approx(2 / math.sqrt(math.pi), rel=0.02)

    def test_history_truncated_to_memory(self):
        spec = FPID(memory=16)
        cs = initial_state()
        for _ in range(40):
            _, cs = fpid_step(spec, cs, 1.0, 0.0, 0.0, dt=0.01)
        assert len(cs.error_history) == 16

    def test_dt_mismatch_rejected(self):
        spec = FPID()
        _, cs = fpid_step(spec, initial_state(), 1.0, 0.0, 0.0, dt=0.01)
        with pytest.raises(ValueError):
            fpid_step(spec, cs, 1.0, 0.0, 0.0, dt=0.02)

    def test_order_bounds_enforced(self):
        with pytest.raises(ValueError):
            FPID(lam=1.0)
        with pytest.raises(ValueError):
            FPID(mu=0.0)


class TestSaturate:
    def test_clamp_values(self):
        lim = TorqueLimits(-5.0, 5.0)
        assert saturate(7.0, lim) == 5.0
        assert saturate(-12.0, lim) == -5.0
        assert saturate(0.3, lim) == 0.3

    @given(finite)
    def test_idempotent(self, x):
        lim = TorqueLimits(-5.0, 5.0)
        assert saturate(saturate(x, lim), lim) == saturate(x, lim)

    def test_invalid_limits(self):
        with pytest.raises(ValueError):
            TorqueLimits(5.0, -5.0)


def test_dispatch_covers_all_specs():
    cs = initial_state()
    for spec in (BangBang(), P(), PD(), PID(), FPID()):
        tau, _ = compute_torque(spec, cs, 0.5, 0.0, 0.0, 1e-3)
        assert math.isfinite(tau)
    with pytest.raises(TypeError):
        compute_torque(object(), cs, 0.0, 0.0, 0.0, 1e-3)
