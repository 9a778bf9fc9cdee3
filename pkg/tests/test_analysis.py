import math

import numpy as np
import pytest

from pendulab import (
    PID,
    ConstantReference,
    P,
    PendulumParams,
    ScenarioConfig,
    SimState,
    run_headless,
)
from pendulab.analysis import (
    NotOscillatingError,
    augmented_energy_bang,
    augmented_energy_p,
    bang_stabilizable_at_pi,
    estimate_g,
    measure_period,
    p_equilibrium,
    perf_metrics,
    pid_equilibrium,
)
from pendulab.config import SessionMode
from pendulab.dynamics import total_energy

PAPER = PendulumParams(m=0.2, ell=0.20, g=9.81, b=0.0)
MGL = 0.3924


class TestAugmentedEnergy:
    def test_bang_at_target(self):
        s = SimState(0.0, 0.0)
        assert augmented_energy_bang(PAPER, s, r=0.0, tau_max=5.0) == pytest.approx(-MGL)

    def test_bang_zero_torque_reduces_to_energy(self):
        s = SimState(0.7, 1.2)
        assert augmented_energy_bang(PAPER, s, r=0.1, tau_max=0.0) == total_energy(PAPER, s)

    def test_bang_at_inverted_target(self):
        s = SimState(math.pi, 0.0)
        assert augmented_energy_bang(PAPER, s, r=math.pi, tau_max=5.0) == pytest.approx(MGL)

    def test_p_reduces_to_energy(self):
        s = SimState(0.4, -0.2)
        assert augmented_energy_p(PAPER, s, r=0.9, kp=0.0) == total_energy(PAPER, s)
        assert augmented_energy_p(PAPER, SimState(0.9, -0.2), r=0.9, kp=2.0) == total_energy(
            PAPER, SimState(0.9, -0.2)
        )

    def test_p_direct_value(self):
        s = SimState(0.0, 0.0)
        assert augmented_energy_p(PAPER, s, r=1.0, kp=2.0) == pytest.approx(-MGL + 1.0)


class TestStabilizability:
    def test_paper_actuator_wins(self):
        assert bang_stabilizable_at_pi(PAPER, 5.0)

    def test_boundary_is_strict(self):
        assert not bang_stabilizable_at_pi(PAPER, MGL)

    def test_zero_torque(self):
        assert not bang_stabilizable_at_pi(PAPER, 0.0)


class TestPEquilibrium:
    def test_inverted_reference_exact(self):
        pred = p_equilibrium(PAPER, kp=2.0, r=math.pi)
        assert pred.theta_star == pytest.approx(math.pi, abs=1e-9)

    def test_zero_reference(self):
        pred = p_equilibrium(PAPER, kp=2.0, r=0.0)
        assert pred.theta_star == pytest.approx(0.0, abs=1e-9)

    def test_half_pi_reference(self):
        pred = p_equilibrium(PAPER, kp=2.0, r=math.pi / 2)
        assert pred.theta_star == pytest.approx(1.378, abs=1e-3)
        assert abs(pred.residual) < 1e-10
        # steady-state error around 0.193 rad
        assert (math.pi / 2 - pred.theta_star) == pytest.approx(0.193, abs=1e-3)

    def test_kp_must_be_positive(self):
        with pytest.raises(ValueError):
            p_equilibrium(PAPER, kp=0.0, r=1.0)

    def test_root_matches_long_simulation(self):
        p = PendulumParams(b=0.5)
        pred = p_equilibrium(p, kp=2.0, r=math.pi / 2)
        rec = run_headless(
            ScenarioConfig(
                controller=P(kp=2.0),
                reference=ConstantReference(math.pi / 2),
                params=p,
                duration=30.0,
            )
        )
        assert abs(rec.frames[-1].theta - pred.theta_star) < 5e-3


class TestPidEquilibrium:
    def test_gravity_compensation(self):
        pred = pid_equilibrium(PAPER, r=math.pi / 3)
        assert pred.theta_star == math.pi / 3
        assert pred.sigma_star == pytest.approx(MGL * math.sqrt(3) / 2, abs=1e-4)

    def test_origin(self):
        pred = pid_equilibrium(PAPER, r=0.0)
        assert (pred.theta_star, pred.sigma_star) == (0.0, 0.0)

    def test_disturbance_absorbed(self):
        pred = pid_equilibrium(PAPER, r=0.0, disturbance_d0=0.2)
        assert pred.sigma_star == pytest.approx(-0.2)

    def test_sigma_matches_long_simulation(self):
        p = PendulumParams(b=0.5)
        rec = run_headless(
            ScenarioConfig(
                controller=PID(kp=2.0, ki=1.0, kd=0.2),
                reference=ConstantReference(math.pi / 2),
                params=p,
                duration=30.0,
            )
        )
        pred = pid_equilibrium(p, r=math.pi / 2)
        assert abs(rec.final_controller_state.sigma - pred.sigma_star) < 1e-3


class TestGEstimation:
    def test_inverted_period_formula(self):
        assert estimate_g(0.8972, 0.20) == pytest.approx(9.81, abs=0.01)

    def test_unit_case(self):
        assert estimate_g(2 * math.pi, 1.0) == pytest.approx(1.0)

    def test_end_to_end_small_amplitude(self):
        cfg = ScenarioConfig(
            mode=SessionMode.OPEN_LOOP,
            controller=None,
            params=PAPER,
            initial=SimState(theta=0.01),
            duration=10.0,
        )
        rec = run_headless(cfg)
        period = measure_period([f.t for f in rec.frames], [f.theta for f in rec.frames])
        g = estimate_g(period, 0.20)
        assert abs(g - 9.81) / 9.81 < 0.01


class TestMeasurePeriod:
    def test_small_cosine(self):
        t = np.arange(0, 10, 1e-3)
        theta = 0.01 * np.cos(7.0036 * t)
        assert measure_period(t, theta) == pytest.approx(0.8972, abs=1e-3)

    def test_unit_sine(self):
        t = np.arange(0, 10, 1e-3)
        assert measure_period(t, np.sin(2 * np.pi * t)) == pytest.approx(1.0, abs=1e-3)

    def test_constant_rejected(self):
        t = np.arange(0, 10, 1e-3)
        with pytest.raises(NotOscillatingError):
            measure_period(t, np.ones_like(t))


class TestPerfMetrics:
    def test_perfect_tracking(self):
        t = np.arange(0, 5, 1e-3)
        r = np.full_like(t, 0.5)
        m = perf_metrics(t, r.copy(), r)
        assert m.overshoot == 0.0
        assert m.settling_time_2pct == 0.0
        assert m.rms_error == 0.0
        assert m.steady_state_error == 0.0

    def test_exponential_approach(self):
        t = np.arange(0, 10, 1e-3)
        theta = 1.0 - np.exp(-t)
        m = perf_metrics(t, theta, np.ones_like(t))
        assert m.overshoot == 0.0
        assert m.settling_time_2pct == pytest.approx(math.log(50), abs=0.01)

    def test_underdamped_has_larger_overshoot(self):
        t = np.arange(0, 20, 1e-3)
        crit = 1.0 - np.exp(-t) * (1 + t)
        under = 1.0 - np.exp(-0.3 * t) * (np.cos(2 * t) + 0.15 * np.sin(2 * t))
        r = np.ones_like(t)
        m_crit = perf_metrics(t, crit, r)
        m_under = perf_metrics(t, under, r)
        assert m_under.overshoot > m_crit.overshoot

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            perf_metrics([], [], [])


class TestDissipation:
    """Sampled augmented-energy descent along simulated trajectories."""

    def test_p_control_monotone(self):
        rec = run_headless(
            ScenarioConfig(
                controller=P(kp=2.0),
                reference=ConstantReference(math.pi / 2),
                params=PendulumParams(b=0.5),
                duration=10.0,
            )
        )
        ea = np.array([f.aug_energy for f in rec.frames])
        assert np.max(np.diff(ea)) < 1e-8

    def test_pd_zero_friction_monotone(self):
        from pendulab import PD

        rec = run_headless(
            ScenarioConfig(
                controller=PD(kp=2.0, kd=0.2),
                reference=ConstantReference(math.pi),
                params=PendulumParams(b=0.0),
                duration=10.0,
            )
        )
        ea = np.array([f.aug_energy for f in rec.frames])
        assert np.max(np.diff(ea)) < 1e-8
