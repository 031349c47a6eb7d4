import numpy as np
import pytest

from frontlab.models import (ChParams, ModelSpec, QcglParams, TriggerSpec,
                             WaveTrain, model_rhs, scale_qcgl_params,
                             trigger_profile, wave_train_amplitude,
                             wave_train_residual)
from frontlab.sim import FieldState, Grid1D

QP = QcglParams(alpha=0.3, gamma=-0.2, beta=0.2, rho=4.0)


def fd4(f, x, h=1e-3):
    """Fourth-order central difference."""
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


class TestTrigger:
    def test_single_profile_satisfies_ode(self):
        trig = TriggerSpec(epsilon=1.0, primary_interface=3.0)
        xi = np.linspace(-5.0, 11.0, 41)
        chi = trigger_profile(trig, xi)
        dchi = fd4(lambda x: trigger_profile(trig, x), xi)
        residual = trig.epsilon * dchi - (chi**2 - 1.0)
        assert np.max(np.abs(residual)) <= 1e-10

    def test_single_profile_zero_at_interface(self):
        trig = TriggerSpec(epsilon=0.5, primary_interface=2.0)
        assert trigger_profile(trig, 2.0) == pytest.approx(0.0, abs=1e-14)
        assert trigger_profile(trig, 100.0) == pytest.approx(-1.0)
        assert trigger_profile(trig, -100.0) == pytest.approx(1.0)

    def test_plateau_levels(self):
        trig = TriggerSpec(epsilon=0.5, primary_interface=150.0,
                           secondary_interface=25.0, mode="plateau")
        assert trigger_profile(trig, 87.0) == pytest.approx(1.0, abs=1e-12)
        assert trigger_profile(trig, 5.0) == pytest.approx(-1.0, abs=1e-12)
        assert trigger_profile(trig, 195.0) == pytest.approx(-1.0, abs=1e-12)

    def test_off_trigger_is_unstable_everywhere(self):
        assert np.all(trigger_profile(None, np.linspace(0, 10, 5)) == 1.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            TriggerSpec(epsilon=0.0, primary_interface=0.0)
        with pytest.raises(ValueError):
            TriggerSpec(epsilon=1.0, primary_interface=0.0, mode="bogus")
        with pytest.raises(ValueError):
            TriggerSpec(epsilon=1.0, primary_interface=1.0,
                        secondary_interface=2.0, mode="plateau")


class TestModelSpec:
    def test_kind_param_consistency(self):
        with pytest.raises(ValueError):
            ModelSpec("qcgl", ch=ChParams(1.5))
        with pytest.raises(ValueError):
            ModelSpec("ch", qcgl=QP)
        with pytest.raises(ValueError):
            ModelSpec("kdv")

    def test_with_c_with_omega(self):
        ms = ModelSpec("ch", ch=ChParams(1.5), c=1.0, omega=2.0)
        assert ms.with_c(3.0).c == 3.0
        assert ms.with_c(3.0).omega == 2.0
        assert ms.with_omega(4.0).omega == 4.0


class TestRhs:
    def test_qcgl_gauge_equivariance(self):
        """rhs(e^{i phi} u) = e^{i phi} rhs(u) for the homogeneous medium."""
        ms = ModelSpec("qcgl", qcgl=QP, c=1.3, omega=0.7)
        grid = Grid1D(64, 20.0)
        rng = np.random.default_rng(1)
        u = (rng.standard_normal(64) + 1j * rng.standard_normal(64)) * 0.3
        phi = 0.8271
        r1 = model_rhs(ms, FieldState(grid, u * np.exp(1j * phi)))
        r2 = model_rhs(ms, FieldState(grid, u)) * np.exp(1j * phi)
        assert np.max(np.abs(r1 - r2)) <= 1e-12

    def test_ch_rhs_is_conservative(self):
        ms = ModelSpec("ch", ch=ChParams(1.5), c=1.9,
                       trigger=TriggerSpec(epsilon=1.0, primary_interface=10.0))
        grid = Grid1D(128, 40.0)
        rng = np.random.default_rng(2)
        u = rng.standard_normal(128) * 0.4
        rhs = model_rhs(ms, FieldState(grid, u))
        assert abs(np.sum(rhs)) <= 1e-10 * np.max(np.abs(rhs)) * 128


class TestWaveTrain:
    def test_residual_vanishes_on_exact_wave_train(self):
        """Amplitude equation R1 = 0 determines r(k); R2 then fixes the
        nonlinear dispersion omega(k) in the frame c."""
        k = 1.1
        r = wave_train_amplitude(QP, k)
        r2 = r * r
        # R2 = 0 defines the frequency
        c = 2.7
        omega = (QP.alpha * k**2 - QP.gamma * r2 + QP.beta * r2**2) - c * k
        wt = WaveTrain(r=r, k=k, omega=omega, c=c)
        res1, res2 = wave_train_residual(QP, wt)
        assert abs(res1) <= 1e-12
        assert abs(res2) <= 1e-12

    def test_amplitude_picks_upper_branch(self):
        r = wave_train_amplitude(QP, 0.0)
        r2 = r * r
        # upper root of r^4 - rho r^2 + k^2 - 1 = 0 at k = 0
        assert r2 == pytest.approx((QP.rho + np.sqrt(QP.rho**2 + 4.0)) / 2.0)

    def test_simulated_wake_satisfies_quartic_balance(self):
        """The dispersion relation carries the quartic (quintic-term)
        contribution; the quadratic-only variant fails by orders of
        magnitude on a saturated wave train."""
        k = 1.1157
        r = wave_train_amplitude(QP, k)
        r2 = r * r
        quartic = k**2 - QP.rho * r2 + r2**2 - 1.0
        quadratic = k**2 - QP.rho * r2 + r2 - 1.0
        assert abs(quartic) <= 1e-12
        assert abs(quadratic) > 1.0


class TestScaling:
    def test_scale_factors(self):
        c_t, g_t, chi_s, u_s, x_s, t_s = scale_qcgl_params(QP, c=2.7, omega=1.2)
        assert c_t == pytest.approx(2.7 / QP.rho)
        assert g_t == pytest.approx(QP.gamma / QP.rho)
        assert u_s == pytest.approx(np.sqrt(QP.rho))
        assert chi_s == pytest.approx(QP.rho**2)
        assert x_s == pytest.approx(QP.rho)
        assert t_s == pytest.approx(QP.rho**2)

    def test_scale_requires_positive_rho(self):
        with pytest.raises(ValueError):
            scale_qcgl_params(QcglParams(0.0, 0.0, 0.0, -1.0), 1.0, 0.0)
