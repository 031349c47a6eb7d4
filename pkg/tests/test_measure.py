import numpy as np
import pytest

from frontlab.measure import (LockStatus, MeasureError, NoFrontError,
                              free_front_speed, front_position, lock_status,
                              temporal_frequency_estimate, wake_window,
                              wavenumber_estimate)
from frontlab.models import ChParams, ModelSpec, QcglParams, TriggerSpec
from frontlab.sim import FieldState, Grid1D, RunConfig, RunRecord

QCGL = ModelSpec("qcgl", qcgl=QcglParams(0.3, -0.2, 0.2, 4.0), c=2.6,
                 trigger=TriggerSpec(epsilon=1.0, primary_interface=75.0))
GRID = Grid1D(512, 100.0)


def qcgl_front_state(x0: float, k: float = 1.1, amp: float = 2.0) -> FieldState:
    xi = GRID.xi
    env = amp * 0.5 * (1.0 - np.tanh(xi - x0))
    return FieldState(GRID, env * np.exp(1j * k * xi), c=2.6)


class TestFrontPosition:
    def test_tanh_front_located_at_midpoint(self):
        st = qcgl_front_state(60.0)
        assert front_position(st) == pytest.approx(60.0, abs=2 * GRID.dx)

    def test_no_front_on_zero_field(self):
        st = FieldState(GRID, np.zeros(GRID.n, dtype=complex))
        with pytest.raises(NoFrontError):
            front_position(st)

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            front_position(qcgl_front_state(60.0), threshold_fraction=1.5)

    def test_ch_envelope_sees_through_oscillation(self):
        xi = GRID.xi
        u = np.cos(1.2 * xi) * 0.5 * (1.0 - np.tanh(xi - 55.0))
        st = FieldState(GRID, u)
        assert front_position(st) == pytest.approx(55.0, abs=3.0)


class TestWavenumber:
    def test_qcgl_exact_on_pure_mode(self):
        m = 90  # integer mode so the spectral derivative is exact
        k = 2.0 * np.pi * m / GRID.length
        st = FieldState(GRID, np.exp(1j * k * GRID.xi))
        est = wavenumber_estimate(st, (20.0, 80.0))
        assert est == pytest.approx(k, abs=1e-10)

    def test_ch_zero_crossing_estimate(self):
        m = 90
        k = 2.0 * np.pi * m / GRID.length
        st = FieldState(GRID, np.cos(k * GRID.xi))
        est = wavenumber_estimate(st, (20.0, 80.0))
        assert est == pytest.approx(k, rel=1e-3)

    def test_empty_window_raises(self):
        st = qcgl_front_state(60.0)
        with pytest.raises(MeasureError):
            wavenumber_estimate(st, (50.0, 50.0))

    def test_noise_floor_raises(self):
        st = FieldState(GRID, np.full(GRID.n, 1e-9 + 0j))
        with pytest.raises(MeasureError):
            wavenumber_estimate(st, (20.0, 80.0))

    def test_wake_window_trails_front(self):
        st = qcgl_front_state(60.0)
        lo, hi = wake_window(st, 60.0)
        assert lo < hi < 60.0


def make_record(samples, probe_t=(), probe_u=(), spec=QCGL):
    cfg = RunConfig(spec=spec, grid=GRID)
    return RunRecord(config=cfg, samples=list(samples),
                     probe_t=list(probe_t), probe_u=list(probe_u))


class TestFrequency:
    def test_recovers_probe_frequency(self):
        omega = 1.37
        t = np.arange(4096) * 0.01
        u = 0.5 * np.exp(-1j * omega * t)
        rec = make_record([], probe_t=t, probe_u=u)
        # Hann-windowed spectrum with parabolic peak interpolation resolves
        # the frequency to a small fraction of the bin width (~0.3 here)
        assert temporal_frequency_estimate(rec) == pytest.approx(omega,
                                                                 abs=5e-3)

    def test_too_short_series_raises(self):
        rec = make_record([], probe_t=[0.0, 0.1], probe_u=[0.0, 0.0])
        with pytest.raises(MeasureError):
            temporal_frequency_estimate(rec)

    def test_silent_probe_returns_zero(self):
        t = np.arange(128) * 0.01
        rec = make_record([], probe_t=t, probe_u=np.zeros(128, dtype=complex))
        assert temporal_frequency_estimate(rec) == 0.0


class TestLockAndSpeed:
    def test_stationary_front_is_locked(self):
        samples = [(t, 74.2, np.nan, np.nan, False, 0)
                   for t in np.arange(0.0, 100.0, 1.0)]
        st = lock_status(make_record(samples), trailing_window=50.0)
        assert isinstance(st, LockStatus)
        assert st.locked
        assert st.distance == pytest.approx(74.2 - 75.0)

    def test_drifting_front_is_not_locked(self):
        samples = [(t, 10.0 + 0.05 * t, np.nan, np.nan, False, 0)
                   for t in np.arange(0.0, 100.0, 1.0)]
        st = lock_status(make_record(samples), trailing_window=50.0)
        assert not st.locked
        assert st.rate == pytest.approx(0.05, abs=1e-10)

    def test_free_front_speed_adds_frame_speed(self):
        v = -0.13
        samples = [(t, 50.0 + v * t, np.nan, np.nan, False, 0)
                   for t in np.arange(0.0, 200.0, 1.0)]
        speed = free_front_speed(make_record(samples))
        assert speed == pytest.approx(QCGL.c + v, abs=1e-10)

    def test_no_front_raises(self):
        samples = [(t, np.nan, np.nan, np.nan, False, 0) for t in range(10)]
        with pytest.raises(NoFrontError):
            lock_status(make_record(samples), trailing_window=5.0)
