"""Observables: front position, wavenumber, frequency, lock status, sweeps.

The front is located where the amplitude envelope crosses a fraction of the
wake plateau amplitude.  For qcGL the envelope is |u|; CH patterns are real
and sign-alternating, so the envelope is a running-window maximum of |u|
over roughly one wavelength.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.ndimage import maximum_filter1d

from .models import ModelSpec
from .sim import FieldState, RunConfig, RunRecord, evolve, make_stepper


class MeasureError(RuntimeError):
    pass


class NoFrontError(MeasureError):
    """Field below threshold everywhere."""


def envelope(state: FieldState, kind: Optional[str] = None) -> np.ndarray:
    values = state.values
    if kind is None:
        kind = "qcgl" if np.iscomplexobj(values) else "ch"
    amp = np.abs(values)
    if kind == "qcgl":
        return amp
    # window of one estimated wavelength from the dominant Fourier mode
    spec = np.abs(np.fft.rfft(values))
    spec[0] = 0.0
    kdom = max(1, int(np.argmax(spec)))
    wavelength_pts = max(3, int(round(state.grid.n / kdom)))
    return maximum_filter1d(amp, size=wavelength_pts, mode="wrap")


def front_position(state: FieldState, threshold_fraction: float = 0.5) -> float:
    """Rightmost xi where the envelope falls through threshold_fraction times
    the wake plateau amplitude, by linear interpolation."""
    if not 0.0 < threshold_fraction < 1.0:
        raise ValueError("threshold_fraction must be in (0, 1)")
    env = envelope(state)
    plateau = float(np.max(env))
    thr = threshold_fraction * plateau
    if plateau <= 0.0 or not np.any(env >= thr):
        raise NoFrontError("no front: field below threshold everywhere")
    above = env >= thr
    # rightmost downward crossing, not wrapping through the boundary
    idx = np.nonzero(above[:-1] & ~above[1:])[0]
    if idx.size == 0:
        raise NoFrontError("no front: envelope never falls below threshold")
    i = int(idx[-1])
    frac = (env[i] - thr) / (env[i] - env[i + 1])
    return float((i + frac) * state.grid.dx)


def wake_window(state: FieldState, front: float) -> tuple[float, float]:
    """Default wake measurement window [front - 0.5 L, front - 0.1 L], clipped
    away from the trigger's wake-side sign reversal."""
    length = state.grid.length
    lo = front - 0.5 * length
    hi = front - 0.1 * length
    return lo, hi


def _window_indices(state: FieldState, window: tuple[float, float]) -> np.ndarray:
    lo, hi = window
    n, length = state.grid.n, state.grid.length
    i0 = int(np.ceil(lo / state.grid.dx))
    i1 = int(np.floor(hi / state.grid.dx))
    if i1 <= i0:
        raise MeasureError(f"empty measurement window {window}")
    return np.arange(i0, i1 + 1) % n


def wavenumber_estimate(state: FieldState, window: tuple[float, float],
                        kind: Optional[str] = None) -> float:
    """Wake wavenumber: local phase gradient Im(conj(u) u_xi)/|u|^2 (qcGL) or
    zero-crossing spacing (CH)."""
    values = state.values
    if kind is None:
        kind = "qcgl" if np.iscomplexobj(values) else "ch"
    idx = _window_indices(state, window)
    if kind == "qcgl":
        kappa = 2.0 * np.pi * np.fft.fftfreq(state.grid.n, d=state.grid.dx)
        ux = np.fft.ifft(1j * kappa * np.fft.fft(values))
        u = values[idx]
        du = ux[idx]
        a2 = np.abs(u) ** 2
        if np.max(a2) < 1e-12:
            raise MeasureError("window amplitude below noise floor")
        return float(np.sum(np.imag(np.conj(u) * du)) / np.sum(a2))
    u = np.real(values[idx])
    if np.max(np.abs(u)) < 1e-8:
        raise MeasureError("window amplitude below noise floor")
    signs = np.sign(u)
    signs[signs == 0] = 1
    crossings = np.nonzero(np.diff(signs))[0]
    if crossings.size < 2:
        raise MeasureError("too few zero crossings for a wavenumber estimate")
    # subgrid-interpolated first and last crossing
    def loc(j):
        return j + u[j] / (u[j] - u[j + 1])
    span = (loc(crossings[-1]) - loc(crossings[0])) * state.grid.dx
    half_periods = crossings.size - 1
    return float(np.pi * half_periods / span)


def temporal_frequency_estimate(record: RunRecord, probe_xi: Optional[float] = None
                                ) -> float:
    """Dominant |frequency| of the probe series over the trailing half of the
    record, from the discrete spectrum with parabolic peak interpolation."""
    if len(record.probe_t) < 16:
        raise MeasureError("record carries no usable probe series")
    t = np.asarray(record.probe_t, dtype=float)
    u = np.asarray(record.probe_u, dtype=complex)
    half = len(t) // 2
    t, u = t[half:], u[half:]
    dt = t[1] - t[0]
    u = u - u.mean()
    if np.max(np.abs(u)) < 1e-12:
        return 0.0
    spec = np.abs(np.fft.fft(u * np.hanning(len(u))))
    freqs = 2.0 * np.pi * np.fft.fftfreq(len(u), d=dt)
    j = int(np.argmax(spec))
    if spec[j] < 4.0 * np.median(spec):
        raise MeasureError("no dominant spectral peak at the probe")
    # parabolic interpolation on log-magnitude around the peak
    jm, jp = (j - 1) % len(u), (j + 1) % len(u)
    a, b, c = np.log(spec[jm] + 1e-300), np.log(spec[j] + 1e-300), \
        np.log(spec[jp] + 1e-300)
    denom = a - 2.0 * b + c
    shift = 0.5 * (a - c) / denom if abs(denom) > 1e-14 else 0.0
    df = freqs[1] - freqs[0]
    return float(abs(freqs[j] + shift * df))


@dataclass(frozen=True)
class LockStatus:
    locked: bool
    distance: float  # mean trigger-to-front distance when locked
    rate: float      # drift rate when not


def lock_status(record: RunRecord, trailing_window: float,
                tol_lock: Optional[float] = None) -> LockStatus:
    """Least-squares front drift over the trailing window; |slope| < tol_lock
    means locked (default tol 1e-3 * max(|c|, 1))."""
    samples = [(t, fp) for (t, fp, *_rest) in record.samples if np.isfinite(fp)]
    if not samples:
        raise NoFrontError("no front in record")
    t_end = samples[-1][0]
    pts = [(t, fp) for (t, fp) in samples if t >= t_end - trailing_window]
    if len(pts) < 3:
        raise MeasureError("trailing window holds fewer than 3 samples")
    t = np.array([p[0] for p in pts])
    fp = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(t, fp, 1)
    c = record.config.spec.c
    if tol_lock is None:
        tol_lock = 1e-3 * max(abs(c), 1.0)
    trig = record.config.spec.trigger
    ref = trig.primary_interface if trig is not None else 0.0
    if abs(slope) < tol_lock:
        return LockStatus(True, float(np.mean(fp) - ref), float(slope))
    return LockStatus(False, float(np.mean(fp) - ref), float(slope))


def free_front_speed(record: RunRecord) -> float:
    """Lab-frame free front speed: trailing-half slope of front_position(t)
    plus the frame speed."""
    samples = [(t, fp) for (t, fp, *_rest) in record.samples if np.isfinite(fp)]
    if len(samples) < 4:
        raise NoFrontError("not enough front samples for a speed fit")
    t = np.array([p[0] for p in samples])
    fp = np.array([p[1] for p in samples])
    half = t >= t[0] + 0.5 * (t[-1] - t[0])
    slope = np.polyfit(t[half], fp[half], 1)[0]
    return float(slope + record.config.spec.c)


@dataclass(frozen=True)
class SweepPoint:
    c: float
    k: float
    omega: float
    distance: float
    locked: bool
    detach_event: bool


def adiabatic_sweep(spec: ModelSpec, state: FieldState, c_start: float,
                    c_end: float, dc: float, dwell: float, dt: float = 0.01,
                    tol_lock: Optional[float] = None, sponge=None,
                    floor: float = 0.0) -> tuple[list, FieldState]:
    """Step the trigger speed adiabatically, dwelling at each value.

    The field carries over between dwells (the hysteresis protocol).
    Detach events are flagged when the trigger-to-front distance jumps by
    more than one pattern wavelength within one dwell.  Returns the sweep
    points and the final state for chaining (e.g. down-sweep then up-sweep).
    """
    if dc == 0:
        cs = [c_start]
    else:
        n = int(round(abs(c_end - c_start) / abs(dc)))
        cs = list(c_start + np.sign(c_end - c_start) * abs(dc) * np.arange(n + 1))
    points = []
    prev_distance = None
    for c in cs:
        spec_c = spec.with_c(c)
        config = RunConfig(spec=spec_c, grid=state.grid, dt=dt, t_end=dwell,
                           record_every=max(dwell / 50.0, dt), sponge=sponge,
                           floor=floor)
        state = FieldState(state.grid, state.values, 0.0, c)
        record = evolve(config, state)
        state = record.final_state
        if record.error is not None:
            break
        try:
            status = lock_status(record, trailing_window=0.5 * dwell,
                                 tol_lock=tol_lock)
            fp = front_position(state)
            k = wavenumber_estimate(state, wake_window(state, fp), kind=spec.kind)
        except MeasureError:
            points.append(SweepPoint(c, np.nan, np.nan, np.nan, False, False))
            prev_distance = None
            continue
        omega = c * k if spec.kind == "ch" else np.nan
        detach = (prev_distance is not None and np.isfinite(k) and k != 0
                  and abs(status.distance - prev_distance) > 2.0 * np.pi / abs(k))
        points.append(SweepPoint(c, k, omega, status.distance, status.locked,
                                 bool(detach)))
        prev_distance = status.distance
    return points, state
