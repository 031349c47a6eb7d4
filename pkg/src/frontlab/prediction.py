"""Logarithmic-spiral fit of a bifurcation branch and its spectral prediction.

Near the free pushed-front speed the locked-front branch traces a log spiral
in the (c, omega) plane whose pitch d log|mu| / d theta equals the ratio
Re(delta_nu) / Im(delta_nu) of the spatial eigenvalue gap delta_nu =
nu_ss - nu_su.  This module fits the spiral and compares against that ratio.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .spectral import SpatialSpectrum


class PredictionError(RuntimeError):
    pass


class NonOscillatoryError(PredictionError):
    """The eigenvalue gap has no imaginary part: no spiral is predicted."""


class DegenerateFitError(PredictionError):
    """Point cloud cannot support a spiral fit."""


@dataclass(frozen=True)
class SpiralFit:
    center: tuple          # (c, omega)
    pitch: float           # d log|mu| / d theta along increasing winding
    theta0: float          # unwrapped angle of the first point at the center
    scale: float           # |mu| extrapolated to theta = 0
    rms_residual: float    # rms of log|mu| residuals
    n_points: int
    whitened: bool = False

    def __post_init__(self):
        if self.n_points < 8:
            raise ValueError("a spiral fit needs at least 8 points")
        if not np.isfinite(self.rms_residual):
            raise ValueError("rms_residual must be finite")


def expected_pitch(spectrum: SpatialSpectrum) -> float:
    """Predicted spiral pitch Re(delta_nu) / Im(delta_nu).

    The branch parameter advances the winding angle by 2 Im(delta_nu) per
    unit gluing length while log|mu| advances by 2 Re(delta_nu), so the
    pitch is their ratio (signed).
    """
    dnu = spectrum.delta_nu
    if abs(dnu.imag) < 1e-9:
        raise NonOscillatoryError(
            "non-oscillatory splitting: eigenvalue gap is real, no spiral "
            "predicted (monotone front locking)")
    return float(dnu.real / dnu.imag)


def _unwrapped_angles(mu: np.ndarray) -> np.ndarray:
    """Sequential unwrap along the given (ordered) branch; never sorts."""
    return np.unwrap(np.arctan2(mu[:, 1], mu[:, 0]))


def generate_spiral(center, pitch: float, theta0: float, scale: float,
                    n_points: int, turns: float) -> np.ndarray:
    """Sample points of the model spiral log r = log(scale) + pitch * theta."""
    theta = theta0 + np.linspace(0.0, 2.0 * np.pi * turns, n_points)
    r = scale * np.exp(pitch * theta)
    return np.column_stack([center[0] + r * np.cos(theta),
                            center[1] + r * np.sin(theta)])


def winding_turns(points: Sequence, center) -> float:
    """Total winding of the ordered point list about center, in turns."""
    mu = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
    r = np.hypot(mu[:, 0], mu[:, 1])
    keep = r > 1e-14
    if np.count_nonzero(keep) < 2:
        return 0.0
    theta = _unwrapped_angles(mu[keep])
    return float(abs(theta[-1] - theta[0]) / (2.0 * np.pi))


def fit_log_spiral(points: Sequence, center_guess,
                   whiten: bool = False) -> SpiralFit:
    """Nonlinear least squares for (center, pitch, theta0, scale).

    For each point, mu_i = point - center and theta_i is the sequentially
    unwrapped angle; the model is log|mu_i| = log(scale) + pitch * theta_i.
    The residual is in log|mu|.  With whiten=True the cloud is first mapped
    to its principal axes with unit variances (absorbing any fixed linear
    map between the abstract mu-plane and (c, omega)); the pitch is then
    reported in whitened coordinates.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array-like of (c, omega)")
    n = len(pts)
    if n < 8:
        raise DegenerateFitError("need at least 8 points for a spiral fit")
    cg = np.asarray(center_guess, dtype=float)

    # collinearity guard
    rel = pts - pts.mean(axis=0)
    svals = np.linalg.svd(rel, compute_uv=False)
    if svals[1] <= 1e-12 * max(svals[0], 1e-300):
        raise DegenerateFitError("points are collinear")

    transform = np.eye(2)
    if whiten:
        _, s, vt = np.linalg.svd(pts - cg, full_matrices=False)
        transform = (vt.T / (s / np.sqrt(n))).T
    work = (pts - cg) @ transform.T
    wc0 = np.zeros(2)

    # A poor center guess (offset larger than the innermost radii) destroys
    # the sequential unwrap.  If that happens, iterate re-centering on the
    # mean of the smallest-radius points, which hug the true center of any
    # contracting log spiral; each pass re-ranks the radii about the new
    # center, so the estimate contracts onto the innermost cluster.
    mu0 = work - wc0
    r0 = np.hypot(mu0[:, 0], mu0[:, 1])
    if np.any(r0 <= 0.0):
        raise DegenerateFitError("a point coincides with the center guess")
    theta_init = _unwrapped_angles(mu0)
    if abs(theta_init[-1] - theta_init[0]) < 1.9 * np.pi:
        k = max(3, n // 8)
        for _attempt in range(12):
            inner = np.argsort(r0)[:k]
            new_wc = work[inner].mean(axis=0)
            shift = np.hypot(*(new_wc - wc0))
            wc0 = new_wc
            mu0 = work - wc0
            r0 = np.hypot(mu0[:, 0], mu0[:, 1])
            if np.all(r0 > 0.0) and shift < 0.05 * np.sort(r0)[k - 1]:
                break
        if np.any(r0 <= 0.0):
            raise DegenerateFitError("a point coincides with the center guess")
        theta_init = _unwrapped_angles(mu0)
        if abs(theta_init[-1] - theta_init[0]) < 1.9 * np.pi:
            raise DegenerateFitError(
                "points span fewer than one full turn about the center guess")
    pitch0, logs0 = np.polyfit(theta_init, np.log(r0), 1)
    span0 = abs(theta_init[-1] - theta_init[0])

    def _steps(center, keep=None):
        """Per-step turning angles and log-radius increments about center.

        The quotient angle of consecutive points is smooth in the center
        (no global unwrap), which keeps the least-squares landscape smooth.
        """
        mu = (work if keep is None else work[keep]) - center
        z = mu[:, 0] + 1j * mu[:, 1]
        if np.any(np.abs(z) < 1e-300):
            return None, None
        return np.angle(z[1:] * np.conj(z[:-1])), np.diff(np.log(np.abs(z)))

    # Stage 1: center and pitch from the incremental form.  The bare model
    # is degenerate (seen from far away any smooth arc is a near-perfect
    # log spiral), so penalize centers that destroy the observed winding.
    # A center error larger than a point's radius makes that point's angle
    # meaningless, so anneal: fit the outer points first and let inner
    # points in as the center sharpens.
    def make_residual_diff(keep, span_floor):
        def residual_diff(params):
            cx, cy, pitch = params
            dth, dlr = _steps(np.array([cx, cy]), keep)
            if dth is None:
                return np.full(keep.sum(), 1e6)
            penalty = 10.0 * n * max(0.0, span_floor - abs(np.sum(dth)))
            return np.append(dlr - pitch * dth, penalty)
        return residual_diff

    cx, cy = wc0
    pitch = pitch0
    levels = np.geomspace(np.max(r0) / 2.0, max(np.min(r0), 1e-300), 8)
    for level in np.append(levels, 0.0):
        r = np.hypot(work[:, 0] - cx, work[:, 1] - cy)
        keep = r >= level
        if keep.sum() < 8:
            continue
        mu = work[keep] - np.array([cx, cy])
        th = _unwrapped_angles(mu)
        span_floor = 0.9 * abs(th[-1] - th[0])
        if span_floor < 0.9 * np.pi:
            continue
        sol = least_squares(make_residual_diff(keep, span_floor),
                            np.array([cx, cy, pitch]), method="lm",
                            xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            max_nfev=5000)
        cx, cy, pitch = sol.x

    # Stage 2: polish with the absolute form, which also fixes the scale.
    def residual_abs(params):
        cx, cy, pitch, logs = params
        mu = work - np.array([cx, cy])
        r = np.hypot(mu[:, 0], mu[:, 1])
        if np.any(r < 1e-300):
            return np.full(n + 1, 1e6)
        theta = _unwrapped_angles(mu)
        penalty = 10.0 * n * max(0.0, 0.9 * span0
                                 - abs(theta[-1] - theta[0]))
        return np.append(np.log(r) - (logs + pitch * theta), penalty)

    mu = work - np.array([cx, cy])
    theta = _unwrapped_angles(mu)
    logs = float(np.mean(np.log(np.hypot(mu[:, 0], mu[:, 1])) - pitch * theta))
    x1 = np.array([cx, cy, pitch, logs])
    sol2 = least_squares(residual_abs, x1, method="lm", xtol=1e-15,
                         ftol=1e-15, gtol=1e-15, max_nfev=20000)
    if (np.sqrt(np.mean(residual_abs(sol2.x)[:-1] ** 2))
            <= np.sqrt(np.mean(residual_abs(x1)[:-1] ** 2))):
        cx, cy, pitch, logs = sol2.x
    res = residual_abs(np.array([cx, cy, pitch, logs]))[:-1]
    rms = float(np.sqrt(np.mean(res ** 2)))
    center = cg + np.linalg.solve(transform, np.array([cx, cy]))
    mu = work - np.array([cx, cy])
    theta0 = float(_unwrapped_angles(mu)[0])
    return SpiralFit(center=(float(center[0]), float(center[1])),
                     pitch=float(pitch), theta0=theta0,
                     scale=float(np.exp(logs)), rms_residual=rms,
                     n_points=n, whitened=whiten)


def compare_pitch(fit: SpiralFit, spectrum: SpatialSpectrum) -> float:
    """Relative error | |fit.pitch| - |expected| | / |expected|."""
    expected = expected_pitch(spectrum)
    return float(abs(abs(fit.pitch) - abs(expected)) / abs(expected))


def fold_spacing_diagnostic(branch, spectrum: Optional[SpatialSpectrum] = None
                            ) -> dict:
    """Report-only diagnostic of fold spacing along a branch.

    Folds alternate sides; the increment of front_distance between
    consecutive same-side folds is compared with pi / (2 |Im delta_nu|)
    (the distance the front retreats per half winding).  Returns an empty
    report when fewer than 3 folds are present.
    """
    folds = [p for p in branch.points if p.fold_flag]
    if len(folds) < 3:
        return {}
    increments = []
    for side in (folds[0::2], folds[1::2]):
        dists = [p.front_distance for p in side]
        increments.extend(np.abs(np.diff(dists)))
    increments = np.asarray(increments, dtype=float)
    mean_inc = float(np.mean(increments))
    cv = float(np.std(increments) / mean_inc) if mean_inc > 0 else np.nan
    report = {"n_folds": len(folds), "mean_increment": mean_inc,
              "coefficient_of_variation": cv}
    if spectrum is not None and abs(spectrum.delta_sigma) > 1e-12:
        ref = np.pi / (2.0 * abs(spectrum.delta_sigma))
        report["reference_spacing"] = float(ref)
        report["spacing_ratio"] = float(mean_inc / ref)
    return report
