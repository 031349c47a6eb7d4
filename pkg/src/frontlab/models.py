"""Model definitions: PDE right-hand sides, trigger profiles, wave-train algebra.

Two prototype pattern-forming systems are supported, both posed in a frame
co-moving with the trigger at speed c (xi = x - c*t):

  qcGL:  u_t = (1+i*alpha) u_xx + c u_x + (chi(xi) - i*omega) u
               + (rho + i*gamma) u|u|^2 - (1 + i*beta) u|u|^4,   u complex

  CH:    u_t = -(u_xx + ftilde(xi, u))_xx + c u_x,
         ftilde(xi, u) = chi(xi) u + gamma u^3 - u^5,            u real

The trigger chi(xi) switches the medium from stable (chi = -1, ahead) to
unstable (chi = +1, wake).  Everything downstream (time stepping, spectra,
continuation) evaluates the models only through this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class QcglParams:
    """Coefficients of the cubic-quintic complex Ginzburg-Landau equation."""

    alpha: float  # linear dispersion
    gamma: float  # cubic imaginary part
    beta: float   # quintic imaginary part
    rho: float    # cubic real part; rho > 1 for pushed fronts

    def __post_init__(self):
        for name in ("alpha", "gamma", "beta", "rho"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"QcglParams.{name} must be finite")


@dataclass(frozen=True)
class ChParams:
    """Coefficient of the modified Cahn-Hilliard nonlinearity f(u) = u + gamma*u^3 - u^5."""

    gamma: float

    def __post_init__(self):
        if not np.isfinite(self.gamma):
            raise ValueError("ChParams.gamma must be finite")

    def f(self, u):
        return u + self.gamma * u**3 - u**5

    def fprime(self, u):
        return 1.0 + 3.0 * self.gamma * u**2 - 5.0 * u**4


@dataclass(frozen=True)
class TriggerSpec:
    """Geometry of the moving trigger chi_eps.

    mode="single": chi = -tanh((xi - primary_interface)/epsilon), the
    stable-(ahead)/unstable-(behind) switch.  mode="plateau": a double-tanh
    profile that is +1 on (secondary_interface, primary_interface) and -1
    outside, so periodic boundaries see a stable state on both sides.
    """

    epsilon: float
    primary_interface: float
    secondary_interface: float = 0.0
    mode: str = "single"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("TriggerSpec.epsilon must be > 0")
        if self.mode not in ("single", "plateau"):
            raise ValueError(f"unknown trigger mode {self.mode!r}")
        if self.mode == "plateau" and not self.secondary_interface < self.primary_interface:
            raise ValueError("plateau trigger needs secondary_interface < primary_interface")


@dataclass(frozen=True)
class WaveTrain:
    """Wake wave train u = r*exp(i(k xi - omega t)) in the frame of speed c."""

    r: float
    k: float
    omega: float
    c: float


@dataclass(frozen=True)
class ModelSpec:
    """Which PDE, its coefficients, the trigger, and the frame parameters.

    trigger=None means the trigger is switched off (chi == +1 everywhere,
    fully unstable medium), the free-front configuration.
    """

    kind: str  # "qcgl" | "ch"
    qcgl: Optional[QcglParams] = None
    ch: Optional[ChParams] = None
    trigger: Optional[TriggerSpec] = None
    c: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        if self.kind not in ("qcgl", "ch"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "qcgl" and (self.qcgl is None or self.ch is not None):
            raise ValueError("kind='qcgl' requires exactly the qcgl params")
        if self.kind == "ch" and (self.ch is None or self.qcgl is not None):
            raise ValueError("kind='ch' requires exactly the ch params")

    def with_c(self, c: float) -> "ModelSpec":
        return ModelSpec(self.kind, self.qcgl, self.ch, self.trigger, c, self.omega)

    def with_omega(self, omega: float) -> "ModelSpec":
        return ModelSpec(self.kind, self.qcgl, self.ch, self.trigger, self.c, omega)


def trigger_profile(spec: Optional[TriggerSpec], xi):
    """Evaluate the trigger chi_eps at xi (scalar or array).

    The single-interface profile is the unique solution of
    eps * chi' = chi^2 - 1 with chi(primary_interface) = 0 that is stable
    (-1) ahead.  None evaluates to +1 (trigger off).
    """
    xi = np.asarray(xi, dtype=float)
    if spec is None:
        return np.ones_like(xi)
    if spec.mode == "single":
        return -np.tanh((xi - spec.primary_interface) / spec.epsilon)
    a, b = spec.secondary_interface, spec.primary_interface
    return -1.0 + np.tanh((xi - a) / spec.epsilon) - np.tanh((xi - b) / spec.epsilon)


def _spectral_wavenumbers(n: int, length: float):
    return 2.0 * np.pi * np.fft.fftfreq(n, d=length / n)


def _qcgl_rhs(spec: ModelSpec, values: np.ndarray, length: float) -> np.ndarray:
    n = values.shape[0]
    kappa = _spectral_wavenumbers(n, length)
    uh = np.fft.fft(values)
    ux = np.fft.ifft(1j * kappa * uh)
    uxx = np.fft.ifft(-(kappa**2) * uh)
    p = spec.qcgl
    xi = np.arange(n) * (length / n)
    chi = trigger_profile(spec.trigger, xi)
    absu2 = np.abs(values) ** 2
    return ((1.0 + 1j * p.alpha) * uxx + spec.c * ux
            + (chi - 1j * spec.omega) * values
            + (p.rho + 1j * p.gamma) * values * absu2
            - (1.0 + 1j * p.beta) * values * absu2**2)


def _roll_d1(u: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * dx)


def _roll_d2(u: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(u, -1) - 2.0 * u + np.roll(u, 1)) / dx**2


def _ch_rhs(spec: ModelSpec, values: np.ndarray, length: float) -> np.ndarray:
    # Flux form -D2(D2 u + ftilde) + c D1 u keeps the discrete mass exactly
    # conserved on the periodic grid.
    n = values.shape[0]
    dx = length / n
    xi = np.arange(n) * dx
    chi = trigger_profile(spec.trigger, xi)
    g = spec.ch.gamma
    ftilde = chi * values + g * values**3 - values**5
    return -_roll_d2(_roll_d2(values, dx) + ftilde, dx) + spec.c * _roll_d1(values, dx)


def model_rhs(spec: ModelSpec, state) -> np.ndarray:
    """Spatial operator of the co-moving evolution equation on the periodic grid.

    qcGL uses spectral derivatives, CH second-order centered differences in
    flux form.  `state` is a sim.FieldState (anything with .grid and .values).
    """
    values = np.asarray(state.values)
    if values.shape[0] != state.grid.n:
        raise ValueError(
            f"field length {values.shape[0]} does not match grid n={state.grid.n}")
    if spec.kind == "qcgl":
        return _qcgl_rhs(spec, values.astype(complex), state.grid.length)
    return _ch_rhs(spec, values.astype(float), state.grid.length)


def wave_train_residual(params: QcglParams, wt: WaveTrain) -> tuple[float, float]:
    """Residuals (R1, R2) of the qcGL nonlinear dispersion relation.

    Substituting u = r*exp(i(k x - omega_lab t)) into the qcGL equation gives
      R1 = k^2 - rho r^2 + r^4 - 1            (amplitude balance)
      R2 = alpha k^2 - gamma r^2 + beta r^4 - (omega + c k)
    where omega is the frequency in the detuned frame of speed c.  The r^4
    in R1 is forced by the ansatz substitution (quintic term contributes
    r^4, not r^2).
    """
    r2 = wt.r**2
    r1 = wt.k**2 - params.rho * r2 + r2**2 - 1.0
    r2_ = (params.alpha * wt.k**2 - params.gamma * r2 + params.beta * r2**2
           - (wt.omega + wt.c * wt.k))
    return (r1, r2_)


def wave_train_amplitude(params: QcglParams, k: float) -> float:
    """Positive wake amplitude r(k) from R1 = 0 (larger root of the quadratic in r^2)."""
    disc = params.rho**2 - 4.0 * (k**2 - 1.0)
    if disc < 0:
        raise ValueError(f"no real wave-train amplitude at k={k}")
    r2 = 0.5 * (params.rho + np.sqrt(disc))
    return float(np.sqrt(r2))


def scale_qcgl_params(params: QcglParams, c: float, omega: float):
    """Scaling factors mapping this convention (rho free) to the rho=1 one.

    With a^2 = rho: returns (c_tilde, gamma_tilde, chi_scale, u_scale,
    x_scale, t_scale) = (c/a^2, gamma/a^2, a^4, a, a^2, a^4).
    """
    if params.rho <= 0:
        raise ValueError("scaling requires rho > 0")
    a2 = params.rho
    return (c / a2, params.gamma / a2, a2**2, np.sqrt(a2), a2, a2**2)
