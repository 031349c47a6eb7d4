"""Spatial dispersion polynomials, eigenvalue splitting, and spreading speeds.

The linearization about the unstable state u_* = 0 in the co-moving frame
reduces, per temporal Fourier index, to a complex polynomial in the spatial
rate nu:

  qcGL:  d_pm(nu) = (1 + i*alpha) nu^2 + c nu + (pm1 - i*omega)
  CH:    nu^4 + f'(0) nu^2 - c nu + i*omega*ell   (ell in Z)
  EFK:   -efk_gamma nu^4 + nu^2 + c nu + 1

The decay of a pushed front is organized by the two leading stable roots:
nu_su (weakly stable, largest Re < 0) and nu_ss (strongly stable, next
distinct Re).  Their gap delta_nu = nu_ss - nu_su sets the pitch of the
trigger-front bifurcation spiral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ModelSpec


class NoSplittingError(ValueError):
    """Fewer than two distinct stable real parts: no ss/su splitting."""


class SaddleConvergenceError(RuntimeError):
    """Pinched-double-root Newton failed; carries the last iterate."""

    def __init__(self, msg, last_iterate=None):
        super().__init__(msg)
        self.last_iterate = last_iterate


@dataclass(frozen=True)
class DispersionPoly:
    """Complex polynomial, coefficients in ascending degree."""

    coefficients: tuple  # ascending degree, complex
    model_tag: str       # qcgl_plus | qcgl_minus | ch | efk | custom
    context: tuple       # (c, omega, ell)

    def __post_init__(self):
        if len(self.coefficients) == 0 or self.coefficients[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, nu):
        return np.polyval(list(self.coefficients)[::-1], nu)

    def derivative(self, nu):
        cs = [i * c for i, c in enumerate(self.coefficients)][1:]
        return np.polyval(cs[::-1], nu)


@dataclass(frozen=True)
class SpatialSpectrum:
    """Leading stable roots and their splitting classification."""

    roots: tuple
    nu_ss: complex
    nu_su: complex
    splitting_case: str  # complex_complex | complex_real | real_real | degenerate

    @property
    def delta_nu(self) -> complex:
        return self.nu_ss - self.nu_su

    @property
    def delta_r(self) -> float:
        return float(self.delta_nu.real)

    @property
    def delta_sigma(self) -> float:
        return float(self.delta_nu.imag)


def dispersion_poly(spec: ModelSpec, side: int, ell: int = 0) -> DispersionPoly:
    """Dispersion polynomial of the linearization about u_* = 0.

    side = +1 in the wake (chi = +1, unstable), -1 ahead (stable).  ell is
    the temporal Fourier index (CH only; ignored for qcGL).
    """
    if side not in (+1, -1):
        raise ValueError("side must be +1 (wake) or -1 (ahead)")
    c, omega = spec.c, spec.omega
    if spec.kind == "qcgl":
        coeffs = (side - 1j * omega, complex(c), 1.0 + 1j * spec.qcgl.alpha)
        tag = "qcgl_plus" if side == 1 else "qcgl_minus"
        return DispersionPoly(coeffs, tag, (c, omega, 0))
    coeffs = (1j * omega * ell, -complex(c), complex(side), 0.0, 1.0)
    return DispersionPoly(coeffs, "ch", (c, omega, ell))


def efk_dispersion_poly(efk_gamma: float, c: float) -> DispersionPoly:
    """Extended Fisher-Kolmogorov co-moving dispersion: -g nu^4 + nu^2 + c nu + 1."""
    return DispersionPoly((1.0, complex(c), 1.0, 0.0, -efk_gamma), "efk", (c, 0.0, 0))


def poly_roots(poly: DispersionPoly) -> np.ndarray:
    """All roots via the companion matrix, with one Newton polish each."""
    if poly.degree < 1:
        raise ValueError("cannot take roots of a degree-0 polynomial")
    roots = np.roots(list(poly.coefficients)[::-1])
    # One Newton step per root; skip where the derivative is tiny (multiple root).
    d = poly.derivative(roots)
    mask = np.abs(d) > 1e-12
    roots[mask] = roots[mask] - poly(roots[mask])[...] / d[mask]
    return roots


_REAL_PART_TIE = 1e-9


def classify_splitting(roots) -> SpatialSpectrum:
    """Classify the two leading stable roots into nu_su / nu_ss.

    Conjugate pairs are represented by the member with Im >= 0.  Real parts
    within 1e-9 of each other count as one level; a tie between the two
    leading levels is reported as 'degenerate'.
    """
    roots = np.asarray(roots, dtype=complex)
    stable = roots[roots.real < 0]
    if stable.size < 2:
        raise NoSplittingError("need at least two roots with negative real part")
    order = np.argsort(-stable.real)
    stable = stable[order]

    # Group by real-part level.
    levels = [[stable[0]]]
    for z in stable[1:]:
        if abs(z.real - levels[-1][0].real) < _REAL_PART_TIE:
            levels[-1].append(z)
        else:
            levels.append([z])

    def represent(group):
        group = sorted(group, key=lambda z: -z.imag)
        rep = group[0]
        is_pair = any(abs(z.imag + rep.imag) < 1e-7 and abs(rep.imag) > 1e-9
                      for z in group)
        if not is_pair and abs(rep.imag) > 1e-9:
            # lone complex root (complex-coefficient polynomial)
            return rep, True
        if abs(rep.imag) <= 1e-9:
            return complex(rep.real, 0.0), False
        return rep, True

    if len(levels) < 2:
        rep, _ = represent(levels[0])
        return SpatialSpectrum(tuple(roots), rep, rep, "degenerate")
    if len(levels[0]) > 2 or (len(levels[0]) == 2 and not represent(levels[0])[1]):
        # more than a conjugate pair sharing the leading level
        return SpatialSpectrum(tuple(roots), represent(levels[1])[0],
                               represent(levels[0])[0], "degenerate")

    nu_su, su_complex = represent(levels[0])
    nu_ss, ss_complex = represent(levels[1])
    case = {(True, True): "complex_complex", (True, False): "complex_real",
            (False, True): "real_complex", (False, False): "real_real"}[
                (ss_complex, su_complex)]
    return SpatialSpectrum(tuple(roots), nu_ss, nu_su, case)


def spectrum_for(spec: ModelSpec, side: int = +1, ell: int = 1,
                 include_conjugate: bool = True) -> SpatialSpectrum:
    """Root-solve and classify the model's dispersion polynomial.

    For CH, ell = +-k come in conjugate pairs; include_conjugate merges both
    so that real-system conjugation symmetry is restored before classifying.
    """
    roots = poly_roots(dispersion_poly(spec, side, ell))
    if spec.kind == "ch" and ell != 0 and include_conjugate:
        roots = np.concatenate([roots, np.conj(roots)])
    return classify_splitting(roots)


# --- linear spreading speed ------------------------------------------------

def _lambda_funcs(spec: ModelSpec):
    """Lab-frame growth rate lambda(nu) about u_*=0 on the unstable side, and
    its first two nu-derivatives."""
    if spec.kind == "qcgl":
        a = 1.0 + 1j * spec.qcgl.alpha
        return (lambda nu: a * nu**2 + 1.0,
                lambda nu: 2.0 * a * nu,
                lambda nu: 2.0 * a + 0.0 * nu)
    return (lambda nu: -(nu**4) - nu**2,
            lambda nu: -4.0 * nu**3 - 2.0 * nu,
            lambda nu: -12.0 * nu**2 - 2.0)


def _efk_lambda(efk_gamma: float):
    return (lambda nu: -efk_gamma * nu**4 + nu**2 + 1.0,
            lambda nu: -4.0 * efk_gamma * nu**3 + 2.0 * nu,
            lambda nu: -12.0 * efk_gamma * nu**2 + 2.0)


def _saddle_newton(lam, dlam, d2lam, nu0: complex, c0: float,
                   max_iter: int = 100, tol: float = 1e-12):
    """Damped Newton on the pinched-double-root system.

    Unknowns (Re nu, Im nu, c); equations dlam(nu) + c = 0 (complex) and
    Re(lam(nu) + c nu) = 0.
    """
    x = np.array([nu0.real, nu0.imag, c0], dtype=float)

    def F(x):
        nu = complex(x[0], x[1])
        g = dlam(nu) + x[2]
        return np.array([g.real, g.imag, (lam(nu) + x[2] * nu).real])

    def J(x):
        nu = complex(x[0], x[1])
        h = d2lam(nu)
        # d/dnu acts holomorphically: d(g)/d(Re nu) = h, d(g)/d(Im nu) = i h
        dm = lam(nu) + 0  # noqa: F841  (kept for clarity)
        dre = dlam(nu) + x[2]
        return np.array([
            [h.real, -h.imag, 1.0],
            [h.imag, h.real, 0.0],
            [dre.real, -dre.imag, nu.real],
        ])

    f = F(x)
    for _ in range(max_iter):
        if np.max(np.abs(f)) < tol:
            return complex(x[0], x[1]), x[2]
        try:
            dx = np.linalg.solve(J(x), -f)
        except np.linalg.LinAlgError:
            break
        lam_step = 1.0
        for _ in range(40):
            xn = x + lam_step * dx
            fn = F(xn)
            if np.linalg.norm(fn) < np.linalg.norm(f):
                x, f = xn, fn
                break
            lam_step *= 0.5
        else:
            break
    if np.max(np.abs(f)) < 1e-9:
        return complex(x[0], x[1]), x[2]
    raise SaddleConvergenceError("pinched double-root Newton did not converge",
                                 last_iterate=(complex(x[0], x[1]), x[2]))


def _spreading_speed(lam_triplet, guesses=None):
    lam, dlam, d2lam = lam_triplet
    if guesses is None:
        guesses = [complex(-re, im) for re in (0.3, 0.6, 1.0, 1.5)
                   for im in (0.0, 0.5, 1.0, 1.5)]
    best = None
    last_err = None
    for nu0 in guesses:
        for c0 in (0.5, 1.5, 2.5):
            try:
                nu, c = _saddle_newton(lam, dlam, d2lam, nu0, c0)
            except SaddleConvergenceError as err:
                last_err = err
                continue
            if nu.real < -1e-8 and c > 1e-8:
                if best is None or c > best[0] + 1e-10:
                    best = (c, nu)
    if best is None:
        raise last_err or SaddleConvergenceError("no pinched double root found")
    return best[0], best[1]


def spreading_speed_saddle(spec: ModelSpec):
    """Linear spreading speed: (c_lin, nu_star) of the pinched double root.

    Solves d/dnu (lam(nu) + c nu) = 0, Re(lam(nu) + c nu) = 0 by damped
    Newton over a small grid of starting points; keeps the decaying saddle
    (Re nu < 0) of largest marginal speed.
    """
    return _spreading_speed(_lambda_funcs(spec))


def efk_spreading_speed(efk_gamma: float):
    """Linear spreading speed of the EFK equation (f'(0) = 1)."""
    return _spreading_speed(_efk_lambda(efk_gamma))


_NAGUMO_THRESHOLD = 2.0 * np.sqrt(3.0) / 3.0


def reference_speeds(name: str, arg: float = 0.0) -> float:
    """Closed-form reference speeds.

    'ch_lin': linear spreading speed of (modified) Cahn-Hilliard.
    'nagumo_pushed': pushed speed (-d + 2 sqrt(d^2+4))/sqrt(3) of the
    cubic-quintic Nagumo equation, defined for d >= 2 sqrt(3)/3 (the
    threshold value gives exactly the KPP speed 2).
    """
    if name == "ch_lin":
        s7 = np.sqrt(7.0)
        return float(2.0 / (3.0 * np.sqrt(6.0)) * (2.0 + s7) * np.sqrt(s7 - 1.0))
    if name == "nagumo_pushed":
        if arg < _NAGUMO_THRESHOLD - 1e-14:
            raise ValueError(
                f"nagumo pushed front requires d >= 2*sqrt(3)/3, got {arg}")
        return float((-arg + 2.0 * np.sqrt(arg**2 + 4.0)) / np.sqrt(3.0))
    raise ValueError(f"unknown reference speed {name!r}")


def transversality_determinant(spec: ModelSpec) -> complex:
    """nu_1^- - nu_2^+ for the qcGL trigger problem (caller tests nonzero-ness).

    nu_2^+ is the larger-real-part root of d_+ (wake side), nu_1^- the
    smaller-real-part root of d_- (ahead side); the returned value is the
    determinant of [[1, 1], [nu_2^+, nu_1^-]].
    """
    if spec.kind != "qcgl":
        raise ValueError("transversality determinant is defined for qcGL only")
    rp = sorted(poly_roots(dispersion_poly(spec, +1)), key=lambda z: z.real)
    rm = sorted(poly_roots(dispersion_poly(spec, -1)), key=lambda z: z.real)
    nu2_plus = rp[-1]
    nu1_minus = rm[0]
    return nu1_minus - nu2_plus
