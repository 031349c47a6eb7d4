import numpy as np
import pytest

from frontlab.models import ChParams, ModelSpec, QcglParams
from frontlab.spectral import (DispersionPoly, NoSplittingError,
                               classify_splitting, dispersion_poly,
                               efk_dispersion_poly, efk_spreading_speed,
                               poly_roots, reference_speeds,
                               spectrum_for, spreading_speed_saddle,
                               transversality_determinant)

QP = QcglParams(alpha=0.3, gamma=-0.2, beta=0.2, rho=4.0)
CH = ModelSpec("ch", ch=ChParams(1.5), c=2.0324, omega=1.5115)
QCGL = ModelSpec("qcgl", qcgl=QP, c=2.7304, omega=1.2158)


def vieta_residuals(poly: DispersionPoly, roots: np.ndarray) -> float:
    """max over elementary symmetric functions of |e_k(roots) - (+-)a_{n-k}/a_n|."""
    monic = np.array(poly.coefficients, dtype=complex)
    monic = monic / monic[-1]
    n = poly.degree
    # np.poly reconstructs coefficients (descending) from roots
    rebuilt = np.poly(roots)[::-1]
    return float(np.max(np.abs(rebuilt[:n] - monic[:n])))


class TestRoots:
    def test_vieta_ch(self):
        poly = dispersion_poly(CH, side=+1, ell=1)
        assert vieta_residuals(poly, poly_roots(poly)) <= 1e-9

    def test_vieta_qcgl(self):
        for side in (+1, -1):
            poly = dispersion_poly(QCGL, side=side)
            assert vieta_residuals(poly, poly_roots(poly)) <= 1e-9

    def test_vieta_efk(self):
        poly = efk_dispersion_poly(0.08, 2.715)
        assert vieta_residuals(poly, poly_roots(poly)) <= 1e-9

    def test_roots_are_roots(self):
        poly = dispersion_poly(CH, side=+1, ell=2)
        assert np.max(np.abs(poly(poly_roots(poly)))) <= 1e-9

    def test_side_validation(self):
        with pytest.raises(ValueError):
            dispersion_poly(CH, side=0)


class TestConjugation:
    def test_ch_roots_conjugate_across_ell(self):
        for ell in (1, 2, 3, 4):
            rp = np.sort_complex(poly_roots(dispersion_poly(CH, +1, ell)))
            rm = np.sort_complex(np.conj(poly_roots(dispersion_poly(CH, +1, -ell))))
            assert np.max(np.abs(rp - rm)) <= 1e-9

    def test_spectrum_conjugation_invariance(self):
        sp_p = spectrum_for(CH, side=+1, ell=1)
        sp_m = spectrum_for(CH, side=+1, ell=-1)
        assert sp_p.nu_ss == pytest.approx(sp_m.nu_ss)
        assert sp_p.nu_su == pytest.approx(sp_m.nu_su)


class TestClassification:
    def test_complex_complex_case(self):
        sp = spectrum_for(CH, side=+1, ell=1)
        assert sp.splitting_case == "complex_complex"
        assert sp.nu_ss.real < sp.nu_su.real < 0
        assert sp.delta_nu.real < 0

    def test_real_pair_case(self):
        # nu^2-type spectrum: (nu-(-1))(nu-(-2)) has two real stable roots
        sp = classify_splitting(np.array([-1.0 + 0j, -2.0 + 0j]))
        assert sp.splitting_case == "real_real"

    def test_no_splitting(self):
        with pytest.raises(NoSplittingError):
            classify_splitting(np.array([1.0 + 0j, 2.0 + 0j]))

    def test_degenerate_tie(self):
        sp = classify_splitting(np.array([-1.0 + 1j, -1.0 - 1j, -1.0 + 0j,
                                          -3.0 + 0j]))
        assert sp.splitting_case == "degenerate"


class TestSpreadingSpeeds:
    def test_qcgl_linear_speed_closed_form(self):
        """For the qcGL linearization, c_lin = 2 sqrt(1 + alpha^2)."""
        c_lin, nu = spreading_speed_saddle(QCGL)
        assert c_lin == pytest.approx(2.0 * np.sqrt(1.0 + 0.3**2), abs=1e-8)
        assert c_lin == pytest.approx(2.0881, abs=1e-4)
        assert nu.real < 0

    def test_ch_matches_closed_form(self):
        c_lin, _ = spreading_speed_saddle(CH)
        assert c_lin == pytest.approx(reference_speeds("ch_lin"), abs=1e-8)

    def test_ch_closed_form_value(self):
        # 2/(3 sqrt(6)) (2 + sqrt(7)) sqrt(sqrt(7) - 1), evaluated independently
        assert reference_speeds("ch_lin") == pytest.approx(1.6220759259174333,
                                                           abs=1e-12)

    def test_efk_spreading_speed(self):
        c_lin, _ = efk_spreading_speed(0.08)
        assert 1.8 < c_lin < 2.0  # below the pushed speed regime

    def test_nagumo_exact_threshold(self):
        d = 2.0 * np.sqrt(3.0) / 3.0
        assert reference_speeds("nagumo_pushed", d) == pytest.approx(2.0,
                                                                     abs=1e-14)

    def test_nagumo_at_two(self):
        # (-d + 2 sqrt(d^2 + 4)) / sqrt(3) at d = 2
        assert reference_speeds("nagumo_pushed", 2.0) == pytest.approx(
            2.111285785331653, abs=1e-12)

    def test_nagumo_below_threshold_raises(self):
        with pytest.raises(ValueError):
            reference_speeds("nagumo_pushed", 1.0)

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            reference_speeds("bogus")


class TestTransversality:
    def test_nonzero_at_pushed_point(self):
        det = transversality_determinant(QCGL)
        assert abs(det) > 1e-3

    def test_qcgl_only(self):
        with pytest.raises(ValueError):
            transversality_determinant(CH)
