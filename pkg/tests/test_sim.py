import numpy as np
import pytest

from frontlab.models import ChParams, ModelSpec, QcglParams, TriggerSpec
from frontlab.sim import (BlowUpError, ChSemiImplicitStepper, FieldState,
                          Grid1D, Perturbation, QcglEtd2Stepper, RunConfig,
                          Sponge, _phi_coeffs, evolve, init_perturbation)

QP = QcglParams(alpha=0.3, gamma=-0.2, beta=0.2, rho=4.0)
QCGL = ModelSpec("qcgl", qcgl=QP, c=2.6, omega=1.1)
CH = ModelSpec(
    "ch", ch=ChParams(1.5), c=1.9,
    trigger=TriggerSpec(epsilon=1.0, primary_interface=30.0,
                        secondary_interface=5.0, mode="plateau"))


class TestPhiCoeffs:
    def test_matches_series_small_z(self):
        z = np.array([1e-5 + 1e-5j, -1e-8, 1e-3j])
        phi1, phi2 = _phi_coeffs(z)
        # phi1 = 1 + z/2 + z^2/6 + z^3/24, phi2 = 1/2 + z/6 + z^2/24 + z^3/120
        assert np.max(np.abs(phi1 - (1 + z / 2 + z**2 / 6 + z**3 / 24))) <= 1e-12
        assert np.max(np.abs(phi2 - (0.5 + z / 6 + z**2 / 24 + z**3 / 120))) <= 1e-12

    def test_matches_direct_large_z(self):
        z = np.array([2.0 + 1.0j, -3.0])
        phi1, phi2 = _phi_coeffs(z)
        assert np.max(np.abs(phi1 - (np.exp(z) - 1) / z)) <= 1e-13
        assert np.max(np.abs(phi2 - (np.exp(z) - 1 - z) / z**2)) <= 1e-13


class TestEtd2Linear:
    def test_exact_on_diagonal_linear_flow(self):
        """With the nonlinearity switched off the scheme must reproduce
        exp(lambda t) per Fourier mode to machine precision."""
        grid = Grid1D(64, 20.0)
        dt = 0.05
        stepper = QcglEtd2Stepper(QCGL, grid, dt)
        stepper.nonlinear = lambda u: np.zeros_like(u)
        m = 3  # mode index
        kappa = 2.0 * np.pi * m / grid.length
        lam = ((1 + 1j * QP.alpha) * (1j * kappa) ** 2
               + QCGL.c * (1j * kappa) - 1j * QCGL.omega)
        u0 = 1e-3 * np.exp(1j * kappa * grid.xi)
        state = FieldState(grid, u0.copy(), c=QCGL.c)
        for _ in range(20):
            state = stepper.step(state)
        exact = u0 * np.exp(lam * 20 * dt)
        assert np.max(np.abs(state.values - exact)) <= 1e-12 * np.max(np.abs(exact))

    def test_second_order_on_nonlinear_flow(self):
        grid = Grid1D(64, 20.0)
        rng = np.random.default_rng(3)
        u0 = 0.2 * (rng.standard_normal(64) + 1j * rng.standard_normal(64))
        t_end = 0.4

        def advance(dt):
            st = FieldState(grid, u0.copy(), c=QCGL.c)
            stepper = QcglEtd2Stepper(QCGL, grid, dt)
            for _ in range(int(round(t_end / dt))):
                st = stepper.step(st)
            return st.values

        ref = advance(0.0005)
        e1 = np.max(np.abs(advance(0.02) - ref))
        e2 = np.max(np.abs(advance(0.01) - ref))
        order = np.log2(e1 / e2)
        assert order > 1.7


class TestChStepper:
    def test_mass_exactly_conserved(self):
        grid = Grid1D(128, 64.0)
        rng = np.random.default_rng(7)
        u0 = 0.3 * rng.standard_normal(128)
        state = FieldState(grid, u0.copy(), c=CH.c)
        stepper = ChSemiImplicitStepper(CH, grid, 0.05)
        mass0 = np.sum(u0)
        for _ in range(200):
            state = stepper.step(state)
        drift = abs(np.sum(state.values) - mass0)
        assert drift <= 1e-10 * max(1.0, np.max(np.abs(state.values)) * grid.n)

    def test_sponge_rejected(self):
        with pytest.raises(ValueError):
            ChSemiImplicitStepper(CH, Grid1D(64, 32.0), 0.1,
                                  sponge=Sponge(1.0, 5.0))


class TestBlowUp:
    def test_runaway_field_raises(self):
        grid = Grid1D(64, 20.0)
        stepper = QcglEtd2Stepper(QCGL, grid, 0.01)
        state = FieldState(grid, 50.0 * np.ones(64, dtype=complex), c=QCGL.c)
        with pytest.raises(BlowUpError):
            stepper.step(state)

    def test_evolve_records_error(self):
        grid = Grid1D(64, 20.0)
        cfg = RunConfig(spec=QCGL, grid=grid, dt=0.01, t_end=1.0)
        state = FieldState(grid, 50.0 * np.ones(64, dtype=complex), c=QCGL.c)
        rec = evolve(cfg, state)
        assert rec.error is not None
        assert "blew up" in rec.error


class TestInitAndConfig:
    def test_dtype_by_model(self):
        grid = Grid1D(64, 20.0)
        pert = Perturbation(location=10.0, amplitude=0.1)
        cq = RunConfig(spec=QCGL, grid=grid, perturbation=pert)
        cc = RunConfig(spec=CH, grid=grid, perturbation=pert)
        assert np.iscomplexobj(init_perturbation(cq).values)
        assert not np.iscomplexobj(init_perturbation(cc).values)

    def test_location_outside_domain(self):
        cfg = RunConfig(spec=QCGL, grid=Grid1D(64, 20.0),
                        perturbation=Perturbation(location=25.0))
        with pytest.raises(ValueError):
            init_perturbation(cfg)

    def test_seeded_noise_is_deterministic(self):
        grid = Grid1D(64, 20.0)
        pert = Perturbation(location=10.0, amplitude=0.0, noise=0.01, seed=42)
        cfg = RunConfig(spec=QCGL, grid=grid, perturbation=pert)
        a = init_perturbation(cfg).values
        b = init_perturbation(cfg).values
        assert np.array_equal(a, b)

    def test_config_validation(self):
        grid = Grid1D(64, 20.0)
        with pytest.raises(ValueError):
            RunConfig(spec=QCGL, grid=grid, dt=0.0)
        with pytest.raises(ValueError):
            RunConfig(spec=QCGL, grid=grid, floor=-1.0)
        with pytest.raises(ValueError):
            Grid1D(2, 10.0)

    def test_floor_clamps_small_values(self):
        grid = Grid1D(64, 32.0)
        cfg = RunConfig(spec=CH, grid=grid, dt=0.05, t_end=0.05,
                        record_every=0.05, floor=1e-6)
        u0 = np.zeros(64)
        u0[10] = 0.5
        rec = evolve(cfg, FieldState(grid, u0, c=CH.c))
        vals = np.abs(rec.final_state.values)
        assert np.all((vals == 0.0) | (vals >= 1e-6))


class TestSponge:
    def test_profile_levels(self):
        sp = Sponge(xi_lo=10.0, xi_hi=30.0, sigma=6.0, ramp=2.0)
        xi = np.array([0.0, 20.0, 50.0])
        prof = sp.profile(xi)
        assert prof[1] == pytest.approx(6.0, abs=1e-3)
        assert prof[0] <= 1e-3 and prof[2] <= 1e-3
