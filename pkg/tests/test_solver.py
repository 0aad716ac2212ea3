import math
from dataclasses import replace

import numpy as np
import pytest

from gpsim import (
    FieldState,
    HomState,
    OdeStepperKind,
    Params,
    SolverConfig,
    SpectralWorkspace,
    StationarySpec,
    adiabatic_evolve,
    epsilon_sweep,
    evolve,
    integrate_homogeneous,
    make_grid,
    make_stationary,
    ode_step,
    perturb,
    reservoir_closure,
    rhs_adiabatic_hom,
    strang_step,
)
from gpsim import diagnostics
from gpsim.errors import (
    BoundViolation,
    DeltaNonpositive,
    PerturbationBreaksPositivity,
    PositivityLost,
    StepSizeTooLarge,
)
from gpsim.model import homogeneous_embed
from gpsim.solver import iterate_adiabatic, iterate_states

from conftest import SPIRAL, VANISH, fit_slope

TWO_PI = 2 * math.pi


@pytest.fixture
def spiral_setup(spiral_params):
    grid = make_grid(32, spiral_params.domain_length)
    return spiral_params, grid, SpectralWorkspace(grid)


class TestStationary:
    def test_spiral_values(self, spiral_setup):
        p, grid, _ = spiral_setup
        state = make_stationary(p, grid)
        np.testing.assert_allclose(state.psi, math.sqrt(9.9), rtol=1e-15)
        np.testing.assert_allclose(state.n, 10.0, rtol=1e-15)
        spec = StationarySpec.from_params(p)
        assert spec.mu == pytest.approx(9.9 * p.g + 10.0 * p.lam, rel=1e-15)
        assert spec.mu > 0

    def test_reservoir_forms_agree(self, spiral_setup):
        # alpha/R equals P/(R rho* + beta) identically
        p, _, _ = spiral_setup
        spec = StationarySpec.from_params(p)
        assert spec.n_star == pytest.approx(p.P / (p.R * spec.rho_star + p.beta), rel=1e-14)

    def test_chemical_potential_balance(self, spiral_setup):
        # mu rho* = g rho*^2 + lam n* rho* (gradient terms vanish)
        p, _, _ = spiral_setup
        spec = StationarySpec.from_params(p)
        lhs = spec.mu * spec.rho_star
        rhs = p.g * spec.rho_star**2 + p.lam * spec.n_star * spec.rho_star
        assert abs(lhs - rhs) <= 4 * np.spacing(abs(lhs))

    def test_delta_boundary_rejected(self):
        p = Params(g=1, lam=1, R=1, P=1, alpha=1, beta=1)
        with pytest.raises(DeltaNonpositive):
            make_stationary(p, make_grid(8, TWO_PI))

    def test_fixed_point_drift_rate(self, spiral_setup):
        p, grid, ws = spiral_setup
        state = make_stationary(p, grid)
        t_end = 2.0
        cfg = SolverConfig(tau=2.5e-4, t_end=t_end, save_every=800)
        final, _ = evolve(state, p, cfg, ws)
        assert np.max(np.abs(final.density - 9.9)) <= 1e-9 * t_end
        assert np.max(np.abs(final.n - 10.0)) <= 1e-9 * t_end

    def test_phase_rotates_at_chemical_potential(self, spiral_setup):
        p, grid, ws = spiral_setup
        state = make_stationary(p, grid)
        cfg = SolverConfig(tau=1e-3, t_end=1.0, save_every=1000)
        final, _ = evolve(state, p, cfg, ws)
        mu = StationarySpec.from_params(p).mu
        drift = np.angle(final.psi[0]) - np.angle(state.psi[0])
        gap = (drift + mu * 1.0 + math.pi) % TWO_PI - math.pi
        assert abs(gap) <= 1e-6


class TestPerturb:
    def test_zero_amplitude_identity(self, spiral_setup):
        p, grid, _ = spiral_setup
        state = make_stationary(p, grid)
        out = perturb(state, 1, 0.0)
        np.testing.assert_array_equal(out.psi, state.psi)
        np.testing.assert_array_equal(out.n, state.n)

    def test_cosine_mode_content(self):
        grid = make_grid(32, TWO_PI)
        state = FieldState(t=0.0, psi=np.ones(32, complex), n=np.ones(32))
        out = perturb(state, 1, 0.1, "psi")
        hat = np.fft.fft(out.psi) / 32
        mask = np.zeros(32, bool)
        mask[[0, 1, 31]] = True
        assert np.max(np.abs(hat[~mask])) <= 1e-14
        assert hat[1] == pytest.approx(0.05, rel=1e-12)

    def test_positivity_floor_is_an_error(self, spiral_setup):
        p, grid, _ = spiral_setup
        state = make_stationary(p, grid)
        with pytest.raises(PerturbationBreaksPositivity):
            perturb(state, 0, -2.0 * float(np.min(state.n)), "n")

    def test_noise_is_seeded_and_band_limited(self):
        grid = make_grid(64, TWO_PI)
        state = FieldState(t=0.0, psi=np.ones(64, complex), n=np.ones(64))
        a = perturb(state, -4, 0.2, "psi", seed=9)
        b = perturb(state, -4, 0.2, "psi", seed=9)
        c = perturb(state, -4, 0.2, "psi", seed=10)
        np.testing.assert_array_equal(a.psi, b.psi)
        assert np.max(np.abs(a.psi - c.psi)) > 0
        hat = np.fft.fft(a.psi - state.psi)
        live = np.fft.fftfreq(64, d=1 / 64)
        assert np.max(np.abs(hat[np.abs(live) > 4])) <= 1e-12
        assert np.max(np.abs(a.psi.real - 1.0)) == pytest.approx(0.2, rel=1e-12)

    def test_mode_too_high_rejected(self):
        grid = make_grid(16, TWO_PI)
        state = FieldState(t=0.0, psi=np.ones(16, complex), n=np.ones(16))
        with pytest.raises(ValueError):
            perturb(state, 8, 0.1)


class TestStrangStep:
    def test_homogeneity_preserved(self, spiral_setup):
        p, grid, ws = spiral_setup
        state = homogeneous_embed(HomState(t=0.0, rho=2.0, n=5.0), grid)
        cfg = SolverConfig(tau=1e-3, t_end=0.2, save_every=200)
        final, _ = evolve(state, p, cfg, ws)
        assert np.ptp(final.psi.real) + np.ptp(final.psi.imag) <= 1e-12
        assert np.ptp(final.n) <= 1e-12

    def test_constant_data_matches_half_step_ode(self, spiral_setup):
        p, grid, ws = spiral_setup
        init_h = HomState(t=0.0, rho=4.0, n=8.0)
        state = homogeneous_embed(init_h, grid)
        cfg = SolverConfig(tau=1e-3, t_end=1.0, save_every=1000)
        final, _ = evolve(state, p, cfg, ws)
        traj = integrate_homogeneous(init_h, p, 5e-4, 1.0)
        assert abs(final.density[0] - traj.rho[-1]) <= 1e-10
        assert abs(final.n[0] - traj.n[-1]) <= 1e-10

    def test_free_propagation_with_balanced_pump(self):
        # plane wave with n0 = alpha/R and P balancing the losses: the
        # substep is a pure rotation e^{-i(g rho + lam n) t} and the full
        # dynamics is free propagation times that rotation
        alpha, beta, R = 10.0, 0.1, 1.0
        p = Params(g=1, lam=1, R=R, P=alpha * (R * 1.0 + beta) / R, alpha=alpha, beta=beta)
        grid = make_grid(32, TWO_PI)
        ws = SpectralWorkspace(grid)
        psi0 = np.exp(1j * grid.nodes)
        state = FieldState(t=0.0, psi=psi0, n=np.full(32, alpha / R))
        cfg = SolverConfig(tau=5e-4, t_end=1.0, save_every=2000)
        final, _ = evolve(state, p, cfg, ws)
        mu = p.g * 1.0 + p.lam * alpha / R
        exact = np.exp(-1j * (0.5 + mu) * 1.0) * psi0
        assert np.max(np.abs(final.psi - exact)) <= 1e-10
        assert np.max(np.abs(final.n - alpha / R)) <= 1e-8

    def test_step_advances_time(self, spiral_setup):
        p, grid, ws = spiral_setup
        state = make_stationary(p, grid)
        cfg = SolverConfig(tau=1e-3, t_end=1.0)
        out = strang_step(state, p, cfg, ws)
        assert out.t == pytest.approx(1e-3)
        assert out is not state

    def test_stiffness_cap_enforced(self, spiral_setup):
        p, grid, ws = spiral_setup
        state = make_stationary(p, grid)
        p_fast = replace(p, epsilon=0.1)
        cfg = SolverConfig(tau=1e-2, t_end=1.0)
        with pytest.raises(StepSizeTooLarge):
            strang_step(state, p_fast, cfg, ws)

    def test_positivity_loss_raises(self):
        # a big admissible-looking step on a fast reservoir drives n negative
        p = Params(g=1, lam=1, R=1, P=0.01, alpha=1, beta=20)
        grid = make_grid(16, TWO_PI)
        ws = SpectralWorkspace(grid)
        state = FieldState(t=0.0, psi=np.zeros(16, complex), n=np.full(16, 5.0))
        cfg = SolverConfig(tau=0.2, t_end=1.0, tau_safety=10.0)
        with pytest.raises(PositivityLost):
            strang_step(state, p, cfg, ws)

    def test_strang_order_two(self, spiral_setup):
        p, grid, _ = spiral_setup
        init = perturb(make_stationary(p, grid), 1, 0.1, "both", seed=1)
        T = 0.25

        def final(tau):
            cfg = SolverConfig(tau=tau, t_end=T, save_every=10**9)
            last = None
            for last in iterate_states(init, p, cfg, SpectralWorkspace(grid)):
                pass
            return last.psi

        taus = [T / 64, T / 128, T / 256]
        ref = final(T / (256 * 16))
        errors = [np.max(np.abs(final(tau) - ref)) for tau in taus]
        assert 1.8 <= fit_slope(taus, errors) <= 2.2


class TestEvolve:
    def test_record_cadence(self, spiral_setup):
        p, grid, ws = spiral_setup
        state = make_stationary(p, grid)
        cfg = SolverConfig(tau=1e-3, t_end=1e-2, save_every=3)
        _, records = evolve(state, p, cfg, ws)
        assert [round(r.t / 1e-3) for r in records] == [0, 3, 6, 9, 10]

    def test_bound_flags_present_and_true(self, spiral_setup):
        p, grid, ws = spiral_setup
        init = perturb(make_stationary(p, grid), 1, 0.1, "both", seed=2)
        cfg = SolverConfig(tau=1e-3, t_end=0.5, save_every=50, assert_bounds=True)
        _, records = evolve(init, p, cfg, ws)
        for rec in records:
            assert rec.bound_flags[diagnostics.MASS_ENVELOPE]
            assert rec.bound_flags[diagnostics.RESERVOIR_ENVELOPE]
            assert rec.bound_flags[diagnostics.POSITIVITY]

    def test_bound_violation_aborts(self, spiral_setup, monkeypatch):
        p, grid, ws = spiral_setup
        state = make_stationary(p, grid)
        monkeypatch.setattr("gpsim.solver.diagnostics.mass_envelope",
                            lambda t, m0, p_: -math.inf)
        cfg = SolverConfig(tau=1e-3, t_end=0.01, assert_bounds=True)
        with pytest.raises(BoundViolation) as exc:
            evolve(state, p, cfg, ws)
        assert exc.value.check == diagnostics.MASS_ENVELOPE

    def test_perturbed_spiral_relaxes(self, spiral_setup):
        p, grid, ws = spiral_setup
        init = perturb(make_stationary(p, grid), 1, 0.1, "psi", seed=0)
        dev0 = np.max(np.abs(init.density - 9.9))
        cfg = SolverConfig(tau=1e-3, t_end=20.0, save_every=2000)
        final, _ = evolve(init, p, cfg, ws)
        assert np.max(np.abs(final.density - 9.9)) <= 0.1 * dev0


class TestAdiabatic:
    def test_reduced_fixed_point_held(self, spiral_setup):
        p, grid, ws = spiral_setup
        rho_star = p.delta / (p.R * p.alpha)
        psi0 = np.full(grid.m, math.sqrt(rho_star), complex)
        cfg = SolverConfig(tau=2.5e-4, t_end=1.0, save_every=4000)
        final, _ = adiabatic_evolve(psi0, p, cfg, ws)
        assert np.max(np.abs(final.density - rho_star)) <= 1e-9

    def test_constant_data_matches_scalar_ode(self, spiral_setup):
        p, grid, ws = spiral_setup
        rho0 = 2.0
        psi0 = np.full(grid.m, math.sqrt(rho0), complex)
        cfg = SolverConfig(tau=1e-3, t_end=1.0, save_every=1000)
        final, _ = adiabatic_evolve(psi0, p, cfg, ws)
        rho = np.array([rho0])
        for _ in range(2000):  # two half-steps per solver step
            rho = ode_step(rho, lambda r: rhs_adiabatic_hom(r, p), 5e-4)
        assert abs(final.density[0] - rho[0]) <= 1e-10

    def test_l2_envelope_and_decay_rate(self, vanish_params):
        p = vanish_params
        grid = make_grid(32, p.domain_length)
        ws = SpectralWorkspace(grid)
        psi0 = (1.0 + 0.1 * np.cos(grid.nodes)).astype(complex)
        cfg = SolverConfig(tau=1e-3, t_end=2.0, save_every=10, assert_bounds=True)
        _, records = evolve_adiabatic_checked = adiabatic_evolve(psi0, p, cfg, ws)
        kappa = (p.alpha - p.P * p.R / p.beta) / 2.0
        l2_0 = records[0].l2_psi
        for rec in records:
            assert rec.l2_psi <= l2_0 * math.exp(-kappa * rec.t) * (1 + 1e-6)
            assert rec.bound_flags[diagnostics.L2_ENVELOPE]

    def test_reconstructed_reservoir_reported(self, spiral_setup):
        p, grid, ws = spiral_setup
        psi0 = np.full(grid.m, 1.0, complex)
        cfg = SolverConfig(tau=1e-3, t_end=0.01, save_every=10)
        final, records = adiabatic_evolve(psi0, p, cfg, ws)
        np.testing.assert_allclose(final.n, reservoir_closure(final.psi, p), rtol=1e-14)
        assert records[0].linf_n == pytest.approx(p.P / (p.beta + p.R), rel=1e-13)


class TestEpsilonSweep:
    def _closure_consistent_initial(self, p, grid):
        base = perturb(make_stationary(p, grid), 1, 0.1, "psi", seed=3)
        return FieldState(t=0.0, psi=base.psi, n=reservoir_closure(base.psi, p))

    def test_three_rung_ladder_decreases(self, spiral_setup):
        p, grid, ws = spiral_setup
        init = self._closure_consistent_initial(p, grid)
        cfg = SolverConfig(tau=1e-3, t_end=2.0, save_every=20)
        rows = epsilon_sweep(init, p, (0.2, 0.1, 0.05), cfg, ws)
        sups = [r.sup_psi_error for r in rows]
        assert all(np.isfinite(sups))
        assert sups[0] > sups[1] > sups[2]
        assert all(r.closure_consistent for r in rows)

    def test_constant_data_reduces_to_scalars(self, spiral_setup):
        p, grid, ws = spiral_setup
        psi0 = np.full(grid.m, 1.2, complex)
        init = FieldState(t=0.0, psi=psi0, n=reservoir_closure(psi0, p))
        cfg = SolverConfig(tau=1e-3, t_end=0.5, save_every=10)
        eps = 0.2
        rows = epsilon_sweep(init, p, (eps,), cfg, ws)

        # scalar replica of both solvers on 1-entry arrays
        from gpsim.dynamics import rhs_split_nonlinear, rhs_adiabatic_nonlinear
        p_eps = replace(p, epsilon=eps)
        y = np.stack([psi0[:1], init.n[:1].astype(complex)])
        z = psi0[:1].copy()
        sup = 0.0
        half = cfg.tau / 2

        def f_full(y_):
            dpsi, dn = rhs_split_nonlinear(y_[0], y_[1], p_eps)
            return np.stack([dpsi, dn])

        f_red = lambda w: rhs_adiabatic_nonlinear(w, p)
        for k in range(1, 501):
            y = ode_step(ode_step(y, f_full, half), f_full, half)
            z = ode_step(ode_step(z, f_red, half), f_red, half)
            if k % cfg.save_every == 0 or k == 500:
                sup = max(sup, abs(y[0, 0] - z[0]))
        assert rows[0].sup_psi_error == pytest.approx(sup, rel=1e-10, abs=1e-14)

    def test_t_end_zero_gives_zero_errors(self, spiral_setup):
        p, grid, ws = spiral_setup
        init = self._closure_consistent_initial(p, grid)
        cfg = SolverConfig(tau=1e-3, t_end=0.0)
        rows = epsilon_sweep(init, p, (0.2, 0.1), cfg, ws)
        assert all(r.sup_psi_error == 0.0 for r in rows)
        assert all(r.closure_mismatch_end <= 1e-14 for r in rows)

    def test_inconsistent_reservoir_warns_and_tags(self, spiral_setup):
        p, grid, ws = spiral_setup
        init = perturb(make_stationary(p, grid), 1, 0.5, "psi", seed=4)  # n kept at n*
        cfg = SolverConfig(tau=1e-3, t_end=0.05, save_every=10)
        with pytest.warns(UserWarning, match="closure"):
            rows = epsilon_sweep(init, p, (0.2,), cfg, ws)
        assert not rows[0].closure_consistent
