"""Tests for the truncated-domain nonlinear solver and the family fitter."""

from __future__ import annotations

import math

import numpy as np
import pytest

from liouville_corner import (
    BoundaryCurvatures,
    ConeParams,
    DomainError,
    FamilyParams,
    FitResult,
    Gauge,
    IllPosed,
    NoConvergence,
    NotInFamily,
    ScalarField,
    SolverConfig,
    curvatures_from_z0,
    eval_u,
    eval_u_polar,
    fit_family,
    solve_bvp,
    z0_from_curvatures,
)
from liouville_corner.solver import _Discretization, _newton

from conftest import member_for


def _sup_error_vs_member(field: ScalarField, fam: FamilyParams) -> float:
    exact = eval_u_polar(field.grid_r[:, None], field.grid_theta[None, :], fam)
    return float(np.max(np.abs(field.values - exact)))


def _samples_from_member(fam, n=40, seed=7):
    rng = np.random.default_rng(seed)
    r = np.exp(rng.uniform(math.log(0.3), math.log(6.0), n))
    th = rng.uniform(0.15, math.pi - 0.15, n)
    z = r * (np.cos(th) + 1j * np.sin(th))
    u = np.asarray(eval_u(z, fam))
    return list(zip(z, u))


# ---------------------------------------------------------------------------
# configuration & input validation


class TestSolverConfig:
    def test_defaults(self):
        cfg = SolverConfig()
        assert cfg.grid == (128, 64)
        assert cfg.domain == (0.05, 20.0)
        assert cfg.newton_tol == 1e-10

    @pytest.mark.parametrize("kwargs", [
        {"grid": (4, 64)},
        {"grid": (128, 7)},
        {"domain": (0.0, 20.0)},
        {"domain": (5.0, 1.0)},
        {"domain": (0.05, math.inf)},
        {"newton_tol": 0.0},
        {"max_newton_iters": 0},
        {"homotopy_steps": 0},
        {"damping": (1.0, 1.5, 1e-4)},
        {"damping": (1.0, 0.5, 0.0)},
    ])
    def test_invalid_configs_rejected(self, kwargs):
        with pytest.raises(DomainError):
            SolverConfig(**kwargs)


class TestDirichletInputs:
    CFG = SolverConfig(grid=(16, 8), domain=(0.5, 2.0))

    def test_pair_shape_mismatch_rejected(self):
        with pytest.raises(DomainError):
            solve_bvp(ConeParams(0.0), BoundaryCurvatures(0.0, 0.0),
                      (np.zeros(5), np.zeros(8)), self.CFG)

    def test_non_finite_data_rejected(self):
        bad = np.zeros(8)
        bad[3] = math.nan
        with pytest.raises(DomainError):
            solve_bvp(ConeParams(0.0), BoundaryCurvatures(0.0, 0.0),
                      (bad, np.zeros(8)), self.CFG)

    def test_zero_data_default(self):
        fld = solve_bvp(ConeParams(0.0), BoundaryCurvatures(0.0, 0.0), None, self.CFG)
        assert np.max(np.abs(fld.values[0, :])) <= 1e-12
        assert np.max(np.abs(fld.values[-1, :])) <= 1e-12
        assert np.all(np.isfinite(fld.values))

    def test_callable_data(self):
        g = lambda r, th: 0.1 * np.sin(th) + 0.0 * r
        fld = solve_bvp(ConeParams(0.0), BoundaryCurvatures(0.0, 0.0), g, self.CFG)
        assert np.allclose(fld.values[0, :], 0.1 * np.sin(fld.grid_theta), atol=1e-12)


# ---------------------------------------------------------------------------
# the linear (zero-amplitude) limit


class TestZeroAmplitudeStep:
    def test_zero_data_solves_in_one_newton_step(self):
        cfg = SolverConfig(grid=(24, 12), domain=(0.1, 10.0))
        disc = _Discretization(ConeParams(0.0), BoundaryCurvatures(0.0, 0.0), cfg)
        rng = np.random.default_rng(3)
        u0 = rng.normal(size=(disc.n_r, disc.n_th))
        g = np.zeros(disc.n_th)
        u, history = _newton(disc, u0, 0.0, g, g, cfg)
        assert len(history) - 1 == 1  # a single linear solve
        assert float(np.max(np.abs(u))) <= 1e-12


# ---------------------------------------------------------------------------
# verification-mode solves against the closed family


class TestSolveAgainstClosedForm:
    def test_flat_member_default_grid(self):
        cone = ConeParams(0.0)
        fam = FamilyParams(cone, 1.0, 0j)
        diag: dict = {}
        fld = solve_bvp(cone, BoundaryCurvatures(0.0, 0.0), fam, SolverConfig(),
                        diagnostics=diag)
        assert _sup_error_vs_member(fld, fam) <= 1e-4
        assert fld.gauge is Gauge.PUNCTURED
        assert fld.values.shape == (128, 64)
        assert diag["seeded"] is True

    def test_half_integer_curved_member(self):
        cone = ConeParams(0.5)
        bc = BoundaryCurvatures(0.0, -math.sqrt(2.0))
        fam = z0_from_curvatures(cone, bc, 1.0)
        assert abs(fam.z0 - 1.0) <= 1e-12
        fld = solve_bvp(cone, bc, fam, SolverConfig())
        assert _sup_error_vs_member(fld, fam) <= 5e-4

    def test_second_order_grid_convergence(self):
        cone = ConeParams(0.0)
        fam = FamilyParams(cone, 1.0, 0j)
        bc = BoundaryCurvatures(0.0, 0.0)
        err_coarse = _sup_error_vs_member(
            solve_bvp(cone, bc, fam, SolverConfig(grid=(128, 64))), fam)
        err_fine = _sup_error_vs_member(
            solve_bvp(cone, bc, fam, SolverConfig(grid=(256, 128))), fam)
        assert err_coarse / err_fine >= 3.0

    def test_grid_spans_requested_domain(self):
        cfg = SolverConfig(grid=(32, 16), domain=(0.2, 8.0))
        fld = solve_bvp(ConeParams(0.0), BoundaryCurvatures(0.0, 0.0),
                        FamilyParams(ConeParams(0.0), 1.0, 0j), cfg)
        assert fld.grid_r[0] == pytest.approx(0.2)
        assert fld.grid_r[-1] == pytest.approx(8.0)
        assert fld.grid_theta[0] == 0.0
        assert fld.grid_theta[-1] == pytest.approx(math.pi)


# ---------------------------------------------------------------------------
# homotopy fallback for data off the family


class TestHomotopyFallback:
    @staticmethod
    def _perturbed_data(cfg):
        cone = ConeParams(0.0)
        fam = FamilyParams(cone, 1.0, 0j)
        disc = _Discretization(cone, BoundaryCurvatures(0.0, 0.0), cfg)
        g_in = eval_u_polar(np.full(disc.n_th, disc.r[0]), disc.theta, fam) \
            + 0.3 * np.sin(3.0 * disc.theta)
        g_out = eval_u_polar(np.full(disc.n_th, disc.r[-1]), disc.theta, fam) \
            + 0.3 * np.sin(3.0 * disc.theta)
        return cone, (np.asarray(g_in), np.asarray(g_out))

    def test_ladder_used_and_converges(self):
        cfg = SolverConfig(grid=(48, 24), domain=(0.1, 10.0))
        cone, data = self._perturbed_data(cfg)
        diag: dict = {}
        fld = solve_bvp(cone, BoundaryCurvatures(0.3, 0.3), data, cfg,
                        diagnostics=diag)
        assert diag["seeded"] is False
        assert diag["epsilon_values"][0] == 0.0
        assert diag["epsilon_values"][-1] == 1.0
        assert len(diag["epsilon_values"]) == cfg.homotopy_steps + 1
        assert np.all(np.isfinite(fld.values))
        assert np.allclose(fld.values[0, :], data[0], atol=1e-12)
        assert np.allclose(fld.values[-1, :], data[1], atol=1e-12)

    def test_newton_tail_is_quadratic(self):
        cfg = SolverConfig(grid=(48, 24), domain=(0.1, 10.0))
        cone, data = self._perturbed_data(cfg)
        diag: dict = {}
        solve_bvp(cone, BoundaryCurvatures(0.3, 0.3), data, cfg, diagnostics=diag)
        pairs = 0
        for history in diag["residual_history"]:
            for rk, rk1 in zip(history, history[1:]):
                if rk < 1e-3 and rk > 1e-14:
                    assert rk1 <= 100.0 * rk * rk
                    pairs += 1
        assert pairs >= 3  # the quadratic regime was actually observed

    def test_newton_budget_exhaustion_raises(self):
        cfg = SolverConfig(grid=(24, 12), domain=(0.1, 10.0), max_newton_iters=1)
        cone, data = self._perturbed_data(cfg)
        with pytest.raises(NoConvergence):
            solve_bvp(cone, BoundaryCurvatures(0.3, 0.3), data, cfg)


# ---------------------------------------------------------------------------
# family fitting


class TestFitFamily:
    TRUTH = FamilyParams(ConeParams(1.0), 1.7, 0.2 + 0.9j)

    def test_exact_samples_recover_parameters(self):
        fit = fit_family(_samples_from_member(self.TRUTH), self.TRUTH.cone)
        assert abs(fit.fam.lam - 1.7) <= 1e-8
        assert abs(fit.fam.z0 - (0.2 + 0.9j)) <= 1e-8
        assert fit.rms_residual <= 1e-12
        assert fit.iterations >= 1

    def test_noisy_samples_recover_parameters_coarsely(self):
        rng = np.random.default_rng(11)
        samples = [(z, u + rng.normal(0.0, 1e-3))
                   for z, u in _samples_from_member(self.TRUTH, n=120)]
        fit = fit_family(samples, self.TRUTH.cone)
        assert abs(fit.fam.lam - 1.7) <= 1e-2
        assert abs(fit.fam.z0 - (0.2 + 0.9j)) <= 1e-2
        assert fit.rms_residual <= 5e-3

    def test_wrong_cone_order_is_not_in_family(self):
        z = np.array([0.3 + 0.4j, 1j, 1.5 + 0.2j, 0.5 + 1.1j, 2j,
                      0.8 + 0.8j, 1.2 + 0.5j, 0.4 + 1.6j, 2.5 + 1.0j, 0.9 + 2.2j])
        samples = [(zk, -2.0 * math.log(1.0 + abs(zk) ** 4)) for zk in z]
        with pytest.raises(NotInFamily) as exc_info:
            fit_family(samples, ConeParams(0.0))
        exc = exc_info.value
        assert exc.rms_residual is not None and exc.rms_residual > 1e-3
        assert isinstance(exc.fam, FamilyParams)

    def test_idempotent_on_own_output(self):
        fit1 = fit_family(_samples_from_member(self.TRUTH), self.TRUTH.cone)
        samples2 = _samples_from_member(fit1.fam, n=40, seed=23)
        fit2 = fit_family(samples2, self.TRUTH.cone)
        assert abs(fit2.fam.lam - fit1.fam.lam) <= 1e-10
        assert abs(fit2.fam.z0 - fit1.fam.z0) <= 1e-10

    def test_reported_curvatures_match_centre(self):
        fit = fit_family(_samples_from_member(self.TRUTH), self.TRUTH.cone)
        bc = fit.curvatures
        ref = curvatures_from_z0(fit.fam)
        assert bc.c1 == ref.c1 and bc.c2 == ref.c2

    def test_covariance_diagonal_shape_and_sign(self):
        fit = fit_family(_samples_from_member(self.TRUTH), self.TRUTH.cone)
        cov = np.asarray(fit.covariance_diag)
        assert cov.shape == (3,)
        assert np.all(cov >= 0.0)

    def test_too_few_samples_rejected(self):
        samples = _samples_from_member(self.TRUTH)[:7]
        with pytest.raises(DomainError):
            fit_family(samples, self.TRUTH.cone)

    def test_boundary_samples_rejected(self):
        samples = _samples_from_member(self.TRUTH)
        samples[0] = (1.0 + 0.0j, 0.0)
        with pytest.raises(DomainError):
            fit_family(samples, self.TRUTH.cone)

    def test_non_finite_values_rejected(self):
        samples = _samples_from_member(self.TRUTH)
        samples[0] = (samples[0][0], math.inf)
        with pytest.raises(DomainError):
            fit_family(samples, self.TRUTH.cone)

    def test_cocircular_samples_rejected(self):
        th = np.linspace(0.2, math.pi - 0.2, 12)
        z = 1.5 * (np.cos(th) + 1j * np.sin(th))
        fam = self.TRUTH
        samples = [(zk, float(eval_u(zk, fam))) for zk in z]
        with pytest.raises(DomainError):
            fit_family(samples, fam.cone)

    def test_iteration_budget_exhaustion_raises(self):
        with pytest.raises(NoConvergence):
            fit_family(_samples_from_member(self.TRUTH), self.TRUTH.cone, max_iters=1)

    def test_result_record_invariants(self):
        fit = fit_family(_samples_from_member(self.TRUTH), self.TRUTH.cone)
        assert isinstance(fit, FitResult)
        assert fit.rms_residual >= 0.0


# ---------------------------------------------------------------------------
# end-to-end: solve, then recover the generating parameters


class TestSolveFitRoundTrip:
    def test_half_integer_member_recovered(self):
        cone = ConeParams(0.5)
        fam = z0_from_curvatures(cone, BoundaryCurvatures(0.4, -0.2), 1.3)
        fld = solve_bvp(cone, BoundaryCurvatures(0.4, -0.2), fam, SolverConfig())
        ii = range(16, 112, 8)
        jj = range(8, 56, 5)
        samples = []
        for i in ii:
            for j in jj:
                z = fld.grid_r[i] * complex(math.cos(fld.grid_theta[j]),
                                            math.sin(fld.grid_theta[j]))
                samples.append((z, float(fld.values[i, j])))
        fit = fit_family(samples, cone)
        assert abs(fit.fam.lam - fam.lam) <= 1e-3
        assert abs(fit.fam.z0 - fam.z0) <= 1e-3
