"""Tests for the singular-integral layer: adaptive panels, energies, the
defect identity, asymptotic slopes, and the finite-radius balance identity.

Closed-form oracles
-------------------
For a member with centre z0 = s0 + i*t0 and scale L = lam**beta, write
m = L**2 + |z0|**2 and k(phi) = s0*cos(phi) + t0*sin(phi).  Integrating the
area density analytically in the radial variable (partial fractions in the
rho = r**beta substitution) gives

    area = 8 L^2 * int_0^{beta*pi} F(phi) dphi,
    F = 1/(2m) + k^2/(2 q^2 m) + k/(2 q^3) * (pi/2 + atan(k/q)),  q^2 = m - k^2,

and for each boundary ray (k evaluated at phi = 0 resp. beta*pi)

    ray = sqrt(8) L / q * (pi/2 + atan(k/q)).

These are derived independently of the package's integrands and evaluated
here with scipy's QUADPACK wrapper, so agreement is a two-route check.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from liouville_corner import (
    ConeParams,
    DomainError,
    EnergyReport,
    FamilyParams,
    Gauge,
    NonConvergence,
    QuadratureConfig,
    ScalarField,
    adaptive_quadrature,
    asymptotic_slope,
    borderline_divergence_control,
    curvatures_from_z0,
    d_identity,
    energy_area,
    energy_boundary,
    eval_grad_u,
    eval_u,
    eval_u_polar,
    pohozaev_d_estimate,
    pohozaev_residual,
)

from conftest import member_for

CFG = QuadratureConfig()


def area_closed_form(fam: FamilyParams) -> float:
    beta = fam.cone.beta
    lam2 = fam.lam_beta**2
    s0, t0 = fam.z0.real, fam.z0.imag
    m = lam2 + s0 * s0 + t0 * t0

    def F(phi):
        k = s0 * math.cos(phi) + t0 * math.sin(phi)
        q2 = m - k * k
        q = math.sqrt(q2)
        return (1.0 / (2.0 * m) + k * k / (2.0 * q2 * m)
                + (k / (2.0 * q**3)) * (math.pi / 2.0 + math.atan(k / q)))

    val, _ = quad(F, 0.0, beta * math.pi, limit=200)
    return 8.0 * lam2 * val


def ray_closed_form(fam: FamilyParams, positive: bool) -> float:
    beta = fam.cone.beta
    lam = fam.lam_beta
    s0, t0 = fam.z0.real, fam.z0.imag
    m = lam * lam + s0 * s0 + t0 * t0
    k = s0 if positive else s0 * math.cos(beta * math.pi) + t0 * math.sin(beta * math.pi)
    q = math.sqrt(m - k * k)
    return math.sqrt(8.0) * lam * (math.pi / 2.0 + math.atan(k / q)) / q


# ---------------------------------------------------------------------------
# the adaptive panel integrator


class TestAdaptiveQuadrature:
    def test_polynomial_is_exact(self):
        val, err = adaptive_quadrature(lambda x: x**2, 0.0, 1.0,
                                       rel_tol=1e-10, abs_tol=1e-14,
                                       max_subdivisions=50)
        assert val == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert err >= 0.0

    def test_sine(self):
        val, err = adaptive_quadrature(np.sin, 0.0, math.pi,
                                       rel_tol=1e-12, abs_tol=1e-15,
                                       max_subdivisions=50)
        assert val == pytest.approx(2.0, rel=1e-12)
        assert abs(val - 2.0) <= max(err, 1e-13)

    def test_vector_components_integrated_together(self):
        f = lambda x: np.stack([np.sin(x), np.cos(x), x], axis=1)
        val, err = adaptive_quadrature(f, 0.0, math.pi,
                                       rel_tol=1e-10, abs_tol=1e-14,
                                       max_subdivisions=60)
        assert val.shape == (3,) and err.shape == (3,)
        assert val[0] == pytest.approx(2.0, rel=1e-10)
        assert val[1] == pytest.approx(0.0, abs=1e-12)
        assert val[2] == pytest.approx(math.pi**2 / 2.0, rel=1e-12)

    def test_error_estimate_bounds_true_error(self):
        cases = [
            (lambda x: np.exp(-x) * np.sin(3 * x), 0.0, 4.0,
             (3.0 - math.exp(-4.0) * (math.sin(12.0) * 1.0 + 3.0 * math.cos(12.0))) / 10.0),
            (lambda x: 1.0 / (1.0 + x * x), -2.0, 2.0, 2.0 * math.atan(2.0)),
        ]
        for f, a, b, exact in cases:
            val, err = adaptive_quadrature(f, a, b, rel_tol=1e-9, abs_tol=1e-13,
                                           max_subdivisions=60)
            assert abs(val - exact) <= max(err, 1e-12)

    def test_odd_integrand_meets_absolute_tolerance(self):
        val, err = adaptive_quadrature(lambda x: x**3, -1.0, 1.0,
                                       rel_tol=1e-10, abs_tol=1e-13,
                                       max_subdivisions=50)
        assert abs(val) <= 1e-13

    def test_deterministic_bitwise(self):
        f = lambda x: np.exp(-x * x) * np.cos(5 * x)
        r1 = adaptive_quadrature(f, -3.0, 3.0, rel_tol=1e-11, abs_tol=1e-14,
                                 max_subdivisions=80)
        r2 = adaptive_quadrature(f, -3.0, 3.0, rel_tol=1e-11, abs_tol=1e-14,
                                 max_subdivisions=80)
        assert r1 == r2  # bit-identical, not merely close

    def test_graded_refinement_handles_endpoint_singularity(self):
        val, err = adaptive_quadrature(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0,
                                       rel_tol=1e-8, abs_tol=1e-12,
                                       max_subdivisions=200)
        assert val == pytest.approx(2.0, rel=1e-8)

    def test_budget_exhaustion_raises_with_diagnostics(self):
        with pytest.raises(NonConvergence) as exc_info:
            adaptive_quadrature(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0,
                                rel_tol=1e-12, abs_tol=1e-15,
                                max_subdivisions=4)
        exc = exc_info.value
        assert exc.estimate is not None and math.isfinite(float(exc.estimate))
        assert exc.error is not None and float(exc.error) > 0.0
        assert isinstance(exc.estimate_growing, bool)

    def test_infinite_interval_rejected(self):
        with pytest.raises(DomainError):
            adaptive_quadrature(np.sin, 0.0, math.inf,
                                rel_tol=1e-8, abs_tol=1e-12, max_subdivisions=10)


class TestQuadratureConfig:
    @pytest.mark.parametrize("kwargs", [
        {"rel_tol": 0.0},
        {"rel_tol": -1e-8},
        {"abs_tol": 0.0},
        {"r_split": 0.0},
        {"max_subdivisions": 0},
    ])
    def test_invalid_configs_rejected(self, kwargs):
        with pytest.raises(DomainError):
            QuadratureConfig(**kwargs)

    def test_defaults(self):
        cfg = QuadratureConfig()
        assert cfg.rel_tol == 1e-8
        assert cfg.abs_tol == 1e-12
        assert cfg.r_split == 1.0
        assert cfg.max_subdivisions == 60


class TestEnergyReport:
    def test_positive_area_enforced(self):
        with pytest.raises(DomainError):
            EnergyReport(area_integral=-1.0, boundary_integral_weighted=0.0,
                         boundary_integral_abs=0.0, d_value=0.0, error_estimate=0.0)


# ---------------------------------------------------------------------------
# interior energy


class TestEnergyArea:
    @pytest.mark.parametrize("alpha, lam", [
        (0.0, 1.0), (1.0, 1.0), (0.0, 2.0), (2.3, 1.5), (-0.5, 5.0),
    ])
    def test_centred_members_have_plateau_area(self, alpha, lam):
        fam = FamilyParams(ConeParams(alpha), lam, 0j)
        val = energy_area(fam, CFG)
        assert val == pytest.approx(4.0 * math.pi * (1.0 + alpha), rel=1e-9)

    @pytest.mark.parametrize("alpha, lam, c1, c2", [
        (0.5, 1.3, 0.4, -0.2),
        (2.3, 0.8, 1.5, -1.5),
        (-0.5, 5.0, 1.5, 1.5),
        (1.0, 0.3, -0.5, 0.5),
    ])
    def test_general_members_match_closed_form(self, alpha, lam, c1, c2):
        fam = member_for(alpha, lam, c1, c2)
        assert energy_area(fam, CFG) == pytest.approx(area_closed_form(fam), rel=1e-9)

    def test_scale_invariance_at_fixed_curvatures(self):
        a1 = energy_area(member_for(0.5, 0.7, 0.4, -0.2), CFG)
        a2 = energy_area(member_for(0.5, 2.1, 0.4, -0.2), CFG)
        assert a1 == pytest.approx(a2, rel=1e-8)

    def test_two_route_check_against_raw_coordinates(self):
        # Same finite-ball integral via scipy's iterated QUADPACK in raw
        # (r, theta) coordinates, no radial substitution: an independent
        # discretization of an independent integrand expression.
        fam = member_for(0.5, 1.3, 0.4, -0.2)
        R = 5.0
        alpha = fam.cone.alpha

        def raw_density(r, theta):
            u = eval_u_polar(r, theta, fam)
            return r ** (2.0 * alpha + 1.0) * math.exp(u)

        raw, raw_err = dblquad(raw_density, 0.0, math.pi, 0.0, R, epsabs=1e-10)
        from liouville_corner.quadrature import _area_ball
        ball, _ = _area_ball(fam, R, CFG)
        assert ball == pytest.approx(raw, abs=max(1e-8, 10 * raw_err))


# ---------------------------------------------------------------------------
# boundary energy


class TestEnergyBoundary:
    @pytest.mark.parametrize("alpha", [0.0, 1.0, 0.5, 2.3])
    def test_centred_members_unweighted(self, alpha):
        fam = FamilyParams(ConeParams(alpha), 1.3, 0j)
        val = energy_boundary(fam, weighted=False, cfg=CFG)
        assert val == pytest.approx(2.0 * math.sqrt(2.0) * math.pi, rel=1e-9)

    def test_weighted_vanishes_for_flat_boundary(self):
        fam = member_for(0.0, 1.0, 0.0, 0.0)
        assert abs(energy_boundary(fam, weighted=True, cfg=CFG)) <= 1e-10

    @pytest.mark.parametrize("alpha, lam, c1, c2", [
        (0.5, 1.3, 0.4, -0.2),
        (2.3, 0.8, 1.5, -1.5),
        (-0.5, 5.0, 1.5, 1.5),
    ])
    def test_weighted_matches_closed_form(self, alpha, lam, c1, c2):
        fam = member_for(alpha, lam, c1, c2)
        bc = curvatures_from_z0(fam)
        expected = bc.c1 * ray_closed_form(fam, True) + bc.c2 * ray_closed_form(fam, False)
        val = energy_boundary(fam, weighted=True, cfg=CFG)
        assert val == pytest.approx(expected, rel=1e-9, abs=1e-10)

    def test_unweighted_matches_closed_form_off_centre(self):
        fam = member_for(0.5, 1.3, 0.4, -0.2)
        expected = ray_closed_form(fam, True) + ray_closed_form(fam, False)
        val = energy_boundary(fam, weighted=False, cfg=CFG)
        assert val == pytest.approx(expected, rel=1e-9)


# ---------------------------------------------------------------------------
# the defect identity d = 4 + 4*alpha


class TestDIdentity:
    def test_flat_centred_member(self):
        rep = d_identity(member_for(0.0, 1.0), CFG)
        assert rep.d_value == pytest.approx(4.0, abs=4e-6)
        assert rep.boundary_integral_weighted == pytest.approx(0.0, abs=1e-9)

    def test_curved_member_same_defect(self):
        rep = d_identity(member_for(0.0, 1.0, 1.0, 1.0), CFG)
        assert rep.d_value == pytest.approx(4.0, abs=4e-6)
        assert abs(rep.boundary_integral_weighted) > 0.1  # identity is a cancellation

    def test_half_integer_example(self):
        rep = d_identity(member_for(0.5, 1.3, 0.4, -0.2), CFG)
        assert rep.d_value == pytest.approx(6.0, abs=6e-6)

    def test_scale_invariance(self):
        d1 = d_identity(member_for(2.3, 0.3, 0.5, -1.5), CFG).d_value
        d2 = d_identity(member_for(2.3, 5.0, 0.5, -1.5), CFG).d_value
        assert d1 == pytest.approx(d2, abs=1e-7)

    def test_report_is_internally_consistent(self):
        rep = d_identity(member_for(0.5, 1.3, 0.4, -0.2), CFG)
        derived = (rep.area_integral - rep.boundary_integral_weighted) / math.pi
        assert rep.d_value == pytest.approx(derived, rel=1e-14)
        assert rep.area_integral > 0.0
        assert rep.boundary_integral_abs >= abs(rep.boundary_integral_weighted) / 2.0
        assert rep.error_estimate >= 0.0

    @pytest.mark.parametrize("alpha", [-0.5, 0.0, 0.5, 1.0, 2.3])
    def test_lower_bound_sanity(self, alpha):
        c1 = 0.5 if not ConeParams(alpha).is_integer else 0.5
        c2 = -0.5 if not ConeParams(alpha).is_integer else \
            (0.5 if int(round(alpha)) % 2 == 0 else -0.5)
        rep = d_identity(member_for(alpha, 1.1, c1, c2), CFG)
        assert rep.d_value >= 2.0 + 2.0 * alpha

    def test_halved_tolerances_stay_within_reported_error(self):
        fam = member_for(0.5, 1.3, 0.4, -0.2)
        loose = d_identity(fam, QuadratureConfig(rel_tol=2e-8, abs_tol=2e-12))
        tight = d_identity(fam, QuadratureConfig(rel_tol=1e-8, abs_tol=1e-12))
        assert abs(loose.d_value - tight.d_value) <= max(loose.error_estimate, 1e-12)


# ---------------------------------------------------------------------------
# asymptotic slope


class TestAsymptoticSlope:
    RADII = [1e3, 1e4, 1e5]

    def test_flat_member(self):
        fam = FamilyParams(ConeParams(0.0), 1.0, 0j)
        assert asymptotic_slope(fam, self.RADII) == pytest.approx(-4.0, abs=0.01)

    def test_half_integer_member(self):
        fam = member_for(0.5, 1.0, 0.0, 0.0)
        assert asymptotic_slope(fam, self.RADII) == pytest.approx(-6.0, abs=0.01)

    def test_integer_member_with_curvature(self):
        fam = member_for(2.0, 1.0, 0.3, 0.3)
        assert asymptotic_slope(fam, self.RADII) == pytest.approx(-12.0, abs=0.01)

    @pytest.mark.parametrize("alpha, lam, c1, c2", [
        (0.5, 1.3, 0.4, -0.2),
        (1.0, 2.0, -0.5, 0.5),
    ])
    def test_slope_agrees_with_defect_integral(self, alpha, lam, c1, c2):
        fam = member_for(alpha, lam, c1, c2)
        slope = asymptotic_slope(fam, self.RADII)
        d_val = d_identity(fam, CFG).d_value
        assert slope == pytest.approx(-d_val, abs=0.02)

    def test_sampled_field_source(self):
        fam = member_for(0.0, 1.0, 0.0, 0.0)
        r = np.geomspace(1e3, 1e5, 80)
        th = np.linspace(0.0, math.pi, 33)
        vals = eval_u_polar(r[:, None], th[None, :], fam)
        fld = ScalarField(r, th, vals, Gauge.PUNCTURED, fam.cone)
        assert asymptotic_slope(fld, self.RADII) == pytest.approx(-4.0, abs=0.01)

    def test_radii_validation(self):
        fam = member_for(0.0, 1.0)
        with pytest.raises(DomainError):
            asymptotic_slope(fam, [5.0, 100.0])  # min below 10
        with pytest.raises(DomainError):
            asymptotic_slope(fam, [1e4, 1e3])  # not increasing
        with pytest.raises(DomainError):
            asymptotic_slope(fam, [1e3])  # need at least two radii

    def test_log_corrected_field_is_bounded(self):
        # u + (4 + 4*alpha) * log r stays bounded as r grows
        fam = member_for(0.5, 1.3, 0.4, -0.2)
        d = 4.0 + 4.0 * fam.cone.alpha
        th = np.linspace(0.05, math.pi - 0.05, 15)
        sup_inner = None
        for r in (1e3, 1e4, 1e5, 1e6):
            vals = eval_u_polar(np.full_like(th, r), th, fam) + d * math.log(r)
            sup = float(np.max(np.abs(vals)))
            if sup_inner is None:
                sup_inner = sup
            assert sup <= sup_inner + 1.0
        assert sup_inner is not None

    @pytest.mark.parametrize("alpha, lam, c1, c2", [
        (0.0, 1.0, 0.0, 0.0),
        (0.5, 1.3, 0.4, -0.2),
        (2.3, 0.8, 1.5, -1.5),
    ])
    def test_gradient_tail_decays_faster_than_defect_term(self, alpha, lam, c1, c2):
        # r**1.1 * |u_r + d/r| stays bounded along rays to the far field
        fam = member_for(alpha, lam, c1, c2)
        d = 4.0 + 4.0 * alpha
        th = np.linspace(0.1, math.pi - 0.1, 7)
        sups = []
        for r in (1e2, 1e3, 1e4, 1e5, 1e6):
            z = r * (np.cos(th) + 1j * np.sin(th))
            us, ut = eval_grad_u(z, fam)
            u_r = np.cos(th) * np.asarray(us) + np.sin(th) * np.asarray(ut)
            sups.append(float(np.max(r**1.1 * np.abs(u_r + d / r))))
        assert max(sups[1:]) <= max(10.0 * sups[0], 1e-3)


# ---------------------------------------------------------------------------
# finite-radius balance identity


class TestPohozaevResidual:
    def test_radial_case_closed_form(self):
        # both sides equal -8 pi R^4 / (1+R^2)^2 for the flat unit member
        fam = FamilyParams(ConeParams(0.0), 1.0, 0j)
        for R in (0.5, 2.0, 5.0):
            lhs, rhs, res = pohozaev_residual(fam, R, CFG)
            exact = -8.0 * math.pi * R**4 / (1.0 + R**2) ** 2
            assert lhs == pytest.approx(exact, rel=1e-9)
            assert rhs == pytest.approx(exact, rel=1e-9)
            assert res <= 1e-6

    def test_tiny_radius(self):
        fam = FamilyParams(ConeParams(0.0), 1.0, 0j)
        _, _, res = pohozaev_residual(fam, 0.01, CFG)
        assert res <= 1e-6

    @pytest.mark.parametrize("alpha, lam, c1, c2", [
        (0.5, 1.3, 0.4, -0.2),
        (2.3, 0.8, 1.5, -1.5),
        (-0.5, 5.0, 1.5, 1.5),
        (1.0, 0.3, -0.5, 0.5),
    ])
    @pytest.mark.parametrize("R", [0.5, 2.0, 5.0, 20.0])
    def test_general_members(self, alpha, lam, c1, c2, R):
        fam = member_for(alpha, lam, c1, c2)
        _, _, res = pohozaev_residual(fam, R, CFG)
        assert res <= 1e-6

    def test_non_positive_radius_rejected(self):
        fam = member_for(0.0, 1.0)
        with pytest.raises(DomainError):
            pohozaev_residual(fam, 0.0, CFG)

    @pytest.mark.parametrize("alpha, lam, c1, c2", [
        (0.0, 1.0, 0.0, 0.0),
        (0.5, 1.3, 0.4, -0.2),
    ])
    def test_defect_estimate_from_large_radius(self, alpha, lam, c1, c2):
        fam = member_for(alpha, lam, c1, c2)
        est = np.asarray(pohozaev_d_estimate(fam, [10.0, 100.0, 1000.0], CFG))
        target = 4.0 + 4.0 * alpha
        gaps = np.abs(est - target)
        assert np.all(np.diff(gaps) <= 0.0)  # estimates improve with radius
        assert gaps[-1] <= 0.01


# ---------------------------------------------------------------------------
# negative control: the borderline-decay density must never yield a number


class TestBorderlineDivergenceControl:
    @pytest.mark.parametrize("alpha", [0.0, 0.5, 2.3, -0.5])
    def test_raises_with_growth_diagnosis(self, alpha):
        with pytest.raises(NonConvergence) as exc_info:
            borderline_divergence_control(ConeParams(alpha), CFG)
        assert exc_info.value.estimate_growing is True
