"""
Recovering family parameters from sampled fields
================================================

fit_family inverts the closed form: given scattered interior samples
(z, u(z)) and the cone exponent, it recovers the scale lambda and centre z0
by damped Gauss-Newton on (ln lambda, s0, t0).  It distinguishes three
outcomes: a clean fit (with covariance diagnostics), data that simply is not
in the family (NotInFamily, carrying the best residual found), and invalid
sampling layouts (too few points, boundary points, cocircular degeneracy).

This script recovers a member from exact and from noisy samples, rejects an
impostor field, and closes the loop solve -> sample -> fit.
"""

import math

import numpy as np

from liouville_corner import (
    BoundaryCurvatures,
    ConeParams,
    NotInFamily,
    SolverConfig,
    eval_u,
    fit_family,
    solve_bvp,
    z0_from_curvatures,
)

cone = ConeParams(1.0)
bc = BoundaryCurvatures(0.5, -0.5)
truth = z0_from_curvatures(cone, bc, lam=1.7, s0_free=0.2)
print("ground truth: lambda =", truth.lam, " z0 =", truth.z0)


def draw_samples(fam, n, noise=0.0, seed=11):
    rng = np.random.default_rng(seed)
    r = np.exp(rng.uniform(math.log(0.3), math.log(6.0), n))
    th = rng.uniform(0.15, math.pi - 0.15, n)
    z = r * np.exp(1j * th)
    u = np.asarray(eval_u(z, fam), dtype=float)
    u = u + noise * rng.standard_normal(n)
    return list(zip(z, u))


# ---------------------------------------------------------------------------
# 1. exact samples: recovery to solver precision

result = fit_family(draw_samples(truth, 40), cone)
print("\nexact samples  : lambda =", result.fam.lam, " z0 =", result.fam.z0)
print("  rms residual :", f"{result.rms_residual:.2e}",
      " iterations:", result.iterations)
print("  curvatures   :", (result.curvatures.c1, result.curvatures.c2))

# ---------------------------------------------------------------------------
# 2. noisy samples: graceful degradation with covariance diagnostics
#
# The returned covariance diagonal scales the parameter uncertainty in
# (ln lambda, s0, t0); with 1e-3 sample noise the parameters come back to
# about a milli-unit.

noisy = fit_family(draw_samples(truth, 150, noise=1e-3), cone)
print("\nnoisy samples  : lambda =", noisy.fam.lam, " z0 =", noisy.fam.z0)
print("  |d lambda|   :", f"{abs(noisy.fam.lam - truth.lam):.2e}")
print("  sqrt(cov)    :", np.round(np.sqrt(noisy.covariance_diag), 6))

# ---------------------------------------------------------------------------
# 3. an impostor field is named as such, not force-fitted

rng = np.random.default_rng(5)
z = rng.uniform(-2, 2, 30) + 1j * rng.uniform(0.2, 3.0, 30)
impostor = [(p, -2.0 * math.log1p(abs(p) ** 4)) for p in z]
try:
    fit_family(impostor, ConeParams(0.0))
    raise SystemExit("BUG: the impostor field was accepted")
except NotInFamily as exc:
    print("\nimpostor rejected:", exc)
    print("  best rms over the family:", f"{exc.rms_residual:.3f}")

# ---------------------------------------------------------------------------
# 4. the full loop: solve the BVP numerically, then identify the solution
#
# Solving in verification mode and fitting the solved grid must return the
# parameters we started from -- the round trip couples the solver, the
# closed form, and the fitter.

cfg = SolverConfig(grid=(128, 64), domain=(0.1, 10.0))
field = solve_bvp(cone, bc, truth, cfg)
samples = [
    (field.grid_r[i] * complex(math.cos(field.grid_theta[j]),
                               math.sin(field.grid_theta[j])),
     float(field.values[i, j]))
    for i in range(16, 112, 8) for j in range(8, 56, 5)
]
loop = fit_family(samples, cone)
print("\nsolve -> fit   : lambda =", loop.fam.lam, " z0 =", loop.fam.z0)
print("  |d lambda|   :", f"{abs(loop.fam.lam - truth.lam):.2e}")
print("  |d z0|       :", f"{abs(loop.fam.z0 - truth.z0):.2e}")
