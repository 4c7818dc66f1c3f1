"""
Conformal-geometry diagnostics
==============================

The library treats a candidate field as a conformal metric exp(2v)|dz|^2 and
asks geometric questions about it: does it solve the interior equation, does
each boundary ray have the prescribed geodesic curvature, is the Gaussian
curvature constant, does the quadratic differential built from the second
log-derivative transform like a projective connection?  All diagnostics share
one calling convention -- a point (or array of points), a field, and an
optional residual mode (analytic derivatives, finite differences, or grid
stencils).
"""

import math

import numpy as np

from liouville_corner import (
    BoundaryCurvatures,
    ConeParams,
    Gauge,
    boundary_residual,
    eval_u,
    h_system_residuals,
    interior_residual,
    inversion_symmetry_residual,
    kelvin_transform,
    projective_connection,
    scalar_curvature,
    schwarzian,
    z0_from_curvatures,
)

cone = ConeParams(0.5)
bc = BoundaryCurvatures(0.4, -0.2)
fam = z0_from_curvatures(cone, bc, lam=1.3)

# ---------------------------------------------------------------------------
# 1. pointwise residuals of the two defining equations

rng = np.random.default_rng(0)
z = rng.uniform(0.3, 3.0, 200) * np.exp(1j * rng.uniform(0.1, math.pi - 0.1, 200))
s = np.concatenate([np.geomspace(0.2, 5.0, 50), -np.geomspace(0.2, 5.0, 50)])

print("interior PDE residual (max over 200 points) :",
      f"{np.abs(interior_residual(z, fam)).max():.3e}")
print("boundary flux residual (max over 100 points):",
      f"{np.abs(boundary_residual(s, fam)).max():.3e}")

# ---------------------------------------------------------------------------
# 2. constant Gaussian curvature
#
# In the full gauge the metric exp(2*(u_full/2))|dz|^2 has curvature exactly
# 1 wherever the field solves the equation; the diagnostic returns that
# curvature pointwise.

K = scalar_curvature(z, fam)
print("Gaussian curvature spread                    :",
      f"{np.abs(K - 1.0).max():.3e}")

# ---------------------------------------------------------------------------
# 3. the projective connection
#
# eta = d^2(u_full)/dz^2 - (1/2)(d(u_full)/dz)^2 is holomorphic for any
# solution and equals -alpha*(alpha+2)/(2 z^2): the corner leaves a regular
# singularity of fixed weight, and nothing else.

record = projective_connection(0.7 + 0.9j, fam)
print("\neta at 0.7+0.9j      :", record.eta)
print("predicted weight term:", record.expected)
print("deviation            :", f"{abs(record.eta - record.expected):.3e}")

# the Schwarzian derivative is the cocycle of that object under conformal
# charts; for a Moebius map T(z) = (2z+1)/(z+1) it vanishes identically
w = 0.3 + 0.4j
tp, tpp, tppp = 1.0 / (w + 1) ** 2, -2.0 / (w + 1) ** 3, 6.0 / (w + 1) ** 4
print("Schwarzian of (2z+1)/(z+1) at 0.3+0.4j:", schwarzian(tp, tpp, tppp))

# ---------------------------------------------------------------------------
# 4. the linearising substitution
#
# h = exp(-u_full/2) converts the exponential nonlinearity into a *linear*
# complex ODE h_zz = alpha*(alpha+2)/(4z^2) * h with a Robin boundary
# condition dh/dt = -c/2.  Both residuals vanish on family members.

interior_h, _ = h_system_residuals(0.7 + 0.9j, fam)
_, boundary_h = h_system_residuals(1.5 + 0.0j, fam)
print("\nh-equation residual (interior):", f"{abs(interior_h):.3e}")
print("h-flux residual     (boundary):", f"{abs(boundary_h):.3e}")

# ---------------------------------------------------------------------------
# 5. Kelvin transform and the inversion symmetry
#
# v(x) = u(x/|x|^2) - (4+4*alpha) ln|x| maps solutions to solutions and, for
# a centred member, simply flips lambda -> 1/lambda.  The transform is its
# own inverse, and centred members additionally satisfy an exact scale-
# inversion identity with residual at machine precision.

centred = z0_from_curvatures(ConeParams(0.5), BoundaryCurvatures(0.0, 0.0), 2.0)
image = kelvin_transform(centred)
print("\nKelvin image of lam=2 centred member: lam =", image.lam)

probe = 0.3 + 0.7j
v_direct = eval_u(probe / abs(probe) ** 2, centred) \
    - (4.0 + 4.0 * centred.cone.alpha) * math.log(abs(probe))
v_image = eval_u(probe, image)
print("defining identity check             :", f"{abs(v_direct - v_image):.3e}")

res = np.abs(inversion_symmetry_residual(z, centred)).max()
print("scale-inversion residual (max)      :", f"{res:.3e}")

# ---------------------------------------------------------------------------
# 6. diagnostics accept sampled fields too
#
# Any callable or sampled grid can be screened.  A field that does NOT solve
# the equation is flagged by a residual of order one -- here the constant
# field u = 0, for which -laplace(u) = 0 but |x|^(2a) e^u = |x|^(2a) > 0.

res_bad = interior_residual(z[:5], lambda p: np.zeros(np.shape(p)), cone=cone)
print("\nresidual of the constant field u=0  :",
      np.round(np.abs(res_bad), 3), "(order one, as it should be)")
