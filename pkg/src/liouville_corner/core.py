"""Closed-form Liouville fields on the upper half-plane with a conical corner.

This module implements the explicit two-parameter-per-cone family of solutions to

    -laplace(u) = |x|^(2*alpha) * exp(u)      on the open upper half-plane,
    du/dt       = c1 * |x|^alpha * exp(u/2)   on the positive boundary ray,
    du/dt       = c2 * |x|^alpha * exp(u/2)   on the negative boundary ray,

for cone exponent alpha > -1, where x = (s, t), z = s + i*t, and du/dt is the
derivative in the direction of the inward normal coordinate t.  With beta =
alpha + 1 the family is

    exp(u(z)) = 8 * beta**2 * Lambda**2 / (Lambda**2 + |z**beta - z0|**2)**2,

parameterised by a scale lam > 0 (through Lambda = lam**beta) and a centre
z0 = s0 + i*t0 of the power-mapped variable w = z**beta.  The boundary
curvatures (c1, c2) and the centre z0 determine each other; the maps
:func:`z0_from_curvatures` and :func:`curvatures_from_z0` convert between them.

Two gauges of the same field are supported (:class:`Gauge`):

* ``PUNCTURED`` -- the field u above, with the |x|^(2*alpha) weight explicit;
* ``FULL``      -- u + 2*alpha*log|z|, which absorbs the weight so that
  -laplace(u_full) = exp(u_full) away from the corner.

All evaluation routines are vectorised over numpy arrays of points and are
exact closed forms (no quadrature, no finite differences).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConeParams",
    "BoundaryCurvatures",
    "FamilyParams",
    "Gauge",
    "ScalarField",
    "DomainError",
    "IncompatibleCurvatures",
    "NearIntegerAlphaWarning",
    "halfplane_power",
    "polar_from_complex",
    "eval_u",
    "eval_u_polar",
    "eval_grad_u",
    "eval_laplacian_u",
    "wirtinger_derivatives",
    "z0_from_curvatures",
    "curvatures_from_z0",
]

#: Absolute tolerance for deciding that a cone exponent is an integer.
INTEGER_ALPHA_TOL = 1e-12

#: Below this distance from an integer (but above INTEGER_ALPHA_TOL) the
#: curvature-to-centre map is ill-conditioned and a warning is emitted.
NEAR_INTEGER_ALPHA_TOL = 1e-8

#: Slack allowed on the angular coordinate beyond the closed interval [0, pi].
THETA_TOL = 1e-12


class DomainError(ValueError):
    """A point or parameter lies outside the mathematical domain of an operation."""


class IncompatibleCurvatures(ValueError):
    """Curvature pair violates the parity constraint required at integer cone exponents."""


class NearIntegerAlphaWarning(UserWarning):
    """Cone exponent is so close to an integer that the centre map is ill-conditioned."""


class Gauge(enum.Enum):
    """Gauge in which a scalar field is expressed.

    ``PUNCTURED`` is the original field u with the |x|^(2*alpha) weight kept
    explicit in the equation; ``FULL`` is u + 2*alpha*log|z|, which satisfies
    the unweighted Liouville equation away from the corner at the origin.
    """

    PUNCTURED = "punctured"
    FULL = "full"


@dataclass(frozen=True)
class ConeParams:
    """Cone exponent alpha > -1 and the derived power beta = alpha + 1.

    Parameters
    ----------
    alpha : float
        Exponent of the |x|^(2*alpha) interior weight.  Must be finite and
        strictly greater than -1.
    """

    alpha: float
    beta: float = field(init=False)

    def __post_init__(self) -> None:
        alpha = float(self.alpha)
        if not math.isfinite(alpha) or alpha <= -1.0:
            raise DomainError(f"cone exponent must be finite and > -1, got {alpha!r}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", alpha + 1.0)

    @property
    def is_integer(self) -> bool:
        """True when alpha is an integer up to ``INTEGER_ALPHA_TOL``."""
        return abs(self.alpha - round(self.alpha)) < INTEGER_ALPHA_TOL


@dataclass(frozen=True)
class BoundaryCurvatures:
    """Boundary curvature coefficients on the two boundary rays.

    ``c1`` multiplies |x|^alpha * exp(u/2) in the Neumann condition on the
    positive ray {t = 0, s > 0}; ``c2`` does the same on the negative ray.
    Under the Gauss-curvature normalisation in which the interior curvature of
    the corresponding metric is +1, the geodesic curvature of each boundary
    ray is -c/2 (some conventions quote -c itself).
    """

    c1: float
    c2: float

    def __post_init__(self) -> None:
        for name in ("c1", "c2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"boundary curvature {name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class FamilyParams:
    """Parameters selecting one member of the closed solution family.

    Parameters
    ----------
    cone : ConeParams
        Cone exponent data.
    lam : float
        Scale parameter lam > 0.  The derived ``lam_beta = lam**beta`` is the
        scale of the power-mapped variable w = z**beta and is cached.
    z0 : complex
        Centre s0 + i*t0 of the bubble in the w-plane.
    """

    cone: ConeParams
    lam: float
    z0: complex
    lam_beta: float = field(init=False)

    def __post_init__(self) -> None:
        lam = float(self.lam)
        if not math.isfinite(lam) or lam <= 0.0:
            raise DomainError(f"scale parameter must be finite and > 0, got {lam!r}")
        z0 = complex(self.z0)
        if not (math.isfinite(z0.real) and math.isfinite(z0.imag)):
            raise DomainError(f"centre must be finite, got {z0!r}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "z0", z0)
        object.__setattr__(self, "lam_beta", math.exp(self.cone.beta * math.log(lam)))


@dataclass(frozen=True)
class ScalarField:
    """A scalar field sampled on a polar grid over the upper half-plane.

    Parameters
    ----------
    grid_r : numpy.ndarray
        Strictly increasing radii, all > 0, shape (n_r,).
    grid_theta : numpy.ndarray
        Strictly increasing angles within [0, pi] (endpoints included when the
        field reaches the boundary rays), shape (n_theta,).
    values : numpy.ndarray
        Field samples, shape (n_r, n_theta); ``values[i, j]`` is the value at
        radius ``grid_r[i]`` and angle ``grid_theta[j]``.
    gauge : Gauge
        Gauge in which ``values`` is expressed.
    cone : ConeParams
        Cone exponent the field belongs to (needed to change gauge and to
        interpret residuals).
    """

    grid_r: np.ndarray
    grid_theta: np.ndarray
    values: np.ndarray
    gauge: Gauge
    cone: ConeParams

    def __post_init__(self) -> None:
        r = np.asarray(self.grid_r, dtype=float)
        th = np.asarray(self.grid_theta, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or th.ndim != 1:
            raise DomainError("grid_r and grid_theta must be one-dimensional")
        if np.any(r <= 0.0) or np.any(np.diff(r) <= 0.0):
            raise DomainError("grid_r must be strictly increasing and positive")
        if np.any(np.diff(th) <= 0.0):
            raise DomainError("grid_theta must be strictly increasing")
        if th[0] < -THETA_TOL or th[-1] > math.pi + THETA_TOL:
            raise DomainError("grid_theta must lie within [0, pi]")
        if vals.shape != (r.size, th.size):
            raise DomainError(
                f"values shape {vals.shape} does not match grid ({r.size}, {th.size})"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("field values must be finite")
        object.__setattr__(self, "grid_r", r)
        object.__setattr__(self, "grid_theta", np.clip(th, 0.0, math.pi))
        object.__setattr__(self, "values", vals)

    def to_gauge(self, gauge: Gauge) -> "ScalarField":
        """Return the same field expressed in ``gauge`` (adds/removes 2*alpha*log r)."""
        if gauge is self.gauge:
            return self
        shift = 2.0 * self.cone.alpha * np.log(self.grid_r)[:, None]
        sign = 1.0 if gauge is Gauge.FULL else -1.0
        return ScalarField(self.grid_r, self.grid_theta, self.values + sign * shift,
                           gauge, self.cone)

    def interp(self, r, theta):
        """Bilinear interpolation in (log r, theta).

        Points must lie inside the grid's bounding box (a relative slack of
        1e-9 is allowed, values are clamped); otherwise ``DomainError``.
        """
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        xi = np.log(r)
        xg = np.log(self.grid_r)
        tg = self.grid_theta
        slack_x = 1e-9 * max(1.0, abs(xg[0]), abs(xg[-1]))
        slack_t = 1e-9
        if np.any(xi < xg[0] - slack_x) or np.any(xi > xg[-1] + slack_x):
            raise DomainError("radius outside the sampled grid")
        if np.any(theta < tg[0] - slack_t) or np.any(theta > tg[-1] + slack_t):
            raise DomainError("angle outside the sampled grid")
        xi = np.clip(xi, xg[0], xg[-1])
        th = np.clip(theta, tg[0], tg[-1])
        i = np.clip(np.searchsorted(xg, xi, side="right") - 1, 0, xg.size - 2)
        j = np.clip(np.searchsorted(tg, th, side="right") - 1, 0, tg.size - 2)
        fx = (xi - xg[i]) / (xg[i + 1] - xg[i])
        ft = (th - tg[j]) / (tg[j + 1] - tg[j])
        v = self.values
        out = ((1 - fx) * (1 - ft) * v[i, j]
               + fx * (1 - ft) * v[i + 1, j]
               + (1 - fx) * ft * v[i, j + 1]
               + fx * ft * v[i + 1, j + 1])
        return out


def _scalar_like(value, *inputs):
    """Return a python scalar when every input was 0-dimensional."""
    if all(np.ndim(x) == 0 for x in inputs):
        return np.asarray(value)[()].item()
    return value


def halfplane_power(point, beta: float):
    """Evaluate the half-plane branch of the power map w = z**beta.

    The branch is fixed by polar coordinates with angle theta in [0, pi]:
    for z = r * exp(i*theta) the value is r**beta * exp(i*beta*theta), which
    is continuous on the closed upper half-plane and single-valued for every
    real beta (including non-integer exponents, where no entire branch
    exists).

    Parameters
    ----------
    point : tuple (r, theta)
        Polar coordinates; r >= 0 and theta in [0, pi] (an absolute slack of
        1e-12 beyond the interval is clamped, anything further raises
        ``DomainError``).  Scalars or broadcastable arrays.
    beta : float
        Real exponent.

    Returns
    -------
    complex or numpy.ndarray
        w = r**beta * exp(i * beta * theta).
    """
    r_in, theta_in = point
    r = np.asarray(r_in, dtype=float)
    theta = np.asarray(theta_in, dtype=float)
    beta = float(beta)
    if np.any(r < 0.0):
        raise DomainError("radius must be non-negative")
    if np.any(theta < -THETA_TOL) or np.any(theta > math.pi + THETA_TOL):
        raise DomainError("angle must lie in [0, pi] (tolerance 1e-12)")
    if beta < 0.0 and np.any(r == 0.0):
        raise DomainError("z**beta is unbounded at the origin for beta < 0")
    th = np.clip(theta, 0.0, math.pi)
    if beta == 0.0:
        mag = np.ones_like(r)
    else:
        with np.errstate(divide="ignore"):
            mag = np.exp(beta * np.log(r))  # exp(-inf) = 0 handles r == 0 for beta > 0
    w = mag * (np.cos(beta * th) + 1j * np.sin(beta * th))
    return _scalar_like(w, r_in, theta_in)


def polar_from_complex(z):
    """Split points of the closed upper half-plane into polar coordinates.

    Returns ``(r, theta)`` with theta in [0, pi].  Points with an imaginary
    part below -1e-12 * max(1, |z|) raise ``DomainError``; tiny negative
    imaginary parts (round-off, signed zeros) are clamped onto the boundary
    rays, with theta = 0 on the positive ray and theta = pi on the negative
    ray.
    """
    z_in = z
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    im, re = z.imag, z.real
    if np.any(im < -1e-12 * np.maximum(1.0, r)):
        raise DomainError("point lies outside the closed upper half-plane")
    theta = np.arctan2(np.maximum(im, 0.0), re)  # clamp kills -0.0 -> -pi
    return _scalar_like(r, z_in), _scalar_like(theta, z_in)


def _family_pieces(r, theta, fam: FamilyParams, orders=(0,)):
    """Shared plumbing: w = z**beta and its first two derivatives, and D.

    Returns a dict with keys among {"w", "wp", "wpp", "W", "D"} for the
    requested derivative ``orders`` (0 -> w, 1 -> w', 2 -> w'').
    """
    beta = fam.cone.beta
    out = {}
    w = halfplane_power((r, theta), beta)
    W = np.asarray(w, dtype=complex) - fam.z0
    D = fam.lam_beta**2 + W.real**2 + W.imag**2
    out["w"], out["W"], out["D"] = w, W, D
    if 1 in orders:
        out["wp"] = beta * np.asarray(halfplane_power((r, theta), beta - 1.0), complex)
    if 2 in orders:
        coeff = beta * (beta - 1.0)
        if coeff == 0.0:  # beta == 1: w'' vanishes identically, avoid 0 * z**(-1)
            out["wpp"] = np.zeros_like(W)
        else:
            out["wpp"] = coeff * np.asarray(
                halfplane_power((r, theta), beta - 2.0), complex)
    return out


def eval_u_polar(r, theta, fam: FamilyParams, gauge: Gauge = Gauge.PUNCTURED):
    """Evaluate the family member at polar points (r, theta).

    Closed form: u = log(8*beta^2*Lambda^2) - 2*log(Lambda^2 + |z^beta - z0|^2)
    in the punctured gauge, plus 2*alpha*log r in the full gauge.

    ``DomainError`` is raised for r = 0 in the full gauge when alpha != 0
    (the gauge term diverges at the corner).
    """
    r_in, th_in = r, theta
    r = np.asarray(r, dtype=float)
    alpha, beta = fam.cone.alpha, fam.cone.beta
    if gauge is Gauge.FULL and alpha != 0.0 and np.any(r == 0.0):
        raise DomainError("full-gauge field diverges at the corner for alpha != 0")
    p = _family_pieces(r, theta, fam)
    u = math.log(8.0 * beta * beta * fam.lam_beta**2) - 2.0 * np.log(p["D"])
    if gauge is Gauge.FULL and alpha != 0.0:
        u = u + 2.0 * alpha * np.log(r)
    return _scalar_like(u, r_in, th_in)


def eval_u(z, fam: FamilyParams, gauge: Gauge = Gauge.PUNCTURED):
    """Evaluate the family member at complex points of the closed upper half-plane."""
    r, theta = polar_from_complex(z)
    return eval_u_polar(r, theta, fam, gauge)


def wirtinger_derivatives(z, fam: FamilyParams, gauge: Gauge = Gauge.PUNCTURED):
    """First and second complex derivatives (d/dz, d^2/dz^2) of the member.

    With W = z**beta - z0, D = Lambda^2 + |W|^2 and ' denoting d/dz of the
    power map, the punctured-gauge derivatives are

        u_z  = -2 * conj(W) * w' / D,
        u_zz = -2 * conj(W) * w'' / D + 2 * conj(W)^2 * w'^2 / D^2;

    the full gauge adds alpha/z to u_z and -alpha/z^2 to u_zz.  Requires
    z != 0.

    At z = 0 the derivatives are returned whenever they extend continuously
    (beta >= 1 for u_z, beta = 1 or beta >= 2 for u_zz, punctured gauge);
    otherwise the power factors are genuinely unbounded and ``DomainError``
    is raised.

    Returns
    -------
    (u_z, u_zz) : pair of complex scalars or arrays.
    """
    z_in = z
    r, theta = polar_from_complex(z)
    if gauge is Gauge.FULL and fam.cone.alpha != 0.0 and np.any(np.asarray(r) == 0.0):
        raise DomainError("full-gauge derivatives are singular at the corner z = 0")
    p = _family_pieces(r, theta, fam, orders=(0, 1, 2))
    Wc = np.conj(p["W"])
    D = p["D"]
    uz = -2.0 * Wc * p["wp"] / D
    uzz = -2.0 * Wc * p["wpp"] / D + 2.0 * Wc * Wc * p["wp"] * p["wp"] / (D * D)
    if gauge is Gauge.FULL:
        alpha = fam.cone.alpha
        if alpha != 0.0:
            zc = np.asarray(z, dtype=complex)
            uz = uz + alpha / zc
            uzz = uzz - alpha / (zc * zc)
    return _scalar_like(uz, z_in), _scalar_like(uzz, z_in)


def eval_grad_u(z, fam: FamilyParams, gauge: Gauge = Gauge.PUNCTURED):
    """Cartesian gradient (du/ds, du/dt) of the member.

    Computed from the complex derivative u_z = -2*conj(W)*w'/D (+ alpha/z in
    the full gauge) via du/ds = 2*Re(u_z) and du/dt = -2*Im(u_z).  Defined at
    the corner z = 0 only where the gradient extends continuously (beta >= 1,
    punctured gauge); otherwise ``DomainError``.

    Returns
    -------
    (u_s, u_t) : pair of float scalars or arrays.
    """
    z_in = z
    r, theta = polar_from_complex(z)
    if gauge is Gauge.FULL and fam.cone.alpha != 0.0 and np.any(np.asarray(r) == 0.0):
        raise DomainError("full-gauge gradient is singular at the corner z = 0")
    p = _family_pieces(r, theta, fam, orders=(0, 1))
    uz = -2.0 * np.conj(p["W"]) * p["wp"] / p["D"]
    if gauge is Gauge.FULL and fam.cone.alpha != 0.0:
        uz = uz + fam.cone.alpha / np.asarray(z, dtype=complex)
    uz = np.asarray(uz, dtype=complex)
    return _scalar_like(2.0 * uz.real, z_in), _scalar_like(-2.0 * uz.imag, z_in)


def eval_laplacian_u(z, fam: FamilyParams, gauge: Gauge = Gauge.PUNCTURED):
    """Laplacian of the member at z != 0 (identical in both gauges).

    Closed form: laplace(u) = -8 * Lambda^2 * |w'|^2 / D^2 with
    |w'| = beta * r^(beta-1); the gauge term 2*alpha*log|z| is harmonic away
    from the corner, so the gauge does not change the value.  At the corner
    itself the value is returned when the formula extends continuously
    (beta >= 1), else ``DomainError``.
    """
    z_in = z
    r, theta = polar_from_complex(z)
    p = _family_pieces(r, theta, fam, orders=(0, 1))
    wp2 = p["wp"].real**2 + p["wp"].imag**2
    lap = -8.0 * fam.lam_beta**2 * wp2 / (p["D"] * p["D"])
    return _scalar_like(lap, z_in)


def _parity_sign(alpha: float) -> float:
    """(-1)**alpha for integer alpha."""
    return -1.0 if int(round(alpha)) % 2 else 1.0


def _warn_if_near_integer(alpha: float) -> None:
    dist = abs(alpha - round(alpha))
    if INTEGER_ALPHA_TOL <= dist < NEAR_INTEGER_ALPHA_TOL:
        warnings.warn(
            "cone exponent is within 1e-8 of an integer; the curvature-to-centre "
            "map divides by sin(pi*alpha) and is ill-conditioned here",
            NearIntegerAlphaWarning,
            stacklevel=3,
        )


def z0_from_curvatures(cone: ConeParams, bc: BoundaryCurvatures, lam: float,
                       s0_free: float | None = None) -> FamilyParams:
    """Construct the family member with the given boundary curvatures and scale.

    The imaginary part of the centre is always t0 = c1 * lam**beta / sqrt(2).
    For non-integer alpha the real part is determined:

        s0 = lam**beta * (c1*cos(pi*alpha) - c2) / (sqrt(2) * sin(pi*alpha)).

    For integer alpha the two curvatures must satisfy the parity constraint
    c2 = (-1)**alpha * c1 (tolerance 1e-12, otherwise
    ``IncompatibleCurvatures``), and s0 is a free parameter supplied through
    ``s0_free`` (default 0.0).  Passing ``s0_free`` for non-integer alpha is
    rejected, since s0 is determined there.

    Raises
    ------
    IncompatibleCurvatures
        Integer alpha with c2 != (-1)**alpha * c1.
    DomainError
        Non-positive scale, or ``s0_free`` supplied for non-integer alpha.
    """
    lam = float(lam)
    if not math.isfinite(lam) or lam <= 0.0:
        raise DomainError(f"scale parameter must be finite and > 0, got {lam!r}")
    alpha = cone.alpha
    lam_b = math.exp(cone.beta * math.log(lam))
    t0 = bc.c1 * lam_b / math.sqrt(2.0)
    if cone.is_integer:
        sign = _parity_sign(alpha)
        tol = 1e-12 * max(1.0, abs(bc.c1), abs(bc.c2))
        if abs(bc.c2 - sign * bc.c1) > tol:
            constraint = "c2 = c1" if sign > 0 else "c2 = -c1"
            raise IncompatibleCurvatures(
                f"integer cone exponent alpha = {round(alpha)} imposes the parity "
                f"constraint {constraint}; got c1 = {bc.c1!r}, c2 = {bc.c2!r}"
            )
        s0 = 0.0 if s0_free is None else float(s0_free)
    else:
        if s0_free is not None:
            raise DomainError(
                "s0_free is only meaningful for integer cone exponents; "
                "for non-integer alpha the centre is determined by the curvatures"
            )
        _warn_if_near_integer(alpha)
        s0 = lam_b * (bc.c1 * math.cos(math.pi * alpha) - bc.c2) / (
            math.sqrt(2.0) * math.sin(math.pi * alpha))
    return FamilyParams(cone, lam, complex(s0, t0))


def curvatures_from_z0(fam: FamilyParams) -> BoundaryCurvatures:
    """Boundary curvatures of a family member (inverse of :func:`z0_from_curvatures`).

    c1 = sqrt(2) * t0 / lam**beta always; for integer alpha the parity forces
    c2 = (-1)**alpha * c1, otherwise

        c2 = c1 * cos(pi*alpha) - sqrt(2) * s0 * sin(pi*alpha) / lam**beta.

    The round trip through :func:`z0_from_curvatures` reproduces the centre to
    1e-12 relative accuracy.
    """
    alpha = fam.cone.alpha
    lam_b = fam.lam_beta
    c1 = math.sqrt(2.0) * fam.z0.imag / lam_b
    if fam.cone.is_integer:
        c2 = _parity_sign(alpha) * c1
    else:
        _warn_if_near_integer(alpha)
        c2 = c1 * math.cos(math.pi * alpha) - (
            math.sqrt(2.0) * fam.z0.real * math.sin(math.pi * alpha) / lam_b)
    return BoundaryCurvatures(c1, c2)
