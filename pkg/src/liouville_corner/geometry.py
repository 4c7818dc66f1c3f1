"""Pointwise conformal-geometry diagnostics for half-plane Liouville fields.

Every operation here is a *check*: it evaluates a quantity that vanishes (or
is exactly known) on the closed solution family and reports the deviation.
The checks are deliberately computed through routes independent of the way the
family is written down:

* PDE and boundary residuals combine the closed-form Laplacian/gradient with
  the exponential of the field itself (or use finite differences of plain
  field values);
* the scalar curvature is assembled as -exp(-u_full) * laplace(u_full) from
  separately computed pieces;
* the projective connection eta = u_zz - u_z**2 / 2 (full gauge) is compared
  against its predicted double pole -alpha*(alpha+2) / (2 z**2);
* the linearising substitution h = exp(-u_full/2) is tested against the
  second-order equation h_zz = alpha*(alpha+2)/(4 z**2) * h with Robin data
  dh/dt = -c/2 on the boundary rays;
* the Kelvin transform and the scale-inversion symmetry are verified as
  pointwise identities.

Finite-difference fallbacks (:func:`wirtinger_derivatives_fd`, the
``FINITE_DIFFERENCE`` residual mode) exist so that each analytic formula can
be cross-examined by a route that knows nothing about it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .core import (
    BoundaryCurvatures,
    ConeParams,
    DomainError,
    FamilyParams,
    Gauge,
    ScalarField,
    curvatures_from_z0,
    eval_grad_u,
    eval_laplacian_u,
    eval_u,
    polar_from_complex,
    wirtinger_derivatives,
)

__all__ = [
    "ResidualMode",
    "ResidualSample",
    "CenterNotAtOrigin",
    "ProjectiveConnectionValue",
    "interior_residual",
    "boundary_residual",
    "scalar_curvature",
    "kelvin_transform",
    "inversion_symmetry_residual",
    "projective_connection",
    "projective_connection_fd",
    "h_system_residuals",
    "wirtinger_derivatives_fd",
    "schwarzian",
    "boundary_geodesic_curvature",
]

_EPS = float(np.finfo(float).eps)

FieldSource = Union[FamilyParams, ScalarField, Callable[[complex], float]]


class ResidualMode(enum.Enum):
    """How a pointwise residual is evaluated.

    ``ANALYTIC`` uses the closed-form derivatives of the family (only
    available when the source is a :class:`FamilyParams`); ``FINITE_DIFFERENCE``
    differentiates plain field values numerically and is available for every
    source kind.
    """

    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite_difference"


class CenterNotAtOrigin(ValueError):
    """The operation requires a family member centred at z0 = 0."""


@dataclass(frozen=True)
class ResidualSample:
    """One pointwise residual evaluation (used by report-generating callers)."""

    point: complex
    value: complex
    mode: ResidualMode

    def __post_init__(self) -> None:
        v = complex(self.value)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise DomainError(f"residual value must be finite, got {v!r}")


@dataclass(frozen=True)
class ProjectiveConnectionValue:
    """Projective connection of a member at one point.

    Attributes
    ----------
    point : complex
        Evaluation point (z != 0).
    eta : complex
        Computed value u_zz - u_z**2/2 in the full gauge.
    expected : complex
        The double-pole prediction -alpha*(alpha+2) / (2*point**2).
    weight_rho : float
        Coefficient of the regular singularity, -alpha*(alpha+2)/2.
    """

    point: complex
    eta: complex
    expected: complex
    weight_rho: float


# ---------------------------------------------------------------------------
# helpers


def _as_callable(source: FieldSource, gauge: Gauge) -> Callable:
    """View any source as a function of a complex point, in the given gauge."""
    if isinstance(source, FamilyParams):
        return lambda z: eval_u(z, source, gauge)
    if isinstance(source, ScalarField):
        fld = source.to_gauge(gauge)

        def _f(z):
            r, th = polar_from_complex(z)
            return fld.interp(r, th)

        return _f
    return source  # plain callable; caller documents its gauge


def _cone_of(source: FieldSource, cone: ConeParams | None) -> ConeParams:
    if isinstance(source, FamilyParams):
        return source.cone
    if isinstance(source, ScalarField):
        return source.cone
    if cone is None:
        raise DomainError("a ConeParams is required when the source is a bare callable")
    return cone


def _fd_laplacian(f: Callable, z: complex, h: float | None = None) -> float:
    """Five-point finite-difference Laplacian of a callable field at z."""
    z = complex(z)
    if h is None:
        h = _EPS ** (1.0 / 3.0) * max(1.0, abs(z))
    if z.imag > 0.0:
        h = min(h, 0.5 * z.imag)  # keep the stencil inside the half-plane
    f0 = f(z)
    return (
        f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4.0 * f0
    ) / (h * h)


def _fd_normal_derivative(f: Callable, s: float, h: float | None = None) -> float:
    """Second-order one-sided d/dt at the boundary point (s, 0), pointing inward."""
    if h is None:
        h = _EPS ** (1.0 / 3.0) * max(1.0, abs(s))
    return (-3.0 * f(complex(s, 0.0)) + 4.0 * f(complex(s, h))
            - f(complex(s, 2.0 * h))) / (2.0 * h)


def _nonuniform_second_diff(x0, x1, x2, f0, f1, f2):
    """Second derivative at x1 from three (possibly unevenly spaced) samples."""
    a, b = x1 - x0, x2 - x1
    return 2.0 * (f0 * b - f1 * (a + b) + f2 * a) / (a * b * (a + b))


def _grid_laplacian(field: ScalarField, i: int, j: int) -> float:
    """Polar-grid Laplacian of a sampled field at an interior node (i, j).

    Uses laplace(u) = exp(-2*xi) * (u_xixi + u_thth) in xi = log r, with
    three-point second differences that tolerate non-uniform grids.
    """
    xg = np.log(field.grid_r)
    tg = field.grid_theta
    v = field.values
    if not (0 < i < xg.size - 1 and 0 < j < tg.size - 1):
        raise DomainError("grid residuals need an interior node")
    u_xx = _nonuniform_second_diff(xg[i - 1], xg[i], xg[i + 1],
                                   v[i - 1, j], v[i, j], v[i + 1, j])
    u_tt = _nonuniform_second_diff(tg[j - 1], tg[j], tg[j + 1],
                                   v[i, j - 1], v[i, j], v[i, j + 1])
    return math.exp(-2.0 * xg[i]) * (u_xx + u_tt)


def _nearest_node(field: ScalarField, z: complex) -> tuple[int, int]:
    r, th = polar_from_complex(z)
    i = int(np.argmin(np.abs(np.log(field.grid_r) - np.log(r))))
    j = int(np.argmin(np.abs(field.grid_theta - th)))
    return i, j


def _curvature_on_ray(bc: BoundaryCurvatures, s: float) -> float:
    return bc.c1 if s > 0 else bc.c2


# ---------------------------------------------------------------------------
# residuals of the defining equations


def interior_residual(z, source: FieldSource, mode: ResidualMode | None = None,
                      *, cone: ConeParams | None = None):
    """Residual laplace(u) + |z|^(2*alpha) * exp(u) of the interior equation.

    Zero (to round-off) exactly when ``source`` solves the interior equation
    in the punctured gauge.

    Parameters
    ----------
    z : complex or array
        Interior points (Im z > 0; for family sources any z != 0 works).
    source : FamilyParams, ScalarField or callable
        Family members support both modes; sampled fields are differenced on
        their own grid at the node nearest to z; callables (punctured-gauge
        values) are differenced in the plane and need ``cone``.
    mode : ResidualMode, optional
        Defaults to ``ANALYTIC`` for family sources, ``FINITE_DIFFERENCE``
        otherwise.  ``ANALYTIC`` is rejected for non-family sources.

    Returns
    -------
    float or ndarray
    """
    z_arr = np.asarray(z, dtype=complex)
    if np.any(z_arr.imag <= 0.0):
        raise DomainError("interior residuals are defined on the open upper half-plane")
    cn = _cone_of(source, cone)
    if isinstance(source, FamilyParams):
        mode = ResidualMode.ANALYTIC if mode is None else mode
        if mode is ResidualMode.ANALYTIC:
            lap = eval_laplacian_u(z, source, Gauge.PUNCTURED)
            u = eval_u(z, source, Gauge.PUNCTURED)
            r, _ = polar_from_complex(z)
            weight = np.exp(2.0 * cn.alpha * np.log(r)) if cn.alpha != 0.0 else 1.0
            return lap + weight * np.exp(u)
        source_f = _as_callable(source, Gauge.PUNCTURED)
    else:
        if mode is ResidualMode.ANALYTIC:
            raise DomainError("ANALYTIC residuals require a FamilyParams source")
        source_f = None

    if isinstance(source, ScalarField):
        fld = source.to_gauge(Gauge.PUNCTURED)
        i, j = _nearest_node(fld, z)
        lap = _grid_laplacian(fld, i, j)
        r = fld.grid_r[i]
        weight = math.exp(2.0 * cn.alpha * math.log(r)) if cn.alpha != 0.0 else 1.0
        return lap + weight * math.exp(fld.values[i, j])

    f = source_f if source_f is not None else source
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(zs.shape, dtype=float)
    for k, zk in enumerate(zs.flat):
        lap = _fd_laplacian(f, zk)
        r = abs(zk)
        weight = math.exp(2.0 * cn.alpha * math.log(r)) if cn.alpha != 0.0 else 1.0
        out.flat[k] = lap + weight * math.exp(float(f(zk)))
    return out[0] if np.ndim(z) == 0 else out


def boundary_residual(s, source: FieldSource, *, bc: BoundaryCurvatures | None = None,
                      cone: ConeParams | None = None):
    """Residual du/dt - c(s) * |s|^alpha * exp(u/2) of the boundary condition.

    ``c(s)`` is ``c1`` on the positive ray and ``c2`` on the negative ray; for
    family sources the curvatures come from :func:`curvatures_from_z0`, other
    sources must pass ``bc``.  Requires s != 0.

    Returns
    -------
    float or ndarray
    """
    cn = _cone_of(source, cone)
    if isinstance(source, FamilyParams):
        curv = curvatures_from_z0(source)
    else:
        if bc is None:
            raise DomainError("boundary curvatures are required for non-family sources")
        curv = bc

    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr == 0.0):
        raise DomainError("the boundary residual is not defined at the corner s = 0")

    if isinstance(source, FamilyParams):
        zb = s_arr.astype(complex)
        _, u_t = eval_grad_u(zb, source, Gauge.PUNCTURED)
        u = eval_u(zb, source, Gauge.PUNCTURED)
        c = np.where(s_arr > 0.0, curv.c1, curv.c2)
        weight = np.abs(s_arr) ** cn.alpha
        res = np.asarray(u_t) - c * weight * np.exp(np.asarray(u) / 2.0)
        return res[0] if np.ndim(s) == 0 else res

    if isinstance(source, ScalarField):
        fld = source.to_gauge(Gauge.PUNCTURED)
        tg = fld.grid_theta
        out = np.empty(s_arr.shape, dtype=float)
        for k, sk in enumerate(s_arr):
            j = 0 if sk > 0 else tg.size - 1
            ray_ok = (abs(tg[0]) <= 1e-9) if sk > 0 else (abs(tg[-1] - math.pi) <= 1e-9)
            if not ray_ok:
                raise DomainError("field grid does not reach the requested boundary ray")
            i = int(np.argmin(np.abs(np.log(fld.grid_r) - math.log(abs(sk)))))
            if not 0 <= i < fld.grid_r.size:
                raise DomainError("boundary point outside the sampled grid")
            # one-sided second-order theta-derivative (the signed step keeps it
            # oriented); then u_t = u_theta / r on theta = 0 and -u_theta / r on
            # theta = pi (t = r sin(theta), so dt/dtheta = r cos(theta) = -r there)
            jj = (0, 1, 2) if sk > 0 else (tg.size - 1, tg.size - 2, tg.size - 3)
            h0, h1 = tg[jj[1]] - tg[jj[0]], tg[jj[2]] - tg[jj[1]]
            if abs(h1 - h0) > 1e-9 * abs(h0):
                raise DomainError("boundary stencil requires locally uniform theta grid")
            d_th = (-3.0 * fld.values[i, jj[0]] + 4.0 * fld.values[i, jj[1]]
                    - fld.values[i, jj[2]]) / (2.0 * h0)
            r = fld.grid_r[i]
            u_t = d_th / r if sk > 0 else -d_th / r
            c = curv.c1 if sk > 0 else curv.c2
            out[k] = u_t - c * abs(sk) ** cn.alpha * math.exp(fld.values[i, j] / 2.0)
        return out[0] if np.ndim(s) == 0 else out

    f = source
    out = np.empty(s_arr.shape, dtype=float)
    for k, sk in enumerate(s_arr):
        u_t = _fd_normal_derivative(f, sk)
        c = curv.c1 if sk > 0 else curv.c2
        out[k] = u_t - c * abs(sk) ** cn.alpha * math.exp(float(f(complex(sk, 0.0))) / 2.0)
    return out[0] if np.ndim(s) == 0 else out


def scalar_curvature(z, source: FieldSource, *, cone: ConeParams | None = None,
                     gauge: Gauge = Gauge.FULL):
    """Scalar curvature -exp(-u_full) * laplace(u_full) of the field's metric.

    Equals 1 identically for family members (the metric exp(u_full)|dz|^2 has
    constant curvature); a constant shift u_full + a scales it by exp(-a).

    For family sources the two factors come from independent closed forms;
    sampled fields are differenced on their grid at the node nearest to z;
    callables are differenced in the plane (``gauge`` declares how to
    interpret their values; punctured-gauge callables need ``cone``).
    """
    if isinstance(source, FamilyParams):
        lap = eval_laplacian_u(z, source, Gauge.FULL)  # gauge-independent value
        u_full = eval_u(z, source, Gauge.FULL)
        return -np.exp(-np.asarray(u_full)) * np.asarray(lap) if np.ndim(z) else \
            -math.exp(-u_full) * lap

    if isinstance(source, ScalarField):
        fld = source.to_gauge(Gauge.FULL)
        i, j = _nearest_node(fld, z)
        lap = _grid_laplacian(fld, i, j)
        return -math.exp(-fld.values[i, j]) * lap

    cn = _cone_of(source, cone) if gauge is Gauge.PUNCTURED else None
    if gauge is Gauge.PUNCTURED:
        f = lambda w: float(source(w)) + 2.0 * cn.alpha * math.log(abs(w))
    else:
        f = source
    lap = _fd_laplacian(f, z)
    return -math.exp(-float(f(complex(z)))) * lap


# ---------------------------------------------------------------------------
# transforms and exact identities


def kelvin_transform(source, grid_r=None, grid_theta=None):
    """Kelvin transform v(x) = u(x / |x|**2) - (4*alpha + 4) * log|x|.

    For a :class:`FamilyParams` the transform closes in the family and the
    transformed *member* is returned: with m = Lambda**2 + |z0|**2 the image
    has Lambda' = Lambda / m and z0' = z0 / m (for z0 = 0 this is the scale
    flip lam' = 1/lam); the boundary curvatures are unchanged.

    For a :class:`ScalarField` the transformed field is returned in the gauge
    of the input.  By default it lives on the inverted radial grid (r -> 1/r,
    reversed to keep radii increasing), where the mapping is a pure index
    reversal and applying the transform twice restores the original field
    exactly.  Passing ``grid_r`` (and optionally ``grid_theta``) instead
    resamples v onto that grid by bilinear interpolation in (log r, theta) —
    inversion is a reflection in log r, so the interpolation error scales
    uniformly; the requested radii must satisfy 1/r inside the source grid.
    """
    if isinstance(source, FamilyParams):
        m = source.lam_beta**2 + abs(source.z0) ** 2
        lam_image = math.exp(math.log(source.lam_beta / m) / source.cone.beta)
        return FamilyParams(source.cone, lam_image, source.z0 / m)

    if isinstance(source, ScalarField):
        fld = source.to_gauge(Gauge.PUNCTURED)
        alpha = fld.cone.alpha
        if grid_r is None:
            r_inv = 1.0 / fld.grid_r[::-1]
            vals = fld.values[::-1, :] - (4.0 * alpha + 4.0) * np.log(r_inv)[:, None]
            out = ScalarField(r_inv, fld.grid_theta, vals, Gauge.PUNCTURED, fld.cone)
            return out.to_gauge(source.gauge)
        r_new = np.asarray(grid_r, dtype=float)
        th_new = fld.grid_theta if grid_theta is None else np.asarray(grid_theta, float)
        R, TH = np.meshgrid(1.0 / r_new, th_new, indexing="ij")
        vals = fld.interp(R, TH) - (4.0 * alpha + 4.0) * np.log(r_new)[:, None]
        out = ScalarField(r_new, th_new, vals, Gauge.PUNCTURED, fld.cone)
        return out.to_gauge(source.gauge)

    raise DomainError("kelvin_transform accepts a FamilyParams or a ScalarField")


def inversion_symmetry_residual(z, fam: FamilyParams):
    """Deviation from the scale-inversion symmetry of centred members.

    For z0 = 0 the member satisfies, with lam0 = lam**(-2),

        u(z) = u(z / (lam0 |z|**2)) + 2*(alpha+1) * log(1 / (lam0 |z|**2))

    at every z != 0; the returned residual is the difference of the two
    sides.  Members with z0 != 0 do not have this symmetry and raise
    :class:`CenterNotAtOrigin`.
    """
    if fam.z0 != 0:
        raise CenterNotAtOrigin(
            f"inversion symmetry requires a centred member, got z0 = {fam.z0!r}")
    z_arr = np.asarray(z, dtype=complex)
    if np.any(z_arr == 0):
        raise DomainError("the inversion is singular at z = 0")
    lam0 = fam.lam ** (-2.0)
    scale = lam0 * (z_arr.real**2 + z_arr.imag**2)
    z_img = z_arr / scale
    res = (np.asarray(eval_u(z_arr, fam, Gauge.PUNCTURED))
           - np.asarray(eval_u(z_img, fam, Gauge.PUNCTURED))
           - 2.0 * (fam.cone.alpha + 1.0) * np.log(1.0 / scale))
    return res if np.ndim(z) else float(np.asarray(res)[()])


def projective_connection(z, fam: FamilyParams) -> ProjectiveConnectionValue:
    """Projective connection eta = u_zz - u_z**2 / 2 of the member (full gauge).

    On the family eta equals -alpha*(alpha+2) / (2 z**2) exactly: a double
    pole at the corner of weight rho = -alpha*(alpha+2)/2 and no other
    singularity.  The returned record carries both the computed and the
    predicted value; their difference is the membership check.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("the projective connection has its pole at z = 0")
    uz, uzz = wirtinger_derivatives(z, fam, Gauge.FULL)
    alpha = fam.cone.alpha
    rho = -alpha * (alpha + 2.0) / 2.0
    return ProjectiveConnectionValue(
        point=z,
        eta=uzz - 0.5 * uz * uz,
        expected=rho / (z * z),
        weight_rho=rho,
    )


def projective_connection_fd(z, fam: FamilyParams,
                             h1: float | None = None,
                             h2: float | None = None) -> complex:
    """Finite-difference route to eta (cross-check for the analytic one).

    Differentiates plain full-gauge field values with
    :func:`wirtinger_derivatives_fd`; useful for validating the analytic
    derivatives and for evaluating eta in other coordinate charts when
    testing the Schwarzian transformation law.
    """
    f = _as_callable(fam, Gauge.FULL)
    uz, uzz = wirtinger_derivatives_fd(f, z, h1=h1, h2=h2)
    return uzz - 0.5 * uz * uz


def h_system_residuals(point, fam: FamilyParams):
    """Residuals of the linearising substitution h = exp(-u_full / 2).

    On the family h satisfies the complex second-order equation

        h_zz = alpha*(alpha+2) / (4 z**2) * h            (interior, z != 0)

    and the Robin condition dh/dt = -c(s)/2 on the boundary rays.  Both
    residuals are computed from the analytic derivatives of u.

    Returns
    -------
    (interior, boundary)
        ``interior`` is the complex residual of the h-equation at ``point``;
        ``boundary`` is the real residual dh/dt + c/2 when ``point`` lies on
        a boundary ray (|Im point| <= 1e-12 * max(1, |point|)), else None.
    """
    z = complex(point)
    if z == 0:
        raise DomainError("the h-system has its singular point at z = 0")
    alpha = fam.cone.alpha
    uz, uzz = wirtinger_derivatives(z, fam, Gauge.FULL)
    u_full = eval_u(z, fam, Gauge.FULL)
    h = math.exp(-0.5 * u_full)
    h_zz = (0.25 * uz * uz - 0.5 * uzz) * h
    interior = h_zz - alpha * (alpha + 2.0) / (4.0 * z * z) * h

    boundary = None
    if abs(z.imag) <= 1e-12 * max(1.0, abs(z)):
        s = z.real
        curv = curvatures_from_z0(fam)
        c = _curvature_on_ray(curv, s)
        u_t = -2.0 * uz.imag  # du/dt from the complex derivative
        h_t = -0.5 * u_t * h
        boundary = h_t + 0.5 * c
    return interior, boundary


# ---------------------------------------------------------------------------
# finite-difference Wirtinger machinery


def wirtinger_derivatives_fd(f: Callable, z, h1: float | None = None,
                             h2: float | None = None):
    """Fourth-order finite-difference (d/dz, d^2/dz^2) of a real-valued field.

    First derivatives use step ``h1`` (default 1e-4 * max(1, |z|)); second
    derivatives use the larger step ``h2`` (default eps**(1/6) * max(1, |z|)
    ~ 2.3e-3), which balances the fourth-order truncation against the
    eps/h**2 round-off floor of second differences — with h = 1e-4 that floor
    sits near 5e-7 and would swamp tolerances of 1e-8.

    The stencil spans |offset| <= 2*max(h1, h2) around z; the caller must keep
    it inside the field's domain.
    """
    z = complex(z)
    scale = max(1.0, abs(z))
    if h1 is None:
        h1 = 1e-4 * scale
    if h2 is None:
        h2 = _EPS ** (1.0 / 6.0) * scale

    # fourth-order first-derivative weights at offsets (-2, -1, 1, 2) * h
    def d1(direction, h):
        return (f(z - 2 * direction * h) - 8 * f(z - direction * h)
                + 8 * f(z + direction * h) - f(z + 2 * direction * h)) / (12.0 * h)

    # fourth-order second-derivative weights at offsets (-2, -1, 0, 1, 2) * h
    def d2(direction, h):
        return (-f(z - 2 * direction * h) + 16 * f(z - direction * h) - 30 * f(z)
                + 16 * f(z + direction * h) - f(z + 2 * direction * h)) / (12.0 * h * h)

    f_s, f_t = d1(1.0, h1), d1(1j, h1)
    f_ss, f_tt = d2(1.0, h2), d2(1j, h2)

    # mixed derivative: tensor product of two fourth-order first-derivative stencils
    offs = (-2.0, -1.0, 1.0, 2.0)
    wts = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)
    f_st = 0.0
    for oi, wi in zip(offs, wts):
        for oj, wj in zip(offs, wts):
            f_st += wi * wj * f(z + oi * h2 + 1j * oj * h2)
    f_st /= h2 * h2

    fz = 0.5 * (f_s - 1j * f_t)
    fzz = 0.25 * (f_ss - f_tt - 2j * f_st)
    return fz, fzz


def schwarzian(fp: complex, fpp: complex, fppp: complex) -> complex:
    """Schwarzian derivative f'''/f' - (3/2)(f''/f')^2 from derivative values.

    This is the cocycle by which a projective connection transforms under a
    holomorphic change of chart: eta_new = eta(T(w)) * T'(w)**2 + {T, w}.
    """
    ratio = fpp / fp
    return fppp / fp - 1.5 * ratio * ratio


def boundary_geodesic_curvature(fam: FamilyParams) -> tuple[float, float]:
    """Geodesic curvature (-c1/2, -c2/2) of the two boundary rays.

    Under the normalisation in which the interior metric exp(u_full)|dz|^2
    has Gauss curvature +1, each boundary ray has constant geodesic curvature
    -c/2.  (Conventions that scale the boundary operator differently quote
    -c itself; only the factor of 2 differs.)
    """
    bc = curvatures_from_z0(fam)
    return (-0.5 * bc.c1, -0.5 * bc.c2)
