"""Nonlinear BVP solver and family fitter on a truncated half-annulus.

The classification says every finite-energy solution of

    -Laplace(u) = |x|^(2*alpha) * exp(u)      in the upper half-plane,
    du/dt = c(x) * |x|^alpha * exp(u/2)       on the two boundary rays,

is a member of the three-parameter closed family.  This module demonstrates
that numerically at desk scale:

* :func:`solve_bvp` solves the BVP on the annulus r_min <= |z| <= r_max with
  Dirichlet data on the two arcs and the nonlinear Neumann condition on the
  rays, by damped Newton under a homotopy that scales the interior source and
  the ray curvatures together from zero to full strength;
* :func:`fit_family` recovers (lambda, z0) from sampled field values by
  damped Gauss-Newton over (ln lambda, s0, t0), realizing the classification
  map: a solved field that fits the family to rounding is, numerically,
  a family member.

Discretization: coordinates (xi, theta) = (ln r, theta) make the interior
equation  u_xixi + u_thth + eps * exp((2+2*alpha)*xi) * exp(u) = 0  on a
uniform rectangle.  Interior rows use a fourth-order compact nine-point
scheme (the two-dimensional Numerov/Mehrstellen operator); ray rows use
one-sided fourth-order stencils for u_theta; arc rows are identity rows
pinning the Dirichlet data.  Each Newton step factors the sparse Jacobian
directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .core import (
    BoundaryCurvatures,
    ConeParams,
    DomainError,
    FamilyParams,
    Gauge,
    ScalarField,
    curvatures_from_z0,
    eval_u_polar,
    halfplane_power,
    polar_from_complex,
)

__all__ = [
    "SolverConfig",
    "FitResult",
    "NoConvergence",
    "IllPosed",
    "NotInFamily",
    "solve_bvp",
    "fit_family",
]


class NoConvergence(ArithmeticError):
    """Newton or Gauss-Newton exhausted its budget or hit the damping floor."""


class IllPosed(ArithmeticError):
    """The linearized operator was numerically singular, or the iteration
    produced non-finite values, at some continuation step."""


class NotInFamily(ValueError):
    """The best least-squares family fit leaves a residual far above rounding,
    so the sampled field is not a member (e.g. wrong cone order declared).

    Carries ``rms_residual`` and the best-fit ``fam`` for diagnosis.
    """

    def __init__(self, message, rms_residual=None, fam=None):
        super().__init__(message)
        self.rms_residual = rms_residual
        self.fam = fam


@dataclass(frozen=True)
class SolverConfig:
    """Grid, domain, and iteration budgets for :func:`solve_bvp`.

    ``damping`` is (initial step, backtracking factor, minimum step); the
    Newton step is scaled down by the factor until the residual sup-norm
    decreases, and hitting the minimum raises :class:`NoConvergence`.
    """

    grid: tuple = (128, 64)
    domain: tuple = (0.05, 20.0)
    newton_tol: float = 1e-10
    max_newton_iters: int = 50
    homotopy_steps: int = 10
    damping: tuple = (1.0, 0.5, 1e-4)

    def __post_init__(self) -> None:
        n_r, n_theta = self.grid
        if not (isinstance(n_r, int) and isinstance(n_theta, int)):
            raise DomainError("grid sizes must be integers")
        if n_r < 8 or n_theta < 8:
            raise DomainError("grid must be at least 8 x 8")
        r_min, r_max = self.domain
        if not (0.0 < r_min < r_max and math.isfinite(r_max)):
            raise DomainError("domain must satisfy 0 < r_min < r_max")
        if not self.newton_tol > 0.0:
            raise DomainError("newton_tol must be positive")
        if self.max_newton_iters < 1 or self.homotopy_steps < 1:
            raise DomainError("iteration budgets must be at least 1")
        init, factor, floor = self.damping
        if not (init > 0.0 and 0.0 < factor < 1.0 and 0.0 < floor <= init):
            raise DomainError("damping must be (initial > 0, factor in (0,1), floor in (0, initial])")


@dataclass(frozen=True)
class FitResult:
    """Outcome of a family fit.

    ``covariance_diag`` holds the diagonal of the Gauss-Newton covariance
    estimate for (ln lambda, s0, t0): residual variance times the inverse
    normal matrix.
    """

    fam: FamilyParams
    rms_residual: float
    iterations: int
    covariance_diag: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rms_residual) and self.rms_residual >= 0.0):
            raise DomainError("rms_residual must be finite and nonnegative")
        if self.iterations < 0:
            raise DomainError("iterations must be nonnegative")

    @property
    def curvatures(self) -> BoundaryCurvatures:
        """Boundary curvatures of the fitted member."""
        return curvatures_from_z0(self.fam)


# ---------------------------------------------------------------------------
# discretization


class _Discretization:
    """Static grid data, stencil pattern, and residual/Jacobian assembly."""

    def __init__(self, cone: ConeParams, bc: BoundaryCurvatures, cfg: SolverConfig):
        self.cone = cone
        self.bc = bc
        n_r, n_th = cfg.grid
        r_min, r_max = cfg.domain
        self.n_r, self.n_th = n_r, n_th
        self.xi = np.linspace(math.log(r_min), math.log(r_max), n_r)
        self.theta = np.linspace(0.0, math.pi, n_th)
        self.r = np.exp(self.xi)
        self.h_xi = self.xi[1] - self.xi[0]
        self.h_th = self.theta[1] - self.theta[0]
        # source weights exp((2+2a)*xi) and ray weights exp((1+a)*xi)
        self.w_src = np.exp((2.0 + 2.0 * cone.alpha) * self.xi)
        self.w_ray = np.exp((1.0 + cone.alpha) * self.xi)
        self._build_pattern()

    # -- static sparse pattern -------------------------------------------
    def _build_pattern(self) -> None:
        n_r, n_th = self.n_r, self.n_th
        h2_xi, h2_th = self.h_xi**2, self.h_th**2
        idx = np.arange(n_r * n_th).reshape(n_r, n_th)

        rows, cols, vals = [], [], []

        def put(r_, c_, v_):
            rows.append(np.asarray(r_).ravel())
            cols.append(np.asarray(c_).ravel())
            vals.append(np.broadcast_to(v_, rows[-1].shape).astype(float).ravel())

        # identity rows on the two arcs
        arc = np.concatenate([idx[0, :], idx[-1, :]])
        put(arc, arc, 1.0)

        # one-sided ray rows, fourth order in theta to match the interior
        rb = idx[1:-1, 0]
        for j, coef in ((0, -25.0), (1, 48.0), (2, -36.0), (3, 16.0), (4, -3.0)):
            put(rb, idx[1:-1, j], coef / (12.0 * self.h_th))
        rt = idx[1:-1, -1]
        for j, coef in ((-1, 25.0), (-2, -48.0), (-3, 36.0), (-4, -16.0), (-5, 3.0)):
            put(rt, idx[1:-1, j], coef / (12.0 * self.h_th))

        # interior nine-point compact operator
        ii, jj = np.meshgrid(np.arange(1, n_r - 1), np.arange(1, n_th - 1), indexing="ij")
        ii, jj = ii.ravel(), jj.ravel()
        rint = idx[ii, jj]
        cross = (h2_xi + h2_th) / 12.0
        a_xi, a_th = 1.0 / h2_xi, 1.0 / h2_th
        a_x = cross / (h2_xi * h2_th)
        for di, dj, coef in (
            (0, 0, -2.0 * a_xi - 2.0 * a_th + 4.0 * a_x),
            (-1, 0, a_xi - 2.0 * a_x), (1, 0, a_xi - 2.0 * a_x),
            (0, -1, a_th - 2.0 * a_x), (0, 1, a_th - 2.0 * a_x),
            (-1, -1, a_x), (-1, 1, a_x), (1, -1, a_x), (1, 1, a_x),
        ):
            put(rint, idx[ii + di, jj + dj], coef)

        self._rows_const = np.concatenate(rows)
        self._cols_const = np.concatenate(cols)
        self._vals_const = np.concatenate(vals)

        # nonlinear pattern: compact averaging of diag(S') on interior rows,
        # plus the exponential terms on the ray-row diagonals
        nl_rows, nl_cols, nl_coef = [], [], []
        for di, dj, coef in (
            (0, 0, 2.0 / 3.0),
            (-1, 0, 1.0 / 12.0), (1, 0, 1.0 / 12.0),
            (0, -1, 1.0 / 12.0), (0, 1, 1.0 / 12.0),
        ):
            nl_rows.append(rint)
            nl_cols.append(idx[ii + di, jj + dj])
            nl_coef.append(np.full(rint.size, coef))
        self._nl_rows = np.concatenate(nl_rows + [rb, rt])
        self._nl_cols = np.concatenate(nl_cols + [rb, rt])
        self._nl_coef = np.concatenate(nl_coef)  # interior part only
        self._n_interior_nl = self._nl_coef.size

    # -- nonlinear source --------------------------------------------------
    def _source(self, u: np.ndarray, eps: float) -> np.ndarray:
        return eps * self.w_src[:, None] * np.exp(u)

    def _ray_terms(self, u: np.ndarray, eps: float):
        """(value, derivative) of the nonlinear ray terms at both rays."""
        e_b = np.exp(0.5 * u[1:-1, 0])
        e_t = np.exp(0.5 * u[1:-1, -1])
        w = self.w_ray[1:-1]
        g_b = eps * self.bc.c1 * w * e_b
        g_t = eps * self.bc.c2 * w * e_t
        return g_b, g_t, 0.5 * g_b, 0.5 * g_t

    # -- residual ---------------------------------------------------------
    def residual(self, u: np.ndarray, eps: float, g_in: np.ndarray,
                 g_out: np.ndarray) -> np.ndarray:
        """Discrete residual on the full grid, shape (n_r, n_theta)."""
        h2_xi, h2_th = self.h_xi**2, self.h_th**2
        cross = (h2_xi + h2_th) / 12.0
        out = np.empty_like(u)

        s = self._source(u, eps)
        d2xi = (u[:-2, 1:-1] - 2.0 * u[1:-1, 1:-1] + u[2:, 1:-1]) / h2_xi
        d2th = (u[1:-1, :-2] - 2.0 * u[1:-1, 1:-1] + u[1:-1, 2:]) / h2_th
        d2d2 = (u[:-2, :-2] - 2.0 * u[:-2, 1:-1] + u[:-2, 2:]
                - 2.0 * u[1:-1, :-2] + 4.0 * u[1:-1, 1:-1] - 2.0 * u[1:-1, 2:]
                + u[2:, :-2] - 2.0 * u[2:, 1:-1] + u[2:, 2:]) / (h2_xi * h2_th)
        avg_s = (2.0 / 3.0) * s[1:-1, 1:-1] + (1.0 / 12.0) * (
            s[:-2, 1:-1] + s[2:, 1:-1] + s[1:-1, :-2] + s[1:-1, 2:])
        out[1:-1, 1:-1] = d2xi + d2th + cross * d2d2 + avg_s

        g_b, g_t, _, _ = self._ray_terms(u, eps)
        out[1:-1, 0] = (-25.0 * u[1:-1, 0] + 48.0 * u[1:-1, 1] - 36.0 * u[1:-1, 2]
                        + 16.0 * u[1:-1, 3] - 3.0 * u[1:-1, 4]) / (12.0 * self.h_th) - g_b
        out[1:-1, -1] = (25.0 * u[1:-1, -1] - 48.0 * u[1:-1, -2] + 36.0 * u[1:-1, -3]
                         - 16.0 * u[1:-1, -4] + 3.0 * u[1:-1, -5]) / (12.0 * self.h_th) + g_t

        out[0, :] = u[0, :] - g_in
        out[-1, :] = u[-1, :] - g_out
        return out

    # -- Jacobian ----------------------------------------------------------
    def jacobian(self, u: np.ndarray, eps: float) -> sp.csc_matrix:
        n = u.size
        s_flat = self._source(u, eps).ravel()
        vals_int = self._nl_coef * s_flat[self._nl_cols[: self._n_interior_nl]]
        _, _, dg_b, dg_t = self._ray_terms(u, eps)
        vals_nl = np.concatenate([vals_int, -dg_b, dg_t])
        mat = sp.coo_matrix(
            (np.concatenate([self._vals_const, vals_nl]),
             (np.concatenate([self._rows_const, self._nl_rows]),
              np.concatenate([self._cols_const, self._nl_cols]))),
            shape=(n, n))
        return mat.tocsc()

    def converged(self, f: np.ndarray, tol: float) -> bool:
        interior = np.abs(f[1:-1, 1:-1]).max()
        rays = max(np.abs(f[1:-1, 0]).max(), np.abs(f[1:-1, -1]).max())
        arcs = max(np.abs(f[0, :]).max(), np.abs(f[-1, :]).max())
        return interior <= tol and arcs <= tol and rays <= 10.0 * tol


def _newton(disc: _Discretization, u: np.ndarray, eps: float,
            g_in: np.ndarray, g_out: np.ndarray, cfg: SolverConfig):
    """Damped Newton at fixed homotopy amplitude; returns (u, history)."""
    init_step, factor, floor = cfg.damping
    history = []
    with np.errstate(over="ignore", invalid="ignore"):
        for iteration in range(cfg.max_newton_iters):
            f = disc.residual(u, eps, g_in, g_out)
            if not np.all(np.isfinite(f)):
                raise IllPosed(f"non-finite residual at homotopy amplitude {eps:g}")
            f_norm = float(np.abs(f).max())
            history.append(f_norm)
            if disc.converged(f, cfg.newton_tol):
                return u, history
            jac = disc.jacobian(u, eps)
            try:
                delta = splu(jac).solve(-f.ravel())
            except RuntimeError as exc:  # exactly singular factorization
                raise IllPosed(
                    f"singular linearized operator at homotopy amplitude {eps:g}") from exc
            if not np.all(np.isfinite(delta)):
                raise IllPosed(
                    f"linear solve produced non-finite step at homotopy amplitude {eps:g}")
            delta = delta.reshape(u.shape)

            step = init_step
            while True:
                trial = u + step * delta
                f_try = disc.residual(trial, eps, g_in, g_out)
                norm_try = float(np.abs(f_try).max()) if np.all(np.isfinite(f_try)) else math.inf
                if norm_try < f_norm:
                    u = trial
                    break
                step *= factor
                if step < floor:
                    raise NoConvergence(
                        f"damping floor {floor:g} hit at homotopy amplitude {eps:g} "
                        f"(residual {f_norm:.3e})")
    raise NoConvergence(
        f"Newton budget {cfg.max_newton_iters} exhausted at homotopy amplitude "
        f"{eps:g} (residual {history[-1]:.3e})")


def _family_seed(disc: _Discretization, g_in: np.ndarray, g_out: np.ndarray):
    """Initial guess from the best family fit of the arc data, or None.

    The nonlinear problem is fold-structured: at full source amplitude a
    small (minimal-branch) solution and the concentrated family solution
    coexist for the same data, and a homotopy grown from zero data tracks
    the minimal branch.  When the arc data itself fits the closed family,
    evaluating that member on the grid seeds Newton inside the basin of the
    concentrated branch — every finite-energy solution lies in that family,
    which is what makes it the right ansatz manifold.  Data far from every
    member returns None.
    """
    theta_int = disc.theta[1:-1]
    z_arcs = np.concatenate([disc.r[0] * np.exp(1j * theta_int),
                             disc.r[-1] * np.exp(1j * theta_int)])
    values = np.concatenate([g_in[1:-1], g_out[1:-1]])
    try:
        fit = fit_family(zip(z_arcs, values), disc.cone)
    except (NotInFamily, NoConvergence, DomainError):
        return None
    rr, tt = np.meshgrid(disc.r, disc.theta, indexing="ij")
    u = np.asarray(eval_u_polar(rr, tt, fit.fam, Gauge.PUNCTURED), dtype=float)
    u[0, :], u[-1, :] = g_in, g_out
    return u


def _dirichlet_arrays(dirichlet, disc: _Discretization):
    """Normalize the arc data argument to two arrays of length n_theta."""
    n_th = disc.n_th
    r_min, r_max = float(disc.r[0]), float(disc.r[-1])
    if dirichlet is None:
        return np.zeros(n_th), np.zeros(n_th)
    if isinstance(dirichlet, FamilyParams):
        g_in = eval_u_polar(np.full(n_th, r_min), disc.theta, dirichlet, Gauge.PUNCTURED)
        g_out = eval_u_polar(np.full(n_th, r_max), disc.theta, dirichlet, Gauge.PUNCTURED)
        return np.asarray(g_in, dtype=float), np.asarray(g_out, dtype=float)
    if callable(dirichlet):
        g_in = np.asarray(dirichlet(r_min, disc.theta), dtype=float)
        g_out = np.asarray(dirichlet(r_max, disc.theta), dtype=float)
    else:
        try:
            inner, outer = dirichlet
        except (TypeError, ValueError) as exc:
            raise DomainError(
                "dirichlet must be None, a FamilyParams, a callable g(r, theta), "
                "or a pair of arrays (inner arc, outer arc)") from exc
        g_in = np.asarray(inner, dtype=float)
        g_out = np.asarray(outer, dtype=float)
    if g_in.shape != (n_th,) or g_out.shape != (n_th,):
        raise DomainError(f"arc data must have shape ({n_th},) matching the grid")
    if not (np.all(np.isfinite(g_in)) and np.all(np.isfinite(g_out))):
        raise DomainError("Dirichlet data must be finite on both arcs")
    return g_in, g_out


def solve_bvp(cone: ConeParams, bc: BoundaryCurvatures, dirichlet,
              cfg: SolverConfig | None = None, *, diagnostics: dict | None = None
              ) -> ScalarField:
    """Solve the nonlinear BVP on the truncated half-annulus.

    Parameters
    ----------
    cone : ConeParams
        Corner order alpha of the interior weight |x|^(2*alpha).
    bc : BoundaryCurvatures
        Ray coefficients (c1 on theta=0, c2 on theta=pi) of the nonlinear
        Neumann condition du/dt = c |x|^alpha exp(u/2).
    dirichlet : None | FamilyParams | callable | (array, array)
        Data on the arcs r = r_min and r = r_max: ``None`` for zero data, a
        family member for verification mode (data evaluated from the closed
        form), a callable ``g(r, theta_array)``, or the two arrays directly.
    cfg : SolverConfig
    diagnostics : dict, optional
        If given, filled with ``epsilon_values``, ``residual_history`` (one
        list of Newton residual sup-norms per homotopy step) and
        ``newton_iterations``.

    Returns
    -------
    ScalarField
        The solved field (gauge PUNCTURED) on the (n_r, n_theta) grid.

    Raises
    ------
    NoConvergence
        Newton budget exhausted or damping floor hit at some homotopy step.
    IllPosed
        Singular linearization or non-finite iterates.

    Notes
    -----
    Branch selection: solutions are not unique — a minimal solution and the
    concentrated (family) solution coexist for the same data.  When the arc
    data admits a family fit, Newton starts at full amplitude from that
    member, landing on the concentrated branch; otherwise a homotopy scales
    the interior source and the ray curvatures together (amplitude eps from
    0 to 1, each solution seeding the next), which tracks the minimal
    continuation branch.  Amplitude 0 is a linear problem solved in one
    Newton step from any initial guess.
    """
    cfg = cfg or SolverConfig()
    disc = _Discretization(cone, bc, cfg)
    g_in, g_out = _dirichlet_arrays(dirichlet, disc)

    seed = _family_seed(disc, g_in, g_out)
    if seed is not None:
        try:
            u, history = _newton(disc, seed, 1.0, g_in, g_out, cfg)
        except (NoConvergence, IllPosed):
            pass  # data fit the family but Newton left its basin: use the ladder
        else:
            if diagnostics is not None:
                diagnostics["seeded"] = True
                diagnostics["epsilon_values"] = [1.0]
                diagnostics["residual_history"] = [history]
                diagnostics["newton_iterations"] = [len(history) - 1]
            return ScalarField(grid_r=disc.r, grid_theta=disc.theta, values=u,
                               gauge=Gauge.PUNCTURED, cone=cone)

    u = np.zeros((disc.n_r, disc.n_th))
    u[0, :], u[-1, :] = g_in, g_out
    eps_values = np.linspace(0.0, 1.0, cfg.homotopy_steps + 1)
    histories = []
    for eps in eps_values:
        u, history = _newton(disc, u, float(eps), g_in, g_out, cfg)
        histories.append(history)
    if diagnostics is not None:
        diagnostics["seeded"] = False
        diagnostics["epsilon_values"] = [float(e) for e in eps_values]
        diagnostics["residual_history"] = histories
        diagnostics["newton_iterations"] = [len(h) - 1 for h in histories]
    return ScalarField(grid_r=disc.r, grid_theta=disc.theta, values=u,
                       gauge=Gauge.PUNCTURED, cone=cone)


# ---------------------------------------------------------------------------
# family fitting


def _validate_samples(samples):
    z_list, u_list = [], []
    for entry in samples:
        try:
            z_val, u_val = entry
        except (TypeError, ValueError) as exc:
            raise DomainError("samples must be (z, value) pairs") from exc
        z_list.append(complex(z_val))
        u_list.append(float(u_val))
    z = np.asarray(z_list)
    u = np.asarray(u_list)
    if z.size < 8:
        raise DomainError("at least 8 samples are required")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(z.real)) and np.all(np.isfinite(z.imag))):
        raise DomainError("samples must be finite")
    if np.any(z.imag <= 0.0):
        raise DomainError("samples must lie in the open upper half-plane")
    # all on one circle (or line) <=> the columns of [ |z|^2, s, t, 1 ] are
    # rank-deficient; normalize columns before the rank test
    design = np.column_stack([np.abs(z) ** 2, z.real, z.imag, np.ones(z.size)])
    design /= np.linalg.norm(design, axis=0)
    sv = np.linalg.svd(design, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise DomainError("samples all lie on one circle; the fit is degenerate")
    return z, u


def _model_and_jacobian(params, w, beta):
    """Family values and d/d(ln lambda, s0, t0) at the sample points."""
    ln_lam, s0, t0 = params
    lam_beta2 = math.exp(2.0 * beta * ln_lam)
    dw = w - (s0 + 1j * t0)
    denom = lam_beta2 + np.abs(dw) ** 2
    values = math.log(8.0 * beta * beta) + 2.0 * beta * ln_lam - 2.0 * np.log(denom)
    jac = np.column_stack([
        beta * (2.0 - 4.0 * lam_beta2 / denom),
        4.0 * dw.real / denom,
        4.0 * dw.imag / denom,
    ])
    return values, jac


def fit_family(samples, cone: ConeParams, *, max_iters: int = 200) -> FitResult:
    """Recover (lambda, z0) from sampled field values by damped Gauss-Newton.

    Minimizes the sum of squared deviations between the samples and the
    closed family over (ln lambda, s0, t0); the log parametrization keeps
    lambda positive.  The fitted member's curvatures are available as
    ``result.curvatures``.

    Parameters
    ----------
    samples : iterable of (z, value) pairs
        At least 8 points in the open upper half-plane, not all on one
        circle; values in gauge PUNCTURED.
    cone : ConeParams
        The declared corner order (held fixed by the fit).

    Raises
    ------
    NotInFamily
        The optimum leaves an rms residual above 1e-3 times the value scale:
        the samples cannot come from a member with this cone order.
    NoConvergence
        Iteration budget exhausted before the step settled.
    """
    z, u = _validate_samples(samples)
    beta = cone.beta
    r, th = polar_from_complex(z)
    w = halfplane_power((r, th), beta)

    # start at the sample peak: the family maximum sits at w = z0 with
    # value log(8 beta^2 / lambda^(2 beta))
    peak = int(np.argmax(u))
    lam_beta2 = 8.0 * beta * beta * math.exp(-float(u[peak]))
    params = np.array([math.log(lam_beta2) / (2.0 * beta),
                       float(w[peak].real), float(w[peak].imag)])

    residual_of = lambda p: u - _model_and_jacobian(p, w, beta)[0]
    res = residual_of(params)
    cost = float(res @ res)
    iterations = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for iterations in range(1, max_iters + 1):
            values, jac = _model_and_jacobian(params, w, beta)
            res = u - values
            delta, *_ = np.linalg.lstsq(jac, res, rcond=None)
            scale = np.max(np.abs(delta) / (1.0 + np.abs(params)))
            if scale <= 1e-13:
                break
            step = 1.0
            while True:
                trial = params + step * delta
                res_try = residual_of(trial)
                cost_try = float(res_try @ res_try) if np.all(np.isfinite(res_try)) else math.inf
                if cost_try < cost:
                    params, cost = trial, cost_try
                    break
                step *= 0.5
                if step < 1e-4:
                    break  # local optimum along this direction
            else:
                continue
            if step < 1e-4:
                break
        else:
            raise NoConvergence(f"fit did not settle within {max_iters} iterations")

    values, jac = _model_and_jacobian(params, w, beta)
    res = u - values
    rms = float(np.sqrt(np.mean(res**2)))
    fam = FamilyParams(cone, math.exp(params[0]), complex(params[1], params[2]))
    value_scale = max(1.0, float(np.ptp(u)))
    if rms > 1e-3 * value_scale:
        raise NotInFamily(
            f"best family fit leaves rms residual {rms:.3e} "
            f"(threshold {1e-3 * value_scale:.3e}); the field is not a member "
            f"for cone order alpha={cone.alpha:g}",
            rms_residual=rms, fam=fam)
    normal = jac.T @ jac
    dof = max(1, z.size - 3)
    try:
        cov = np.linalg.inv(normal)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(normal)
    covariance_diag = (float(res @ res) / dof) * np.diag(cov)
    return FitResult(fam=fam, rms_residual=rms, iterations=iterations,
                     covariance_diag=covariance_diag)
