"""Command-line front end: verify, energy, pohozaev, export, solve, fit.

Every subcommand takes the member parameters as flags (``--alpha``,
``--lambda``, ``--c1``, ``--c2``, ``--s0``) or from a ``key = value`` config
file (``--config``; flags override the file), validates them, and emits a
JSON report (``--out`` or stdout).  ``export`` and ``solve`` write field
grids as CSV with the fixed header ``r,theta,s,t,u,e_u`` in theta-major row
order, every number in shortest round-trip decimal form; ``fit`` reads the
same CSV format back.

Exit codes: 0 all checks passed, 1 at least one check failed (or the fitter
found the field not in the family), 2 invalid parameters or unparseable
input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .core import (
    BoundaryCurvatures,
    ConeParams,
    DomainError,
    FamilyParams,
    Gauge,
    IncompatibleCurvatures,
    curvatures_from_z0,
    eval_u_polar,
    z0_from_curvatures,
)
from .geometry import (
    boundary_residual,
    h_system_residuals,
    interior_residual,
    inversion_symmetry_residual,
    projective_connection,
    scalar_curvature,
)
from .quadrature import (
    NonConvergence,
    QuadratureConfig,
    d_identity,
    pohozaev_residual,
)
from .solver import (
    IllPosed,
    NoConvergence as SolverNoConvergence,
    NotInFamily,
    SolverConfig,
    fit_family,
    solve_bvp,
)

__all__ = ["VerificationReport", "build_parser", "main"]

_CSV_HEADER = ["r", "theta", "s", "t", "u", "e_u"]
_POHOZAEV_RADII = (0.5, 2.0, 5.0, 20.0)


class _CliError(Exception):
    """Internal: carries an exit code and a user-facing message."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class VerificationReport:
    """Structured outcome of the verify subcommand.

    ``checks`` is a list of (name, residual_norm, tolerance, passed); every
    residual is finite and nonnegative and every flag definite.
    """

    params: dict
    checks: list
    d_value: float
    timestamp: str
    tool_version: str

    def __post_init__(self) -> None:
        for name, residual, tolerance, passed in self.checks:
            if not (isinstance(name, str) and name):
                raise DomainError("every check needs a name")
            if not (math.isfinite(residual) and residual >= 0.0):
                raise DomainError(f"check {name!r} has invalid residual {residual!r}")
            if not tolerance > 0.0:
                raise DomainError(f"check {name!r} has non-positive tolerance")
            if not isinstance(passed, bool):
                raise DomainError(f"check {name!r} has no definite pass flag")

    @property
    def all_pass(self) -> bool:
        return all(passed for *_, passed in self.checks)

    def to_document(self) -> dict:
        return {
            "command": "verify",
            "params": self.params,
            "checks": [
                {"name": n, "residual_norm": r, "tolerance": t, "pass": p}
                for n, r, t, p in self.checks
            ],
            "d_value": self.d_value,
            "all_pass": self.all_pass,
            "timestamp": self.timestamp,
            "tool_version": self.tool_version,
        }


# ---------------------------------------------------------------------------
# plumbing


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _emit(document: dict, out_path) -> None:
    text = json.dumps(_jsonable(document), indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _parse_grid(text: str):
    try:
        n_r, n_theta = text.lower().split("x")
        return int(n_r), int(n_theta)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"grid must look like 128x64, got {text!r}") from exc


_CONFIG_CASTS = {
    "alpha": float, "lambda": float, "c1": float, "c2": float, "s0": float,
    "rmin": float, "rmax": float, "tol": float,
    "grid": _parse_grid, "out": str,
}
_CONFIG_DESTS = {"lambda": "lam"}


def _apply_config(args: argparse.Namespace) -> None:
    """Fill flag values that were not given on the command line from the
    key = value config file; command-line flags win."""
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise _CliError(2, f"cannot read config file: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _CliError(2, f"config line {lineno}: expected key = value, got {raw.rstrip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_CASTS:
            raise _CliError(2, f"config line {lineno}: unknown key {key!r}")
        dest = _CONFIG_DESTS.get(key, key)
        if not hasattr(args, dest) or getattr(args, dest) is not None:
            continue  # flag given on the command line, or key not used by this subcommand
        try:
            setattr(args, dest, _CONFIG_CASTS[key](value))
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise _CliError(2, f"config line {lineno}: {exc}")


def _require(args, attr, default=None, what=""):
    value = getattr(args, attr, None)
    if value is None:
        if default is not None:
            return default
        raise _CliError(2, f"{what or attr} is required (flag or config file)")
    return value


def _family_from_args(args):
    """Build (fam, bc) from merged flag values; exit code 2 on bad input."""
    alpha = _require(args, "alpha", what="--alpha")
    lam = _require(args, "lam", default=1.0)
    c1 = _require(args, "c1", default=0.0)
    c2 = _require(args, "c2", default=0.0)
    try:
        cone = ConeParams(alpha)
        bc = BoundaryCurvatures(c1, c2)
        fam = z0_from_curvatures(cone, bc, lam, s0_free=getattr(args, "s0", None))
    except (DomainError, IncompatibleCurvatures) as exc:
        raise _CliError(2, str(exc))
    return fam, bc


def _params_document(fam: FamilyParams, bc: BoundaryCurvatures) -> dict:
    return {
        "alpha": fam.cone.alpha,
        "lambda": fam.lam,
        "z0": [fam.z0.real, fam.z0.imag],
        "c1": bc.c1,
        "c2": bc.c2,
    }


# ---------------------------------------------------------------------------
# verify


def _verify_points(fam: FamilyParams):
    """Deterministic interior points and boundary abscissae for the checks."""
    scale = max(1.0, abs(fam.z0) ** (1.0 / fam.cone.beta))
    radii = scale * np.geomspace(0.25, 4.0, 8)
    angles = np.linspace(0.12 * math.pi, 0.88 * math.pi, 5)
    z = (radii[:, None] * np.exp(1j * angles[None, :])).ravel()
    s_abs = scale * np.geomspace(0.25, 4.0, 8)
    s = np.concatenate([s_abs, -s_abs])
    return z, s


def _cmd_verify(args) -> int:
    fam, bc = _family_from_args(args)
    law_tol = _require(args, "tol", default=1e-8)
    if law_tol <= 0.0:
        raise _CliError(2, "tolerance must be positive")
    z, s = _verify_points(fam)
    checks = []

    def add(name, residual, tolerance):
        residual = float(residual)
        checks.append((name, residual, float(tolerance), bool(residual <= tolerance)))

    add("interior_pde", np.abs(interior_residual(z, fam)).max(), law_tol)
    add("boundary_neumann", np.abs(boundary_residual(s, fam)).max(), law_tol)

    h_int = np.abs([h_system_residuals(p, fam)[0] for p in z]).max()
    h_bnd = np.abs([h_system_residuals(complex(p, 0.0), fam)[1] for p in s]).max()
    add("h_system_interior", h_int, law_tol)
    add("h_system_boundary", h_bnd, law_tol)

    eta_dev = max(abs(pc.eta - pc.expected)
                  for pc in (projective_connection(p, fam) for p in z))
    add("projective_connection", eta_dev, law_tol)
    add("scalar_curvature", np.abs(scalar_curvature(z, fam) - 1.0).max(), 1e-9)
    if fam.z0 == 0:
        add("inversion_symmetry", np.abs(inversion_symmetry_residual(z, fam)).max(), 1e-11)

    report = d_identity(fam)
    expected_d = 4.0 + 4.0 * fam.cone.alpha
    add("d_identity", abs(report.d_value - expected_d), 1e-6 * expected_d)
    add("d_lower_bound", max(0.0, (2.0 + 2.0 * fam.cone.alpha) - report.d_value), 1e-9)
    for radius in _POHOZAEV_RADII:
        _, _, residual = pohozaev_residual(fam, radius)
        add(f"pohozaev_R{radius:g}", residual, 1e-6)

    doc = VerificationReport(
        params=_params_document(fam, bc),
        checks=checks,
        d_value=float(report.d_value),
        timestamp=_timestamp(),
        tool_version=__version__,
    )
    _emit(doc.to_document(), getattr(args, "out", None))
    return 0 if doc.all_pass else 1


# ---------------------------------------------------------------------------
# energy / pohozaev


def _cmd_energy(args) -> int:
    fam, bc = _family_from_args(args)
    rel_tol = _require(args, "tol", default=1e-8)
    if rel_tol <= 0.0:
        raise _CliError(2, "tolerance must be positive")
    try:
        report = d_identity(fam, QuadratureConfig(rel_tol=rel_tol))
    except NonConvergence as exc:
        sys.stderr.write(f"energy quadrature did not converge: {exc}\n")
        return 1
    _emit({
        "command": "energy",
        "params": _params_document(fam, bc),
        "area_integral": report.area_integral,
        "boundary_integral_weighted": report.boundary_integral_weighted,
        "boundary_integral_abs": report.boundary_integral_abs,
        "d_value": report.d_value,
        "expected_d": 4.0 + 4.0 * fam.cone.alpha,
        "error_estimate": report.error_estimate,
        "timestamp": _timestamp(),
        "tool_version": __version__,
    }, getattr(args, "out", None))
    return 0


def _cmd_pohozaev(args) -> int:
    fam, bc = _family_from_args(args)
    tol = _require(args, "tol", default=1e-6)
    if tol <= 0.0:
        raise _CliError(2, "tolerance must be positive")
    entries = []
    for radius in _POHOZAEV_RADII:
        lhs, rhs, residual = pohozaev_residual(fam, radius)
        entries.append({"radius": radius, "lhs": lhs, "rhs": rhs,
                        "residual": residual, "pass": bool(residual <= tol)})
    _emit({
        "command": "pohozaev",
        "params": _params_document(fam, bc),
        "tolerance": tol,
        "identity": entries,
        "timestamp": _timestamp(),
        "tool_version": __version__,
    }, getattr(args, "out", None))
    return 0 if all(e["pass"] for e in entries) else 1


# ---------------------------------------------------------------------------
# export / solve / fit


def _format_cell(value: float) -> str:
    return repr(float(value))


def _write_field_csv(out_path, radii, thetas, values):
    """CSV rows in theta-major order (theta outer loop, r inner)."""
    lines = [",".join(_CSV_HEADER)]
    for j, theta in enumerate(thetas):
        for i, r in enumerate(radii):
            u = values[i, j]
            lines.append(",".join(_format_cell(v) for v in (
                r, theta, r * math.cos(theta), r * math.sin(theta), u, math.exp(u))))
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _export_grid(args):
    n_r, n_theta = _require(args, "grid", default=(64, 33))
    if n_r < 2 or n_theta < 2:
        raise _CliError(2, "export grid must be at least 2x2")
    r_min = _require(args, "rmin", default=0.1)
    r_max = _require(args, "rmax", default=10.0)
    if not (0.0 < r_min < r_max and math.isfinite(r_max)):
        raise _CliError(2, "need 0 < rmin < rmax")
    radii = np.geomspace(r_min, r_max, n_r)
    thetas = np.linspace(0.0, math.pi, n_theta)
    return radii, thetas


def _cmd_export(args) -> int:
    fam, _ = _family_from_args(args)
    radii, thetas = _export_grid(args)
    rr, tt = np.meshgrid(radii, thetas, indexing="ij")
    values = np.asarray(eval_u_polar(rr, tt, fam, Gauge.PUNCTURED), dtype=float)
    try:
        _write_field_csv(getattr(args, "out", None), radii, thetas, values)
    except OSError as exc:
        sys.stderr.write(f"cannot write grid: {exc}\n")
        return 1
    return 0


def _cmd_solve(args) -> int:
    fam, bc = _family_from_args(args)
    grid = _require(args, "grid", default=(128, 64))
    r_min = _require(args, "rmin", default=0.05)
    r_max = _require(args, "rmax", default=20.0)
    newton_tol = _require(args, "tol", default=1e-10)
    try:
        cfg = SolverConfig(grid=grid, domain=(r_min, r_max), newton_tol=newton_tol)
    except DomainError as exc:
        raise _CliError(2, str(exc))
    diagnostics = {}
    try:
        field = solve_bvp(fam.cone, bc, fam, cfg, diagnostics=diagnostics)
    except (SolverNoConvergence, IllPosed) as exc:
        sys.stderr.write(f"solve failed: {exc}\n")
        return 1
    rr, tt = np.meshgrid(field.grid_r, field.grid_theta, indexing="ij")
    exact = np.asarray(eval_u_polar(rr, tt, fam, Gauge.PUNCTURED), dtype=float)
    sup_error = float(np.abs(field.values - exact).max())
    out = getattr(args, "out", None)
    if out:
        try:
            _write_field_csv(out, field.grid_r, field.grid_theta, field.values)
        except OSError as exc:
            sys.stderr.write(f"cannot write field: {exc}\n")
            return 1
    _emit({
        "command": "solve",
        "params": _params_document(fam, bc),
        "grid": list(grid),
        "domain": [r_min, r_max],
        "sup_error": sup_error,
        "seeded": diagnostics.get("seeded"),
        "newton_iterations": diagnostics.get("newton_iterations"),
        "field_csv": out or None,
        "timestamp": _timestamp(),
        "tool_version": __version__,
    }, None)
    return 0


def _read_field_csv(path):
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            missing = [c for c in ("s", "t", "u") if c not in header]
            if missing:
                raise _CliError(2, f"cannot parse {path}: missing column(s) "
                                   f"{', '.join(missing)} in header {header}")
            samples = []
            for lineno, row in enumerate(reader, start=2):
                try:
                    s_val = float(row["s"])
                    t_val = float(row["t"])
                    u_val = float(row["u"])
                except (TypeError, ValueError) as exc:
                    raise _CliError(2, f"cannot parse {path} line {lineno}: {exc}")
                if t_val > 0.0:
                    samples.append((complex(s_val, t_val), u_val))
    except OSError as exc:
        raise _CliError(2, f"cannot read field file: {exc}")
    return samples


def _cmd_fit(args) -> int:
    alpha = _require(args, "alpha", what="--alpha")
    try:
        cone = ConeParams(alpha)
    except DomainError as exc:
        raise _CliError(2, str(exc))
    samples = _read_field_csv(args.field_csv)
    try:
        result = fit_family(samples, cone)
    except DomainError as exc:
        raise _CliError(2, str(exc))
    except NotInFamily as exc:
        _emit({
            "command": "fit",
            "alpha": cone.alpha,
            "in_family": False,
            "rms_residual": exc.rms_residual,
            "message": str(exc),
            "timestamp": _timestamp(),
            "tool_version": __version__,
        }, getattr(args, "out", None))
        return 1
    except SolverNoConvergence as exc:
        sys.stderr.write(f"fit failed: {exc}\n")
        return 1
    bc = result.curvatures
    _emit({
        "command": "fit",
        "in_family": True,
        "params": _params_document(result.fam, bc),
        "rms_residual": result.rms_residual,
        "iterations": result.iterations,
        "covariance_diag": result.covariance_diag,
        "samples_used": len(samples),
        "timestamp": _timestamp(),
        "tool_version": __version__,
    }, getattr(args, "out", None))
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_member_flags(sub):
    sub.add_argument("--alpha", type=float, default=None,
                     help="cone exponent alpha > -1 of the weight |x|^(2 alpha)")
    sub.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="scale parameter lambda > 0 (default 1)")
    sub.add_argument("--c1", type=float, default=None,
                     help="curvature coefficient on the ray theta=0 (default 0)")
    sub.add_argument("--c2", type=float, default=None,
                     help="curvature coefficient on the ray theta=pi (default 0)")
    sub.add_argument("--s0", type=float, default=None,
                     help="free centre abscissa, integer alpha only (default 0)")


def _add_common_flags(sub, tol_help):
    sub.add_argument("--out", type=str, default=None, help="output file path (default stdout)")
    sub.add_argument("--config", type=str, default=None,
                     help="key = value config file; flags override it")
    sub.add_argument("--tol", type=float, default=None, help=tol_help)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liouville-corner",
        description="Verify, integrate, solve, and fit half-plane Liouville "
                    "fields with a conical corner.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("verify", help="run the full residual/identity check suite")
    _add_member_flags(p)
    _add_common_flags(p, "pass tolerance for the analytic residual checks (default 1e-8)")
    p.set_defaults(func=_cmd_verify)

    p = subs.add_parser("energy", help="interior/boundary energies and the d identity")
    _add_member_flags(p)
    _add_common_flags(p, "relative tolerance for the quadrature (default 1e-8)")
    p.set_defaults(func=_cmd_energy)

    p = subs.add_parser("pohozaev", help="finite-radius Pohozaev identity at R in {0.5, 2, 5, 20}")
    _add_member_flags(p)
    _add_common_flags(p, "pass tolerance on the normalized residual (default 1e-6)")
    p.set_defaults(func=_cmd_pohozaev)

    p = subs.add_parser("export", help="write a member field as CSV (r,theta,s,t,u,e_u)")
    _add_member_flags(p)
    p.add_argument("--grid", type=_parse_grid, default=None,
                   help="NRxNT sample counts (default 64x33); radii geometric, angles uniform")
    p.add_argument("--rmin", type=float, default=None, help="smallest radius (default 0.1)")
    p.add_argument("--rmax", type=float, default=None, help="largest radius (default 10)")
    _add_common_flags(p, "(unused for export)")
    p.set_defaults(func=_cmd_export)

    p = subs.add_parser("solve", help="solve the BVP with arc data from the member (verification mode)")
    _add_member_flags(p)
    p.add_argument("--grid", type=_parse_grid, default=None,
                   help="NRxNT grid (default 128x64)")
    p.add_argument("--rmin", type=float, default=None, help="inner arc radius (default 0.05)")
    p.add_argument("--rmax", type=float, default=None, help="outer arc radius (default 20)")
    _add_common_flags(p, "Newton residual tolerance (default 1e-10)")
    p.set_defaults(func=_cmd_solve)

    p = subs.add_parser("fit", help="recover (lambda, z0) from a CSV field")
    p.add_argument("field_csv", type=str, help="CSV field with columns s,t,u; boundary rows are skipped")
    p.add_argument("--alpha", type=float, default=None, help="declared cone exponent")
    _add_common_flags(p, "(unused for fit)")
    p.set_defaults(func=_cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        return args.func(args)
    except _CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
