"""Shared fixtures: the acceptance parameter grid and deterministic samples."""

from __future__ import annotations

import math

import numpy as np
import pytest

from liouville_corner import (
    BoundaryCurvatures,
    ConeParams,
    FamilyParams,
    z0_from_curvatures,
)

ALPHAS = (-0.5, 0.0, 0.5, 1.0, 2.3)
LAMBDAS = (0.3, 1.0, 2.0, 5.0)
CURVATURES = (-1.5, -0.5, 0.0, 0.5, 1.5)


def _parity_ok(alpha: float, c1: float, c2: float) -> bool:
    if float(alpha).is_integer():
        return c2 == (c1 if int(alpha) % 2 == 0 else -c1)
    return True


def acceptance_cases():
    """Every admissible (alpha, lambda, c1, c2) of the acceptance grid."""
    cases = []
    for alpha in ALPHAS:
        for lam in LAMBDAS:
            for c1 in CURVATURES:
                for c2 in CURVATURES:
                    if _parity_ok(alpha, c1, c2):
                        cases.append((alpha, lam, c1, c2))
    return cases


def member_for(alpha: float, lam: float, c1: float = 0.0, c2: float = 0.0) -> FamilyParams:
    return z0_from_curvatures(ConeParams(alpha), BoundaryCurvatures(c1, c2), lam)


def sample_points(fam: FamilyParams, n: int = 100, *, margin: float = 0.1):
    """Deterministic interior points scaled to the member's own size.

    Low-discrepancy (golden-ratio lattice) points in (log r, theta), with the
    radial window centered on the member scale so residual magnitudes stay
    representative for every grid case.
    """
    scale = max(1.0, abs(fam.z0)) ** (1.0 / fam.cone.beta)
    k = np.arange(n)
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    frac1 = (k * phi) % 1.0
    frac2 = (k * phi * phi) % 1.0
    radii = scale * np.exp((frac1 - 0.5) * 2.0 * math.log(8.0))
    angles = math.pi * (margin + (1.0 - 2.0 * margin) * frac2)
    return radii * np.exp(1j * angles)


def boundary_points(fam: FamilyParams, n: int = 50):
    """Deterministic abscissae on both rays, scaled to the member."""
    scale = max(1.0, abs(fam.z0)) ** (1.0 / fam.cone.beta)
    k = np.arange(n)
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    mags = scale * np.exp(((k * phi) % 1.0 - 0.5) * 2.0 * math.log(8.0))
    signs = np.where(k % 2 == 0, 1.0, -1.0)
    return signs * mags


@pytest.fixture(scope="session")
def grid_cases():
    return acceptance_cases()


@pytest.fixture(scope="session")
def grid_members(grid_cases):
    return [(case, member_for(*case)) for case in grid_cases]
