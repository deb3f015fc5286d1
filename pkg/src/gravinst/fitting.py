"""Least-squares fits used by the asymptotic checks.

The decay and volume-growth checks reduce to fitting a straight line to
(log x, log y) pairs; the period check fits a single proportionality
constant through the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gravinst.errors import FitDomainError


@dataclass(frozen=True)
class FitResult:
    """Power-law fit log(y) = slope*log(x) + intercept."""

    slope: float
    intercept: float
    rms_residual: float
    point_count: int


def fit_loglog(x, y) -> FitResult:
    """Fit a power law through positive samples by least squares in log-log.

    Requires at least 4 points and strictly positive data; raises
    FitDomainError otherwise.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise FitDomainError("x and y must be 1-d arrays of equal length")
    if x.size < 4:
        raise FitDomainError(f"need at least 4 points for a fit, got {x.size}")
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise FitDomainError("log-log fit needs strictly positive samples")
    lx = np.log(x)
    ly = np.log(y)
    # slope/intercept by the normal equations of the 2-parameter line fit
    mx = lx.mean()
    my = ly.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    if sxx == 0.0:
        raise FitDomainError("all x values coincide")
    slope = float(np.sum((lx - mx) * (ly - my)) / sxx)
    intercept = float(my - slope * mx)
    resid = ly - (slope * lx + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    return FitResult(slope=slope, intercept=intercept, rms_residual=rms, point_count=x.size)


def fit_proportional(x, y) -> tuple[float, float]:
    """Fit y = C*x through the origin.

    Returns (C, residual) where residual = max|y - C*x| / max|y|.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size == 0:
        raise FitDomainError("x and y must be nonempty 1-d arrays of equal length")
    denom = float(np.sum(x * x))
    if denom == 0.0:
        raise FitDomainError("cannot fit a ratio against identically zero x")
    coeff = float(np.sum(x * y) / denom)
    scale = float(np.max(np.abs(y)))
    if scale == 0.0:
        return coeff, 0.0
    resid = float(np.max(np.abs(y - coeff * x)) / scale)
    return coeff, resid
