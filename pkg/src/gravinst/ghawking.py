"""Multi-center circle-fibered (Gibbons-Hawking) metrics.

On R^3 with coordinates x = (b, a1, a2) = (b, Re a, Im a), the harmonic
potential of a center list {x_i} is

    V = 1/2 sum_i 1/|x - x_i|          (ale, akl)
    V = 1 + 1/2 sum_i 1/|x - x_i|      (alf)

and the metric on the circle bundle over the complement of the centers is

    g = V^{-1} (dtheta + alpha)^2 + V (db^2 + da1^2 + da2^2),

where the connection 1-form alpha satisfies d alpha = *dV (orientation
db ^ da1 ^ da2) and is realized in the gauge

    alpha = sum_i 1/2 ((b - b_i)/Delta_i - 1) dphi_i,

singular only on the downward ray below each center (its Dirac string);
the opposite gauge, with +1, moves the string above.  det g = V^2 exactly.

The compatible integrable complex structure maps the orthonormal frame

    e0 = V^(1/2) d/dtheta,   e1 = V^(-1/2)(d/db  - alpha_b  d/dtheta),
    e2 = V^(-1/2)(d/da1 - alpha_1 d/dtheta),
    e3 = V^(-1/2)(d/da2 - alpha_2 d/dtheta)

by J e0 = e1 and J e3 = e2.  The in-plane orientation (e3 -> e2, not
e2 -> e3) is forced: with d alpha = +*dV it is the choice that makes the
associated 2-form

    omega = (dtheta + alpha) ^ db - V da1 ^ da2

closed, and the only one with vanishing Nijenhuis tensor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from gravinst import tensorcalc
from gravinst.errors import (
    DiracStringError,
    FitDomainError,
    PathBlockedError,
    PoleError,
)
from gravinst.fitting import FitResult, fit_loglog
from gravinst.quadrature import adaptive_simpson
from gravinst.singularities import CenterConfiguration, GroupElement
from gravinst.tensorcalc import ChartPoint, MetricSample, TwoFormSample
from gravinst.tensorcalc import ComplexStructureSample

CHART_ID = "gh-theta-b-a"


@dataclass(frozen=True)
class GHPoint:
    """Chart point (theta, b, a) of the circle-fibered coordinates."""

    theta: float
    b: float
    a: complex

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "a", complex(self.a))


@dataclass(frozen=True)
class PotentialValue:
    V: float
    gradV: np.ndarray  # d/d(b, a1, a2)


@dataclass(frozen=True)
class ConnectionValue:
    alpha: np.ndarray  # components on (db, da1, da2); the dtheta slot is 0


def chart_point(p: GHPoint) -> ChartPoint:
    return ChartPoint((p.theta, p.b, p.a.real, p.a.imag), CHART_ID)


def point_from_chart(cp: ChartPoint) -> GHPoint:
    if cp.chart_id != CHART_ID:
        raise ValueError(f"expected chart {CHART_ID!r}, got {cp.chart_id!r}")
    c = cp.coords
    return GHPoint(theta=c[0], b=c[1], a=complex(c[2], c[3]))


def _mode_of(config: CenterConfiguration, mode: str | None) -> str:
    if mode is None:
        return config.mode
    if mode not in ("ale", "alf", "akl"):
        raise ValueError(f"unknown mode {mode!r}")
    return mode


def potential_at(
    config: CenterConfiguration, b: float, a: complex, mode: str | None = None
) -> PotentialValue:
    """Harmonic potential and its gradient at the base point (b, a)."""
    mode = _mode_of(config, mode)
    x = np.array([b, a.real, a.imag])
    total = 1.0 if mode == "alf" else 0.0
    grad = np.zeros(3)
    for c in config.centers:
        dx = x - c.as_r3()
        dist = float(np.linalg.norm(dx))
        if dist == 0.0:
            raise PoleError("potential evaluated at a center")
        total += 0.5 / dist
        grad -= 0.5 * (dx / dist) / dist**2
    return PotentialValue(V=total, gradV=grad)


def _normalize_gauges(config: CenterConfiguration, gauges) -> list[str]:
    if gauges is None:
        return ["down"] * config.k
    if isinstance(gauges, str):
        gauges = [gauges] * config.k
    gauges = list(gauges)
    if len(gauges) != config.k or any(g not in ("down", "up") for g in gauges):
        raise ValueError("gauges must be 'down'/'up', one per center")
    return gauges


def connection_at(
    config: CenterConfiguration, b: float, a: complex, gauges=None
) -> ConnectionValue:
    """Connection 1-form alpha with d alpha = *dV.

    Per-center gauge 'down' places the Dirac string on the ray below the
    center (the default), 'up' above it.  On the axis through a center the
    regular-side value 0 is used; evaluation on a string raises.
    """
    gauges = _normalize_gauges(config, gauges)
    alpha = np.zeros(3)
    for c, gauge in zip(config.centers, gauges):
        w = a - c.a
        u = b - c.b
        r = abs(w)
        delta = math.hypot(u, r)
        if delta == 0.0:
            raise PoleError("connection evaluated at a center")
        sign = -1.0 if gauge == "down" else 1.0
        if r == 0.0:
            on_regular_side = u > 0.0 if gauge == "down" else u < 0.0
            if on_regular_side:
                continue  # the term extends by zero through the axis
            raise DiracStringError(
                f"evaluation on the {gauge} Dirac string of a center"
            )
        coeff = 0.5 * (u / delta + sign)
        alpha[1] += coeff * (-w.imag) / (r * r)
        alpha[2] += coeff * w.real / (r * r)
    return ConnectionValue(alpha=alpha)


def metric_at(
    config: CenterConfiguration,
    p: GHPoint,
    mode: str | None = None,
    gauges=None,
    potential_transform: Callable[[float], float] | None = None,
) -> MetricSample:
    """Metric sample at a chart point; det g = V^2 identically.

    potential_transform deliberately replaces V by f(V) while keeping the
    connection of the true V; it exists so verification negative controls
    can break Ricci-flatness in a controlled way.
    """
    V = potential_at(config, p.b, p.a, mode).V
    if potential_transform is not None:
        V = float(potential_transform(V))
    alpha = connection_at(config, p.b, p.a, gauges).alpha
    u = np.array([1.0, alpha[0], alpha[1], alpha[2]])
    g = np.outer(u, u) / V
    g[1, 1] += V
    g[2, 2] += V
    g[3, 3] += V
    return MetricSample(g=g, point=chart_point(p))


def _frame_matrices(V: float, alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Columns of E are the orthonormal frame vectors in coordinate
    components; rows of Einv are the dual coframe."""
    s = math.sqrt(V)
    E = np.array(
        [
            [s, -alpha[0] / s, -alpha[1] / s, -alpha[2] / s],
            [0.0, 1.0 / s, 0.0, 0.0],
            [0.0, 0.0, 1.0 / s, 0.0],
            [0.0, 0.0, 0.0, 1.0 / s],
        ]
    )
    Einv = np.array(
        [
            [1.0 / s, alpha[0] / s, alpha[1] / s, alpha[2] / s],
            [0.0, s, 0.0, 0.0],
            [0.0, 0.0, s, 0.0],
            [0.0, 0.0, 0.0, s],
        ]
    )
    return E, Einv


# frame action of J: e0 -> e1, e1 -> -e0, e3 -> e2, e2 -> -e3
_J_FRAME = np.array(
    [
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
)


def complex_structure_at(
    config: CenterConfiguration, p: GHPoint, mode: str | None = None, gauges=None
) -> ComplexStructureSample:
    """Integrable complex structure in coordinate components."""
    V = potential_at(config, p.b, p.a, mode).V
    alpha = connection_at(config, p.b, p.a, gauges).alpha
    E, Einv = _frame_matrices(V, alpha)
    return ComplexStructureSample(J=E @ _J_FRAME @ Einv, point=chart_point(p))


def kahler_form_at(
    config: CenterConfiguration, p: GHPoint, mode: str | None = None, gauges=None
) -> TwoFormSample:
    """Kahler form omega = (dtheta + alpha) ^ db - V da1 ^ da2 = g(J ., .)."""
    V = potential_at(config, p.b, p.a, mode).V
    alpha = connection_at(config, p.b, p.a, gauges).alpha
    u = np.array([1.0, alpha[0], alpha[1], alpha[2]])
    eb = np.array([0.0, 1.0, 0.0, 0.0])
    e2 = np.array([0.0, 0.0, 1.0, 0.0])
    e3 = np.array([0.0, 0.0, 0.0, 1.0])
    omega = (
        np.outer(u, eb)
        - np.outer(eb, u)
        - V * (np.outer(e2, e3) - np.outer(e3, e2))
    )
    return TwoFormSample(omega=omega, point=chart_point(p))


def metric_field(
    config: CenterConfiguration,
    mode: str | None = None,
    gauges=None,
    potential_transform: Callable[[float], float] | None = None,
):
    def field(cp: ChartPoint) -> MetricSample:
        return metric_at(
            config,
            point_from_chart(cp),
            mode=mode,
            gauges=gauges,
            potential_transform=potential_transform,
        )

    return field


def kahler_field(config: CenterConfiguration, mode: str | None = None, gauges=None):
    def field(cp: ChartPoint) -> TwoFormSample:
        return kahler_form_at(config, point_from_chart(cp), mode=mode, gauges=gauges)

    return field


def complex_structure_field(
    config: CenterConfiguration, mode: str | None = None, gauges=None
):
    def field(cp: ChartPoint) -> ComplexStructureSample:
        return complex_structure_at(
            config, point_from_chart(cp), mode=mode, gauges=gauges
        )

    return field


def action_jacobian(gel: GroupElement) -> np.ndarray:
    """Differential of the cyclic action on (theta, b, a1, a2): the theta
    shift is a translation, the plane rotates by -2 pi m ell / n."""
    ang = -2.0 * math.pi * gel.signature.m * gel.ell / gel.signature.n
    c, s = math.cos(ang), math.sin(ang)
    out = np.eye(4)
    out[2, 2] = c
    out[2, 3] = -s
    out[3, 2] = s
    out[3, 3] = c
    return out


def string_clearance(config: CenterConfiguration, b: float, a: complex) -> float:
    """Distance from the base point to the nearest default-gauge Dirac
    string (the downward rays below the centers)."""
    best = math.inf
    for c in config.centers:
        horiz = abs(a - c.a)
        if b <= c.b:
            best = min(best, horiz)
        else:
            best = min(best, math.hypot(horiz, b - c.b))
    return best


def center_clearance(config: CenterConfiguration, b: float, a: complex) -> float:
    x = np.array([b, a.real, a.imag])
    return float(min(np.linalg.norm(x - c.as_r3()) for c in config.centers))


def _segment_gauges(config: CenterConfiguration, i: int, j: int) -> list[str]:
    """Choose a per-center gauge whose strings avoid the open segment from
    center i to center j; raise PathBlockedError if a third center (or an
    unavoidable string) blocks it."""
    ci, cj = config.centers[i], config.centers[j]
    wa = cj.a - ci.a
    scale = max(1.0, config.extent())
    tol = 1e-9 * scale
    b_lo, b_hi = min(ci.b, cj.b), max(ci.b, cj.b)
    gauges = ["down"] * config.k
    for idx, c in enumerate(config.centers):
        if abs(wa) <= tol:
            # vertical segment along the line a = a_i
            if abs(c.a - ci.a) > tol:
                continue
            if idx not in (i, j) and b_lo + tol < c.b < b_hi - tol:
                raise PathBlockedError("segment passes through a third center")
            if c.b >= b_hi - tol:
                gauges[idx] = "up"
            # c.b <= b_lo: default 'down' string stays below the segment
            continue
        # projection of a_idx on the a-track of the segment
        t = (
            (c.a.real - ci.a.real) * wa.real + (c.a.imag - ci.a.imag) * wa.imag
        ) / abs(wa) ** 2
        t = min(1.0, max(0.0, t))
        a_near = ci.a + t * wa
        if abs(a_near - c.a) > tol:
            continue
        b_at = ci.b + t * (cj.b - ci.b)
        if idx in (i, j):
            continue  # endpoint cone points, not obstructions
        if abs(b_at - c.b) <= tol:
            raise PathBlockedError("segment passes through a third center")
        if b_at < c.b:
            gauges[idx] = "up"
    return gauges


def cycle_period(
    config: CenterConfiguration,
    i: int,
    j: int,
    mode: str | None = None,
    theta_samples: int = 8,
    rel_tol: float = 1e-9,
) -> float:
    """Integral of the Kahler form over the circle-fibered 2-cycle above
    the segment from center i to center j.

    The surface is parametrized by (t, theta); the fiber collapses at the
    endpoints.  Strings of all centers are moved off the segment by a
    per-center gauge choice, which changes alpha by an exact form and so
    leaves the period unchanged.
    """
    if i == j or not (0 <= i < config.k and 0 <= j < config.k):
        raise ValueError("period needs two distinct center indices")
    gauges = _segment_gauges(config, i, j)
    ci, cj = config.centers[i], config.centers[j]
    db = cj.b - ci.b
    da = cj.a - ci.a
    thetas = np.linspace(0.0, 2.0 * math.pi, theta_samples, endpoint=False)
    tangent = np.array([0.0, db, da.real, da.imag])
    theta_dir = np.array([1.0, 0.0, 0.0, 0.0])

    def integrand(t: float) -> float:
        b = ci.b + t * db
        a = ci.a + t * da
        acc = 0.0
        for th in thetas:
            w = kahler_form_at(
                config, GHPoint(theta=float(th), b=b, a=a), mode=mode, gauges=gauges
            ).omega
            acc += float(tangent @ w @ theta_dir)
        return acc / theta_samples

    eps = 1e-9
    value = adaptive_simpson(integrand, eps, 1.0 - eps, rel_tol=rel_tol)
    return 2.0 * math.pi * value


def _split_radii(config: CenterConfiguration, R: float) -> list[float]:
    cuts = sorted({float(np.linalg.norm(c.as_r3())) for c in config.centers})
    out = [0.0]
    for r in cuts:
        if 1e-12 < r < R * (1.0 - 1e-12):
            out.append(r)
    out.append(R)
    return out


def coordinate_ball_volume(
    config: CenterConfiguration, R: float, mode: str | None = None
) -> float:
    """Riemannian volume of the theta-bundle over the coordinate ball
    |x| <= R, i.e. 2 pi int_{B_R} V d^3x (the volume density is exactly V).

    The angular average of each 1/|x - x_i| over the sphere of radius r is
    1/max(r, |x_i|) (mean-value property of harmonic functions), so the
    volume reduces to a radial integral, done piecewise by adaptive
    quadrature between the kink radii.
    """
    mode = _mode_of(config, mode)
    norms = [float(np.linalg.norm(c.as_r3())) for c in config.centers]
    constant = 1.0 if mode == "alf" else 0.0

    def radial(r: float) -> float:
        if r == 0.0:
            return 0.0  # r^2 / max(r, s) vanishes as r -> 0 for any s >= 0
        mean = constant + 0.5 * sum(1.0 / max(r, s) for s in norms)
        return r * r * mean

    total = 0.0
    cuts = _split_radii(config, R)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        total += adaptive_simpson(radial, lo, hi, rel_tol=1e-10)
    return 2.0 * math.pi * 4.0 * math.pi * total


_RAY_DIRECTIONS = np.array(
    [
        [0.28, 0.67, 0.69],
        [-0.53, 0.71, -0.46],
        [0.81, -0.33, 0.49],
        [-0.62, -0.55, 0.56],
        [0.15, 0.43, -0.89],
        [-0.41, -0.38, -0.83],
    ]
)


def geodesic_radius(
    config: CenterConfiguration,
    R: float,
    mode: str | None = None,
    directions: np.ndarray | None = None,
) -> float:
    """Radial geodesic length int_0^R sqrt(V) dr, averaged over a fixed
    set of rays from the origin.

    The first piece of each ray integrates in the substituted variable
    u = sqrt(t), which absorbs the inverse-square-root behavior of sqrt(V)
    when a center sits at the ray origin.
    """
    if directions is None:
        directions = _RAY_DIRECTIONS
    directions = np.asarray(directions, dtype=float)
    directions = directions / np.linalg.norm(directions, axis=1)[:, None]
    lengths = []
    for d in directions:

        def sqrt_v(t: float) -> float:
            return math.sqrt(
                potential_at(config, t * d[0], complex(t * d[1], t * d[2]), mode).V
            )

        first = min(1.0, 0.25 * R)

        def substituted(u: float) -> float:
            # floored away from 0 so 2u*sqrt(V(u^2)) takes its finite
            # limit when a center sits at the ray origin (V ~ q/(2t))
            uu = max(u, 1e-75)
            return 2.0 * uu * sqrt_v(uu * uu)

        acc = adaptive_simpson(substituted, 0.0, math.sqrt(first), rel_tol=1e-9)
        acc += adaptive_simpson(sqrt_v, first, R, rel_tol=1e-9)
        lengths.append(acc)
    return float(np.mean(lengths))


def volume_growth_fit(
    config: CenterConfiguration,
    mode: str | None = None,
    radii=None,
) -> FitResult:
    """Fit log(volume) against log(geodesic radius) over coordinate radii.

    Euclidean-type growth gives slope 4 (ale), one collapsed circle
    direction gives slope 3 (alf).
    """
    mode = _mode_of(config, mode)
    scale = max(1.0, config.extent())
    # defaults chosen far outside the configuration so the offset between
    # coordinate and geodesic radius no longer bends the log-log line
    if radii is None:
        if mode == "alf":
            radii = np.geomspace(100.0, 1100.0, 6) * scale
        else:
            radii = np.geomspace(1000.0, 110000.0, 6) * scale
    radii = np.asarray(radii, dtype=float)
    if radii.size < 4:
        raise FitDomainError("need at least 4 radii")
    if np.min(radii) <= 0.0 or np.max(radii) / np.min(radii) < 10.0 - 1e-9:
        raise FitDomainError("coordinate radii must be positive, spanning a decade")
    vols = [coordinate_ball_volume(config, R, mode) for R in radii]
    rhos = [geodesic_radius(config, R, mode) for R in radii]
    return fit_loglog(rhos, vols)
