"""Chart metric on the smoothing of an A-type singularity.

The chart has one complex coordinate z and one nonvanishing complex
coordinate y.  For centers (b_i, a_i) put

    Delta_i = sqrt((b - b_i)^2 + |zbar + a_i|^2),
    gamma   = sum_i 1 / Delta_i,
    delta   = sum_i ((b - b_i) - Delta_i) / (Delta_i (zbar + a_i)),

where b = b(z, |y|^2) is the unique root of the strictly increasing
implicit equation

    prod_i ((b - b_i) + Delta_i(b)) = |y|^2.

The Hermitian form of the metric is then

    h = gamma dz dzbar + gamma^{-1} eta etabar,
    eta = (2/y) dy + conj(delta) dz,

and the real metric is g = Re h on the real coordinates
(Re z, Im z, Re y, Im y).  With this convention the single-center metric
is twice the flat metric of the underlying C^2 (flat either way).  The
Kahler form is omega = -Im h, which satisfies omega = g(J0 ., .) for the
standard chart complex structure J0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from gravinst import tensorcalc
from gravinst.errors import (
    ChartBoundaryError,
    ConvergenceError,
    FitDomainError,
    PoleError,
    SingularFiberError,
)
from gravinst.fitting import FitResult, fit_loglog
from gravinst.singularities import CenterConfiguration, GroupElement
from gravinst.tensorcalc import ChartPoint, CurvatureBundle, MetricSample, TwoFormSample

CHART_ID = "hitchin-zy"
EPS_Y_DEFAULT = 1e-8

# J0 as a component matrix: J0 @ X rotates (Re z, Im z) and (Re y, Im y)
# the way multiplication by i does.
STANDARD_J = np.array(
    [
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
)


@dataclass(frozen=True)
class HitchinPoint:
    """Chart point (z, y); the chart requires y != 0."""

    z: complex
    y: complex

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "y", complex(self.y))


@dataclass(frozen=True)
class ImplicitSolution:
    """Root b of the implicit height equation with its back-substitution
    residual (relative) and the distances Delta_i at the root."""

    b: float
    residual: float
    delta_list: tuple[float, ...]


def chart_point(p: HitchinPoint) -> ChartPoint:
    return ChartPoint((p.z.real, p.z.imag, p.y.real, p.y.imag), CHART_ID)


def point_from_chart(cp: ChartPoint) -> HitchinPoint:
    if cp.chart_id != CHART_ID:
        raise ValueError(f"expected chart {CHART_ID!r}, got {cp.chart_id!r}")
    c = cp.coords
    return HitchinPoint(z=complex(c[0], c[1]), y=complex(c[2], c[3]))


def require_smooth_fiber(config: CenterConfiguration) -> None:
    """The chart describes a smooth fiber only when all a_i are distinct."""
    a = [c.a for c in config.centers]
    scale = max(1.0, max(abs(v) for v in a))
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            if abs(a[i] - a[j]) <= 1e-9 * scale:
                raise SingularFiberError(
                    "coincident plane positions a_i: the fiber is singular "
                    "and outside the scope of this chart"
                )


def _stable_factor(u: float, r: float) -> tuple[float, float]:
    """Return (f, Delta) with f = u + sqrt(u^2 + r^2), avoiding the
    cancellation that the direct formula suffers for u < 0."""
    delta = math.hypot(u, r)
    if u >= 0.0:
        return u + delta, delta
    return (r * r) / (delta - u), delta


def implicit_lhs(config: CenterConfiguration, z: complex, b: float) -> float:
    """Product prod_i ((b - b_i) + Delta_i) at height b."""
    zbar = z.conjugate()
    acc = 1.0
    for c in config.centers:
        f, _ = _stable_factor(b - c.b, abs(zbar + c.a))
        acc *= f
    return acc


def solve_b(
    config: CenterConfiguration,
    z: complex,
    y_abs_sq: float,
    tol: float = 1e-13,
    max_iter: int = 200,
) -> ImplicitSolution:
    """Solve prod_i ((b - b_i) + Delta_i(b)) = |y|^2 for b.

    Every factor is positive and strictly increasing in b, so the product
    is strictly increasing from 0 to infinity and the root is unique.  The
    root is bracketed and bisected in log space, then polished by Newton
    steps; the log-derivative of the product is exactly gamma = sum 1/Delta_i.

    Closed forms kept as anchors:
      one center at the origin, z=0, |y|^2=1  ->  b = 1/2
      one center at the origin, z=1, |y|^2=1  ->  b = 0   (b + sqrt(b^2+1) = 1)
      centers (b,a) = (0,+1), (0,-1), z=0, |y|^2=1  ->  b = 0
    """
    if not (y_abs_sq > 0.0) or not math.isfinite(y_abs_sq):
        raise ValueError("y_abs_sq must be positive and finite")
    zbar = z.conjugate()
    data = [(c.b, abs(zbar + c.a)) for c in config.centers]
    target = math.log(y_abs_sq)

    def g_and_gamma(b: float) -> tuple[float, float]:
        total = 0.0
        gam = 0.0
        for bi, r in data:
            f, delta = _stable_factor(b - bi, r)
            if f <= 0.0:
                return -math.inf, math.inf
            total += math.log(f)
            gam += 1.0 / delta
        return total - target, gam

    bs = [bi for bi, _ in data]
    span = y_abs_sq + 1.0 + sum(abs(v) for v in bs)
    lo = min(bs) - span
    hi = max(bs) + span
    for _ in range(64):
        if g_and_gamma(lo)[0] < 0.0:
            break
        lo -= span
        span *= 2.0
    else:
        raise ConvergenceError("failed to bracket the implicit height from below")
    span = y_abs_sq + 1.0 + sum(abs(v) for v in bs)
    for _ in range(64):
        if g_and_gamma(hi)[0] > 0.0:
            break
        hi += span
        span *= 2.0
    else:
        raise ConvergenceError("failed to bracket the implicit height from above")

    # bisection narrows the bracket, Newton polishes to machine precision
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        if g_and_gamma(mid)[0] < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-6 * (1.0 + abs(mid)):
            break
    b = 0.5 * (lo + hi)
    for _ in range(max_iter):
        gval, gam = g_and_gamma(b)
        if not math.isfinite(gval) or gam <= 0.0:
            b = 0.5 * (lo + hi)
            gval, gam = g_and_gamma(b)
        if gval > 0.0:
            hi = min(hi, b)
        elif gval < 0.0:
            lo = max(lo, b)
        step = gval / gam
        nxt = b - step
        if not (lo <= nxt <= hi):
            nxt = 0.5 * (lo + hi)
        if abs(nxt - b) <= 1e-16 * (1.0 + abs(b)):
            b = nxt
            break
        b = nxt
    gval, _ = g_and_gamma(b)
    residual = abs(math.expm1(gval))
    if residual > tol:
        raise ConvergenceError(
            f"implicit height solve stalled at relative residual {residual:.3e}"
        )
    deltas = tuple(math.hypot(b - bi, r) for bi, r in data)
    return ImplicitSolution(b=b, residual=residual, delta_list=deltas)


def gamma(config: CenterConfiguration, z: complex, b: float) -> float:
    """gamma = sum_i 1/Delta_i; positive away from the centers."""
    zbar = z.conjugate()
    total = 0.0
    for c in config.centers:
        delta = math.hypot(b - c.b, abs(zbar + c.a))
        if delta == 0.0:
            raise PoleError("gamma evaluated at a center")
        total += 1.0 / delta
    return total


def delta(config: CenterConfiguration, z: complex, b: float) -> complex:
    """delta = sum_i ((b - b_i) - Delta_i) / (Delta_i (zbar + a_i)).

    The numerator is computed in the cancellation-free form
    (b - b_i) - Delta_i = -r_i^2 / ((b - b_i) + Delta_i) when b > b_i.
    Points with zbar + a_i = 0 are excluded from the chart (pole error).
    """
    zbar = z.conjugate()
    total = 0j
    for c in config.centers:
        w = zbar + c.a
        r = abs(w)
        if r == 0.0:
            raise PoleError("delta evaluated on the plane-position locus zbar + a_i = 0")
        u = b - c.b
        dlt = math.hypot(u, r)
        if u > 0.0:
            num = -(r * r) / (u + dlt)
        else:
            num = u - dlt
        total += num / (dlt * w)
    return total


_DZ = np.array([1.0, 1.0j, 0.0, 0.0])
_DY = np.array([0.0, 0.0, 1.0, 1.0j])


def hermitian_form_at(config: CenterConfiguration, p: HitchinPoint) -> np.ndarray:
    """Complex 4x4 matrix H with H[mu,nu] = h(d_mu, d_nu): the metric is
    Re H and the Kahler form is -Im H."""
    require_smooth_fiber(config)
    if abs(p.y) < EPS_Y_DEFAULT:
        raise ChartBoundaryError(f"|y| = {abs(p.y):.3e} is below the chart floor")
    sol = solve_b(config, p.z, abs(p.y) ** 2)
    gam = gamma(config, p.z, sol.b)
    dlt = delta(config, p.z, sol.b)
    eta = (2.0 / p.y) * _DY + dlt.conjugate() * _DZ
    return gam * np.outer(_DZ, _DZ.conj()) + (1.0 / gam) * np.outer(eta, eta.conj())


def metric_at(config: CenterConfiguration, p: HitchinPoint) -> MetricSample:
    """Real metric sample at a chart point (coords Re z, Im z, Re y, Im y)."""
    H = hermitian_form_at(config, p)
    return MetricSample(g=H.real, point=chart_point(p))


def kahler_form_at(config: CenterConfiguration, p: HitchinPoint) -> TwoFormSample:
    """Kahler form omega = g(J0 ., .) as an antisymmetric component matrix."""
    H = hermitian_form_at(config, p)
    return TwoFormSample(omega=-H.imag, point=chart_point(p))


def metric_field(config: CenterConfiguration):
    """Adapter: ChartPoint -> MetricSample, for the tensor calculus ops."""

    def field(cp: ChartPoint) -> MetricSample:
        return metric_at(config, point_from_chart(cp))

    return field


def chart_step(
    config: CenterConfiguration,
    p: HitchinPoint,
    rel_step: float = tensorcalc.DEFAULT_REL_STEP,
) -> np.ndarray:
    """Finite-difference steps adapted to the chart geometry.

    The metric varies on the scale of the distance to the nearest
    puncture in z and on the scale of |y| itself near the branch locus,
    so steps are capped by both; far from the singular loci they grow
    with the coordinate magnitudes to keep truncation error scale-free.
    """
    zbar = p.z.conjugate()
    d_punct = min(abs(zbar + c.a) for c in config.centers)
    if d_punct <= 0.0:
        raise PoleError("step requested at a puncture")
    if p.y == 0:
        raise ChartBoundaryError("step requested on the branch locus y = 0")
    s_z = min(max(1.0, abs(p.z)), 10.0 * d_punct)
    s_y = abs(p.y)
    return rel_step * np.array([s_z, s_z, s_y, s_y])


def kahler_field(config: CenterConfiguration):
    def field(cp: ChartPoint) -> TwoFormSample:
        return kahler_form_at(config, point_from_chart(cp))

    return field


def action_matrix(gel: GroupElement) -> np.ndarray:
    """Real 4x4 matrix of the cyclic action (z, y) -> (rho^(m ell) z,
    rho^(-ell) y) on the chart coordinates."""
    n = gel.signature.n
    ang_z = 2.0 * math.pi * gel.signature.m * gel.ell / n
    ang_y = -2.0 * math.pi * gel.ell / n
    out = np.zeros((4, 4))
    for offset, ang in ((0, ang_z), (2, ang_y)):
        c, s = math.cos(ang), math.sin(ang)
        out[offset, offset] = c
        out[offset, offset + 1] = -s
        out[offset + 1, offset] = s
        out[offset + 1, offset + 1] = c
    return out


def base_to_chart(
    config: CenterConfiguration, b: float, a: complex, phase: float = 0.0
) -> HitchinPoint:
    """Chart point over the base point (b, a): z = -conj(a) and
    |y|^2 = prod_i ((b - b_i) + Delta_i), with a free phase for y."""
    z = -complex(a).conjugate()
    zbar = z.conjugate()
    log_y_sq = 0.0
    for c in config.centers:
        f, _ = _stable_factor(b - c.b, abs(zbar + c.a))
        if f <= 0.0:
            raise ChartBoundaryError("base point lies on the y = 0 locus")
        log_y_sq += math.log(f)
    y_abs = math.exp(0.5 * log_y_sq)
    return HitchinPoint(z=z, y=y_abs * cmath.exp(1j * phase))


_DECAY_DIRECTIONS = np.array(
    [
        [0.36, 0.48, 0.80],
        [-0.60, 0.64, 0.48],
        [0.64, -0.60, -0.48],
        [-0.48, -0.36, 0.80],
    ]
)


def ale_curvature_decay(
    config: CenterConfiguration,
    radii=None,
    directions=None,
    rel_step: float = 0.003,
) -> FitResult:
    """Fit the decay exponent of |Rm|^2 against the asymptotic radius.

    radii are radii of the locally Euclidean end.  Along a ray the
    geodesic distance from the origin is sqrt(2k s) + O(1) in the base
    coordinate s, so curvature is sampled at base points (r^2 / 2k) *
    direction, averaged over a fixed direction set, and log|Rm|^2 is
    fitted against log r.  Metric decay O(r^-4) forces |Rm| = O(r^-6),
    i.e. slope -12.
    """
    if config.mode != "ale":
        raise FitDomainError("curvature decay fit applies to ale configurations")
    scale = max(1.0, config.extent())
    if radii is None:
        radii = np.geomspace(10.0, 100.0, 6) * math.sqrt(scale)
    radii = np.asarray(radii, dtype=float)
    if radii.size < 4:
        raise FitDomainError("need at least 4 radii")
    if np.min(radii) <= 0.0:
        raise FitDomainError("radii must be positive")
    if np.max(radii) / np.min(radii) < 10.0 - 1e-9:
        raise FitDomainError("radii must span at least one decade")
    base_radii = radii**2 / (2.0 * config.k)
    if np.min(base_radii) < 2.0 * scale:
        raise FitDomainError("smallest radius is inside the configuration region")
    if directions is None:
        directions = _DECAY_DIRECTIONS
    directions = np.asarray(directions, dtype=float)
    directions = directions / np.linalg.norm(directions, axis=1)[:, None]

    field = metric_field(config)
    averages = []
    for s in base_radii:
        vals = []
        for d in directions:
            pt = base_to_chart(config, s * d[0], complex(s * d[1], s * d[2]))
            cp = chart_point(pt)
            step = chart_step(config, pt, rel_step)
            vals.append(tensorcalc.curvature_at(field, cp, step=step).riem_norm_sq)
        averages.append(float(np.mean(vals)))
    return fit_loglog(radii, averages)


def curvature_bundle_at(
    config: CenterConfiguration,
    p: HitchinPoint,
    rel_step: float = tensorcalc.DEFAULT_REL_STEP,
) -> CurvatureBundle:
    """Convenience wrapper: curvature of the chart metric at a point."""
    cp = chart_point(p)
    step = chart_step(config, p, rel_step)
    return tensorcalc.curvature_at(metric_field(config), cp, step=step)
