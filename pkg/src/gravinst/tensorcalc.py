"""Finite-difference tensor calculus on four-dimensional coordinate charts.

Everything downstream (curvature scans, Kahler identities, Nijenhuis
integrability) reduces to derivatives of chart-valued fields.  Derivatives
are central differences with one level of Richardson extrapolation, so a
first derivative at step h combines the stencils at h and h/2 and is
accurate to O(h^4).  Second derivatives nest two first-derivative stencils
rather than using a dedicated kernel; mixed partials commute to rounding.

Curvature follows the textbook chain: Christoffel symbols from first
derivatives of the metric, the Riemann tensor from derivatives of the
Christoffel symbols,

    R^l_{ijk} = d_j Gamma^l_{ik} - d_k Gamma^l_{ij}
                + Gamma^l_{jm} Gamma^m_{ik} - Gamma^l_{km} Gamma^m_{ij},

Ricci by the trace R^k_{ikj}, and norms by contraction with the inverse
metric.  The 4x4 inverse is an explicit adjugate/cofactor formula: the
dimension is fixed, and the closed form keeps evaluation deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from gravinst.errors import DegenerateMetricError, NumericOverflowError

DEFAULT_REL_STEP = 1e-3
CONDITION_LIMIT = 1e12

MultiIndex = tuple[int, int, int, int]


@dataclass(frozen=True)
class ChartPoint:
    """A point of a 4-dimensional coordinate chart.

    coords holds the four real coordinates; chart_id names the chart so
    that samples from different charts cannot be mixed up silently.
    """

    coords: tuple[float, float, float, float]
    chart_id: str

    def __post_init__(self):
        if len(self.coords) != 4:
            raise ValueError("chart points are four-dimensional")
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))
        if not all(np.isfinite(self.coords)):
            raise ValueError("chart point coordinates must be finite")

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)

    def shifted(self, axis: int, delta: float) -> "ChartPoint":
        c = list(self.coords)
        c[axis] += delta
        return ChartPoint(tuple(c), self.chart_id)


@dataclass(frozen=True)
class MetricSample:
    """Symmetric positive-definite 4x4 metric at a chart point."""

    g: np.ndarray
    point: ChartPoint


@dataclass(frozen=True)
class TwoFormSample:
    """Antisymmetric 4x4 component matrix of a 2-form at a chart point."""

    omega: np.ndarray
    point: ChartPoint


@dataclass(frozen=True)
class ComplexStructureSample:
    """Endomorphism J (as a matrix acting on coordinate components) with
    J.J = -I at the sampled point."""

    J: np.ndarray
    point: ChartPoint


@dataclass(frozen=True)
class CurvatureBundle:
    """Curvature data of a metric at one point.

    christoffel[k, i, j] = Gamma^k_{ij}
    riemann[l, i, j, k]  = R^l_{ijk}  (antisymmetric in j, k)
    ricci[i, j]          = R^k_{ikj}
    scalar               = g^{ij} Ric_{ij}
    ricci_norm           = |Ric|_g
    riem_norm_sq         = |Rm|^2_g
    """

    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    ricci_norm: float
    riem_norm_sq: float


def default_step(point: ChartPoint, rel_step: float = DEFAULT_REL_STEP) -> np.ndarray:
    """Default per-axis FD steps: rel_step times the larger of 1 and the
    local coordinate scale.

    The four chart coordinates come in two pairs (two complex coordinates,
    or a fiber/height pair and a plane pair), and fields vary on the scale
    of the pair magnitude, so both axes of a pair share the step
    rel_step * max(1, |(x_even, x_odd)|).
    """
    x = np.abs(point.coords)
    s01 = max(1.0, math.hypot(x[0], x[1]))
    s23 = max(1.0, math.hypot(x[2], x[3]))
    return rel_step * np.array([s01, s01, s23, s23])


def _normalize_steps(point: ChartPoint, step) -> np.ndarray:
    if step is None:
        return default_step(point)
    steps = np.broadcast_to(np.asarray(step, dtype=float), (4,)).copy()
    if np.any(steps <= 0.0) or not np.all(np.isfinite(steps)):
        raise ValueError("steps must be positive and finite")
    return steps


def _eval_array(field: Callable[[ChartPoint], np.ndarray], point: ChartPoint) -> np.ndarray:
    value = np.asarray(field(point), dtype=float)
    if not np.all(np.isfinite(value)):
        raise NumericOverflowError(f"field produced a non-finite value at {point.coords}")
    return value


def _central_first(field, point: ChartPoint, axis: int, step: float) -> np.ndarray:
    """Richardson-extrapolated central first derivative along one axis."""

    def diff(h: float) -> np.ndarray:
        plus = _eval_array(field, point.shifted(axis, h))
        minus = _eval_array(field, point.shifted(axis, -h))
        return (plus - minus) / (2.0 * h)

    coarse = diff(step)
    fine = diff(0.5 * step)
    return (4.0 * fine - coarse) / 3.0


def differentiate_field(
    field: Callable[[ChartPoint], np.ndarray],
    point: ChartPoint,
    multi_index: Sequence[int],
    step: float | Sequence[float] | None = None,
) -> np.ndarray:
    """Partial derivative of an array-valued field at a point.

    multi_index gives the derivative order per coordinate (each entry 0..2).
    Higher orders are taken by nesting first-derivative stencils: the
    outermost axis differentiates the field whose value is the remaining
    derivative.  A zero multi-index returns the field value itself.

    step may be a scalar, a per-axis sequence of four steps, or None for
    the default of default_step(point).
    """
    mi = tuple(int(k) for k in multi_index)
    if len(mi) != 4 or any(k < 0 or k > 2 for k in mi):
        raise ValueError("multi_index must have four entries, each in 0..2")
    steps = _normalize_steps(point, step)
    order = sum(mi)
    if order == 0:
        return _eval_array(field, point)
    axis = next(i for i, k in enumerate(mi) if k > 0)
    rest = list(mi)
    rest[axis] -= 1
    rest = tuple(rest)
    if sum(rest) == 0:
        inner = field
    else:

        def inner(q: ChartPoint) -> np.ndarray:
            return differentiate_field(field, q, rest, steps)

    value = _central_first(inner, point, axis, float(steps[axis]))
    if not np.all(np.isfinite(value)):
        raise NumericOverflowError("derivative evaluation produced a non-finite value")
    return value


def _det3(m: np.ndarray) -> float:
    return (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )


_ROWS = [(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)]


def det4(g: np.ndarray) -> float:
    """Determinant of a 4x4 matrix by cofactor expansion along row 0."""
    total = 0.0
    for j in range(4):
        minor = g[np.ix_(_ROWS[0], _ROWS[j])]
        total += (-1.0) ** j * g[0, j] * _det3(minor)
    return float(total)


def invert_metric(g: np.ndarray) -> np.ndarray:
    """Inverse of a 4x4 metric by the adjugate/cofactor formula.

    The matrix is first equilibrated by its diagonal so that honest but
    highly anisotropic charts (coordinate blocks of very different
    proper scale) do not trip the degeneracy guard; the condition
    estimate on the equilibrated matrix measures genuine near-collapse.
    Raises DegenerateMetricError past CONDITION_LIMIT.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (4, 4):
        raise ValueError("metric must be a 4x4 matrix")
    diag = np.diag(g)
    if np.any(diag <= 0.0) or not np.all(np.isfinite(diag)):
        raise DegenerateMetricError("metric diagonal is not positive")
    d = 1.0 / np.sqrt(diag)
    a = g * np.outer(d, d)
    cof = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            minor = a[np.ix_(_ROWS[i], _ROWS[j])]
            cof[i, j] = (-1.0) ** (i + j) * _det3(minor)
    det = float(np.dot(a[0], cof[0]))
    if det == 0.0 or not np.isfinite(det):
        raise DegenerateMetricError("metric determinant vanished")
    inv_a = cof.T / det
    cond = float(
        np.max(np.sum(np.abs(a), axis=1)) * np.max(np.sum(np.abs(inv_a), axis=1))
    )
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise DegenerateMetricError(f"metric condition number {cond:.3e} exceeds limit")
    return inv_a * np.outer(d, d)


def curvature_at(
    metric_field: Callable[[ChartPoint], MetricSample],
    point: ChartPoint,
    step: float | Sequence[float] | None = None,
) -> CurvatureBundle:
    """Full curvature of a metric field at a point, by finite differences.

    The metric is evaluated on a local stencil; first and second
    derivatives feed the Christoffel symbols and their derivatives, and the
    Riemann tensor is assembled from those.  All contractions use the
    adjugate inverse of the metric at the center point.
    """
    steps = _normalize_steps(point, step)

    def g_of(q: ChartPoint) -> np.ndarray:
        return metric_field(q).g

    g0 = _eval_array(g_of, point)
    if g0.shape != (4, 4):
        raise ValueError("metric field must produce 4x4 matrices")
    if np.max(np.abs(g0 - g0.T)) > 1e-12 * max(1.0, float(np.max(np.abs(g0)))):
        raise ValueError("metric sample is not symmetric")
    ginv = invert_metric(g0)

    basis = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    # dg[i, j, l] = d_i g_{jl}
    dg = np.stack([differentiate_field(g_of, point, basis[i], steps) for i in range(4)])
    # d2g[m, i, j, l] = d_m d_i g_{jl}, symmetric in (m, i)
    d2g = np.empty((4, 4, 4, 4))
    for m in range(4):
        for i in range(m, 4):
            mi = [0, 0, 0, 0]
            mi[m] += 1
            mi[i] += 1
            val = differentiate_field(g_of, point, tuple(mi), steps)
            d2g[m, i] = val
            d2g[i, m] = val

    # T[i, j, l] = d_i g_{jl} + d_j g_{il} - d_l g_{ij}
    T = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
    gamma = 0.5 * np.einsum("kl,ijl->kij", ginv, T)

    # derivative of the inverse metric: d_m g^{-1} = -g^{-1} (d_m g) g^{-1}
    dginv = -np.einsum("ab,mbc,cd->mad", ginv, dg, ginv)
    dT = d2g + d2g.transpose(0, 2, 1, 3) - d2g.transpose(0, 2, 3, 1)
    dgamma = 0.5 * (
        np.einsum("mkl,ijl->mkij", dginv, T) + np.einsum("kl,mijl->mkij", ginv, dT)
    )

    riem = (
        dgamma.transpose(1, 2, 0, 3)
        - dgamma.transpose(1, 2, 3, 0)
        + np.einsum("ljm,mik->lijk", gamma, gamma)
        - np.einsum("lkm,mij->lijk", gamma, gamma)
    )
    ricci = np.einsum("kikj->ij", riem)
    scalar = float(np.einsum("ij,ij->", ginv, ricci))
    ricci_norm = float(
        np.sqrt(max(0.0, np.einsum("ik,jl,ij,kl->", ginv, ginv, ricci, ricci)))
    )
    riem_low = np.einsum("lm,mijk->lijk", g0, riem)
    riem_norm_sq = float(
        np.einsum(
            "lijk,abcd,la,ib,jc,kd->", riem_low, riem_low, ginv, ginv, ginv, ginv
        )
    )
    if not (
        np.all(np.isfinite(riem)) and np.isfinite(ricci_norm) and np.isfinite(riem_norm_sq)
    ):
        raise NumericOverflowError("curvature assembly produced non-finite values")
    return CurvatureBundle(
        christoffel=gamma,
        riemann=riem,
        ricci=ricci,
        scalar=scalar,
        ricci_norm=ricci_norm,
        riem_norm_sq=riem_norm_sq,
    )


_TRIPLES = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]


def exterior_derivative(
    form_field: Callable[[ChartPoint], TwoFormSample],
    point: ChartPoint,
    step: float | Sequence[float] | None = None,
) -> np.ndarray:
    """Components of the 3-form d(omega) at a point.

    Returns the four independent components (d omega)_{ijk} for the index
    triples (0,1,2), (0,1,3), (0,2,3), (1,2,3), where

        (d omega)_{ijk} = d_i omega_{jk} + d_j omega_{ki} + d_k omega_{ij}.
    """
    steps = _normalize_steps(point, step)

    def w_of(q: ChartPoint) -> np.ndarray:
        return form_field(q).omega

    basis = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    dw = np.stack([differentiate_field(w_of, point, basis[i], steps) for i in range(4)])
    out = np.empty(4)
    for t, (i, j, k) in enumerate(_TRIPLES):
        out[t] = dw[i, j, k] + dw[j, k, i] + dw[k, i, j]
    return out


def nijenhuis_at(
    j_field: Callable[[ChartPoint], ComplexStructureSample],
    point: ChartPoint,
    step: float | Sequence[float] | None = None,
) -> np.ndarray:
    """Nijenhuis tensor N^k_{ij} of an almost-complex structure field.

    N^k_{ij} = J^m_i d_m J^k_j - J^m_j d_m J^k_i
               - J^k_m d_i J^m_j + J^k_m d_j J^m_i

    and vanishes identically exactly when J is integrable.
    """
    steps = _normalize_steps(point, step)

    def J_of(q: ChartPoint) -> np.ndarray:
        return j_field(q).J

    J0 = _eval_array(J_of, point)
    basis = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    dJ = np.stack([differentiate_field(J_of, point, basis[i], steps) for i in range(4)])
    t1 = np.einsum("mi,mkj->kij", J0, dJ)
    t3 = np.einsum("km,imj->kij", J0, dJ)
    return t1 - t1.transpose(0, 2, 1) - t3 + t3.transpose(0, 2, 1)
