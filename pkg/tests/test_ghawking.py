"""Circle-fibered multi-center metrics: potential, connection, volume,
periods."""

import math

import numpy as np
import pytest

from gravinst import ghawking, tensorcalc
from gravinst.errors import (
    DiracStringError,
    FitDomainError,
    PathBlockedError,
    PoleError,
)
from gravinst.ghawking import GHPoint
from gravinst.singularities import (
    Center,
    CenterConfiguration,
    GroupElement,
    QuotientSignature,
    make_polygon_config,
)


def pair_config():
    return make_polygon_config(QuotientSignature(1, 2, 1), [1.0 + 0j], [0.0])


def taubnut_config():
    return make_polygon_config(
        QuotientSignature(1, 1, 0), [1.0 + 0j], [0.0], mode="alf"
    )


def origin_config():
    return CenterConfiguration(
        centers=(Center(0.0, 0j),), signature=QuotientSignature(1, 1, 0)
    )


def tower_config():
    return CenterConfiguration(
        centers=(Center(-1.0, 0j), Center(1.0, 0j)),
        signature=QuotientSignature(2, 1, 0),
    )


# --- potential ---


def test_potential_values_and_gradient():
    cfg = pair_config()
    b, a = 0.35, 0.8 - 0.6j
    got = ghawking.potential_at(cfg, b, a)
    expected = sum(
        0.5 / np.linalg.norm([b - c.b, a.real - c.a.real, a.imag - c.a.imag])
        for c in cfg.centers
    )
    assert abs(got.V - expected) < 1e-14
    # gradient against finite differences
    h = 1e-6
    fd = np.array(
        [
            (ghawking.potential_at(cfg, b + h, a).V - ghawking.potential_at(cfg, b - h, a).V),
            (ghawking.potential_at(cfg, b, a + h).V - ghawking.potential_at(cfg, b, a - h).V),
            (ghawking.potential_at(cfg, b, a + 1j * h).V - ghawking.potential_at(cfg, b, a - 1j * h).V),
        ]
    ) / (2 * h)
    assert np.max(np.abs(got.gradV - fd)) < 1e-8


def test_potential_is_harmonic():
    cfg = pair_config()
    h = 1e-4
    for b, a in [(0.35, 0.8 - 0.6j), (1.2, -0.3 + 0.9j), (-0.7, 0.2 + 0.1j)]:
        def V(bb, aa):
            return ghawking.potential_at(cfg, bb, aa).V

        lap = (
            (V(b + h, a) - 2 * V(b, a) + V(b - h, a))
            + (V(b, a + h) - 2 * V(b, a) + V(b, a - h))
            + (V(b, a + 1j * h) - 2 * V(b, a) + V(b, a - 1j * h))
        ) / h**2
        assert abs(lap) < 1e-6


def test_potential_alf_constant():
    cfg = taubnut_config()
    ale = ghawking.potential_at(cfg, 0.5, 2.0 + 0j, mode="ale").V
    alf = ghawking.potential_at(cfg, 0.5, 2.0 + 0j).V
    assert abs(alf - ale - 1.0) < 1e-15


def test_potential_pole():
    cfg = pair_config()
    c = cfg.centers[0]
    with pytest.raises(PoleError):
        ghawking.potential_at(cfg, c.b, c.a)


# --- connection ---


def test_connection_curl_matches_grad_v():
    # d alpha = *dV componentwise, via finite differences of alpha
    cfg = pair_config()
    b, a = 0.4, 0.9 - 0.5j
    h = 1e-6

    def alpha(bb, aa):
        return ghawking.connection_at(cfg, bb, aa).alpha

    # curl in coordinates (b, a1, a2)
    da2_da1 = (alpha(b, a + h)[2] - alpha(b, a - h)[2]) / (2 * h)
    da1_da2 = (alpha(b, a + 1j * h)[1] - alpha(b, a - 1j * h)[1]) / (2 * h)
    da2_db = (alpha(b + h, a)[2] - alpha(b - h, a)[2]) / (2 * h)
    da1_db = (alpha(b + h, a)[1] - alpha(b - h, a)[1]) / (2 * h)
    grad = ghawking.potential_at(cfg, b, a).gradV
    # alpha_b = 0, so curl alpha = grad V reduces to these three lines
    assert abs((da2_da1 - da1_da2) - grad[0]) < 1e-7
    assert abs(-da2_db - grad[1]) < 1e-7
    assert abs(da1_db - grad[2]) < 1e-7


def test_connection_gauge_and_strings():
    cfg = pair_config()
    # directly below the a=+1 center: on its 'down' string
    with pytest.raises(DiracStringError):
        ghawking.connection_at(cfg, -0.5, cfg.centers[0].a)
    # same point is regular in the 'up' gauge
    val = ghawking.connection_at(cfg, -0.5, cfg.centers[0].a, gauges="up")
    assert np.all(np.isfinite(val.alpha))
    with pytest.raises(PoleError):
        ghawking.connection_at(cfg, 0.0, cfg.centers[0].a)
    with pytest.raises(ValueError):
        ghawking.connection_at(cfg, 0.5, 3.0 + 0j, gauges=["down"])


# --- metric algebra ---


def test_metric_determinant_is_v_squared():
    for cfg, mode in [(pair_config(), "ale"), (taubnut_config(), "alf")]:
        p = GHPoint(theta=0.9, b=0.35, a=0.8 - 0.6j)
        g = ghawking.metric_at(cfg, p, mode=mode).g
        V = ghawking.potential_at(cfg, p.b, p.a, mode=mode).V
        assert abs(tensorcalc.det4(g) - V * V) < 1e-12 * V * V
        assert abs(g[0, 0] - 1.0 / V) < 1e-14


def test_complex_structure_identities():
    cfg = pair_config()
    p = GHPoint(theta=0.9, b=0.35, a=0.8 - 0.6j)
    J = ghawking.complex_structure_at(cfg, p).J
    g = ghawking.metric_at(cfg, p).g
    assert np.max(np.abs(J @ J + np.eye(4))) < 1e-13
    assert np.max(np.abs(J.T @ g @ J - g)) < 1e-13
    w = ghawking.kahler_form_at(cfg, p).omega
    assert np.max(np.abs(w - J.T @ g)) < 1e-13


def test_kahler_form_squares_to_twice_volume():
    cfg = pair_config()
    p = GHPoint(theta=0.2, b=0.7, a=-0.4 + 1.1j)
    w = ghawking.kahler_form_at(cfg, p).omega
    g = ghawking.metric_at(cfg, p).g
    wedge = 2.0 * (w[0, 1] * w[2, 3] - w[0, 2] * w[1, 3] + w[0, 3] * w[1, 2])
    vol = math.sqrt(tensorcalc.det4(g))
    # chart order (theta, b, a1, a2) is negatively oriented for J
    assert abs(wedge / vol + 2.0) < 1e-10


def test_curvature_scalars_are_gauge_independent():
    cfg = pair_config()
    cp = ghawking.chart_point(GHPoint(theta=0.0, b=0.5, a=1.1 + 0.4j))
    down = tensorcalc.curvature_at(ghawking.metric_field(cfg, gauges="down"), cp)
    up = tensorcalc.curvature_at(ghawking.metric_field(cfg, gauges="up"), cp)
    rel = abs(down.riem_norm_sq - up.riem_norm_sq) / down.riem_norm_sq
    assert rel < 1e-8


def test_potential_transform_breaks_det_identity():
    cfg = pair_config()
    p = GHPoint(theta=0.9, b=0.35, a=0.8 - 0.6j)
    g = ghawking.metric_at(cfg, p, potential_transform=lambda v: v * v).g
    V = ghawking.potential_at(cfg, p.b, p.a).V
    assert abs(tensorcalc.det4(g) - V * V) > 1e-3


def test_action_jacobian_rotation():
    sig = QuotientSignature(1, 4, 1)
    M = ghawking.action_jacobian(GroupElement(1, sig))
    # theta and b axes untouched; a-plane rotated by -pi/2 (a=1 -> -i)
    assert np.allclose(M[:2, :2], np.eye(2))
    got = M @ np.array([0.0, 0.0, 1.0, 0.0])
    assert np.max(np.abs(got - [0.0, 0.0, 0.0, -1.0])) < 1e-14


# --- clearances ---


def test_clearances():
    cfg = pair_config()
    assert abs(ghawking.center_clearance(cfg, 0.0, 0j) - 1.0) < 1e-12
    # just below the a=+1 center, on the down string track
    assert ghawking.string_clearance(cfg, -0.7, 1.0 + 0j) < 1e-9
    assert ghawking.string_clearance(cfg, 0.0, 0j) > 0.5


# --- cycle periods ---


def test_cycle_period_tower():
    tower = tower_config()
    per = ghawking.cycle_period(tower, 0, 1)
    # integrand is exactly -db; the 1e-9 endpoint clip gives a 2e-9
    # relative offset from -2 pi per unit height
    assert abs(per / 2.0 + 2.0 * math.pi) < 5e-8
    assert ghawking.cycle_period(tower, 1, 0) + per == 0.0


def test_cycle_period_coplanar_vanishes():
    assert ghawking.cycle_period(pair_config(), 0, 1) == 0.0


def test_cycle_period_blocked_segment():
    three = CenterConfiguration(
        centers=(Center(-1.0, 0j), Center(0.0, 0j), Center(1.0, 0j)),
        signature=QuotientSignature(3, 1, 0),
    )
    with pytest.raises(PathBlockedError):
        ghawking.cycle_period(three, 0, 2)
    # adjacent pairs stay integrable
    per = ghawking.cycle_period(three, 0, 1)
    assert abs(per + 2.0 * math.pi) < 5e-8


def test_cycle_period_index_validation():
    with pytest.raises(ValueError):
        ghawking.cycle_period(pair_config(), 0, 0)
    with pytest.raises(ValueError):
        ghawking.cycle_period(pair_config(), 0, 5)


# --- volume growth ---


def test_flat_volume_closed_forms():
    cfg = origin_config()
    R = 7.0
    vol = ghawking.coordinate_ball_volume(cfg, R)
    assert abs(vol - 2.0 * math.pi**2 * R**2) / vol < 1e-9
    rho = ghawking.geodesic_radius(cfg, R)
    assert abs(rho - math.sqrt(2.0 * R)) < 1e-8


def test_flat_growth_slope_is_four():
    fit = ghawking.volume_growth_fit(origin_config(), mode="ale")
    assert abs(fit.slope - 4.0) < 1e-6
    assert fit.rms_residual < 1e-9


def test_volume_growth_fit_domain():
    cfg = pair_config()
    with pytest.raises(FitDomainError):
        ghawking.volume_growth_fit(cfg, radii=[10.0, 20.0, 40.0])
    with pytest.raises(FitDomainError):
        ghawking.volume_growth_fit(cfg, radii=[10.0, 20.0, 40.0, 80.0])


def test_chart_point_round_trip():
    p = GHPoint(theta=0.9, b=0.35, a=0.8 - 0.6j)
    cp = ghawking.chart_point(p)
    assert cp.chart_id == ghawking.CHART_ID
    q = ghawking.point_from_chart(cp)
    assert q.theta == p.theta and q.b == p.b and q.a == p.a
