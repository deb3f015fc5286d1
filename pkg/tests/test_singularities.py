"""Configuration data: polygon construction, group action, serialization."""

import cmath
import math

import numpy as np
import pytest

from gravinst.errors import InvalidSignatureError, SingularFiberError
from gravinst.singularities import (
    Center,
    CenterConfiguration,
    GroupElement,
    QuotientSignature,
    apply_action_gh,
    apply_action_hitchin,
    canonical_center_order,
    config_from_json,
    defining_polynomial,
    kahler_class,
    make_akl_config,
    make_polygon_config,
    symmetry_residual,
)


def pair_config(c=1.0 + 0j):
    return make_polygon_config(QuotientSignature(1, 2, 1), [c], [0.0])


def test_signature_validation():
    QuotientSignature(1, 1, 0)
    QuotientSignature(3, 5, 2)
    with pytest.raises(InvalidSignatureError):
        QuotientSignature(0, 2, 1)
    with pytest.raises(InvalidSignatureError):
        QuotientSignature(1, 4, 2)  # gcd(2,4) = 2
    with pytest.raises(InvalidSignatureError):
        QuotientSignature(1, 1, 1)  # n=1 forces m=0
    with pytest.raises(InvalidSignatureError):
        QuotientSignature(1, 3, 3)  # m must stay below n
    assert QuotientSignature(2, 3, 1).k == 6


def test_pair_polygon_vertices():
    cfg = pair_config()
    assert cfg.k == 2
    got = sorted((c.a.real, c.a.imag) for c in cfg.centers)
    assert abs(got[0][0] + 1.0) < 1e-12 and abs(got[0][1]) < 1e-12
    assert abs(got[1][0] - 1.0) < 1e-12 and abs(got[1][1]) < 1e-12
    assert all(c.b == 0.0 for c in cfg.centers)


def test_polygon_vertex_formula():
    # a_{i,j} = -conj(c_i) * rho^(-j) after principal-branch normalization
    sig = QuotientSignature(1, 4, 1)
    c = 1.2 + 0.4j
    cfg = make_polygon_config(sig, [c], [0.3])
    sector = 2.0 * math.pi / 4
    cn = c * cmath.exp(-2j * math.pi * math.floor(cmath.phase(c) % (2 * math.pi) / sector) / 4)
    rho = cmath.exp(2j * math.pi / 4)
    for j, center in enumerate(cfg.centers, start=1):
        assert abs(center.a - (-cn.conjugate() * rho ** (-j))) < 1e-12
        assert center.b == 0.3


def test_polygon_rejects_bad_radii():
    with pytest.raises(ValueError):
        make_polygon_config(QuotientSignature(1, 2, 1), [0j], [0.0])
    with pytest.raises(SingularFiberError):
        # c and -c share the same square
        make_polygon_config(QuotientSignature(2, 2, 1), [1.0, -1.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        make_polygon_config(QuotientSignature(2, 2, 1), [1.0], [0.0, 1.0])


def test_coincident_centers_rejected():
    with pytest.raises(SingularFiberError):
        CenterConfiguration(
            centers=(Center(0.0, 1.0 + 0j), Center(0.0, 1.0 + 0j)),
            signature=QuotientSignature(2, 1, 0),
        )


def test_center_count_must_match_signature():
    with pytest.raises(ValueError):
        CenterConfiguration(
            centers=(Center(0.0, 1.0 + 0j),),
            signature=QuotientSignature(1, 2, 1),
        )


def test_symmetry_residual():
    cfg = pair_config()
    assert symmetry_residual(cfg) < 1e-12
    moved = list(cfg.centers)
    moved[0] = Center(b=moved[0].b, a=moved[0].a + 0.01)
    broken = CenterConfiguration(
        centers=tuple(moved), signature=cfg.signature, mode=cfg.mode
    )
    assert symmetry_residual(broken) > 1e-3


def test_group_element_arithmetic():
    sig = QuotientSignature(1, 4, 1)
    g1 = GroupElement(1, sig)
    g3 = GroupElement(3, sig)
    assert g1.compose(g3).is_identity
    assert GroupElement(5, sig).ell == 1
    with pytest.raises(ValueError):
        g1.compose(GroupElement(1, QuotientSignature(1, 3, 1)))


def test_gh_action_quarter_turn():
    sig = QuotientSignature(1, 4, 1)
    theta, b, a = apply_action_gh(GroupElement(1, sig), 0.0, 0.0, 1.0 + 0j)
    assert abs(theta - math.pi / 2) < 1e-15
    assert b == 0.0
    assert abs(a - (-1j)) < 1e-15


def test_gh_action_orbit_size():
    sig = QuotientSignature(1, 4, 1)
    pts = set()
    for ell in range(4):
        _, b, a = apply_action_gh(GroupElement(ell, sig), 0.2, 0.5, 1.0 + 0.3j)
        pts.add((round(b, 12), round(a.real, 12), round(a.imag, 12)))
    assert len(pts) == 4


def test_hitchin_action_weights():
    sig = QuotientSignature(1, 4, 1)
    z, y = apply_action_hitchin(GroupElement(1, sig), 1.0 + 0j, 1.0 + 0j)
    assert abs(z - 1j) < 1e-15  # z picks up rho^m
    assert abs(y - (-1j)) < 1e-15  # y picks up rho^(-1)


def test_action_permutes_symmetric_centers():
    cfg = make_polygon_config(QuotientSignature(2, 3, 2), [1.0, 1.5 + 0.2j], [0.0, 0.7])
    rot = cmath.exp(-2j * math.pi * 2 / 3)
    for c in cfg.centers:
        image = rot * c.a
        best = min(abs(image - o.a) for o in cfg.centers if o.b == c.b)
        assert best < 1e-12


def test_defining_polynomial_pair():
    # centers a = +-1: x*y = (z+1)(z-1) = z^2 - 1
    poly = defining_polynomial(pair_config())
    coeffs = np.array(poly.coefficients)
    assert poly.degree == 2
    assert abs(coeffs[0] - 1.0) < 1e-15
    assert abs(coeffs[1]) < 1e-12  # invariance kills z^1
    assert abs(coeffs[2] + 1.0) < 1e-12
    assert abs(poly(1.0 + 0j)) < 1e-12
    assert abs(poly(-1.0 + 0j)) < 1e-12


def test_defining_polynomial_invariant_gaps():
    # Z_3-invariant hexagon: only z^0, z^3, z^6 coefficients survive
    cfg = make_polygon_config(QuotientSignature(2, 3, 2), [1.0, 1.5 + 0.2j], [0.0, 0.7])
    poly = defining_polynomial(cfg)
    for power, coeff in enumerate(reversed(poly.coefficients)):
        if power % 3 != 0 and power != poly.degree:
            assert abs(coeff) < 1e-9, f"z^{power} coefficient should vanish"


def test_canonical_order_and_kahler_class():
    two = make_polygon_config(
        QuotientSignature(2, 2, 1), [1.0 + 0j, 1.3 + 0.2j], [0.0, 1.0]
    )
    order = canonical_center_order(two)
    assert sorted(order) == [0, 1, 2, 3]
    bs = [two.centers[i].b for i in order]
    assert bs == sorted(bs, reverse=True)
    vec = kahler_class(two)
    assert vec.shape == (3,)
    assert abs(vec[0]) < 1e-15
    assert abs(vec[1] - 8.0 * math.pi) < 1e-12
    assert abs(vec[2]) < 1e-15
    # coplanar: all entries vanish
    assert np.max(np.abs(kahler_class(pair_config()))) == 0.0


def test_akl_config_layout():
    cfg = make_akl_config(2, 1, 4)
    assert cfg.mode == "akl"
    assert cfg.akl_j_max == 4
    assert cfg.k == 8
    dists = sorted({round(abs(c.a), 9) for c in cfg.centers})
    assert dists == [1.0, 4.0, 9.0, 16.0]
    with pytest.raises(ValueError):
        make_akl_config(2, 1, 0)


def test_config_from_json_round_trip():
    data = {
        "d": 2,
        "n": 2,
        "m": 1,
        "radii": [[1.0, 0.0], [1.3, 0.2]],
        "heights": [0.0, 1.0],
        "mode": "ale",
    }
    cfg = config_from_json(data)
    ref = make_polygon_config(
        QuotientSignature(2, 2, 1), [1.0 + 0j, 1.3 + 0.2j], [0.0, 1.0]
    )
    assert cfg.k == ref.k
    for a, b in zip(cfg.centers, ref.centers):
        assert a.b == b.b and abs(a.a - b.a) < 1e-15


def test_config_from_json_defaults_and_strictness():
    cfg = config_from_json({"d": 1, "n": 2, "m": 1, "radii": [[1.0, 0.0]]})
    assert cfg.mode == "ale"
    assert all(c.b == 0.0 for c in cfg.centers)
    with pytest.raises(ValueError):
        config_from_json({"d": 1, "n": 2, "m": 1, "radii": [[1.0, 0.0]], "zz": 1})
    with pytest.raises(ValueError):
        config_from_json({"n": 2, "m": 1})
    with pytest.raises(ValueError):
        config_from_json({"d": True, "n": 2, "m": 1, "radii": [[1.0, 0.0]]})
    with pytest.raises(ValueError):
        config_from_json({"d": 1, "n": 2, "m": 1, "radii": [[1.0]]})
    with pytest.raises(InvalidSignatureError):
        config_from_json({"d": 1, "n": 4, "m": 2, "radii": [[1.0, 0.0]]})


def test_config_from_json_modes():
    alf = config_from_json(
        {"d": 1, "n": 1, "m": 0, "radii": [[1.0, 0.0]], "mode": "alf"}
    )
    assert alf.mode == "alf"
    akl = config_from_json({"n": 2, "m": 1, "mode": {"akl": 3}})
    assert akl.mode == "akl" and akl.akl_j_max == 3 and akl.k == 6
    with pytest.raises(ValueError):
        config_from_json(
            {"d": 1, "n": 2, "m": 1, "radii": [[1.0, 0.0]], "mode": {"akl": 3}}
        )
    with pytest.raises(ValueError):
        config_from_json({"d": 1, "n": 2, "m": 1, "radii": [[1.0, 0.0]], "mode": "x"})


def test_geometry_helpers():
    cfg = pair_config()
    assert abs(cfg.diameter() - 2.0) < 1e-12
    assert abs(cfg.extent() - 1.0) < 1e-12
    pts = cfg.points_r3()
    assert pts.shape == (2, 3)
