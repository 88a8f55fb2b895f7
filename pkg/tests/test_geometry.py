import math

import numpy as np
import pytest

from mqlefschetz import geometry as geo
from mqlefschetz.errors import BaseMismatch, CutLocusViolation
from mqlefschetz.geometry import ModelGeometry, TangentVector

TWO_PI = 2.0 * math.pi


def test_descriptor_constants(circle, torus, sphere):
    assert circle.curvature == 0 and torus.curvature == 0
    assert sphere.curvature == 1
    assert ModelGeometry.hyperbolic_patch().curvature == -1
    assert circle.injectivity_radius == pytest.approx(math.pi)
    assert torus.injectivity_radius == pytest.approx(math.pi)
    assert sphere.injectivity_radius == pytest.approx(math.pi)
    assert sphere.volume == pytest.approx(4 * math.pi)
    assert torus.volume == pytest.approx(4 * math.pi ** 2)


def test_json_round_trip(circle, torus, sphere, hyperbolic):
    for g in (circle, torus, sphere, hyperbolic):
        assert ModelGeometry.from_json(g.to_json()) == g
    assert sphere.to_dict() == {"kind": "sphere2"}
    assert circle.to_dict() == {"kind": "circle", "radius": 1.0}


def test_exp_map_examples(circle, torus, sphere):
    # flat 1D addition
    x = circle.point([0.0])
    out = geo.exp_map(circle, TangentVector(x, [math.pi / 2]))
    assert out.coords[0] == pytest.approx(math.pi / 2)
    # antipode at |v| = pi
    north = sphere.point([0.0, 0.0, 1.0])
    v = TangentVector(north, [math.pi, 0.0, 0.0])
    south = geo.exp_map(sphere, v)
    assert np.allclose(south.coords, [0, 0, -1], atol=1e-12)
    # periodicity
    x = torus.point([0.1, 0.2])
    out = geo.exp_map(torus, TangentVector(x, [TWO_PI, 0.0]))
    assert np.allclose(out.coords, [0.1, 0.2], atol=1e-12)


def test_geodesic_examples(torus, sphere):
    north = sphere.point([0.0, 0.0, 1.0])
    eq = sphere.point([1.0, 0.0, 0.0])
    gd = geo.geodesic_between(sphere, north, eq)
    assert gd.distance == pytest.approx(math.pi / 2)
    assert gd.midpoint.coords[2] == pytest.approx(math.sin(math.pi / 4))
    # torus cut locus: (pi, 0) has two minimal geodesics from the origin
    with pytest.raises(CutLocusViolation):
        geo.geodesic_between(torus, torus.point([0, 0]), torus.point([math.pi, 0]))
    gd = geo.geodesic_between(torus, torus.point([0, 0]), torus.point([1, 1]))
    assert gd.distance == pytest.approx(math.sqrt(2))
    assert np.allclose(gd.midpoint.coords, [0.5, 0.5])


def _coords_close(g, p, q, tol):
    if g.kind in (geo.CIRCLE, geo.TORUS):
        return np.linalg.norm(geo.wrap_batch(g, p.coords - q.coords)) < tol
    return np.linalg.norm(p.coords - q.coords) < tol  # chord ~ distance


def test_geodesic_reproduces_endpoints(rng, circle, torus, sphere, hyperbolic):
    for g in (circle, torus, sphere, hyperbolic):
        for _ in range(40):
            x = g.random_point(rng)
            v = g.random_tangent(rng, x,
                                 norm=rng.uniform(0.05, 0.9)
                                 * min(g.injectivity_radius, 2.0))
            y = geo.exp_map(g, v)
            gd = geo.geodesic_between(g, x, y)
            half = gd.distance / 2.0
            t = gd.unit_tangent_at_midpoint
            x2 = geo.exp_map(g, TangentVector(gd.midpoint, -half * t.components))
            y2 = geo.exp_map(g, TangentVector(gd.midpoint, half * t.components))
            assert _coords_close(g, x2, x, 1e-10)
            assert _coords_close(g, y2, y, 1e-10)


def test_exp_log_round_trip(rng, circle, torus, sphere, hyperbolic):
    for g in (circle, torus, sphere, hyperbolic):
        for _ in range(60):
            x = g.random_point(rng)
            norm = rng.uniform(1e-3, 0.9) * min(g.injectivity_radius, 2.0)
            v = g.random_tangent(rng, x, norm=norm)
            y = geo.exp_map(g, v)
            gd = geo.geodesic_between(g, x, y)
            assert gd.distance == pytest.approx(norm, abs=1e-9)
            back = geo.log_map(g, x, y)
            assert np.allclose(back.components, v.components, atol=1e-9)


def test_midpoint_symmetry(rng, torus, sphere):
    for g in (torus, sphere):
        for _ in range(40):
            x, y = g.random_point(rng), g.random_point(rng)
            if geo.cut_margin(g, x, y) <= 1e-6:
                continue
            m1 = geo.geodesic_between(g, x, y).midpoint
            m2 = geo.geodesic_between(g, y, x).midpoint
            assert _coords_close(g, m1, m2, 1e-10)


def test_parallel_transport(rng, torus, sphere):
    # flat transport preserves components
    x, y = torus.point([1, 2]), torus.point([2, 2.5])
    gd = geo.geodesic_between(torus, x, y)
    w = TangentVector(y, [0.3, -0.7])
    out = geo.parallel_transport(torus, gd, w)
    assert np.allclose(out.components, [0.3, -0.7])
    with pytest.raises(BaseMismatch):
        geo.parallel_transport(torus, gd, TangentVector(x, [1.0, 0.0]))
    # the geodesic tangent is parallel along a quarter great circle
    north = sphere.point([0, 0, 1.0])
    eq = sphere.point([1.0, 0, 0])
    gd = geo.geodesic_between(sphere, north, eq)
    tangent_at_eq = TangentVector(eq, [0, 0, -1.0])  # direction away from north
    out = geo.parallel_transport(sphere, gd, tangent_at_eq)
    assert np.allclose(out.components, [1.0, 0, 0], atol=1e-12)


def test_sphere_transport_vs_rotation_oracle(rng, sphere):
    # transport along a great-circle arc equals the rotation in the x-y plane
    for _ in range(25):
        a1 = rng.uniform(0.2, math.pi - 0.2)
        x = sphere.point([1.0, 0.0, 0.0])
        y = sphere.point([math.cos(a1), math.sin(a1), 0.0])
        gd = geo.geodesic_between(sphere, x, y)
        w = rng.normal(size=3)
        w -= (w @ y.coords) * y.coords
        rot = np.array([[math.cos(a1), math.sin(a1), 0.0],
                        [-math.sin(a1), math.cos(a1), 0.0],
                        [0.0, 0.0, 1.0]])
        expected = rot @ w
        out = geo.parallel_transport(sphere, gd, TangentVector(y, w))
        assert np.allclose(out.components, expected, atol=1e-9)


def test_transport_orthogonality(rng, torus, sphere, hyperbolic):
    for g in (torus, sphere, hyperbolic):
        for _ in range(40):
            x, y = g.random_point(rng), g.random_point(rng)
            if geo.cut_margin(g, x, y) <= 1e-6:
                continue
            t = geo.geodesic_between(g, x, y).transport_y_to_x
            assert np.abs(t @ t.T - np.eye(g.dim)).max() < 1e-12
            assert np.linalg.det(t) == pytest.approx(1.0, abs=1e-12)


def test_cut_margin(circle, torus, sphere):
    x = sphere.point([0, 0, 1.0])
    assert geo.cut_margin(sphere, x, sphere.point([0, 0, -1.0])) \
        == pytest.approx(0.0, abs=1e-12)
    assert geo.cut_margin(torus, torus.point([0, 0]),
                          torus.point([math.pi - 0.1, 0])) == pytest.approx(0.1)
    x = circle.point([1.3])
    assert geo.cut_margin(circle, x, x) == pytest.approx(math.pi)


def test_cut_margin_consistency(rng, circle, torus, sphere):
    for g in (circle, torus, sphere):
        for _ in range(60):
            x, y = g.random_point(rng), g.random_point(rng)
            margin = geo.cut_margin(g, x, y)
            if margin > 0:
                geo.geodesic_between(g, x, y)
            else:
                with pytest.raises(CutLocusViolation):
                    geo.geodesic_between(g, x, y)


def test_tube_membership(sphere, torus):
    x = torus.point([0, 0])
    assert geo.tube_membership(torus, x, x, 0.3)
    eps = 0.3
    on_boundary = torus.point([math.sqrt(2) * eps, 0])
    assert not geo.tube_membership(torus, x, on_boundary, eps)
    # cut-locus-width tube on the sphere contains everything except antipodes
    x = sphere.point([0, 0, 1.0])
    y = sphere.point([math.sin(3.0), 0, math.cos(3.0)])
    assert geo.tube_membership(sphere, x, y, math.pi)
    with pytest.raises(ValueError):
        geo.tube_membership(sphere, x, y, 4.0)


def test_sphere_tangent_orthogonality_enforced(sphere):
    x = sphere.point([0, 0, 1.0])
    with pytest.raises(ValueError):
        TangentVector(x, [0, 0, 1.0])
    v = TangentVector(x, [1.0, 0, 1e-11])  # small drift is projected away
    assert abs(v.components @ x.coords) < 1e-15


def test_point_canonicalization(circle, torus):
    p = torus.point([TWO_PI + 0.3, -0.1])
    assert np.allclose(p.coords, [0.3, TWO_PI - 0.1])
    assert circle.point([-1.0]).coords[0] == pytest.approx(TWO_PI - 1.0)
