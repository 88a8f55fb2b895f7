import math

import numpy as np
import pytest

from mqlefschetz import geometry as geo
from mqlefschetz.errors import ParseError
from mqlefschetz.maps import (CirclePower, GenericChartMap, Identity,
                              SphereReflection, SphereRotation,
                              SphereSuspension, TorusLinear, compose,
                              parse_manifold, parse_map)

TWO_PI = 2.0 * math.pi


def test_map_eval_examples(circle, torus, sphere):
    f = CirclePower(circle, n=3)
    assert f.evaluate(circle.point([math.pi / 4])).coords[0] \
        == pytest.approx(3 * math.pi / 4)
    g = TorusLinear(torus, matrix=((2, 0), (0, 3)))
    assert np.allclose(g.evaluate(torus.point([1, 1])).coords, [2, 3])
    s = SphereSuspension(sphere, n=4)
    for pole in ([0, 0, 1.0], [0, 0, -1.0]):
        assert np.allclose(s.evaluate(sphere.point(pole)).coords, pole)


def test_differential_examples(circle, torus, sphere):
    f = CirclePower(circle, n=4)
    assert f.differential(circle.point([0.7])) == pytest.approx(np.array([[4.0]]))
    g = TorusLinear(torus, matrix=((2, 1), (1, 1)))
    d1 = g.differential(torus.point([0.3, 5.0]))
    d2 = g.differential(torus.point([4.0, 0.1]))
    assert np.allclose(d1, d2) and np.allclose(d1, [[2, 1], [1, 1]])
    rot = SphereRotation(sphere, axis=(0, 0, 1.0), angle=0.9)
    d = rot.differential(sphere.point([0, 0, 1.0]))
    want = np.array([[math.cos(0.9), -math.sin(0.9)],
                     [math.sin(0.9), math.cos(0.9)]])
    assert np.abs(np.abs(np.trace(d)) - np.abs(np.trace(want))).max() < 1e-12
    fd = rot.with_mode("finite_difference").differential(sphere.point([0, 0, 1.0]))
    assert np.abs(d - fd).max() < 1e-8


def test_identity_differential_exact(sphere, rng):
    f = Identity(sphere)
    for _ in range(10):
        x = sphere.random_point(rng)
        assert np.allclose(f.differential(x), np.eye(2), atol=0)


@pytest.mark.parametrize("family", ["circle_power:3", "circle_power:-2",
                                    "identity"])
def test_analytic_vs_fd_circle(circle, rng, family):
    f = parse_map(family, circle)
    fd = f.with_mode("finite_difference")
    for _ in range(1000):
        x = circle.random_point(rng)
        v = circle.random_tangent(rng, x)
        a = f.push(v).components
        b = fd.push(v).components
        assert np.abs(a - b).max() < 1e-6


@pytest.mark.parametrize("family", [
    "torus_linear:2,0,0,3", "torus_linear:-1,2,1,3",
])
def test_analytic_vs_fd_torus(torus, rng, family):
    f = parse_map(family, torus)
    fd = f.with_mode("finite_difference")
    x = np.stack([torus.random_point(rng).coords for _ in range(1000)])
    xi = rng.normal(size=(1000, 2))
    assert np.abs(f.push_batch(x, xi) - fd.fd_push_batch(x, xi)).max() < 1e-6


@pytest.mark.parametrize("family", [
    "sphere_rotation:0.3,0.4,0.8:0.7", "sphere_reflection:1,2,2",
    "suspension:2", "suspension:3", "suspension:-2", "suspension:-3",
])
def test_analytic_vs_fd_sphere(sphere, rng, family):
    f = parse_map(family, sphere)
    fd = f.with_mode("finite_difference")
    worst = 0.0
    for _ in range(1000):
        x = sphere.random_point(rng)
        if abs(x.coords[2]) > 1.0 - 1e-6:
            continue
        v = sphere.random_tangent(rng, x)
        a = f.push(v).components
        b = fd.push(v).components
        worst = max(worst, float(np.abs(a - b).max()))
    assert worst < 1e-6


def test_operator_norm_examples(circle, torus, rng):
    pts = np.stack([circle.random_point(rng).coords for _ in range(32)])
    assert CirclePower(circle, n=-3).operator_norm_sup(pts) == pytest.approx(3.0)
    assert Identity(circle).operator_norm_sup(pts) == pytest.approx(1.0)
    m = ((2, 1), (1, 1))
    pts2 = np.stack([torus.random_point(rng).coords for _ in range(32)])
    got = TorusLinear(torus, matrix=m).operator_norm_sup(pts2)
    want = float(np.linalg.svd(np.asarray(m, float), compute_uv=False)[0])
    assert got == pytest.approx(want, abs=1e-12)


def test_chain_rule_via_composition(torus, rng):
    f = GenericChartMap(
        torus,
        fn=lambda c: np.stack([c[..., 0] + 0.3 * np.sin(c[..., 1]),
                               c[..., 1] + 0.2 * np.cos(c[..., 0])], axis=-1),
        name="shear")
    ff = compose(f, f)
    for _ in range(25):
        x = torus.random_point(rng)
        fx = f.evaluate(x)
        lhs = ff.differential(x)
        rhs = f.differential(fx) @ f.differential(x)
        assert np.abs(lhs - rhs).max() < 1e-8


def test_suspension_pole_behavior(sphere):
    s = SphereSuspension(sphere, n=2)
    north = sphere.point([0, 0, 1.0])
    south = sphere.point([0, 0, -1.0])
    assert np.allclose(s.differential(north), 0.0, atol=1e-12)
    assert np.allclose(s.differential(south), 0.0, atol=1e-12)
    # equatorial fixed points of w -> w^2 carry df = 2 Id
    eq = sphere.point([1.0, 0, 0])
    assert np.allclose(np.abs(np.linalg.eigvals(s.differential(eq))), 2.0)


def test_degree_attribute(circle, torus, sphere):
    assert CirclePower(circle, n=-2).degree == -2
    assert TorusLinear(torus, matrix=((2, 1), (1, 1))).degree == 1
    assert SphereRotation(sphere, axis=(0, 0, 1.0), angle=1.0).degree == 1
    assert SphereReflection(sphere, normal=(0, 0, 1.0)).degree == -1
    assert SphereSuspension(sphere, n=-3).degree == -3


def test_generic_chart_degree(circle):
    doubling = GenericChartMap(circle, fn=lambda c: 2.0 * c, name="double")
    assert doubling.degree == 2


def test_parsers(circle, torus, sphere):
    assert parse_map("circle_power:3", circle).n == 3
    assert parse_map("torus_linear:2,0,0,3", torus).matrix == ((2, 0), (0, 3))
    rot = parse_map("sphere_rotation:0,0,1:1.57", sphere)
    assert rot.angle == pytest.approx(1.57)
    assert parse_map("sphere_reflection:0,0,1", sphere).normal == (0, 0, 1)
    assert parse_map("suspension:2", sphere).n == 2
    assert parse_map("identity", sphere).family == "identity"
    with pytest.raises(ParseError):
        parse_map("circle_power:x", circle)
    with pytest.raises(ParseError):
        parse_map("unknown:1", circle)
    g = parse_manifold("torus:6.2831853,6.2831853")
    assert g.dim == 2
    assert parse_manifold("sphere").kind == "sphere2"
    with pytest.raises(ParseError):
        parse_manifold("klein_bottle")


def test_torus_linear_integrality_enforced(torus):
    with pytest.raises(ValueError):
        TorusLinear(torus, matrix=((1.5, 0), (0, 1)))
