import math

import numpy as np
import pytest

from mqlefschetz import geometry as geo
from mqlefschetz.errors import ConjugatePoint
from mqlefschetz.geometry import TangentVector
from mqlefschetz.integrand import (RadialProfile, _geodesic_frame,
                                   _mu_pair_sum_bruteforce, ab_matrices,
                                   assemble_constcurv_pointwise,
                                   flat_pointwise, jacobi_decompose,
                                   lefschetz_integrand_constcurv,
                                   lefschetz_integrand_flat, profile_eval,
                                   surface_bracket_closed_form,
                                   transported_df_geodesic_frame)
from mqlefschetz.maps import CirclePower, Identity, SphereRotation, TorusLinear


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

def test_profile_limits_at_zero():
    sec = profile_eval(RadialProfile("sec", 1.0), 0.0)
    assert (sec.rho, sec.drho, sec.rho_over_r) == (0.0, 0.0, 0.0)
    rat = profile_eval(RadialProfile("rational", 1.0), 0.0)
    assert (rat.rho, rat.drho, rat.rho_over_r) == (0.0, 1.0, 1.0)
    tan = profile_eval(RadialProfile("tan", 2.0), 0.0)
    assert tan.drho == pytest.approx(math.pi / 4)


def test_profile_outside_sentinel():
    for kind in ("sec", "tan", "rational"):
        p = RadialProfile(kind, 0.7)
        assert profile_eval(p, 0.7).outside
        assert profile_eval(p, 1.4).outside
        assert not profile_eval(p, 0.69).outside


def test_profile_monotone_and_decaying(rng):
    r = np.linspace(0.0, 0.999, 4000)
    for kind in ("sec", "tan", "rational"):
        p = RadialProfile(kind, 1.0)
        rho, drho, ror, inside = p.eval_batch(r)
        assert inside.all()
        assert np.all(np.diff(rho) > 0)
        tail = np.exp(-p.eval_batch(np.asarray([0.999999]))[0] ** 2) \
            * p.eval_batch(np.asarray([0.999999]))[1]
        assert tail[0] < 1e-12  # e^{-rho^2} rho' -> 0 at the tube edge

    # secant Taylor check: rho ~ (pi r / 2 eps)^2 / 2
    p = RadialProfile("sec", 1.0)
    small = 1e-4
    rho = p.eval_batch(np.asarray([small]))[0][0]
    assert rho == pytest.approx((math.pi * small / 2.0) ** 2 / 2.0, rel=1e-6)


# ---------------------------------------------------------------------------
# jacobi decomposition
# ---------------------------------------------------------------------------

def _random_geodesic(rng, g, dmax):
    x = g.random_point(rng)
    v = g.random_tangent(rng, x, norm=rng.uniform(0.05, dmax))
    y = geo.exp_map(g, v)
    return geo.geodesic_between(g, x, y)


def test_jacobi_flat_vertical_pattern(rng, torus):
    # kappa = 0 with fq the transported q: vertical part is (q - fq)/2
    gd = _random_geodesic(rng, torus, 1.2)
    q = torus.random_tangent(rng, gd.x, norm=1.4)
    fq = TangentVector(gd.y, q.components)  # flat transport keeps components
    vh = jacobi_decompose(0.0, gd, q, fq)
    assert np.allclose(vh.vertical_at_x.components, 0.0, atol=1e-12)
    assert np.allclose(vh.horizontal_at_x.components, q.components, atol=1e-12)


def test_jacobi_hyperbolic_midpoint_velocity(rng, hyperbolic):
    # normal midpoint velocity (w2 - q2) / (2 sinh(d/2))
    gd = _random_geodesic(rng, hyperbolic, 1.5)
    q = hyperbolic.random_tangent(rng, gd.x, norm=0.9)
    fq = hyperbolic.random_tangent(rng, gd.y, norm=1.1)
    vh = jacobi_decompose(-1.0, gd, q, fq)
    ex, ey = _geodesic_frame(hyperbolic, gd)
    sgn = np.array([1.0, 1.0, -1.0])
    q2 = float((ex[1] * sgn) @ q.components)
    w2 = float((ey[1] * sgn) @ fq.components)
    want = (w2 - q2) / (2.0 * math.sinh(gd.distance / 2.0))
    assert vh.midpoint_velocity[1] == pytest.approx(want, abs=1e-12)


def test_jacobi_sphere_small_d_matches_flat(rng, sphere, torus):
    # kappa = +1 midpoint data reduces to the flat one within O(d^2)
    for _ in range(50):
        x = sphere.random_point(rng)
        d = rng.uniform(1e-4, 3e-2)
        v = sphere.random_tangent(rng, x, norm=d)
        y = geo.exp_map(sphere, v)
        gd = geo.geodesic_between(sphere, x, y)
        q = sphere.random_tangent(rng, x, norm=1.0)
        fq = sphere.random_tangent(rng, y, norm=1.0)
        curved = jacobi_decompose(1.0, gd, q, fq)
        flat = jacobi_decompose(0.0, gd, q, fq)
        assert np.abs(curved.midpoint_position
                      - flat.midpoint_position).max() < 2.0 * d ** 2
        assert np.abs(curved.midpoint_velocity - flat.midpoint_velocity).max() \
            < 2.0 * d ** 2 / d  # velocity scale carries 1/d


def test_jacobi_linearity_invariant(rng, sphere, torus, hyperbolic):
    cases = [(1.0, sphere, 0.9 * math.pi), (0.0, torus, 2.0),
             (-1.0, hyperbolic, 2.0)]
    for kappa, g, dmax in cases:
        for _ in range(10_000 // 10):  # 1000 random samples per curvature
            gd = _random_geodesic(rng, g, dmax)
            q = g.random_tangent(rng, gd.x, norm=rng.uniform(0.1, 2.0))
            fq = g.random_tangent(rng, gd.y, norm=rng.uniform(0.1, 2.0))
            vh = jacobi_decompose(kappa, gd, q, fq)
            assert np.abs(vh.vertical_at_x.components
                          + vh.horizontal_at_x.components
                          - q.components).max() < 1e-10
            assert np.abs(vh.vertical_at_y.components
                          + vh.horizontal_at_y.components
                          - fq.components).max() < 1e-10


def test_jacobi_conjugate_point(rng, sphere):
    x = sphere.point([0, 0, 1.0])
    v = TangentVector(x, [0.9999 * math.pi, 0, 0])
    y = geo.exp_map(sphere, v)
    gd = geo.geodesic_between(sphere, x, y)
    q = sphere.random_tangent(rng, x)
    fq = sphere.random_tangent(rng, y)
    jacobi_decompose(1.0, gd, q, fq)  # d < pi is fine
    fake = geo.GeodesicData(sphere, gd.x, gd.y, math.pi, gd.midpoint,
                            gd.unit_tangent_at_midpoint, gd.unit_tangent_at_x,
                            gd.transport_y_to_x)
    with pytest.raises(ConjugatePoint):
        jacobi_decompose(1.0, fake, q, fq)


# ---------------------------------------------------------------------------
# A/B matrices
# ---------------------------------------------------------------------------

def test_ab_flat_exact(rng, torus):
    f = TorusLinear(torus, matrix=((2, 1), (1, 1)))
    for _ in range(20):
        x = torus.random_point(rng)
        y = f.evaluate(x)
        if geo.cut_margin(torus, x, y) <= 1e-9:
            continue
        gd = geo.geodesic_between(torus, x, y)
        d = f.differential(x)
        ab = ab_matrices(0.0, gd, d)
        w = transported_df_geodesic_frame(torus, gd, d)
        assert np.allclose(ab.a, 0.5 * (w + np.eye(2)), atol=0)
        assert np.allclose(ab.b, 0.5 * (w - np.eye(2)), atol=0)


def test_ab_hyperbolic_det_structure(rng, hyperbolic):
    for _ in range(25):
        gd = _random_geodesic(rng, hyperbolic, 2.0)
        df = rng.normal(size=(2, 2))
        ab = ab_matrices(-1.0, gd, df)
        w = transported_df_geodesic_frame(hyperbolic, gd, df)
        d = gd.distance
        # det B = d / (2 sinh(d/2)) det((transport df - Id)/2)
        want_b = d / (2.0 * math.sinh(d / 2.0)) \
            * np.linalg.det(0.5 * (w - np.eye(2)))
        assert np.linalg.det(ab.b) == pytest.approx(want_b, abs=1e-10)
        want_a = np.linalg.det(0.5 * (w + np.eye(2))) / math.cosh(d / 2.0)
        assert np.linalg.det(ab.a) == pytest.approx(want_a, abs=1e-10)


def test_ab_identity_transported_gives_singular_b(rng, hyperbolic):
    # df = transport^(-1) makes transport o df = Id, so det B = 0
    gd = _random_geodesic(rng, hyperbolic, 1.4)
    t = gd.transport_y_to_x
    ab = ab_matrices(-1.0, gd, np.linalg.inv(t))
    assert abs(np.linalg.det(ab.b)) < 1e-12


# ---------------------------------------------------------------------------
# integrand assembly
# ---------------------------------------------------------------------------

def test_assembly_equals_closed_form_and_mu_sum(rng):
    prof = RadialProfile("sec", 0.45 * math.pi)
    for kappa in (-1.0, 1.0):
        for _ in range(1000):
            w = rng.normal(size=(2, 2)) * rng.uniform(0.3, 2.0)
            d = rng.uniform(1e-3, 0.62 * math.pi)
            a = assemble_constcurv_pointwise(w, d, prof, kappa)
            b = surface_bracket_closed_form(w, d, prof, kappa)
            assert a == pytest.approx(b, abs=1e-10)
    for kappa in (-1.0, 1.0):
        for _ in range(100):
            w = rng.normal(size=(2, 2))
            d = rng.uniform(1e-3, 0.62 * math.pi)
            a = assemble_constcurv_pointwise(w, d, prof, kappa)
            c = assemble_constcurv_pointwise(
                w, d, prof, kappa, pair_sum=_mu_pair_sum_bruteforce)
            assert a == pytest.approx(c, abs=1e-12)


def test_assembly_fixed_point_limit(rng):
    # d -> 0 approaches the fixed-point integrand (O(d^2) curvature terms)
    prof = RadialProfile("sec", 0.45 * math.pi)
    for kappa in (-1.0, 1.0):
        w = rng.normal(size=(2, 2))
        base = assemble_constcurv_pointwise(w, 1e-8, prof, kappa)
        drift = assemble_constcurv_pointwise(w, 1e-3, prof, kappa)
        assert drift == pytest.approx(base, abs=1e-4)
        vals = [assemble_constcurv_pointwise(w, d, prof, kappa)
                for d in (1e-2, 5e-3, 2.5e-3)]
        diffs = np.abs(np.diff(vals))
        assert diffs[1] < diffs[0]  # converging as d -> 0


def test_assembly_flat_scaling_limit(rng):
    # kappa -> 0 recovers the flat integrand to O(kappa)
    prof = RadialProfile("rational", 0.45 * math.pi)
    for _ in range(200):
        w = rng.normal(size=(2, 2))
        d = rng.uniform(1e-3, 0.6)
        flat = flat_pointwise(w, d, prof)
        for kappa in (1e-3, -1e-3):
            curved = assemble_constcurv_pointwise(w, d, prof, kappa)
            assert abs(curved - flat) < 0.5 * abs(kappa)


def test_flat_integrand_identity_vanishes(rng, torus):
    prof = RadialProfile.for_geometry(torus)
    f = Identity(torus)
    for _ in range(20):
        x = torus.random_point(rng)
        assert lefschetz_integrand_flat(torus, f, prof, x) == 0.0


def test_flat_integrand_outside_tube(rng, torus):
    prof = RadialProfile.for_geometry(torus)
    f = TorusLinear(torus, matrix=((2, 0), (0, 3)))
    x = torus.point([2.0, 1.1])  # d(x, f(x)) far beyond sqrt(2) eps
    d = geo.distance(torus, x, f.evaluate(x))
    assert d >= math.sqrt(2) * prof.epsilon
    assert lefschetz_integrand_flat(torus, f, prof, x) == 0.0


def test_constcurv_identity_is_gauss_curvature_density(rng, sphere):
    prof = RadialProfile.for_geometry(sphere)
    f = Identity(sphere)
    for _ in range(10):
        x = sphere.random_point(rng)
        val = lefschetz_integrand_constcurv(sphere, f, prof, x)
        assert val == pytest.approx(1.0 / (2.0 * math.pi), abs=1e-14)


def test_constcurv_pointwise_from_map(rng, sphere):
    # spec-level integrand path agrees with the geodesic-frame assembly
    prof = RadialProfile.for_geometry(sphere)
    f = SphereRotation(sphere, axis=(0, 0, 1.0), angle=0.8)
    for _ in range(25):
        x = sphere.random_point(rng)
        y = f.evaluate(x)
        if geo.cut_margin(sphere, x, y) < 1e-6:
            continue
        gd = geo.geodesic_between(sphere, x, y)
        w = transported_df_geodesic_frame(sphere, gd, f.differential(x))
        direct = assemble_constcurv_pointwise(w, gd.distance, prof, 1.0)
        via_map = lefschetz_integrand_constcurv(sphere, f, prof, x)
        assert via_map == pytest.approx(direct, abs=1e-12)


def test_profile_invariance_of_circle_integral(circle):
    # same converged integral for both admissible profile families
    from mqlefschetz.quadrature import compute_lefschetz
    f = CirclePower(circle, n=3)
    vals = {}
    for kind in ("sec", "rational"):
        rep = compute_lefschetz(circle, f, RadialProfile.for_geometry(circle, kind),
                                resolution=4096)
        vals[kind] = rep.integral
    assert abs(vals["sec"] - vals["rational"]) < 2e-3
    # halving epsilon moves the converged value by < 2e-3
    narrow = RadialProfile("rational", 0.225 * math.pi)
    rep = compute_lefschetz(circle, f, narrow, resolution=4096)
    assert abs(rep.integral - vals["rational"]) < 2e-3
