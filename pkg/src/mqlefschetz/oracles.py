"""Independent topological computations of the Lefschetz number.

Three mutually independent routes are provided:

  * fixed-point signs        L(f) = sum over fixed p of sgn det(Id - df_p)
  * fixed-submanifold sums   L(f) = sum_j sgn(det(Id - df_nu)) chi(N_j)
  * cohomological traces     L(f) = sum_q (-1)^q tr(f* on H^q)

plus Hopf winding indices of vector fields on 2-manifold patches, used to
evaluate the singular cut-locus current.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .errors import (CleanIntersectionViolation, DegenerateFixedSet,
                     DegenerateRecord, ZeroOnCircle)
from .geometry import ManifoldPoint, ModelGeometry, TangentVector
from .maps import (CirclePower, GenericChartMap, Identity, SmoothSelfMap,
                   SphereReflection, SphereRotation, SphereSuspension,
                   TorusLinear)

NONDEGENERACY_TOL = 1e-9


def euler_characteristic(g: ModelGeometry) -> int:
    return 2 if g.kind == geo.SPHERE2 else 0


@dataclass(frozen=True)
class FixedPointRecord:
    """One fixed point with its differential and orientation sign."""

    point: ManifoldPoint
    differential: np.ndarray
    det_id_minus_df: float

    @property
    def nondegenerate(self) -> bool:
        return abs(self.det_id_minus_df) > NONDEGENERACY_TOL

    @property
    def sign(self) -> int:
        if not self.nondegenerate:
            raise DegenerateRecord("sign undefined: det(Id - df) = 0")
        return 1 if self.det_id_minus_df > 0 else -1


@dataclass(frozen=True)
class FixedSubmanifold:
    """A positive-dimensional fixed component (or the whole manifold)."""

    description: str          # "all" | "equator"
    euler_characteristic: int
    normal_sign: int          # sgn det(Id - df_nu); +1 by convention at rank 0
    codimension: int
    data: tuple = ()          # equator: the axis it is orthogonal to


def _record(g: ModelGeometry, f: SmoothSelfMap, x: ManifoldPoint) -> FixedPointRecord:
    d = f.differential(x)
    det = float(np.linalg.det(np.eye(g.dim) - d))
    return FixedPointRecord(x, d, det)


def find_fixed_points(g: ModelGeometry, f: SmoothSelfMap,
                      grid_resolution: int = 96):
    """Complete fixed set of a built-in family (closed forms), or a
    grid-plus-Newton search for generic chart maps.

    Returns a list of FixedPointRecord or a FixedSubmanifold.
    """
    if isinstance(f, Identity):
        return FixedSubmanifold("all", euler_characteristic(g), 1, 0)
    if isinstance(f, CirclePower):
        n = f.n
        if n == 1:
            return FixedSubmanifold("all", 0, 1, 0)
        period = g.periods[0]
        count = abs(n - 1)
        return [_record(g, f, g.point([k * period / count]))
                for k in range(count)]
    if isinstance(f, TorusLinear):
        return _torus_linear_fixed_points(g, f)
    if isinstance(f, SphereRotation):
        if math.isclose(math.sin(f.angle), 0.0, abs_tol=1e-12) and \
           math.isclose(math.cos(f.angle), 1.0, abs_tol=1e-12):
            return FixedSubmanifold("all", 2, 1, 0)
        axis = np.asarray(f.axis, float)
        axis = axis / np.linalg.norm(axis)
        return [_record(g, f, g.point(axis)), _record(g, f, g.point(-axis))]
    if isinstance(f, SphereReflection):
        n = np.asarray(f.normal, float)
        n = n / np.linalg.norm(n)
        # fixed great circle, df_nu = -1 on the normal line
        return FixedSubmanifold("equator", 0, 1, 1, data=tuple(n))
    if isinstance(f, SphereSuspension):
        return _suspension_fixed_points(g, f)
    if isinstance(f, GenericChartMap):
        return _generic_fixed_points(g, f, grid_resolution)
    raise ValueError(f"no fixed-point oracle for family {f.family!r}")


def _torus_linear_fixed_points(g: ModelGeometry, f: TorusLinear):
    m = f.as_array()
    n = g.dim
    a = m - np.eye(n)
    det = float(np.linalg.det(a))
    if abs(det) < 0.5:
        raise DegenerateFixedSet("det(M - I) = 0: fixed set is not finite")
    count = int(round(abs(det)))
    period = g.periods[0]
    inv = np.linalg.inv(a)
    bound = int(np.max(np.abs(a)).item() * n) + 1
    seen: list[np.ndarray] = []
    records = []
    for k in np.ndindex(*(2 * bound + 1,) * n):
        kvec = np.array(k) - bound
        x = np.mod(inv @ (period * kvec), period)
        if any(np.linalg.norm(geo.wrap_batch(g, x - s)) < 1e-8 for s in seen):
            continue
        seen.append(x)
        records.append(_record(g, f, g.point(x)))
    if len(records) != count:
        raise DegenerateFixedSet(
            f"expected {count} fixed points, found {len(records)}")
    return records


def _suspension_fixed_points(g: ModelGeometry, f: SphereSuspension):
    n = f.n
    if n == 1:
        return FixedSubmanifold("all", 2, 1, 0)
    if n == -1:
        # w -> conj(w) is the reflection fixing the great circle x2 = 0
        return FixedSubmanifold("equator", 0, 1, 1, data=(0.0, 1.0, 0.0))
    if n == 0:
        return [_record(g, f, g.point([1.0, 0.0, 0.0]))]
    records = [_record(g, f, g.point([0.0, 0.0, 1.0])),
               _record(g, f, g.point([0.0, 0.0, -1.0]))]
    count = abs(n - 1)
    for k in range(count):
        theta = 2.0 * math.pi * k / count
        records.append(_record(g, f, g.point([math.cos(theta),
                                              math.sin(theta), 0.0])))
    return records


def _generic_fixed_points(g: ModelGeometry, f: GenericChartMap,
                          resolution: int, newton_steps: int = 40):
    p = np.asarray(g.periods)
    axes = [(np.arange(resolution)) * pi / resolution for pi in p]
    seeds = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, g.dim)
    disp = geo.wrap_batch(g, f.eval_batch(seeds) - seeds)
    norms = np.linalg.norm(disp, axis=-1)
    spacing = float(np.max(p) / resolution)
    candidates = seeds[norms < 2.0 * spacing * (1.0 + _opnorm_estimate(f, seeds))]
    h = f.step
    found: list[np.ndarray] = []
    records = []
    for seed in candidates:
        x = seed.copy()
        ok = False
        for _ in range(newton_steps):
            r = geo.wrap_batch(g, f.eval_batch(x[None])[0] - x)
            if np.linalg.norm(r) < 1e-12:
                ok = True
                break
            jac = _chart_jacobian(f, x) - np.eye(g.dim)
            try:
                x = np.mod(x - np.linalg.solve(jac, r), p)
            except np.linalg.LinAlgError:
                break
        if not ok:
            continue
        if any(np.linalg.norm(geo.wrap_batch(g, x - q)) < 1e-6 for q in found):
            continue
        found.append(x)
        records.append(_record(g, f, g.point(x)))
    return records


def _chart_jacobian(f: SmoothSelfMap, x: np.ndarray) -> np.ndarray:
    n = len(x)
    cols = [f.push_tangent_batch(x[None], np.eye(n)[k][None])[0] for k in range(n)]
    return np.stack(cols, axis=-1)


def _opnorm_estimate(f: SmoothSelfMap, seeds: np.ndarray, samples: int = 9) -> float:
    step = max(1, len(seeds) // samples)
    return max(float(np.linalg.norm(_chart_jacobian(f, s), 2))
               for s in seeds[::step])


def fixed_point_lefschetz_sum(records) -> int:
    """Sum of orientation signs over a complete nondegenerate fixed set."""
    if isinstance(records, FixedSubmanifold):
        raise DegenerateRecord("fixed set is a positive-dimensional submanifold")
    return sum(rec.sign for rec in records)


def fixed_submanifold_sum(components) -> int:
    """L(f) = sum_j sgn(det(Id - df_nu)) chi(N_j) over fixed components,
    given (chi, det(Id - df_nu)) pairs (det +1 by convention at normal rank 0)."""
    total = 0
    for chi, det_nu in components:
        if abs(det_nu) < NONDEGENERACY_TOL:
            raise CleanIntersectionViolation(
                "component with det(Id - df_nu) = 0")
        total += (1 if det_nu > 0 else -1) * int(chi)
    return total


def cohomological_lefschetz(f: SmoothSelfMap) -> int:
    """Alternating trace of f* on cohomology for the built-in families."""
    g = f.geometry
    if isinstance(f, Identity):
        return euler_characteristic(g)
    if isinstance(f, CirclePower):
        return 1 - f.n
    if isinstance(f, TorusLinear):
        m = f.as_array()
        return int(round(float(np.linalg.det(np.eye(g.dim) - m))))
    if isinstance(f, SphereRotation):
        return 2
    if isinstance(f, SphereReflection):
        return 0
    if isinstance(f, SphereSuspension):
        return 1 + f.n
    if isinstance(f, GenericChartMap) and g.kind == geo.CIRCLE:
        return 1 - f.degree
    raise ValueError(f"no cohomological oracle for family {f.family!r}")


# ---------------------------------------------------------------------------
# Hopf winding indices
# ---------------------------------------------------------------------------

def winding_index(field, center: ManifoldPoint, radius: float,
                  samples: int = 256) -> int:
    """Winding number of a tangent field around ``center`` on a 2-manifold.

    The field is sampled on the geodesic circle of the given radius, parallel
    transported back to the center, and its direction angle is unwrapped.
    Raises ZeroOnCircle if the field (nearly) vanishes on the circle.
    """
    g = center.geometry
    if g.dim != 2:
        raise ValueError("winding index needs a 2-manifold")
    frame = geo.frame_at(g, center)
    e1, e2 = frame[0].components, frame[1].components
    angles = np.empty(samples + 1)
    for i in range(samples + 1):
        t = 2.0 * math.pi * i / samples
        v = math.cos(t) * e1 + math.sin(t) * e2
        p = geo.exp_map(g, TangentVector(center, radius * v))
        w = field(p)
        if not isinstance(w, TangentVector):
            w = TangentVector(p, np.asarray(w, float))
        gd = geo.geodesic_between(g, center, p)
        back = geo.parallel_transport(g, gd, w).components
        a = float(geo.tangent_inner(g, back, e1))
        b = float(geo.tangent_inner(g, back, e2))
        if math.hypot(a, b) < 1e-12:
            raise ZeroOnCircle(f"field vanishes at sample {i}")
        angles[i] = math.atan2(b, a)
    total = np.sum(np.mod(np.diff(angles) + math.pi, 2.0 * math.pi) - math.pi)
    winding = total / (2.0 * math.pi)
    if abs(winding - round(winding)) > 0.05:
        raise ZeroOnCircle(f"winding {winding:.3f} is not close to an integer")
    return int(round(winding))


def map_displacement_field(g: ModelGeometry, f: SmoothSelfMap):
    """The vector field V_f(x) = exp_x^{-1}(f(x)) used by the cut-locus
    current; defined away from the cut locus of f."""

    def field(p: ManifoldPoint) -> TangentVector:
        return geo.log_map(g, p, f.evaluate(p))

    return field
