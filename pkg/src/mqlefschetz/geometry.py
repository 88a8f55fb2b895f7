"""Exact geometric primitives for the model constant-curvature manifolds.

Four model geometries are supported, each with closed-form exponential map,
distance, midpoint, parallel transport, and cut-locus data:

  * ``circle``            -- S^1 of radius r, curvature 0, chart = arc length mod 2*pi*r
  * ``torus``             -- flat torus R^n / (p_1 Z x ... x p_n Z), n in {1,2,3}
  * ``sphere2``           -- round unit 2-sphere, curvature +1, points as unit 3-vectors
  * ``hyperbolic_patch``  -- curvature -1 plane, hyperboloid model, local chart only

Tangent vectors on the flat models are chart vectors; on the curved models
they are ambient 3-vectors tangent to the embedded model surface (Euclidean
orthogonality for the sphere, Minkowski orthogonality for the hyperboloid).

Every operation is a pure function of its arguments.  Scalar point/tangent
objects wrap the vectorised kernels (functions suffixed ``_batch``) that the
quadrature paths use on whole node arrays.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BaseMismatch, CutLocusViolation

CIRCLE = "circle"
TORUS = "torus"
SPHERE2 = "sphere2"
HYPERBOLIC = "hyperbolic_patch"


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelGeometry:
    """Descriptor of one model constant-curvature manifold.

    Attributes
    ----------
    kind : one of "circle", "torus", "sphere2", "hyperbolic_patch"
    periods : chart periods; (2*pi*r,) for the circle, the torus periods,
        and () for the curved models.
    curvature : constant sectional curvature (0, +1 or -1).
    """

    kind: str
    periods: tuple[float, ...] = ()
    curvature: float = 0.0

    # -- constructors -------------------------------------------------------

    @staticmethod
    def circle(radius: float = 1.0) -> "ModelGeometry":
        if radius <= 0:
            raise ValueError("circle radius must be positive")
        return ModelGeometry(CIRCLE, (2.0 * math.pi * radius,), 0.0)

    @staticmethod
    def flat_torus(periods: Sequence[float]) -> "ModelGeometry":
        periods = tuple(float(p) for p in periods)
        if not 1 <= len(periods) <= 3 or any(p <= 0 for p in periods):
            raise ValueError("torus needs 1-3 positive periods")
        return ModelGeometry(TORUS, periods, 0.0)

    @staticmethod
    def sphere() -> "ModelGeometry":
        return ModelGeometry(SPHERE2, (), 1.0)

    @staticmethod
    def hyperbolic_patch() -> "ModelGeometry":
        return ModelGeometry(HYPERBOLIC, (), -1.0)

    # -- basic constants ----------------------------------------------------

    @property
    def dim(self) -> int:
        if self.kind == CIRCLE:
            return 1
        if self.kind == TORUS:
            return len(self.periods)
        return 2

    @property
    def radius(self) -> float:
        if self.kind != CIRCLE:
            raise AttributeError("radius only defined for circles")
        return self.periods[0] / (2.0 * math.pi)

    @property
    def injectivity_radius(self) -> float:
        if self.kind == CIRCLE:
            return math.pi * self.radius
        if self.kind == TORUS:
            return min(self.periods) / 2.0
        if self.kind == SPHERE2:
            return math.pi
        return math.inf

    @property
    def volume(self) -> float:
        if self.kind == CIRCLE:
            return self.periods[0]
        if self.kind == TORUS:
            return float(np.prod(self.periods))
        if self.kind == SPHERE2:
            return 4.0 * math.pi
        raise AttributeError("hyperbolic patch has no finite volume")

    @property
    def is_flat(self) -> bool:
        return self.curvature == 0.0

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dict(self) -> dict:
        if self.kind == CIRCLE:
            return {"kind": CIRCLE, "radius": self.radius}
        if self.kind == TORUS:
            return {"kind": TORUS, "periods": list(self.periods)}
        return {"kind": self.kind}

    @staticmethod
    def from_dict(d: dict) -> "ModelGeometry":
        kind = d["kind"]
        if kind == CIRCLE:
            return ModelGeometry.circle(d.get("radius", 1.0))
        if kind == TORUS:
            return ModelGeometry.flat_torus(d["periods"])
        if kind == SPHERE2:
            return ModelGeometry.sphere()
        if kind == HYPERBOLIC:
            return ModelGeometry.hyperbolic_patch()
        raise ValueError(f"unknown manifold kind {kind!r}")

    @staticmethod
    def from_json(s: str) -> "ModelGeometry":
        return ModelGeometry.from_dict(json.loads(s))

    # -- point / tangent factories ------------------------------------------

    def point(self, coords) -> "ManifoldPoint":
        return ManifoldPoint(self, canonicalize(self, np.asarray(coords, float)))

    def tangent(self, base: "ManifoldPoint", components) -> "TangentVector":
        return TangentVector(base, np.asarray(components, float))

    def random_point(self, rng: np.random.Generator) -> "ManifoldPoint":
        if self.kind in (CIRCLE, TORUS):
            return self.point(rng.uniform(0.0, self.periods))
        if self.kind == SPHERE2:
            v = rng.normal(size=3)
            return self.point(v / np.linalg.norm(v))
        return self.point(rng.normal(scale=0.8, size=2))

    def random_tangent(self, rng: np.random.Generator, base: "ManifoldPoint",
                       norm: float = 1.0) -> "TangentVector":
        fr = frame_at(self, base)
        comp = rng.normal(size=self.dim)
        comp *= norm / np.linalg.norm(comp)
        vec = sum(c * e.components for c, e in zip(comp, fr))
        return TangentVector(base, vec)


@dataclass(frozen=True)
class ManifoldPoint:
    """A point in canonical chart coordinates (see module docstring)."""

    geometry: ModelGeometry
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", np.array(self.coords, float))
        self.coords.setflags(write=False)

    def __eq__(self, other):
        return (isinstance(other, ManifoldPoint)
                and self.geometry == other.geometry
                and np.array_equal(self.coords, other.coords))

    def __hash__(self):
        return hash((self.geometry, self.coords.tobytes()))


@dataclass(frozen=True)
class TangentVector:
    """A tangent vector at ``base`` (chart vector / ambient vector, see module)."""

    base: ManifoldPoint
    components: np.ndarray

    def __post_init__(self):
        comp = np.array(self.components, float)
        g = self.base.geometry
        if g.kind == SPHERE2:
            dot = float(comp @ self.base.coords)
            if abs(dot) > 1e-9:
                raise ValueError("sphere tangent not orthogonal to base point")
            comp = comp - dot * self.base.coords
        comp.setflags(write=False)
        object.__setattr__(self, "components", comp)

    @property
    def norm(self) -> float:
        g = self.base.geometry
        if g.kind == HYPERBOLIC:
            v3 = self.components
            return math.sqrt(max(v3[0] ** 2 + v3[1] ** 2 - v3[2] ** 2, 0.0))
        return float(np.linalg.norm(self.components))


@dataclass(frozen=True)
class GeodesicData:
    """Minimal-geodesic data between two points strictly inside each other's
    cut locus complement.

    ``transport_y_to_x`` is the matrix of parallel translation from f-side to
    x-side in the canonical orthonormal frames of :func:`frame_at`; it is
    orthogonal with determinant +1.
    """

    geometry: ModelGeometry
    x: ManifoldPoint
    y: ManifoldPoint
    distance: float
    midpoint: ManifoldPoint
    unit_tangent_at_midpoint: TangentVector
    unit_tangent_at_x: TangentVector = field(repr=False)
    transport_y_to_x: np.ndarray = field(repr=False)


# ---------------------------------------------------------------------------
# canonicalization and batch kernels
# ---------------------------------------------------------------------------

def canonicalize(g: ModelGeometry, coords: np.ndarray) -> np.ndarray:
    """Reduce chart coordinates to canonical form (batched over leading axes)."""
    coords = np.asarray(coords, float)
    if g.kind in (CIRCLE, TORUS):
        return np.mod(coords, np.asarray(g.periods))
    if g.kind == SPHERE2:
        n = np.linalg.norm(coords, axis=-1, keepdims=True)
        if np.any(np.abs(n - 1.0) > 1e-8):
            raise ValueError("sphere point must be a unit 3-vector")
        return coords / n
    return coords  # hyperbolic chart is all of R^2


def wrap_batch(g: ModelGeometry, delta: np.ndarray) -> np.ndarray:
    """Shortest chart representative of a displacement, in [-p/2, p/2)."""
    p = np.asarray(g.periods)
    return np.mod(delta + p / 2.0, p) - p / 2.0


def minkowski(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] - u[..., 2] * v[..., 2]


def hyperboloid_lift(chart: np.ndarray) -> np.ndarray:
    x1, x2 = chart[..., 0], chart[..., 1]
    return np.stack([x1, x2, np.sqrt(1.0 + x1 ** 2 + x2 ** 2)], axis=-1)


def hyperboloid_drop(amb: np.ndarray) -> np.ndarray:
    return amb[..., :2]


def sphere_log_batch(x: np.ndarray, y: np.ndarray):
    """(v, d) with v = log_x(y) as ambient tangent rows; v = 0 at d = 0 or pi."""
    c = np.clip(np.sum(x * y, axis=-1), -1.0, 1.0)
    d = np.arccos(c)
    w = y - c[..., None] * x
    nw = np.linalg.norm(w, axis=-1)
    safe = nw > 1e-300
    scale = np.where(safe, d / np.where(safe, nw, 1.0), 0.0)
    return scale[..., None] * w, d


def sphere_exp_batch(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    nv = np.linalg.norm(v, axis=-1)
    safe = nv > 1e-300
    u = v / np.where(safe, nv, 1.0)[..., None]
    out = np.cos(nv)[..., None] * x + np.sin(nv)[..., None] * u
    return np.where(safe[..., None], out, x)


def sphere_transport_batch(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Parallel transport of tangent rows w at y to x along the minimal geodesic."""
    c = np.sum(x * y, axis=-1)[..., None]
    s = x + y
    return w - (np.sum(w * x, axis=-1)[..., None] / (1.0 + c)) * s


def hyper_log_batch(x: np.ndarray, y: np.ndarray):
    c = np.maximum(-minkowski(x, y), 1.0)
    d = np.arccosh(c)
    w = y - c[..., None] * x
    nw = np.sqrt(np.maximum(minkowski(w, w), 0.0))
    safe = nw > 1e-300
    scale = np.where(safe, d / np.where(safe, nw, 1.0), 0.0)
    return scale[..., None] * w, d


def hyper_exp_batch(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    nv = np.sqrt(np.maximum(minkowski(v, v), 0.0))
    safe = nv > 1e-300
    u = v / np.where(safe, nv, 1.0)[..., None]
    out = np.cosh(nv)[..., None] * x + np.sinh(nv)[..., None] * u
    return np.where(safe[..., None], out, x)


def hyper_transport_batch(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    c = minkowski(x, y)[..., None]
    return w + (minkowski(w, x)[..., None] / (1.0 - c)) * (x + y)


def distance_batch(g: ModelGeometry, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if g.kind in (CIRCLE, TORUS):
        return np.linalg.norm(wrap_batch(g, y - x), axis=-1)
    if g.kind == SPHERE2:
        return np.arccos(np.clip(np.sum(x * y, axis=-1), -1.0, 1.0))
    return np.arccosh(np.maximum(-minkowski(hyperboloid_lift(x),
                                            hyperboloid_lift(y)), 1.0))


def cut_margin_batch(g: ModelGeometry, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if g.kind in (CIRCLE, TORUS):
        delta = np.abs(wrap_batch(g, y - x))
        return np.min(np.asarray(g.periods) / 2.0 - delta, axis=-1)
    if g.kind == SPHERE2:
        return math.pi - distance_batch(g, x, y)
    return np.full(np.shape(x)[:-1], np.inf)


def cut_distance_batch(g: ModelGeometry, u: np.ndarray) -> np.ndarray:
    """Distance to the cut locus from any point in unit chart direction ``u``.

    Homogeneous for all four models: pi*r (circle), pi (sphere),
    min_i p_i / (2|u_i|) (torus), +inf (hyperbolic patch).
    """
    if g.kind == CIRCLE:
        return np.full(np.shape(u)[:-1], math.pi * g.radius)
    if g.kind == SPHERE2:
        return np.full(np.shape(u)[:-1], math.pi)
    if g.kind == HYPERBOLIC:
        return np.full(np.shape(u)[:-1], np.inf)
    p = np.asarray(g.periods)
    with np.errstate(divide="ignore"):
        per_axis = np.where(np.abs(u) > 1e-300, p / (2.0 * np.abs(u)), np.inf)
    return np.min(per_axis, axis=-1)


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------

def frame_components_at(g: ModelGeometry, coords: np.ndarray) -> np.ndarray:
    """Canonical orthonormal frame at a point, rows = frame vectors.

    Flat models use the chart frame.  On the sphere the frame is derived from
    a reference axis with a fallback near the poles of that axis; on the
    hyperboloid, from Lorentz-orthonormalising the chart directions.
    """
    if g.kind in (CIRCLE, TORUS):
        return np.eye(g.dim)
    if g.kind == SPHERE2:
        x = coords
        ref = np.array([0.0, 0.0, 1.0])
        if abs(x @ ref) > 0.9:
            ref = np.array([1.0, 0.0, 0.0])
        e1 = np.cross(ref, x)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(x, e1)
        return np.stack([e1, e2])
    xa = hyperboloid_lift(coords)
    e1 = np.array([1.0, 0.0, 0.0]) + minkowski(np.array([1.0, 0.0, 0.0]), xa) * xa
    e1 /= math.sqrt(minkowski(e1, e1))
    e2 = np.array([0.0, 1.0, 0.0]) + minkowski(np.array([0.0, 1.0, 0.0]), xa) * xa
    e2 -= minkowski(e2, e1) * e1
    e2 /= math.sqrt(minkowski(e2, e2))
    return np.stack([e1, e2])


def frame_at(g: ModelGeometry, x: ManifoldPoint) -> list[TangentVector]:
    rows = frame_components_at(g, x.coords)
    return [TangentVector(x, rows[i]) for i in range(g.dim)]


def frame_components_batch(g: ModelGeometry, coords: np.ndarray) -> np.ndarray:
    """Vectorized :func:`frame_components_at` over point rows; shape
    (m, dim, ambient)."""
    if g.kind in (CIRCLE, TORUS):
        return np.broadcast_to(np.eye(g.dim), coords.shape[:-1] + (g.dim, g.dim))
    if g.kind == SPHERE2:
        x = coords
        near_pole = np.abs(x[..., 2]) > 0.9
        ref = np.where(near_pole[..., None], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
        e1 = np.cross(ref, x)
        e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
        e2 = np.cross(x, e1)
        return np.stack([e1, e2], axis=-2)
    return np.stack([frame_components_at(g, c) for c in coords])


def tangent_inner(g: ModelGeometry, u: np.ndarray, v: np.ndarray):
    if g.kind == HYPERBOLIC:
        return minkowski(u, v)
    return np.sum(u * v, axis=-1)


# ---------------------------------------------------------------------------
# spec operations
# ---------------------------------------------------------------------------

def exp_map(g: ModelGeometry, v: TangentVector) -> ManifoldPoint:
    """Global exponential map (total on every model)."""
    base = v.base.coords
    if g.kind in (CIRCLE, TORUS):
        return g.point(base + v.components)
    if g.kind == SPHERE2:
        return g.point(sphere_exp_batch(base, v.components))
    out = hyper_exp_batch(hyperboloid_lift(base), v.components)
    return g.point(hyperboloid_drop(out))


def log_map(g: ModelGeometry, x: ManifoldPoint, y: ManifoldPoint) -> TangentVector:
    """Inverse exponential for y strictly inside the cut complement of x."""
    if cut_margin(g, x, y) <= 0.0:
        raise CutLocusViolation("log_map target on/beyond the cut locus")
    if g.kind in (CIRCLE, TORUS):
        return TangentVector(x, wrap_batch(g, y.coords - x.coords))
    if g.kind == SPHERE2:
        v, _ = sphere_log_batch(x.coords, y.coords)
        return TangentVector(x, v)
    v, _ = hyper_log_batch(hyperboloid_lift(x.coords), hyperboloid_lift(y.coords))
    return TangentVector(x, v)


def distance(g: ModelGeometry, x: ManifoldPoint, y: ManifoldPoint) -> float:
    return float(distance_batch(g, x.coords, y.coords))


def cut_margin(g: ModelGeometry, x: ManifoldPoint, y: ManifoldPoint) -> float:
    """Signed distance of y from the cut locus of x (positive strictly inside)."""
    return float(cut_margin_batch(g, x.coords, y.coords))


def tube_membership(g: ModelGeometry, x: ManifoldPoint, y: ManifoldPoint,
                    eps: float) -> bool:
    """Membership of (x, y) in the width-eps diagonal tube: d(x,y) < sqrt(2)*eps."""
    if not 0.0 < eps <= g.injectivity_radius:
        raise ValueError("tube width must satisfy 0 < eps <= injectivity radius")
    return distance(g, x, y) < math.sqrt(2.0) * eps


def geodesic_between(g: ModelGeometry, x: ManifoldPoint,
                     y: ManifoldPoint) -> GeodesicData:
    """Unique-minimal-geodesic data; raises CutLocusViolation on/past the cut locus."""
    if cut_margin(g, x, y) <= 0.0:
        raise CutLocusViolation(
            f"no unique minimal geodesic: cut margin {cut_margin(g, x, y):.3g}")
    if g.kind in (CIRCLE, TORUS):
        delta = wrap_batch(g, y.coords - x.coords)
        d = float(np.linalg.norm(delta))
        mid = g.point(x.coords + delta / 2.0)
        u = delta / d if d > 0 else frame_components_at(g, mid.coords)[0]
        transport = np.eye(g.dim)
        return GeodesicData(g, x, y, d, mid, TangentVector(mid, u),
                            TangentVector(x, u), transport)
    if g.kind == SPHERE2:
        xc, yc = x.coords, y.coords
        d = float(distance_batch(g, xc, yc))
        mc = xc + yc
        mc /= np.linalg.norm(mc)
        mid = g.point(mc)
        if d > 0:
            u_mid = yc - (yc @ mc) * mc
            u_mid /= np.linalg.norm(u_mid)
            u_x, _ = sphere_log_batch(xc, yc)
            u_x /= d
        else:
            u_mid = frame_components_at(g, mc)[0]
            u_x = u_mid
        transport = _curved_transport_matrix(g, xc, yc)
        return GeodesicData(g, x, y, d, mid, TangentVector(mid, u_mid),
                            TangentVector(x, u_x), transport)
    xa, ya = hyperboloid_lift(x.coords), hyperboloid_lift(y.coords)
    d = float(distance_batch(g, x.coords, y.coords))
    ms = xa + ya
    ms /= math.sqrt(max(-minkowski(ms, ms), 1e-300))
    mid = g.point(hyperboloid_drop(ms))
    if d > 0:
        u_mid = ya + minkowski(ya, ms) * ms
        u_mid /= math.sqrt(minkowski(u_mid, u_mid))
        u_x, _ = hyper_log_batch(xa, ya)
        u_x /= d
    else:
        u_mid = frame_components_at(g, mid.coords)[0]
        u_x = u_mid
    transport = _curved_transport_matrix(g, xa, ya)
    return GeodesicData(g, x, y, d, mid, TangentVector(mid, u_mid),
                        TangentVector(x, u_x), transport)


def _curved_transport_matrix(g: ModelGeometry, xa: np.ndarray,
                             ya: np.ndarray) -> np.ndarray:
    """Matrix of parallel translation y->x in the canonical frames."""
    if g.kind == SPHERE2:
        fx = frame_components_at(g, xa)
        fy = frame_components_at(g, ya)
        moved = sphere_transport_batch(xa[None, :], ya[None, :], fy)
        return fx @ moved.T
    fx = frame_components_at(g, hyperboloid_drop(xa))
    fy = frame_components_at(g, hyperboloid_drop(ya))
    moved = hyper_transport_batch(xa[None, :], ya[None, :], fy)
    sign = np.array([1.0, 1.0, -1.0])
    return (fx * sign) @ moved.T


def parallel_transport(g: ModelGeometry, geo: GeodesicData,
                       w: TangentVector) -> TangentVector:
    """Parallel translation of w (based at geo.y) to geo.x along the geodesic."""
    if w.base != geo.y:
        raise BaseMismatch("vector must be based at the far endpoint geo.y")
    if g.kind in (CIRCLE, TORUS):
        return TangentVector(geo.x, w.components.copy())
    if g.kind == SPHERE2:
        out = sphere_transport_batch(geo.x.coords, geo.y.coords, w.components)
        return TangentVector(geo.x, out)
    xa, ya = hyperboloid_lift(geo.x.coords), hyperboloid_lift(geo.y.coords)
    return TangentVector(geo.x, hyper_transport_batch(xa, ya, w.components))
