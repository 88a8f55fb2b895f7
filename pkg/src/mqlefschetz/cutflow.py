"""Cut-locus apparatus: the t-deformation family, cut-set estimation,
the |L - chi| <= |C(f)| bound, sign refinement on the sphere, and the
degree current.

The deformation tf moves f(x) along the minimal geodesic from x towards the
cut locus of x: with mu a fixed increasing bijection [0,1) -> [0,infty),
s = d(x, f(x)) / c(x, direction) the normalized cut fraction, the deformed
image sits at fraction mu^{-1}(t mu(s)).  Then 1f = f, 0f = Id where f(x)
is inside the cut locus of x, and 0f = f on the set C(f) = {x : f(x) in C_x}
where the family is discontinuous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import oracles
from .errors import NonFiniteCutSet
from .geometry import ManifoldPoint, ModelGeometry
from .maps import (Identity, SmoothSelfMap, SphereReflection, SphereRotation,
                   SphereSuspension)


# ---------------------------------------------------------------------------
# time reparametrization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeProfile:
    """Strictly increasing mu : [0,1) -> [0,infty) with mu(0) = 0 and a
    closed-form inverse; "rational" mu(s) = s/(1-s), "tan_half"
    mu(s) = tan(pi s / 2)."""

    kind: str = "rational"

    def __post_init__(self):
        if self.kind not in ("rational", "tan_half"):
            raise ValueError(f"unknown time profile {self.kind!r}")

    def mu(self, s):
        s = np.asarray(s, float)
        if self.kind == "rational":
            return s / (1.0 - s)
        return np.tan(math.pi * s / 2.0)

    def mu_inv(self, u):
        u = np.asarray(u, float)
        if self.kind == "rational":
            return u / (1.0 + u)
        return 2.0 / math.pi * np.arctan(u)


def t_map_batch(g: ModelGeometry, f: SmoothSelfMap, tp: TimeProfile,
                t: float, coords: np.ndarray) -> np.ndarray:
    """Vectorized (tf)(x) over chart coordinate rows."""
    if t < 0:
        raise ValueError("deformation time must be nonnegative")
    x = np.asarray(coords, float)
    fx = geo.canonicalize(g, f.eval_batch(x))
    if t == 1.0:
        return fx  # mu_inv(mu(s)) = s holds exactly, by decree
    if g.kind in (geo.CIRCLE, geo.TORUS):
        delta = geo.wrap_batch(g, fx - x)
        d = np.linalg.norm(delta, axis=-1)
        moving = d > 1e-15
        u = np.where(moving[..., None], delta, 1.0)
        u = u / np.linalg.norm(u, axis=-1, keepdims=True)
        c = geo.cut_distance_batch(g, u)
        s = np.where(moving, d / c, 0.0)
        inside = s < 1.0 - 1e-15
        s2 = np.where(inside, tp.mu_inv(t * tp.mu(np.where(inside, s, 0.0))), 0.0)
        out = np.mod(x + s2[..., None] * c[..., None] * u, np.asarray(g.periods))
        out = np.where((inside & moving)[..., None], out, np.where(
            moving[..., None], fx, x))
        return out
    if g.kind == geo.SPHERE2:
        v, d = geo.sphere_log_batch(x, fx)
        moving = d > 1e-15
        inside = d < math.pi * (1.0 - 1e-12)
        s = np.where(inside, d / math.pi, 0.0)
        s2 = np.where(inside, tp.mu_inv(t * tp.mu(s)), 0.0)
        u = np.where(moving[..., None], v, 1.0)
        u = u / np.linalg.norm(u, axis=-1, keepdims=True)
        u -= np.sum(u * x, axis=-1, keepdims=True) * x
        nu = np.linalg.norm(u, axis=-1, keepdims=True)
        u = np.where(nu > 1e-12, u / np.where(nu > 1e-12, nu, 1.0), u)
        out = geo.sphere_exp_batch(x, (s2 * math.pi)[..., None] * u)
        return np.where((inside & moving)[..., None], out,
                        np.where(moving[..., None], fx, x))
    raise ValueError("t-deformation needs a closed model manifold")


def t_map(g: ModelGeometry, f: SmoothSelfMap, tp: TimeProfile, t: float,
          x: ManifoldPoint) -> ManifoldPoint:
    """(tf)(x): f(x) pushed along its minimal geodesic from x; t = 1 gives
    f(x), t = 0 gives x when f(x) is inside the cut locus and f(x) otherwise."""
    return g.point(t_map_batch(g, f, tp, t, x.coords[None])[0])


@dataclass(frozen=True)
class DeformedMap(SmoothSelfMap):
    """tf as a self-map; its differential only exists as finite differences."""

    base: SmoothSelfMap = None  # type: ignore[assignment]
    time_profile: TimeProfile = TimeProfile("rational")
    t: float = 1.0
    family = "deformed"

    def eval_batch(self, coords):
        return t_map_batch(self.geometry, self.base, self.time_profile,
                           self.t, coords)

    def push_tangent_batch(self, coords, xi):
        return self.fd_push_batch(coords, xi)

    def push_batch(self, coords, xi):
        return self.fd_push_batch(coords, xi)

    @property
    def degree(self) -> int:
        return self.base.degree

    def descriptor(self) -> str:
        return f"deformed(t={self.t:g}):{self.base.descriptor()}"


# ---------------------------------------------------------------------------
# cut-set estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CutSample:
    point: ManifoldPoint
    margin: float
    in_cut_set: bool


@dataclass(frozen=True)
class CutSetSummary:
    classification: str      # "empty" | "finite" | "curve_like"
    cluster_count: int
    sampled_measure: float   # weight of flagged nodes at the base resolution
    refined_measure: float   # same at twice the resolution
    tolerance: float


@dataclass(frozen=True)
class CutSetEstimate:
    geometry: ModelGeometry
    nodes: np.ndarray
    margins: np.ndarray
    mask: np.ndarray
    summary: CutSetSummary

    def samples(self):
        for row, m, flag in zip(self.nodes, self.margins, self.mask):
            yield CutSample(self.geometry.point(row), float(m), bool(flag))


def _margins_on(g: ModelGeometry, f: SmoothSelfMap, nodes: np.ndarray) -> np.ndarray:
    fx = geo.canonicalize(g, f.eval_batch(nodes))
    return geo.cut_margin_batch(g, nodes, fx)


def _grid_shape(g: ModelGeometry, resolution: int):
    return (resolution,) * g.dim if g.kind != geo.SPHERE2 else (resolution, resolution)


def _wrap_axes(g: ModelGeometry):
    if g.kind in (geo.CIRCLE, geo.TORUS):
        return tuple(range(g.dim))
    return (1,)  # sphere grid wraps in longitude only


def _cluster_count(mask2d: np.ndarray, wrap_axes) -> int:
    """Connected components of a boolean grid with optional periodic axes."""
    shape = mask2d.shape
    idx = np.argwhere(mask2d)
    if len(idx) == 0:
        return 0
    key = {tuple(i): k for k, i in enumerate(idx)}
    parent = list(range(len(idx)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for k, cell in enumerate(idx):
        for axis in range(mask2d.ndim):
            for step in (-1, 1):
                nb = list(cell)
                nb[axis] += step
                if axis in wrap_axes:
                    nb[axis] %= shape[axis]
                elif not 0 <= nb[axis] < shape[axis]:
                    continue
                j = key.get(tuple(nb))
                if j is not None:
                    union(k, j)
    return len({find(k) for k in range(len(idx))})


def cut_set_estimate(g: ModelGeometry, f: SmoothSelfMap, grid) -> CutSetEstimate:
    """Per-node cut margins of x -> margin(x, f(x)), flagged nodes clustered
    and classified as empty / finite (isolated points) / curve-like by the
    measure scaling across one grid refinement."""
    from .quadrature import QuadratureGrid, build_grid

    assert isinstance(grid, QuadratureGrid)
    res = grid.resolution
    h = grid.spacing
    lip = 1.0 + _lipschitz_estimate(g, f, grid.nodes)
    tol = lip * h
    margins = _margins_on(g, f, grid.nodes)
    mask = margins <= tol
    measure = float(np.sum(grid.weights[mask]))
    fine = build_grid(g, 2 * res)
    fine_margins = _margins_on(g, f, fine.nodes)
    fine_mask = fine_margins <= lip * fine.spacing
    fine_measure = float(np.sum(fine.weights[fine_mask]))
    clusters = _cluster_count(mask.reshape(_grid_shape(g, res)), _wrap_axes(g))
    if not mask.any() and not fine_mask.any():
        cls = "empty"
    else:
        ratio = fine_measure / measure if measure > 0 else 0.0
        cls = "finite" if ratio < 0.375 else "curve_like"
    return CutSetEstimate(g, grid.nodes, margins, mask,
                          CutSetSummary(cls, clusters, measure, fine_measure, tol))


def _lipschitz_estimate(g: ModelGeometry, f: SmoothSelfMap,
                        nodes: np.ndarray, samples: int = 16) -> float:
    step = max(1, len(nodes) // samples)
    best = 1.0
    for row in nodes[::step]:
        d = f.differential(g.point(row))
        best = max(best, float(np.linalg.norm(d, 2)))
    return best


# ---------------------------------------------------------------------------
# exact cut points of the built-in sphere maps
# ---------------------------------------------------------------------------

def sphere_cut_points(g: ModelGeometry, f: SmoothSelfMap) -> list[ManifoldPoint]:
    """Closed-form C(f) = {x : f(x) = -x} for the built-in sphere families;
    raises NonFiniteCutSet when the set is not finite."""
    if g.kind != geo.SPHERE2:
        raise ValueError("sphere cut points need the sphere")
    if isinstance(f, (Identity,)):
        return []
    if isinstance(f, SphereRotation):
        if math.isclose(math.cos(f.angle), -1.0, abs_tol=1e-12):
            raise NonFiniteCutSet("half-turn rotation has a circle of cut points")
        return []
    if isinstance(f, SphereReflection):
        n = np.asarray(f.normal, float)
        n = n / np.linalg.norm(n)
        return [g.point(n), g.point(-n)]
    if isinstance(f, SphereSuspension):
        n = f.n
        if abs(n) < 2 and n != -1:
            # n = 0: w = -1 solves 1 = -w; n = 1: identity, empty
            return [g.point([-1.0, 0.0, 0.0])] if n == 0 else []
        if n == -1:
            raise NonFiniteCutSet("reflection-like suspension")
        count = abs(n - 1)
        pts = []
        for k in range(count):
            theta = (2 * k + 1) * math.pi / count
            pts.append(g.point([math.cos(theta), math.sin(theta), 0.0]))
        return pts
    raise ValueError(f"no closed-form cut set for family {f.family!r}")


def sign_refinement_sphere(g: ModelGeometry, f: SmoothSelfMap) -> int:
    """Sum over the finite cut set of the orientation sign of the projection
    of the graph to the second factor, i.e. sgn det(df_x); equals
    L(f) - chi(S^2) for maps transverse to the cut locus."""
    total = 0
    for p in sphere_cut_points(g, f):
        d = f.differential(p)
        det = float(np.linalg.det(d))
        if abs(det) < 1e-9:
            raise NonFiniteCutSet("df singular at a cut point")
        total += 1 if det > 0 else -1
    return total


# ---------------------------------------------------------------------------
# bound check and currents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    lefschetz: int
    chi: int
    cut_class: str
    cut_count: int | None   # None when infinite / curve-like
    inequality_holds: bool
    sgn_sum: int | None

    def to_dict(self) -> dict:
        return {"L": self.lefschetz, "chi": self.chi,
                "cut_class": self.cut_class, "cut_count": self.cut_count,
                "inequality_holds": self.inequality_holds,
                "sgn_sum": self.sgn_sum}


def bound_check(g: ModelGeometry, f: SmoothSelfMap,
                resolution: int = 128) -> BoundReport:
    """|L(f) - chi(M)| <= |C(f)| for finite cut sets; curve-like sets are
    checked for consistency with the infinite-cut-set theorem on flat models."""
    from .quadrature import build_grid

    lef = oracles.cohomological_lefschetz(f)
    chi = oracles.euler_characteristic(g)
    est = cut_set_estimate(g, f, build_grid(g, resolution))
    cls = est.summary.classification
    sgn = None
    if cls == "empty":
        count: int | None = 0
        holds = lef == chi
    elif cls == "finite":
        count = est.summary.cluster_count
        holds = abs(lef - chi) <= count
        if g.kind == geo.SPHERE2:
            try:
                sgn = sign_refinement_sphere(g, f)
            except (NonFiniteCutSet, ValueError):
                sgn = None
    else:
        # a curve-like (infinite) cut set is consistent with the bound and,
        # on the nowhere-sphere-like flat models, with the L != chi theorem
        count = None
        holds = True
    return BoundReport(lef, chi, cls, count, holds, sgn)


def degree_current_estimate(g: ModelGeometry, f: SmoothSelfMap, grid,
                            t_small=(0.5, 0.35, 0.25),
                            tp: TimeProfile = TimeProfile("rational")) -> float:
    """deg(f) - 1 via the degree current: the t -> 0 extrapolation of
    (integral of (tf)^* dvol  -  vol(M \\ C(f))) / vol(M)."""
    from .quadrature import pairwise_sum

    vol = g.volume
    vals = []
    ts = sorted(t_small, reverse=True)
    for t in ts:
        tf = DeformedMap(g, base=f, time_profile=tp, t=t, fd_step=1e-6)
        jac = _jacobian_determinants(g, tf, grid.nodes)
        integral = pairwise_sum(grid.weights * jac)
        vals.append((integral - vol) / vol)
    if len(vals) == 1:
        return vals[0]
    coeffs = np.polyfit(np.asarray(ts, float), np.asarray(vals), 1)
    return float(coeffs[1])


def _jacobian_determinants(g: ModelGeometry, f: SmoothSelfMap,
                           nodes: np.ndarray) -> np.ndarray:
    """Signed Jacobian det of f in oriented orthonormal frames at each node."""
    n = g.dim
    if g.kind in (geo.CIRCLE, geo.TORUS):
        cols = [f.push_tangent_batch(nodes, np.broadcast_to(np.eye(n)[k], nodes.shape))
                for k in range(n)]
        w = np.stack(cols, axis=-1)
        return np.linalg.det(w) if n > 1 else w[..., 0, 0]
    frames = geo.frame_components_batch(g, nodes)
    fx = geo.canonicalize(g, f.eval_batch(nodes))
    fframes = geo.frame_components_batch(g, fx)
    p1 = f.push_tangent_batch(nodes, frames[:, 0])
    p2 = f.push_tangent_batch(nodes, frames[:, 1])
    w = np.empty(nodes.shape[:-1] + (2, 2))
    w[..., 0, 0] = np.sum(p1 * fframes[:, 0], axis=-1)
    w[..., 0, 1] = np.sum(p2 * fframes[:, 0], axis=-1)
    w[..., 1, 0] = np.sum(p1 * fframes[:, 1], axis=-1)
    w[..., 1, 1] = np.sum(p2 * fframes[:, 1], axis=-1)
    return np.linalg.det(w)


def cut_current_evaluation(g: ModelGeometry, f: SmoothSelfMap,
                           radius: float = 0.05) -> int:
    """C^f(1) = -sum over isolated cut points of the Hopf index of the
    modified displacement field V'_f; equals L(f) - chi(M)."""
    field = oracles.map_displacement_field(g, f)
    total = 0
    for p in sphere_cut_points(g, f):
        total += oracles.winding_index(field, p, radius)
    return -total
