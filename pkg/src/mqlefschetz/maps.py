"""Self-map families of the model manifolds, with exact differentials.

Families
--------
* ``identity``
* ``circle_power:n``           z -> z^n on the circle (arc-length chart: s -> n s)
* ``torus_linear:a,b,c,d``     x -> M x mod periods, integer matrix M
* ``sphere_rotation:x,y,z:a``  rotation by angle a about the given axis
* ``sphere_reflection:x,y,z``  reflection through the plane with that normal
* ``suspension:n``             two-point suspension of z -> z^n, realized as the
                               rational map w -> w^n (n >= 0) or conj(w)^|n|
                               (n < 0) in the stereographic chart; smooth,
                               fixes the poles for |n| >= 1
* generic chart maps           user coordinate functions on the canonical chart

Each family exposes evaluation and pushforward on batched canonical
coordinates, an analytic differential matrix in the canonical orthonormal
frames, and a central finite-difference differential (step h, error O(h^2))
through geodesic normal coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import geometry as geo
from .errors import DegenerateChart, ParseError
from .geometry import ManifoldPoint, ModelGeometry, TangentVector


# ---------------------------------------------------------------------------
# stereographic helpers (projection from the north pole (0,0,1))
# ---------------------------------------------------------------------------

def _to_w(x: np.ndarray) -> np.ndarray:
    return (x[..., 0] + 1j * x[..., 1]) / (1.0 - x[..., 2])


def _from_w(w: np.ndarray) -> np.ndarray:
    a = np.abs(w) ** 2
    den = 1.0 + a
    return np.stack([2.0 * w.real / den, 2.0 * w.imag / den,
                     (a - 1.0) / den], axis=-1)


def _chart_push(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """dw applied to an ambient tangent xi at x (north chart)."""
    den = 1.0 - x[..., 2]
    return ((xi[..., 0] + 1j * xi[..., 1]) / den
            + (x[..., 0] + 1j * x[..., 1]) * xi[..., 2] / den ** 2)


def _chart_pull(y: np.ndarray, dw: np.ndarray) -> np.ndarray:
    """Ambient tangent at y = _from_w(w) for a chart increment dw."""
    w = _to_w(y)
    u, v = w.real, w.imag
    du, dv = dw.real, dw.imag
    a = u * u + v * v
    den = 1.0 + a
    dden = 2.0 * (u * du + v * dv)
    d1 = (2.0 * du * den - 2.0 * u * dden) / den ** 2
    d2 = (2.0 * dv * den - 2.0 * v * dden) / den ** 2
    d3 = (dden * den - (a - 1.0) * dden) / den ** 2
    return np.stack([d1, d2, d3], axis=-1)


# ---------------------------------------------------------------------------
# base class
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothSelfMap:
    """Base for the parametrized self-map families.

    ``differential_mode`` is "analytic" or "finite_difference"; the step of
    the latter defaults to 1e-5 times the injectivity radius.
    """

    geometry: ModelGeometry
    differential_mode: str = "analytic"
    fd_step: float | None = None

    family = "abstract"

    # -- core hooks (overridden per family) ---------------------------------

    def eval_batch(self, coords: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def push_batch(self, coords: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """Analytic pushforward of tangent rows xi at coords."""
        raise NotImplementedError

    @property
    def degree(self) -> int:
        raise NotImplementedError

    def descriptor(self) -> str:
        raise NotImplementedError

    # -- shared API ----------------------------------------------------------

    @property
    def step(self) -> float:
        if self.fd_step is not None:
            return self.fd_step
        inj = self.geometry.injectivity_radius
        return 1e-5 * (inj if math.isfinite(inj) else 1.0)

    def with_mode(self, mode: str, h: float | None = None) -> "SmoothSelfMap":
        return replace(self, differential_mode=mode, fd_step=h)

    def evaluate(self, x: ManifoldPoint) -> ManifoldPoint:
        return self.geometry.point(self.eval_batch(x.coords[None])[0])

    def __call__(self, x: ManifoldPoint) -> ManifoldPoint:
        return self.evaluate(x)

    def push(self, v: TangentVector) -> TangentVector:
        y = self.evaluate(v.base)
        out = self.push_tangent_batch(v.base.coords[None], v.components[None])[0]
        return TangentVector(y, out)

    def push_tangent_batch(self, coords: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """Pushforward honoring differential_mode (FD falls back to geodesic
        central differences)."""
        if self.differential_mode == "analytic":
            return self.push_batch(coords, xi)
        return self.fd_push_batch(coords, xi)

    def fd_push_batch(self, coords: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """Central-difference pushforward through exponential charts."""
        g = self.geometry
        h = self.step
        if g.kind in (geo.CIRCLE, geo.TORUS):
            fp = self.eval_batch(coords + h * xi)
            fm = self.eval_batch(coords - h * xi)
            return geo.wrap_batch(g, fp - fm) / (2.0 * h)
        if g.kind == geo.SPHERE2:
            fp = self.eval_batch(geo.sphere_exp_batch(coords, h * xi))
            fm = self.eval_batch(geo.sphere_exp_batch(coords, -h * xi))
            fx = self.eval_batch(coords)
            diff = (fp - fm) / (2.0 * h)
            return diff - np.sum(diff * fx, axis=-1, keepdims=True) * fx
        xa = geo.hyperboloid_lift(coords)
        fp = geo.hyperboloid_lift(self.eval_batch(
            geo.hyperboloid_drop(geo.hyper_exp_batch(xa, h * xi))))
        fm = geo.hyperboloid_lift(self.eval_batch(
            geo.hyperboloid_drop(geo.hyper_exp_batch(xa, -h * xi))))
        fxa = geo.hyperboloid_lift(self.eval_batch(coords))
        diff = (fp - fm) / (2.0 * h)
        return diff + geo.minkowski(diff, fxa)[..., None] * fxa

    def differential(self, x: ManifoldPoint) -> np.ndarray:
        """Matrix D of df_x in the canonical orthonormal frames at x and f(x):
        column k holds the frame components of the pushforward of the k-th
        frame vector at x."""
        g = self.geometry
        ex = geo.frame_components_at(g, x.coords)
        fx = self.eval_batch(x.coords[None])[0]
        fy = geo.frame_components_at(g, geo.canonicalize(g, fx))
        pushed = self.push_tangent_batch(
            np.broadcast_to(x.coords, (g.dim,) + x.coords.shape), ex)
        if g.kind == geo.HYPERBOLIC:
            sign = np.array([1.0, 1.0, -1.0])
            return (fy * sign) @ pushed.T
        return fy @ pushed.T

    def operator_norm_sup(self, points: np.ndarray) -> float:
        """sup of the spectral norm of df over the sample points (rows)."""
        if len(points) == 0:
            raise ValueError("operator_norm_sup needs a nonempty sample grid")
        best = 0.0
        for row in points:
            d = self.differential(self.geometry.point(row))
            best = max(best, float(np.linalg.norm(d, 2)))
        return best


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Identity(SmoothSelfMap):
    family = "identity"

    def eval_batch(self, coords):
        return np.array(coords, float)

    def push_batch(self, coords, xi):
        return np.array(xi, float)

    def differential(self, x: ManifoldPoint) -> np.ndarray:
        return np.eye(self.geometry.dim)  # exactly Id, not frame products

    @property
    def degree(self) -> int:
        return 1

    def descriptor(self) -> str:
        return "identity"


@dataclass(frozen=True)
class CirclePower(SmoothSelfMap):
    """z -> z^n; in the arc-length chart s -> n s mod 2 pi r."""

    n: int = 1
    family = "circle_power"

    def __post_init__(self):
        if self.geometry.kind != geo.CIRCLE:
            raise ValueError("CirclePower lives on the circle")

    def eval_batch(self, coords):
        return np.mod(self.n * coords, self.geometry.periods[0])

    def push_batch(self, coords, xi):
        return float(self.n) * xi

    @property
    def degree(self) -> int:
        return self.n

    def descriptor(self) -> str:
        return f"circle_power:{self.n}"


@dataclass(frozen=True)
class TorusLinear(SmoothSelfMap):
    """x -> M x mod periods for an integer matrix M (equal periods)."""

    matrix: tuple[tuple[int, ...], ...] = ((1,),)
    family = "torus_linear"

    def __post_init__(self):
        g = self.geometry
        if g.kind != geo.TORUS:
            raise ValueError("TorusLinear lives on a flat torus")
        m = self.as_array()
        if m.shape != (g.dim, g.dim):
            raise ValueError("matrix shape must match torus dimension")
        if not np.array_equal(m, np.round(m)):
            raise ValueError("matrix entries must be integers")
        if len(set(g.periods)) > 1:
            raise ValueError("integer torus maps require equal periods")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.matrix, float)

    def eval_batch(self, coords):
        return np.mod(coords @ self.as_array().T, np.asarray(self.geometry.periods))

    def push_batch(self, coords, xi):
        return xi @ self.as_array().T

    @property
    def degree(self) -> int:
        return int(round(float(np.linalg.det(self.as_array()))))

    def descriptor(self) -> str:
        flat = ",".join(str(int(v)) for row in self.matrix for v in row)
        return f"torus_linear:{flat}"


def _rotation_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, float)
    axis = axis / np.linalg.norm(axis)
    k = np.array([[0.0, -axis[2], axis[1]],
                  [axis[2], 0.0, -axis[0]],
                  [-axis[1], axis[0], 0.0]])
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


@dataclass(frozen=True)
class SphereRotation(SmoothSelfMap):
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    angle: float = 0.0
    family = "sphere_rotation"

    def __post_init__(self):
        if self.geometry.kind != geo.SPHERE2:
            raise ValueError("SphereRotation lives on the sphere")

    def _mat(self) -> np.ndarray:
        return _rotation_matrix(np.asarray(self.axis), self.angle)

    def eval_batch(self, coords):
        return coords @ self._mat().T

    def push_batch(self, coords, xi):
        return xi @ self._mat().T

    @property
    def degree(self) -> int:
        return 1

    def descriptor(self) -> str:
        ax = ",".join(f"{a:g}" for a in self.axis)
        return f"sphere_rotation:{ax}:{self.angle:g}"


@dataclass(frozen=True)
class SphereReflection(SmoothSelfMap):
    normal: tuple[float, float, float] = (0.0, 0.0, 1.0)
    family = "sphere_reflection"

    def __post_init__(self):
        if self.geometry.kind != geo.SPHERE2:
            raise ValueError("SphereReflection lives on the sphere")

    def _mat(self) -> np.ndarray:
        n = np.asarray(self.normal, float)
        n = n / np.linalg.norm(n)
        return np.eye(3) - 2.0 * np.outer(n, n)

    def eval_batch(self, coords):
        return coords @ self._mat().T

    def push_batch(self, coords, xi):
        return xi @ self._mat().T

    @property
    def degree(self) -> int:
        return -1

    def descriptor(self) -> str:
        nn = ",".join(f"{a:g}" for a in self.normal)
        return f"sphere_reflection:{nn}"


@dataclass(frozen=True)
class SphereSuspension(SmoothSelfMap):
    """Two-point suspension of z -> z^n: w -> w^n / conj(w)^|n| stereographically."""

    n: int = 2
    family = "suspension"

    def __post_init__(self):
        if self.geometry.kind != geo.SPHERE2:
            raise ValueError("SphereSuspension lives on the sphere")

    def eval_batch(self, coords):
        north = coords[..., 2] > 1.0 - 1e-12
        # guard the chart pole; the north pole maps to itself (n>0) / itself (n<0)
        safe = np.where(north[..., None], np.zeros_like(coords), coords)
        w = _to_w(safe)
        fw = w ** self.n if self.n >= 0 else np.conj(w) ** (-self.n)
        out = _from_w(fw)
        if self.n == 0:
            pole_img = _from_w(np.asarray(1.0 + 0.0j))
        else:
            pole_img = np.array([0.0, 0.0, 1.0])
        return np.where(north[..., None], pole_img, out)

    def push_batch(self, coords, xi):
        coords = np.asarray(coords, float)
        xi = np.asarray(xi, float)
        north = coords[..., 2] > 1.0 - 1e-12
        out = np.zeros(np.broadcast_shapes(coords.shape, xi.shape))
        reg = ~north
        if np.any(reg):
            c = np.broadcast_to(coords, out.shape)[reg]
            v = np.broadcast_to(xi, out.shape)[reg]
            w = _to_w(c)
            dw = _chart_push(c, v)
            if self.n == 0:
                fw = np.ones_like(w)
                dfw = np.zeros_like(dw)
            elif self.n > 0:
                fw = w ** self.n
                dfw = self.n * w ** (self.n - 1) * dw
            else:
                m = -self.n
                fw = np.conj(w) ** m
                dfw = m * np.conj(w) ** (m - 1) * np.conj(dw)
            out[reg] = _chart_pull(_from_w(fw), dfw)
        if np.any(north):
            # chart pole: w -> w^n reads u -> u^n in the antipodal chart, so
            # df = 0 for |n| >= 2 and n = 0; n = 1 is the identity and
            # n = -1 is the ambient reflection x2 -> -x2
            if self.n == 1:
                out[north] = np.broadcast_to(xi, out.shape)[north]
            elif self.n == -1:
                out[north] = np.broadcast_to(xi, out.shape)[north] * \
                    np.array([1.0, -1.0, 1.0])
        return out

    @property
    def degree(self) -> int:
        return self.n

    def descriptor(self) -> str:
        return f"suspension:{self.n}"


@dataclass(frozen=True)
class GenericChartMap(SmoothSelfMap):
    """Map given by coordinate functions on the canonical chart.

    ``fn`` maps batched canonical coordinates to image coordinates;
    ``jacobian``, when given, returns the stacked chart Jacobians (batch,
    dim, dim).  Flat geometries only (the chart is global there).
    """

    fn: Callable[[np.ndarray], np.ndarray] = None  # type: ignore[assignment]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "chart_map"
    family = "chart_map"

    def __post_init__(self):
        if self.geometry.kind not in (geo.CIRCLE, geo.TORUS):
            raise DegenerateChart("GenericChartMap needs a global flat chart")
        if self.fn is None:
            raise ValueError("GenericChartMap needs coordinate functions")

    def eval_batch(self, coords):
        return np.mod(self.fn(coords), np.asarray(self.geometry.periods))

    def push_batch(self, coords, xi):
        if self.jacobian is None:
            return self.fd_push_batch(coords, xi)
        jac = self.jacobian(coords)
        return np.einsum("...ij,...j->...i", jac, xi)

    @property
    def degree(self) -> int:
        return signed_preimage_degree(self)

    def descriptor(self) -> str:
        return self.name


def compose(outer: SmoothSelfMap, inner: SmoothSelfMap,
            name: str = "composite") -> GenericChartMap:
    """Chart-map composition outer o inner (flat geometries)."""
    return GenericChartMap(
        geometry=inner.geometry,
        fn=lambda c: outer.eval_batch(inner.eval_batch(c)),
        name=name,
    )


def signed_preimage_degree(f: SmoothSelfMap, samples: int = 4096,
                           newton_steps: int = 40) -> int:
    """Degree of a flat chart map by signed preimage count at a regular value."""
    g = f.geometry
    rng = np.random.default_rng(20240517)
    p = np.asarray(g.periods)
    target = g.point(rng.uniform(0.0, p))
    # coarse grid of seeds, Newton refinement on f(x) - target = 0 mod periods
    per_dim = max(8, int(round(samples ** (1.0 / g.dim))))
    axes = [np.arange(per_dim) * pi / per_dim for pi in p]
    seeds = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, g.dim)
    found: list[np.ndarray] = []
    total_sign = 0
    h = f.step
    for seed in seeds:
        x = seed.copy()
        ok = False
        for _ in range(newton_steps):
            r = geo.wrap_batch(g, f.eval_batch(x[None])[0] - target.coords)
            if np.linalg.norm(r) < 1e-12:
                ok = True
                break
            jac = _fd_jacobian(f, x, h)
            try:
                x = np.mod(x - np.linalg.solve(jac, r), p)
            except np.linalg.LinAlgError:
                break
        if not ok:
            continue
        if any(np.linalg.norm(geo.wrap_batch(g, x - q)) < 1e-6 for q in found):
            continue
        found.append(x)
        total_sign += int(np.sign(np.linalg.det(_fd_jacobian(f, x, h))))
    return total_sign


def _fd_jacobian(f: SmoothSelfMap, x: np.ndarray, h: float) -> np.ndarray:
    g = f.geometry
    cols = []
    for k in range(g.dim):
        e = np.zeros(g.dim)
        e[k] = 1.0
        fp = f.eval_batch((x + h * e)[None])[0]
        fm = f.eval_batch((x - h * e)[None])[0]
        cols.append(geo.wrap_batch(g, fp - fm) / (2.0 * h))
    return np.stack(cols, axis=-1)


# ---------------------------------------------------------------------------
# descriptor parsing (CLI strings)
# ---------------------------------------------------------------------------

def parse_map(text: str, g: ModelGeometry) -> SmoothSelfMap:
    """Parse a map descriptor like "circle_power:3" or "sphere_rotation:0,0,1:1.57"."""
    parts = text.strip().split(":")
    head = parts[0]
    try:
        if head == "identity":
            return Identity(g)
        if head == "circle_power":
            return CirclePower(g, n=int(parts[1]))
        if head == "torus_linear":
            vals = [int(v) for v in parts[1].split(",")]
            n = g.dim
            if len(vals) != n * n:
                raise ParseError(f"torus_linear needs {n * n} entries")
            m = tuple(tuple(vals[i * n:(i + 1) * n]) for i in range(n))
            return TorusLinear(g, matrix=m)
        if head == "sphere_rotation":
            axis = tuple(float(v) for v in parts[1].split(","))
            return SphereRotation(g, axis=axis, angle=float(parts[2]))
        if head == "sphere_reflection":
            normal = tuple(float(v) for v in parts[1].split(","))
            return SphereReflection(g, normal=normal)
        if head == "suspension":
            return SphereSuspension(g, n=int(parts[1]))
    except ParseError:
        raise
    except Exception as exc:  # malformed numbers, wrong arity
        raise ParseError(f"bad map descriptor {text!r}: {exc}") from exc
    raise ParseError(f"unknown map family {head!r}")


def parse_manifold(text: str) -> ModelGeometry:
    """Parse a manifold descriptor like "circle", "torus:6.28,6.28", "sphere"."""
    parts = text.strip().split(":")
    head = parts[0]
    try:
        if head == "circle":
            return ModelGeometry.circle(float(parts[1]) if len(parts) > 1 else 1.0)
        if head == "torus":
            return ModelGeometry.flat_torus([float(v) for v in parts[1].split(",")])
        if head in ("sphere", "sphere2"):
            return ModelGeometry.sphere()
        if head == "hyperbolic_patch":
            return ModelGeometry.hyperbolic_patch()
    except Exception as exc:
        raise ParseError(f"bad manifold descriptor {text!r}: {exc}") from exc
    raise ParseError(f"unknown manifold kind {head!r}")
