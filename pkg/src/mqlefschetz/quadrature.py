"""Deterministic grid quadrature of integrand densities, t-sweeps, and
localization diagnostics.

Grids are product rules whose weights sum to the exact volume: uniform in
every chart direction on the circle and torus, Gauss-Legendre in the
z-coordinate times uniform longitude on the sphere (poles excluded).

Summation is a fixed pairwise binary reduction over node index, and worker
threads (capped by the LEFSCHETZ_THREADS environment variable) only evaluate
the density on fixed-size chunks, so results are bit-identical for any
worker count.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import geometry as geo
from . import oracles
from .errors import EmptyFixedSet, NonFiniteDensity, UnsupportedManifold
from .geometry import ModelGeometry
from .integrand import RadialProfile, constcurv_density, flat_density
from .maps import SmoothSelfMap

CHUNK = 8192


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureGrid:
    geometry: ModelGeometry
    resolution: int
    nodes: np.ndarray    # (m, chart_width)
    weights: np.ndarray  # (m,)

    @property
    def total_weight(self) -> float:
        return float(pairwise_sum(self.weights))

    @property
    def spacing(self) -> float:
        """Representative node spacing (used by cut-set classification)."""
        g = self.geometry
        if g.kind == geo.SPHERE2:
            return math.pi / self.resolution
        return max(p / self.resolution for p in g.periods)


def build_grid(g: ModelGeometry, resolution: int) -> QuadratureGrid:
    """Product quadrature grid with exact weight sum; resolution >= 8 nodes
    per dimension."""
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    if g.kind == geo.HYPERBOLIC:
        raise UnsupportedManifold("no global quadrature on the hyperbolic patch")
    if g.kind in (geo.CIRCLE, geo.TORUS):
        axes = [(np.arange(resolution) + 0.5) * p / resolution for p in g.periods]
        mesh = np.meshgrid(*axes, indexing="ij")
        nodes = np.stack(mesh, axis=-1).reshape(-1, g.dim)
        w = g.volume / resolution ** g.dim
        weights = np.full(len(nodes), w)
        return QuadratureGrid(g, resolution, nodes, weights)
    z, wz = np.polynomial.legendre.leggauss(resolution)
    phi = (np.arange(resolution) + 0.5) * 2.0 * math.pi / resolution
    zz, pp = np.meshgrid(z, phi, indexing="ij")
    s = np.sqrt(1.0 - zz ** 2)
    nodes = np.stack([s * np.cos(pp), s * np.sin(pp), zz], axis=-1).reshape(-1, 3)
    weights = (np.broadcast_to(wz[:, None], zz.shape)
               * (2.0 * math.pi / resolution)).reshape(-1).copy()
    return QuadratureGrid(g, resolution, nodes, weights)


# ---------------------------------------------------------------------------
# deterministic summation
# ---------------------------------------------------------------------------

def pairwise_sum(values: np.ndarray) -> float:
    """Balanced binary-tree sum over index order (bit-identical regardless of
    how the values were produced)."""
    a = np.asarray(values, float).ravel()
    while a.size > 1:
        half = a.size // 2
        head = a[: 2 * half]
        a = np.concatenate([head[0::2] + head[1::2], a[2 * half:]])
    return float(a[0]) if a.size else 0.0


def worker_count() -> int:
    env = os.environ.get("LEFSCHETZ_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def integrate_density(grid: QuadratureGrid,
                      density: Callable[[np.ndarray], np.ndarray],
                      threads: int | None = None) -> float:
    """Sum of weight * density(node) with the fixed reduction tree.

    ``density`` maps a (m, chart_width) batch to m values.  Raises
    NonFiniteDensity naming the first offending node.
    """
    if threads is None:
        threads = worker_count()
    nodes, weights = grid.nodes, grid.weights
    chunks = [(i, nodes[i:i + CHUNK]) for i in range(0, len(nodes), CHUNK)]
    values = np.empty(len(nodes))

    def run(args):
        start, block = args
        values[start:start + len(block)] = density(block)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, chunks))
    else:
        for c in chunks:
            run(c)
    finite = np.isfinite(values)
    if not finite.all():
        idx = int(np.argmin(finite))
        raise NonFiniteDensity(idx, nodes[idx], float(values[idx]))
    return pairwise_sum(weights * values)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class LefschetzReport:
    """One quadrature run: value, oracle, residual, and grid metadata."""

    integral: float
    oracle: int | None
    resolution: int
    profile: str
    epsilon: float
    t: float = 1.0
    wall_time_s: float = 0.0
    manifold: str = ""
    map_descriptor: str = ""
    note: str = ""

    @property
    def residual(self) -> float | None:
        if self.oracle is None:
            return None
        return abs(self.integral - self.oracle)

    def to_dict(self) -> dict:
        d = {
            "integral": self.integral,
            "oracle": self.oracle,
            "residual": self.residual,
            "resolution": self.resolution,
            "profile": self.profile,
            "epsilon": self.epsilon,
            "t": self.t,
            "wall_time_s": self.wall_time_s,
            "manifold": self.manifold,
            "map": self.map_descriptor,
        }
        if self.note:
            d["note"] = self.note
        return d

    @staticmethod
    def from_dict(d: dict) -> "LefschetzReport":
        return LefschetzReport(
            integral=d["integral"], oracle=d["oracle"],
            resolution=d["resolution"], profile=d["profile"],
            epsilon=d["epsilon"], t=d.get("t", 1.0),
            wall_time_s=d.get("wall_time_s", 0.0),
            manifold=d.get("manifold", ""), map_descriptor=d.get("map", ""),
            note=d.get("note", ""))


def _density_for(g: ModelGeometry, f: SmoothSelfMap, profile: RadialProfile):
    if g.is_flat:
        return flat_density(g, f, profile)
    return constcurv_density(g, f, profile)


def _resolve_profile(g: ModelGeometry, profile) -> RadialProfile:
    if isinstance(profile, RadialProfile):
        return profile
    return RadialProfile.for_geometry(g, profile)


def compute_lefschetz(g: ModelGeometry, f: SmoothSelfMap,
                      profile: "RadialProfile | str | None" = None,
                      resolution: int = 256, t: float = 1.0,
                      threads: int | None = None,
                      grid: QuadratureGrid | None = None) -> LefschetzReport:
    """Quadrature of the pulled-back Thom form of the map (or of its t-deformed
    version for t != 1), with the topological oracle attached when available."""
    prof = _resolve_profile(g, profile)
    started = time.perf_counter()
    target = f
    note = ""
    if t != 1.0:
        from .cutflow import DeformedMap, TimeProfile
        target = DeformedMap(g, base=f, time_profile=TimeProfile("rational"), t=t)
    if grid is None:
        grid = build_grid(g, resolution)
    value = integrate_density(grid, _density_for(g, target, prof), threads)
    try:
        oracle = oracles.cohomological_lefschetz(f)
    except Exception:
        oracle = None
    if f.family == "torus_linear":
        note = ("oracle det(I-M); the diagonal-map value 2-n-m quoted in the "
                "source text disagrees with the cohomological trace and is "
                "not used")
    return LefschetzReport(
        integral=value, oracle=oracle, resolution=grid.resolution,
        profile=prof.kind, epsilon=prof.epsilon, t=t,
        wall_time_s=time.perf_counter() - started,
        manifold=g.to_json(), map_descriptor=f.descriptor(), note=note)


def sweep_t(g: ModelGeometry, f: SmoothSelfMap,
            profile: "RadialProfile | str | None" = None,
            resolution: int = 256,
            t_values: Sequence[float] = (0.25, 0.5, 1.0, 2.0, 4.0),
            threads: int | None = None) -> list[LefschetzReport]:
    """One report per deformation time; the integral is a homotopy invariant,
    so the spread across t measures quadrature quality only."""
    if any(t <= 0 for t in t_values):
        raise ValueError("t values must be positive")
    grid = build_grid(g, resolution)
    return [compute_lefschetz(g, f, profile, resolution, t=t, threads=threads,
                              grid=grid)
            for t in t_values]


def localization_mass(g: ModelGeometry, f: SmoothSelfMap,
                      profile: "RadialProfile | str | None" = None,
                      resolution: int = 256, t: float = 1.0,
                      delta: float | None = None,
                      threads: int | None = None) -> float:
    """Fraction of the integrand's absolute mass within distance delta of the
    fixed-point set of f (default delta = 0.1 injectivity radius)."""
    prof = _resolve_profile(g, profile)
    if delta is None:
        delta = 0.1 * g.injectivity_radius
    fixed = oracles.find_fixed_points(g, f)
    grid = build_grid(g, resolution)
    target = f
    if t != 1.0:
        from .cutflow import DeformedMap, TimeProfile
        target = DeformedMap(g, base=f, time_profile=TimeProfile("rational"), t=t)
    values = np.abs(_density_for(g, target, prof)(grid.nodes)) * grid.weights
    total = pairwise_sum(values)
    if total == 0.0:
        return 1.0
    dist = _distance_to_fixed_set(g, grid.nodes, fixed)
    near = pairwise_sum(np.where(dist <= delta, values, 0.0))
    return near / total


def _distance_to_fixed_set(g: ModelGeometry, nodes: np.ndarray, fixed) -> np.ndarray:
    if isinstance(fixed, oracles.FixedSubmanifold):
        if fixed.description == "all":
            return np.zeros(len(nodes))
        if fixed.description == "equator":
            # great circle orthogonal to the stored axis
            axis = np.asarray(fixed.data)
            return np.abs(np.arcsin(np.clip(nodes @ axis, -1.0, 1.0)))
        raise EmptyFixedSet(f"unknown submanifold {fixed.description!r}")
    if not fixed:
        raise EmptyFixedSet("map has no fixed points")
    points = np.stack([rec.point.coords for rec in fixed])
    dists = np.stack([geo.distance_batch(g, nodes, np.broadcast_to(p, nodes.shape))
                      for p in points])
    return np.min(dists, axis=0)
