"""Norm comparison for alternating forms and a priori Lefschetz bounds.

For a k-form alpha = sum_I alpha_I theta^I in an orthonormal coframe, the
two norms compared are |alpha|_2^2 = sum alpha_I^2 and

    |alpha|_inf = sup |alpha(v_1, ..., v_k)| / (|v_1| ... |v_k|)

over nonzero decomposable arguments.  They satisfy the sandwich

    binom(n,k)^(-1/2) |alpha|_2  <=  |alpha|_inf  <=  C(k,n) |alpha|_2,

with C(k,n)^2 = (k! / binom(n,k)) C'(k,n) and C'(k,n) the supremum of a
scale-invariant polynomial estimated here by multi-start projected ascent.

Two Lefschetz bounds are built on top: the flat-manifold bound
|L(f)| <= C vol(M) (|df|+1)^n / (2 pi)^(n/2), and the Hodge bound on the
flat torus, where the harmonic k-forms are the parallel forms theta^I/sqrt(vol),
all of pointwise 2-norm vol^(-1/2), so every constant is computable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from . import oracles
from .geometry import ModelGeometry
from .integrand import RadialProfile
from .maps import SmoothSelfMap, TorusLinear
from .mqthom import MultiIndex


@dataclass(frozen=True)
class AlternatingForm:
    """A k-form on R^n by its coefficients over increasing multi-indices."""

    degree: int
    dimension: int
    coefficients: dict[tuple[int, ...], float]

    def __post_init__(self):
        for idx in self.coefficients:
            MultiIndex(idx, self.dimension)  # validates range and ordering
            if len(idx) != self.degree:
                raise ValueError("coefficient index of wrong degree")

    @staticmethod
    def random(k: int, n: int, rng: np.random.Generator) -> "AlternatingForm":
        coeffs = {idx: float(rng.normal())
                  for idx in itertools.combinations(range(1, n + 1), k)}
        return AlternatingForm(k, n, coeffs)

    def evaluate(self, vectors: np.ndarray) -> float:
        """alpha(v_1, ..., v_k) for columns of an (n, k) matrix."""
        total = 0.0
        for idx, c in self.coefficients.items():
            rows = [i - 1 for i in idx]
            total += c * float(np.linalg.det(vectors[rows, :]))
        return total


def norm_l2(alpha: AlternatingForm) -> float:
    return math.sqrt(sum(c * c for c in alpha.coefficients.values()))


def norm_linf(alpha: AlternatingForm, restarts: int = 10_000,
              sweeps: int = 30, seed: int = 0) -> float:
    """Operator norm over unit decomposables, by alternating maximization.

    Each coordinate update is exact (the evaluation is linear in one slot),
    so the returned value is a certified lower bound of |alpha|_inf; degrees
    1 and n have closed forms and skip the ascent.
    """
    k, n = alpha.degree, alpha.dimension
    if k == 0:
        return abs(alpha.coefficients.get((), 0.0))
    if k == 1:
        return norm_l2(alpha)
    if k == n:
        return abs(alpha.coefficients.get(tuple(range(1, n + 1)), 0.0))
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(restarts, n, k))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    for _ in range(sweeps):
        for q in range(k):
            grad = _slot_gradient(alpha, v, q)
            norms = np.linalg.norm(grad, axis=1, keepdims=True)
            ok = norms[:, 0] > 1e-14
            v[ok, :, q] = grad[ok] / norms[ok]
    vals = np.abs(_evaluate_batch(alpha, v))
    return float(np.max(vals))


def _evaluate_batch(alpha: AlternatingForm, v: np.ndarray) -> np.ndarray:
    total = np.zeros(v.shape[0])
    for idx, c in alpha.coefficients.items():
        rows = [i - 1 for i in idx]
        total += c * np.linalg.det(v[:, rows, :])
    return total


def _slot_gradient(alpha: AlternatingForm, v: np.ndarray, q: int) -> np.ndarray:
    """d alpha(v_1,...,v_k) / d v_q, batched over restarts."""
    r, n, k = v.shape
    grad = np.zeros((r, n))
    other = [c for c in range(k) if c != q]
    for idx, coeff in alpha.coefficients.items():
        rows = [i - 1 for i in idx]
        for t, row in enumerate(rows):
            minor_rows = rows[:t] + rows[t + 1:]
            if minor_rows:
                minors = np.linalg.det(v[:, minor_rows, :][:, :, other])
            else:
                minors = np.ones(r)
            grad[:, row] += coeff * (-1.0) ** (t + q) * minors
    return grad


@lru_cache(maxsize=None)
def lemma_constants(k: int, n: int, restarts: int = 10_000,
                    sweeps: int = 60) -> tuple[float, float]:
    """(lower, upper) factors of the sandwich: binom(n,k)^(-1/2) and C(k,n).

    The Cauchy-Schwarz chain gives C(k,n)^2 = k! * sup(X) with the
    scale-invariant ordering sum X(V) = sum over orderings (j_1..j_k) of
    {1..k} of prod_q V[j_q, q]^2 over unit columns, i.e.
    C^2 = (k!/binom(n,k)) * C' with C' = binom(n,k) * sup(X).  sup(X) is
    estimated by multi-start projected gradient ascent ("max found"; the
    permanent inequality pins it at 1, which the ascent recovers).
    """
    if not 1 <= k <= n <= 4:
        raise ValueError("lemma constants implemented for 1 <= k <= n <= 4")
    binom = math.comb(n, k)
    lower = binom ** -0.5
    perms = list(itertools.permutations(range(k)))
    rng = np.random.default_rng(k * 101 + n)
    v = rng.normal(size=(restarts, n, k))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    step = 0.25
    value = _cprime_value(v, perms)
    for _ in range(sweeps):
        g = _cprime_gradient(v, perms)
        v2 = v + step * g
        v2 /= np.linalg.norm(v2, axis=1, keepdims=True)
        value2 = _cprime_value(v2, perms)
        improved = value2 > value
        v[improved] = v2[improved]
        value = np.maximum(value, value2)
    sup_x = float(np.max(value))
    upper = math.sqrt(math.factorial(k) * sup_x)
    return lower, upper


def _cprime_value(v: np.ndarray, perms) -> np.ndarray:
    total = np.zeros(v.shape[0])
    for pi in perms:
        prod = np.ones(v.shape[0])
        for q, row in enumerate(pi):
            prod *= v[:, row, q] ** 2
        total += prod
    return total


def _cprime_gradient(v: np.ndarray, perms) -> np.ndarray:
    r, n, k = v.shape
    grad = np.zeros_like(v)
    for pi in perms:
        cols = [v[:, row, q] ** 2 for q, row in enumerate(pi)]
        full = np.ones(r)
        for c in cols:
            full *= c
        for q, row in enumerate(pi):
            partial = np.ones(r)
            for q2, c in enumerate(cols):
                if q2 != q:
                    partial *= c
            grad[:, row, q] += 2.0 * v[:, row, q] * partial
    return grad


# ---------------------------------------------------------------------------
# Lefschetz bounds
# ---------------------------------------------------------------------------

def radial_factor_sup(profile: RadialProfile, n: int) -> float:
    """sup over r of e^(-rho^2) (rho/r)^(n-1) rho', the constant of the flat
    bound (the radial factor of the flat density)."""

    def neg(r: float) -> float:
        rho, drho, ror, inside = profile.eval_batch(np.asarray([r]))
        if not inside[0]:
            return 0.0
        return -float(np.exp(-rho[0] ** 2) * ror[0] ** (n - 1) * drho[0])

    eps = profile.epsilon
    grid = np.linspace(0.0, eps * (1.0 - 1e-9), 2001)
    rho, drho, ror, inside = profile.eval_batch(grid)
    vals = np.where(inside, np.exp(-rho ** 2) * ror ** (n - 1) * drho, 0.0)
    best_r = float(grid[int(np.argmax(vals))])
    lo = max(0.0, best_r - eps / 1000.0)
    hi = min(eps * (1.0 - 1e-9), best_r + eps / 1000.0)
    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded")
    return max(float(np.max(vals)), -float(res.fun))


def flat_bound(g: ModelGeometry, f: SmoothSelfMap,
               profile: RadialProfile | None = None,
               norm_grid: int = 64) -> float:
    """|L(f)| <= C vol(M) (|df| + 1)^n / (2 pi)^(n/2) on flat models, with
    C the sup of the radial factor of the chosen profile.  Raises if the
    cohomological oracle violates the bound (it cannot)."""
    if not g.is_flat:
        raise ValueError("flat bound needs a flat geometry")
    if profile is None:
        profile = RadialProfile.for_geometry(g)
    n = g.dim
    c = radial_factor_sup(profile, n)
    axes = [(np.arange(norm_grid) + 0.5) * p / norm_grid for p in g.periods]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    opnorm = f.operator_norm_sup(pts[:: max(1, len(pts) // 128)])
    bound = c / (2.0 * math.pi) ** (n / 2.0) * g.volume * (opnorm + 1.0) ** n
    try:
        lef = abs(oracles.cohomological_lefschetz(f))
    except ValueError:
        lef = None
    if lef is not None and lef > bound + 1e-9:
        raise AssertionError(f"flat bound {bound:.6g} < |L| = {lef}")
    return bound


def hodge_bound_flat_torus(f: TorusLinear) -> float:
    """Hodge-theoretic bound on the flat torus:

        |L(f)| <= 1 + sum_k C(k,n) binom(n,k) beta_k sup_x |df_x|^k,

    with beta_k = binom(n,k) and the harmonic-form sup-norm factor equal to
    vol^(1/2) * vol^(-1/2) = 1 for the parallel forms theta^I / sqrt(vol)."""
    if not isinstance(f, TorusLinear):
        raise ValueError("hodge bound implemented for torus linear maps")
    g = f.geometry
    n = g.dim
    opnorm = float(np.linalg.norm(f.as_array(), 2))
    bound = 1.0
    for k in range(1, n + 1):
        _, upper = lemma_constants(k, n)
        beta_k = math.comb(n, k)
        bound += upper * math.comb(n, k) * beta_k * opnorm ** k
    lef = abs(oracles.cohomological_lefschetz(f))
    if lef > bound + 1e-9:
        raise AssertionError(f"hodge bound {bound:.6g} < |L| = {lef}")
    return bound
