"""Multi-index algebra, Pfaffians, and the Mathai-Quillen Thom form.

The Thom form of an oriented rank-n metric bundle with curvature Omega is,
in a synchronous frame (connection one-forms vanishing at the point),

    MQ = pi^(-n/2) e^(-|x|^2) sum_{|I| even} eps(I,I') Pf(Omega_I / 2) dx^{I'},

where I runs over even-size subsets of {1..n}, I' is the complement,
eps(I,I') is the shuffle sign, and x is the fiber point.  The same
normalization pi^(-n/2) applies to odd n (product-with-S^1 argument).

This module provides the scalar coefficient table of that form, the fiber
integral (which is 1 for every curvature: the Thom condition), and the
double-permutation curvature sums that the constant-curvature integrand
needs, with the sign convention R_ijij = -kappa (so R_1212 = 1 on the
curvature -1 surface).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import NotAntisymmetric


@dataclass(frozen=True)
class MultiIndex:
    """A strictly increasing subset of {1..n} with ambient rank n."""

    members: tuple[int, ...]
    rank: int

    def __post_init__(self):
        m = self.members
        if any(not 1 <= i <= self.rank for i in m):
            raise ValueError("multi-index members out of range")
        if any(m[i] >= m[i + 1] for i in range(len(m) - 1)):
            raise ValueError("multi-index members must be strictly increasing")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def complement(self) -> "MultiIndex":
        rest = tuple(i for i in range(1, self.rank + 1) if i not in self.members)
        return MultiIndex(rest, self.rank)


def even_subsets(n: int):
    """All even-size MultiIndexes of rank n, by increasing size."""
    for k in range(0, n + 1, 2):
        for comb in itertools.combinations(range(1, n + 1), k):
            yield MultiIndex(comb, n)


def permutation_sign(perm) -> int:
    """Sign of a permutation given as a sequence of distinct items."""
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def shuffle_sign(index: MultiIndex) -> int:
    """Sign eps(I, I') of the shuffle (I, I') of {1..n}:
    dx^I ^ dx^{I'} = eps(I,I') dx^1 ^ ... ^ dx^n."""
    return permutation_sign(index.members + index.complement.members)


def pfaffian(a: np.ndarray) -> float:
    """Pfaffian of an antisymmetric matrix of even size (1 for size 0).

    Recursive first-row expansion; sign fixed by Pf([[0, a], [-a, 0]]) = a,
    so Pf^2 = det.  Intended for sizes <= 8.
    """
    a = np.asarray(a, float)
    if a.size == 0:
        return 1.0
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotAntisymmetric("pfaffian needs a square matrix")
    k = a.shape[0]
    if k % 2 == 1:
        raise NotAntisymmetric("pfaffian needs even size")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a + a.T)) > 1e-12 * scale:
        raise NotAntisymmetric("matrix is not antisymmetric within 1e-12")
    return _pf_expand(a)


def _pf_expand(a: np.ndarray) -> float:
    k = a.shape[0]
    if k == 0:
        return 1.0
    if k == 2:
        return float(a[0, 1])
    total = 0.0
    rest = list(range(1, k))
    for pos, j in enumerate(rest):
        keep = [i for i in rest if i != j]
        minor = a[np.ix_(keep, keep)]
        total += (-1.0) ** pos * a[0, j] * _pf_expand(minor)
    return total


@dataclass(frozen=True)
class MQCoefficients:
    """Coefficient table of the MQ form at one fiber point.

    ``terms`` maps each even MultiIndex I to the scalar multiplying dx^{I'}:
        c_I = pi^(-n/2) e^(-|x|^2) eps(I,I') Pf(Omega_I / 2).
    The term of vertical degree n is the I = {} entry.
    """

    rank: int
    fiber_point: np.ndarray
    curvature: np.ndarray
    terms: dict[MultiIndex, float]


def mq_coefficients(n: int, curvature: np.ndarray, x: np.ndarray) -> MQCoefficients:
    """Coefficients of the Mathai-Quillen Thom form of rank n.

    ``curvature`` is the antisymmetric n x n matrix of horizontal 2-form
    coefficients in a synchronous frame; ``x`` the fiber point.
    """
    omega = np.asarray(curvature, float)
    x = np.atleast_1d(np.asarray(x, float))
    if omega.shape != (n, n):
        raise ValueError("curvature must be n x n")
    scale = max(1.0, float(np.max(np.abs(omega))) if omega.size else 1.0)
    if n and np.max(np.abs(omega + omega.T)) > 1e-12 * scale:
        raise NotAntisymmetric("curvature matrix must be antisymmetric")
    gauss = math.pi ** (-n / 2.0) * math.exp(-float(x @ x))
    terms: dict[MultiIndex, float] = {}
    for index in even_subsets(n):
        sub = omega[np.ix_([i - 1 for i in index.members],
                           [i - 1 for i in index.members])]
        terms[index] = gauss * shuffle_sign(index) * pfaffian(0.5 * sub)
    return MQCoefficients(n, x, omega, terms)


def fiber_integral(n: int, curvature: np.ndarray, quad_points: int = 40) -> float:
    """Integral of the MQ form over one fiber (the Thom condition).

    Only the I = {} term has full vertical degree n; curvature terms have
    vertical degree n - |I| < n and integrate to zero against the fiber, so
    the fiber integral is the Gauss-Hermite quadrature of the I = {} entry
    of :func:`mq_coefficients`.  It equals 1 for every curvature.
    """
    empty = MultiIndex((), n)
    coeff_at_zero = mq_coefficients(n, curvature, np.zeros(n)).terms[empty]
    # x-dependence of the I = {} term is exactly e^{-|x|^2}; Gauss-Hermite
    # carries that weight, so the integral separates into 1-D factors.
    _, weights = np.polynomial.hermite.hermgauss(quad_points)
    return coeff_at_zero * float(np.sum(weights)) ** n


def pfaffian_sum_constcurv(index: MultiIndex, kappa: float) -> float:
    """Double-permutation curvature sum of the constant-curvature integrand:

        sum_{sigma, tau in Sym(|I|)} sgn(sigma) sgn(tau)
            R_{i_s(1) i_s(2) i_t(1) i_t(2)} * ... (|I|/2 factors)

    for R_ijkl = kappa (delta_il delta_jk - delta_ik delta_jl), i.e. the
    convention with R_1212 = 1 at curvature -1.  Empty index gives 1.
    """
    k = len(index)
    if k % 2 == 1:
        raise ValueError("curvature sum needs an even multi-index")
    if k == 0:
        return 1.0
    ids = index.members
    total = 0.0
    for sigma in itertools.permutations(range(k)):
        ssgn = permutation_sign(sigma)
        for tau in itertools.permutations(range(k)):
            tsgn = permutation_sign(tau)
            prod = 1.0
            for t in range(0, k, 2):
                i, j = ids[sigma[t]], ids[sigma[t + 1]]
                kk, ll = ids[tau[t]], ids[tau[t + 1]]
                prod *= kappa * ((i == ll) * (j == kk) - (i == kk) * (j == ll))
                if prod == 0.0:
                    break
            total += ssgn * tsgn * prod
    return total
