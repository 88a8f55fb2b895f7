import itertools
import math

import numpy as np
import pytest

from mqlefschetz.errors import NotAntisymmetric
from mqlefschetz.mqthom import (MultiIndex, even_subsets, fiber_integral,
                                mq_coefficients, pfaffian,
                                pfaffian_sum_constcurv, shuffle_sign)


def random_antisymmetric(rng, k):
    a = rng.normal(size=(k, k))
    return a - a.T


def test_multi_index_validation():
    with pytest.raises(ValueError):
        MultiIndex((2, 1), 3)
    with pytest.raises(ValueError):
        MultiIndex((0, 1), 3)
    assert MultiIndex((1, 3), 4).complement.members == (2, 4)


def test_shuffle_sign_examples():
    assert shuffle_sign(MultiIndex((1, 2), 3)) == 1
    assert shuffle_sign(MultiIndex((2, 3), 3)) == 1   # cyclic permutation
    assert shuffle_sign(MultiIndex((1, 3), 4)) == -1  # one transposition


def test_shuffle_sign_complement_identity():
    # eps(I,I') eps(I',I) = (-1)^{|I||I'|}, exhaustively up to rank 6
    for n in range(1, 7):
        for k in range(n + 1):
            for members in itertools.combinations(range(1, n + 1), k):
                idx = MultiIndex(members, n)
                comp = idx.complement
                assert shuffle_sign(idx) * shuffle_sign(comp) \
                    == (-1) ** (len(idx) * len(comp))


def test_pfaffian_basics(rng):
    assert pfaffian(np.zeros((0, 0))) == 1.0
    a = 1.7
    assert pfaffian(np.array([[0, a], [-a, 0]])) == pytest.approx(a)
    b = -0.6
    block = np.zeros((4, 4))
    block[0, 1], block[1, 0] = a, -a
    block[2, 3], block[3, 2] = b, -b
    assert pfaffian(block) == pytest.approx(a * b)
    with pytest.raises(NotAntisymmetric):
        pfaffian(np.eye(2))
    with pytest.raises(NotAntisymmetric):
        pfaffian(np.zeros((3, 3)))


def test_pfaffian_squares_to_det(rng):
    for k in (2, 4, 6, 8):
        for _ in range(20):
            a = random_antisymmetric(rng, k)
            assert pfaffian(a) ** 2 == pytest.approx(np.linalg.det(a), abs=1e-9,
                                                     rel=1e-9)


def test_pfaffian_orthogonal_covariance(rng):
    for k in (4, 6):
        for _ in range(20):
            a = random_antisymmetric(rng, k)
            q, _ = np.linalg.qr(rng.normal(size=(k, k)))
            lhs = pfaffian(q.T @ a @ q)
            rhs = np.linalg.det(q) * pfaffian(a)
            assert lhs == pytest.approx(rhs, abs=1e-9, rel=1e-9)


def test_mq_coefficients_rank1():
    x = np.array([0.7])
    table = mq_coefficients(1, np.zeros((1, 1)), x)
    c_empty = table.terms[MultiIndex((), 1)]
    assert c_empty == pytest.approx(math.pi ** -0.5 * math.exp(-0.49))
    assert len(table.terms) == 1  # only even |I| = 0 exists at rank 1


def test_mq_coefficients_rank2():
    flat = mq_coefficients(2, np.zeros((2, 2)), np.zeros(2))
    assert flat.terms[MultiIndex((), 2)] == pytest.approx(1.0 / math.pi)
    assert flat.terms[MultiIndex((1, 2), 2)] == 0.0
    omega = 0.8
    curved = mq_coefficients(2, np.array([[0, omega], [-omega, 0]]), np.zeros(2))
    assert curved.terms[MultiIndex((1, 2), 2)] \
        == pytest.approx(omega / (2.0 * math.pi))


def test_mq_vertical_degree_structure(rng):
    # only even |I| appear; at zero curvature only I = {} survives
    table = mq_coefficients(4, np.zeros((4, 4)), np.zeros(4))
    for idx, val in table.terms.items():
        assert len(idx) % 2 == 0
        if len(idx) > 0:
            assert val == 0.0
    assert len(list(even_subsets(4))) == len(table.terms)


def test_fiber_integral_is_one(rng):
    for n in (1, 2, 3, 4):
        for _ in range(20):
            omega = random_antisymmetric(rng, n)
            assert fiber_integral(n, omega) == pytest.approx(1.0, abs=1e-6)


def test_pfaffian_sum_constcurv():
    assert pfaffian_sum_constcurv(MultiIndex((), 2), -1.0) == 1.0
    assert pfaffian_sum_constcurv(MultiIndex((1, 2), 2), -1.0) == pytest.approx(4.0)
    assert pfaffian_sum_constcurv(MultiIndex((1, 2), 2), 1.0) == pytest.approx(-4.0)
    # |I| = 4 value against an independent direct enumeration with
    # R_ijkl = kappa (delta_il delta_jk - delta_ik delta_jl)
    idx = MultiIndex((1, 2, 3, 4), 4)

    def riemann(i, j, k, l, kappa):
        return kappa * ((i == l) * (j == k) - (i == k) * (j == l))

    for kappa in (-1.0, 1.0, 0.5):
        brute = 0.0
        for sigma in itertools.permutations(range(4)):
            ssgn = _sign(sigma)
            for tau in itertools.permutations(range(4)):
                tsgn = _sign(tau)
                ids = idx.members
                prod = (riemann(ids[sigma[0]], ids[sigma[1]],
                                ids[tau[0]], ids[tau[1]], kappa)
                        * riemann(ids[sigma[2]], ids[sigma[3]],
                                  ids[tau[2]], ids[tau[3]], kappa))
                brute += ssgn * tsgn * prod
        assert pfaffian_sum_constcurv(idx, kappa) == pytest.approx(brute)


def _sign(perm):
    s = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                s = -s
    return s
