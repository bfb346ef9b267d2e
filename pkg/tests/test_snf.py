import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bidisk_realize.errors import FloatInput
from bidisk_realize.poly import MatPoly, exact_array, exact_eye
from bidisk_realize.scalars import GaussianRational as G
from bidisk_realize.snf import (
    exact_nullspace,
    exact_rank,
    minimal_kernel_basis,
    smith_normal_form,
    unimodular_completion,
)


def poly(entries, rows, cols):
    """``entries[(i, j)] = [c0, c1, ...]`` with integer coefficients."""
    coeffs = {}
    for (i, j), cs in entries.items():
        for k, c in enumerate(cs):
            m = coeffs.setdefault((k,), exact_array(np.zeros((rows, cols), dtype=int)))
            m[i, j] = G(c)
    return MatPoly(coeffs, rows, cols, 1, True)


def factor_list(sf):
    return [f.to_float().dense()[0][:, 0, 0].round(12).tolist() if not f.is_zero() else [] for f in sf.factors]


def test_diagonal_already_in_form():
    P = poly({(0, 0): [0, 1], (1, 1): [0, 0, 1]}, 2, 2)
    sf = smith_normal_form(P)
    assert sf.D == P
    assert sf.T1 == MatPoly.identity(2, 1) and sf.T2 == MatPoly.identity(2, 1)


def test_swaps_to_divisibility_order():
    P = poly({(0, 0): [0, 1], (1, 1): [1]}, 2, 2)
    sf = smith_normal_form(P)
    assert sf.D == poly({(0, 0): [1], (1, 1): [0, 1]}, 2, 2)


def test_rank_one():
    P = poly({(0, 0): [1], (0, 1): [0, 1], (1, 0): [0, 1], (1, 1): [0, 0, 1]}, 2, 2)
    sf = smith_normal_form(P)
    assert sf.rank == 1
    assert sf.D == poly({(0, 0): [1]}, 2, 2)


def test_float_rejected():
    with pytest.raises(FloatInput):
        smith_normal_form(MatPoly.identity(2, 1, exact=False))


def random_exact_poly(rng, rows, cols, deg, rank=None):
    def entry():
        return G(rng.randint(-3, 3), rng.randint(-2, 2))

    def mat(r, c):
        m = exact_array(np.zeros((r, c), dtype=int))
        for i in range(r):
            for j in range(c):
                m[i, j] = entry()
        return m

    if rank is None:
        return MatPoly({(k,): mat(rows, cols) for k in range(deg + 1)}, rows, cols, 1, True)
    L = MatPoly({(k,): mat(rows, rank) for k in range(deg + 1)}, rows, rank, 1, True)
    R = MatPoly({(0,): mat(rank, cols)}, rank, cols, 1, True)
    return L @ R


def random_unimodular(rng, n):
    # upper unitriangular with polynomial entries times a permutation
    U = MatPoly.identity(n, 1)
    for i in range(n):
        for j in range(i + 1, n):
            e = exact_array(np.zeros((n, n), dtype=int))
            e[i, j] = G(rng.randint(-2, 2))
            U = U + MatPoly({(1,): e}, n, n, 1, True)
    perm = list(range(n))
    rng.shuffle(perm)
    Pm = exact_array(np.eye(n, dtype=int)[perm])
    return U @ MatPoly.constant(Pm, 1)


@given(st.integers(0, 10_000), st.integers(1, 3), st.sampled_from([None, 1]))
def test_reconstruction_and_inverses(seed, deg, rank):
    rng = random.Random(seed)
    P = random_exact_poly(rng, 3, 3, deg, rank)
    sf = smith_normal_form(P)
    assert sf.T1 @ sf.D @ sf.T2 == P
    assert sf.T1 @ sf.T1_inv == MatPoly.identity(3, 1)
    assert sf.T2 @ sf.T2_inv == MatPoly.identity(3, 1)
    # nonzero invariant factors count the rank at an exact sample point
    pt = (G(rng.randint(2, 9), rng.randint(1, 5)),)
    assert sf.rank == exact_rank(P.evaluate(pt))
    # divisibility chain d_j | d_{j+1}
    nz = [f for f in sf.factors if not f.is_zero()]
    for a, b in zip(nz, nz[1:]):
        assert a.degree() <= b.degree()


@given(st.integers(0, 10_000))
def test_invariant_factors_unimodular_invariance(seed):
    rng = random.Random(seed)
    P = random_exact_poly(rng, 2, 2, 2)
    U, W = random_unimodular(rng, 2), random_unimodular(rng, 2)
    assert factor_list(smith_normal_form(U @ P @ W)) == factor_list(smith_normal_form(P))


def test_exact_nullspace():
    M = exact_array(np.array([[1, 2, 3], [2, 4, 6]]))
    basis = exact_nullspace(M)
    assert len(basis) == 2
    for v in basis:
        assert np.all(M.dot(v) == exact_array(np.zeros(2, dtype=int)))


@given(st.integers(0, 10_000))
def test_kernel_basis_and_completion(seed):
    rng = random.Random(seed)
    P = random_exact_poly(rng, 3, 3, 1, rank=rng.choice([1, 2]))
    K = minimal_kernel_basis(P)
    assert K.cols == 3 - smith_normal_form(P).rank
    assert (P @ K).is_zero()
    X, V = unimodular_completion(K)
    Vinv = MatPoly.hstack([X, K])
    assert V @ Vinv == MatPoly.identity(3, 1)
