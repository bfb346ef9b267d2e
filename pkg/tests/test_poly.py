import numpy as np
import pytest
from hypothesis import given, strategies as st

from bidisk_realize.errors import ClearingFailed, DegenerateSlice, DenominatorZero
from bidisk_realize.poly import (
    MatPoly,
    RationalMatrixFunction,
    breve,
    conj_reflect,
    divide_exactly,
    eval_rational,
    exact_array,
    slice_stability_check,
)
from bidisk_realize.scalars import GaussianRational as G

from conftest import disk_points

small = st.integers(-20, 20)
nonzero = st.integers(1, 9)


@st.composite
def gaussian(draw):
    return G(f"{draw(small)}/{draw(nonzero)}", f"{draw(small)}/{draw(nonzero)}")


@st.composite
def laurent(draw, rows=2, cols=2, exact=True):
    lo = draw(st.integers(-2, 0))
    hi = draw(st.integers(0, 2))
    coeffs = {}
    for k in range(lo, hi + 1):
        m = exact_array(np.zeros((rows, cols), dtype=int))
        for i in range(rows):
            for j in range(cols):
                m[i, j] = draw(gaussian())
        coeffs[(k,)] = m
    return MatPoly(coeffs, rows, cols, 1, True)


@given(gaussian(), gaussian(), gaussian())
def test_exact_arithmetic_associative_distributive(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@given(laurent())
def test_conj_reflect_involution(L):
    assert conj_reflect(conj_reflect(L)) == L


@given(laurent(), laurent())
def test_conj_reflect_reverses_products(L, M):
    assert conj_reflect(L @ M) == conj_reflect(M) @ conj_reflect(L)


@given(laurent(), laurent())
def test_eval_of_product_float(L, M):
    z = disk_points(50, 1) + 0.05
    Lf, Mf = L.to_float(), M.to_float()
    lhs = (Lf @ Mf).evaluate_many(z)
    rhs = Lf.evaluate_many(z) @ Mf.evaluate_many(z)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


@given(laurent(), laurent())
def test_eval_of_product_exact(L, M):
    pt = (G("1/3", "2/5"),)
    assert np.all((L @ M).evaluate(pt) == L.evaluate(pt).dot(M.evaluate(pt)))


def test_breve_involution_and_pattern(fx):
    S = RationalMatrixFunction.polynomial(fx["S"])
    Sb = breve(S)
    assert breve(Sb).num == S.num
    # breve(S)_12 = (z1 - z2) / 2
    expected = MatPoly.scalar({(1, 0): G("1/2"), (0, 1): G("-1/2")}, 2)
    assert Sb.num.submatrix([0], [1]) == expected


def test_breve_scalar_z():
    z = MatPoly.variable(0, 1)
    assert z.breve() == z


def test_eval_rational_kummert(fx):
    S = RationalMatrixFunction.polynomial(fx["S"])
    one = G(1)
    val = eval_rational(S, (one, one))
    assert np.all(val == exact_array(np.eye(2, dtype=int)))
    # independent monomial summation at (i, -i)
    z1, z2 = 1j, -1j
    ref = 0.5 * np.array([[z1 * (z1 + z2), z1 * z2 * (z1 - z2)], [z1 - z2, z2 * (z1 + z2)]])
    got = eval_rational(S.to_float(), (z1, z2))
    assert np.allclose(got, ref, atol=1e-15)


def test_eval_rational_zero_denominator():
    num = MatPoly.identity(1, 1)
    den = MatPoly.scalar({(0,): G(1), (1,): G(-1)}, 1)
    with pytest.raises(DenominatorZero):
        eval_rational(RationalMatrixFunction(num, den), (G(1),))
    zI = MatPoly.variable(0, 1, size=2)
    assert np.all(eval_rational(RationalMatrixFunction.polynomial(zI), (G(0),)) == exact_array(np.zeros((2, 2), dtype=int)))


def test_conj_reflect_examples(fx):
    L = MatPoly.scalar({(0,): G(1), (1,): G("-1/2")}, 1)
    assert conj_reflect(L) == MatPoly.scalar({(0,): G(1), (-1,): G("-1/2")}, 1)
    assert conj_reflect(fx["T"]) == fx["T"]


def test_slice_stability_examples():
    one = MatPoly.scalar({(0, 0): 1.0}, 2)
    assert slice_stability_check(one).passed
    rep = slice_stability_check(MatPoly.scalar({(0, 0): 2.0, (1, 0): -1.0}, 2))
    assert rep.passed and abs(rep.min_root_modulus[0] - 2) < 1e-12
    boundary = MatPoly.scalar({(0, 0): 1.0, (1, 0): -1.0}, 2)
    rep = slice_stability_check(boundary, symmetric=False)
    assert rep.passed and abs(rep.min_root_modulus[0] - 1) < 1e-8
    # the swapped slice through z1 = 1 vanishes: 1 - z1 is a circle factor
    with pytest.raises(DegenerateSlice):
        slice_stability_check(boundary)
    rep = slice_stability_check(MatPoly.scalar({(0, 0): 1.0, (1, 0): -2.0}, 2))
    assert not rep.passed


def test_slice_stability_degenerate():
    # (1 + z2) vanishes identically on the slice z2 = -1
    p = MatPoly.scalar({(0, 0): 1.0, (0, 1): 1.0, (1, 1): 0.5, (1, 0): 0.5}, 2)
    with pytest.raises(DegenerateSlice):
        slice_stability_check(p, m=64)


def test_json_roundtrip_exact_and_float(fx):
    S = fx["S"]
    assert MatPoly.from_json(S.to_json()) == S
    A = fx["A"]
    B = MatPoly.from_json(A.to_json())
    assert B.equals(A, tol=0.0)


def test_float_pruning():
    P = MatPoly({(0,): np.array([[1.0]]), (3,): np.array([[1e-15]])}, 1, 1, 1, False)
    assert P.prune().degree() == 0


def test_divide_exactly():
    d = MatPoly.scalar({(0, 1): 1.0, (0, 0): -0.5}, 2, False)
    q = MatPoly.scalar({(1, 0): 2.0, (0, 2): 1j}, 2, False)
    assert divide_exactly(q @ d, d, var=1).equals(q, tol=1e-12)
    with pytest.raises(ClearingFailed):
        divide_exactly(q @ d + MatPoly.scalar({(0, 0): 1.0}, 2, False), d, var=1)
    # a rounding-level top coefficient does not raise the divisor degree
    noisy = MatPoly.scalar({(0,): 3e-5, (2,): 5e-18}, 1, False)
    num = MatPoly.scalar({(0,): 3e-5, (1,): 6e-5}, 1, False)
    assert divide_exactly(num, noisy).equals(MatPoly.scalar({(0,): 1.0, (1,): 2.0}, 1, False), tol=1e-9)
