import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bidisk_realize.errors import ExactRequired, MismatchedGram, NotPSD, RankDeficient, SingularDeterminant
from bidisk_realize.poly import MatPoly, float_array
from bidisk_realize.scalars import GaussianRational as G
from bidisk_realize.snf import smith_normal_form
from bidisk_realize.specfact import (
    _det_roots,
    circle_residual,
    compare_factors,
    compress_degenerate,
    factor_constant_psd,
    fejer_riesz,
    right_inverse_constant,
    spectral_factor_full_rank,
)
from bidisk_realize.verify import cayley_unitary, random_fr_instance

from conftest import circle_points, disk_points


def scalar(terms, exact=True):
    return MatPoly.scalar({(k,): (G(v) if exact else complex(v)) for k, v in terms.items()}, 1, exact=exact)


# -- constant factorization --------------------------------------------------

def test_factor_constant_psd_examples(fx):
    assert np.allclose(factor_constant_psd(np.eye(2)), np.eye(2))
    F = factor_constant_psd(np.diag([2.0, 0.0]))
    assert F.shape == (1, 2) and np.allclose(F, [[np.sqrt(2), 0]])
    Y = float_array(fx["Y"])
    F = factor_constant_psd(Y)
    assert F.shape == (2, 8)
    assert np.max(np.abs(F.conj().T @ F - Y)) <= 1e-12
    with pytest.raises(NotPSD):
        factor_constant_psd(np.diag([1.0, -1.0]))


def test_factor_constant_psd_determinism():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
    T = X.conj().T @ X
    F = factor_constant_psd(T)
    assert F.shape[0] == 3
    for row in F:
        j = np.argmax(np.abs(row) > 1e-12 * np.abs(row).max())
        assert abs(row[j].imag) < 1e-14 and row[j].real > 0
    assert np.array_equal(F, factor_constant_psd(T))


def test_right_inverse_constant(fx):
    B = right_inverse_constant(np.array([[np.sqrt(2), 0]]))
    assert np.allclose(B, [[1 / np.sqrt(2)], [0]])
    assert np.allclose(right_inverse_constant(np.eye(2)), np.eye(2))
    C = fx["C"]
    B = right_inverse_constant(C)
    assert np.max(np.abs(C @ B - np.eye(2))) <= 1e-12
    # the worked example's right inverse is a different valid choice
    assert np.max(np.abs(C @ fx["D"] - np.eye(2))) <= 1e-12
    with pytest.raises(RankDeficient):
        right_inverse_constant(np.array([[1.0, 0], [2.0, 0]]))


# -- compression ---------------------------------------------------------------

def test_compress_constant_diag():
    T = MatPoly.constant(np.array([[G(1), G(0)], [G(0), G(0)]], dtype=object), 1)
    T0, V, V_inv, r = compress_degenerate(T)
    assert r == 1 and T0 == MatPoly.constant(np.array([[G(1)]], dtype=object), 1)
    assert V @ V_inv == MatPoly.identity(2, 1)


def test_compress_full_rank_shortcut():
    T = scalar({-1: "1/2", 0: "3", 1: "1/2"})
    T0, V, V_inv, r = compress_degenerate(T)
    assert r == 1 and T0 == T and V == MatPoly.identity(1, 1)


@pytest.mark.parametrize("method", ["kernel", "smith"])
def test_compress_kummert(fx, method):
    T = fx["T"]
    T0, V, V_inv, r = compress_degenerate(T, method=method)
    assert r == 2
    full = V_inv.conj_reflect() @ T @ V_inv
    assert full.submatrix(slice(0, 2), slice(0, 2)) == T0
    assert full.submatrix(slice(2, 4), None).is_zero()
    assert V @ V_inv == MatPoly.identity(4, 1)
    assert r == smith_normal_form(T.shift(2)).rank


def test_compress_float_degenerate_rejected(fx):
    with pytest.raises(ExactRequired):
        compress_degenerate(fx["T"].to_float())


# -- full-rank spectral factor -------------------------------------------------

def test_spectral_factor_scalar():
    T0 = scalar({-1: "-1/2", 0: "5/4", 1: "-1/2"})
    A0 = spectral_factor_full_rank(T0)
    assert A0.to_float().equals(scalar({0: 1, 1: -0.5}, exact=False), tol=1e-10)


def test_spectral_factor_identity():
    A0 = spectral_factor_full_rank(MatPoly.identity(2, 1))
    assert A0.to_float().equals(MatPoly.identity(2, 1, exact=False), tol=1e-12)


def test_spectral_factor_singular():
    T = MatPoly.constant(np.array([[G(1), G(1)], [G(1), G(1)]], dtype=object), 1)
    with pytest.raises(SingularDeterminant):
        spectral_factor_full_rank(T)


def test_spectral_factor_normalization():
    T, _, _ = random_fr_instance(3, 3, 2)
    A0 = spectral_factor_full_rank(T)
    c0 = A0.to_float().coeff((0,))
    assert np.max(np.abs(np.tril(c0, -1))) <= 1e-10
    assert np.all(np.abs(np.diag(c0).imag) <= 1e-10) and np.all(np.diag(c0).real >= -1e-12)


# -- Fejér-Riesz -----------------------------------------------------------------

def test_fejer_riesz_identity():
    fr = fejer_riesz(MatPoly.identity(2, 1))
    assert fr.A.to_float().equals(MatPoly.identity(2, 1, exact=False), tol=1e-12)
    z = disk_points(8)
    assert np.allclose(fr.B_values(z), np.eye(2))


def test_fejer_riesz_boundary_zero():
    fr = fejer_riesz(scalar({-1: 1, 0: 2, 1: 1}))
    assert fr.A.to_float().equals(scalar({0: 1, 1: 1}, exact=False), tol=1e-8)


def test_fejer_riesz_kummert(fx):
    T = fx["T"]
    fr = fejer_riesz(T)
    res, scale = circle_residual(fr.A, T)
    assert res <= 1e-9 * scale
    z = disk_points(32, 2)
    AB = fr.A.to_float().evaluate_many(z) @ fr.B_values(z)
    assert np.max(np.abs(AB - np.eye(2))) <= 1e-9
    assert fr.A.degree() <= 2
    # the worked example's factor is accepted and differs by a constant unitary
    cmp = compare_factors(fr, fx["A"])
    assert cmp.constant and cmp.isoinner_residual <= 1e-8
    U = cmp.constant_value
    assert np.max(np.abs(U.conj().T @ U - np.eye(2))) <= 1e-8
    zc = circle_points(64)
    Ap = fx["A"].evaluate_many(zc)
    assert np.max(np.abs(np.conj(np.swapaxes(Ap, 1, 2)) @ Ap - T.to_float().evaluate_many(zc))) <= 1e-12
    assert np.max(np.abs(fx["A"].evaluate_many(zc) @ fx["B"].evaluate_many(zc) - np.eye(2))) <= 1e-12


def test_kummert_core_determinant(fx):
    # the compressed core here has constant determinant, so no zeros in the disk
    fr = fejer_riesz(fx["T"])
    roots = _det_roots(fr.A0.to_float())
    assert roots.size == 0 or np.min(np.abs(roots)) >= 1 - 1e-8


# -- factor comparison -------------------------------------------------------------

def test_compare_same_factor():
    fr = fejer_riesz(scalar({-1: "-1/2", 0: "5/4", 1: "-1/2"}))
    cmp = compare_factors(fr, fr.A)
    assert cmp.constant and np.allclose(cmp.constant_value, [[1]])


def test_compare_constant_unitary():
    import random

    T, R, _ = random_fr_instance(0, 2, 1)
    fr = fejer_riesz(T)
    U = float_array(cayley_unitary(2, random.Random(5)))
    cmp = compare_factors(fr, MatPoly.constant(U, 1) @ fr.A.to_float())
    assert cmp.constant and np.max(np.abs(cmp.constant_value - U)) <= 1e-10


def test_compare_blaschke():
    fr = fejer_riesz(scalar({-1: "-1/2", 0: "5/4", 1: "-1/2"}))
    C = scalar({0: -0.5, 1: 1}, exact=False)
    cmp = compare_factors(fr, C)
    assert not cmp.constant and cmp.isoinner_residual <= 1e-10
    z = disk_points(10, 3)
    ref = (z - 0.5) / (1 - z / 2)
    assert np.allclose(cmp.phi.evaluate_many(z)[:, 0, 0], ref, atol=1e-10)


def test_compare_mismatched():
    fr = fejer_riesz(scalar({-1: "-1/2", 0: "5/4", 1: "-1/2"}))
    with pytest.raises(MismatchedGram):
        compare_factors(fr, scalar({0: 2}, exact=False))


# -- properties ------------------------------------------------------------------

@settings(max_examples=15)
@given(st.integers(0, 500), st.integers(2, 3), st.integers(1, 2))
def test_fejer_riesz_properties(seed, N, degree):
    T, R, kind = random_fr_instance(seed, N, degree)
    fr = fejer_riesz(T)
    res, scale = circle_residual(fr.A, T, m=128)
    assert res <= 1e-8 * scale
    roots = _det_roots(fr.A0.to_float()) if fr.r else np.zeros(0)
    assert roots.size == 0 or np.min(np.abs(roots)) >= 1 - 1e-8
    z = disk_points(32, seed)
    den = fr.B_den.to_float().evaluate_many(z)[:, 0, 0]
    ok = np.abs(den) > 1e-6
    AB = fr.A.to_float().evaluate_many(z[ok]) @ fr.B_values(z[ok])
    assert np.max(np.abs(AB - np.eye(fr.r)), initial=0.0) <= 1e-8
    # rank consistency against samples on the circle and the Smith form
    zc = circle_points(5, 0.21)
    ranks = [np.linalg.matrix_rank(v, tol=1e-9 * scale) for v in T.to_float().evaluate_many(zc)]
    assert max(ranks) == fr.r == smith_normal_form(T.shift(max(T.laurent_degree(0), 0))).rank
    assert fr.A.degree() <= max(T.laurent_degree(0), 0)


def test_fejer_riesz_deterministic():
    T, _, _ = random_fr_instance(7, 3, 2)
    a, b = fejer_riesz(T), fejer_riesz(T)
    assert a.A.to_json() == b.A.to_json()
