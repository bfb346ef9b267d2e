import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bidisk_realize.errors import NotInner, NotIsoInner, NotStrictContraction
from bidisk_realize.kummert import (
    dominant_terms,
    minimal_breakdown,
    realize_contractive_2d_strict,
    realize_isoinner_2d,
    step1_parametrized_kernel,
)
from bidisk_realize.poly import MatPoly, float_array
from bidisk_realize.verify import random_inner_generator, verify_realization

from conftest import disk_points


def mono(k, c=1):
    return MatPoly.scalar({k: c}, 2)


def evaluate_error(R, S, seed=0):
    z1, z2 = disk_points(12, seed), disk_points(12, seed + 1)
    return float(np.max(np.abs(R.evaluate_many(z1, z2) - S.to_float().evaluate_many(z1, z2))))


def test_step1_worked_example(fx):
    T = step1_parametrized_kernel(fx["S"], 1)
    assert T.equals(fx["T"])


def test_step1_monomials():
    assert np.array_equal(float_array(step1_parametrized_kernel(mono((1, 0)), 1).coeff((0,))), [[1]])
    assert np.array_equal(float_array(step1_parametrized_kernel(mono((1, 1)), 1).coeff((0,))), [[1]])
    assert step1_parametrized_kernel(mono((0, 1)), 1).shape == (0, 0)


def test_step1_rejects_non_inner():
    with pytest.raises(NotIsoInner):
        step1_parametrized_kernel(mono((1, 0), "1/2"), 1)


def test_worked_example_pipeline(fx):
    R, cert = realize_isoinner_2d(fx["S"])
    assert R.breakdown == fx["r"]
    assert R.isometry_residual() <= 1e-10
    assert verify_realization(fx["S"], R).passed
    G, H = dominant_terms(cert)
    assert G.rows == 2 and H.rows == 2


@pytest.mark.parametrize("k, r", [((1, 0), (1, 0)), ((0, 1), (0, 1)), ((1, 1), (1, 1)), ((2, 1), (2, 1))])
def test_monomial_breakdowns(k, r):
    S = mono(k)
    R, _ = realize_isoinner_2d(S)
    assert R.breakdown == r
    assert evaluate_error(R, S) <= 1e-10


def test_minimal_breakdown_diagonal():
    S = MatPoly({(2, 0): np.diag([1.0, 0]), (0, 1): np.diag([0, 1.0])}, 2, 2, 2, False)
    assert minimal_breakdown(S) == (2, 1)
    with pytest.raises(NotInner):
        minimal_breakdown(mono((1, 0), "1/2"))


def test_contractive_zero():
    R, _, _ = realize_contractive_2d_strict(MatPoly.zeros(1, 1, 2, False))
    assert np.allclose(R.evaluate_many(disk_points(5), disk_points(5, 1)), 0, atol=1e-9)


def test_contractive_average():
    P = MatPoly.scalar({(1, 0): 0.25, (0, 1): 0.25}, 2, False)
    R, _, aug = realize_contractive_2d_strict(P)
    assert R.flavor == "contractive"
    assert np.linalg.norm(R.U, 2) <= 1 + 1e-9
    assert evaluate_error(R, P) <= 1e-7


def test_contractive_rejects_inner():
    with pytest.raises(NotStrictContraction):
        realize_contractive_2d_strict(MatPoly.scalar({(1, 1): 1.0}, 2, False))


@settings(max_examples=8)
@given(st.integers(0, 10_000), st.integers(1, 2), st.integers(0, 3))
def test_generated_inner(seed, N, k):
    g = random_inner_generator(seed, N, k)
    R, _ = realize_isoinner_2d(g.S)
    # r1 equals the z1-degree of det S and the realization is minimal overall
    assert R.r1 == g.det_degrees[0]
    assert R.breakdown == minimal_breakdown(g.S) == g.det_degrees
    assert R.isometry_residual() <= 1e-8
    assert evaluate_error(R, g.S, seed) <= 1e-7


def test_regression_noisy_denominator():
    # the spectral factor's determinant picks up a rounding-level top coefficient here
    g = random_inner_generator(7, 2, 4)
    R, _ = realize_isoinner_2d(g.S)
    assert R.breakdown == (2, 2)
    assert verify_realization(g.S, R).passed
