"""Acceptance criteria, each run at its stated tolerance and time budget.

Every test records one ``PASS``/``FAIL`` line, printed as it runs and again
in the terminal summary.
"""
import time

import numpy as np
import pytest

from bidisk_realize.agler import (
    adjoint_realization,
    decomposition_to_tfr,
    domination_check,
    nilpotency_check,
    reflect_decomposition,
    tfr_to_decomposition,
)
from bidisk_realize.kummert import minimal_breakdown, realize_contractive_2d_strict, realize_isoinner_2d
from bidisk_realize.poly import MatPoly, RationalMatrixFunction, float_array
from bidisk_realize.realize1 import TransferRealization, degdet, realize_isoinner_1d, trim
from bidisk_realize.sos2 import _sos_residual, sos_factor_strict, torus_min_eigenvalue
from bidisk_realize.specfact import _det_roots, circle_residual, compare_factors, fejer_riesz
from bidisk_realize.verify import (
    random_blaschke_product,
    random_fr_instance,
    random_inner_generator,
    verify_realization,
)

from conftest import ACCEPTANCE_LINES, circle_points, disk_points


def record(number, title, checks, elapsed):
    """Print and store one line; ``checks`` maps a label to a bool."""
    failed = [k for k, ok in checks.items() if not ok]
    status = "PASS" if not failed else "FAIL"
    line = f"criterion {number} [{status}] {title} ({elapsed:.2f}s)"
    if failed:
        line += " failed: " + ", ".join(failed)
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert not failed, line


def gram(vals):
    return np.conj(np.swapaxes(vals, 1, 2)) @ vals


def test_criterion_1_worked_fixtures(fx):
    t0 = time.perf_counter()
    S, T, A, B, U, V = fx["S"].to_float(), fx["T"].to_float(), fx["A"], fx["B"], fx["U"], fx["V"]
    rng = np.random.default_rng(0)
    w1, z1 = disk_points(10, 1), disk_points(10, 2)
    z2 = np.exp(2j * np.pi * rng.random(10))
    # divided kernel in (z1, w1) parametrized by z2 on the circle
    lhs = (np.eye(2) - np.conj(np.swapaxes(S.evaluate_many(w1, z2), 1, 2)) @ S.evaluate_many(z1, z2))
    lhs = lhs / (1 - np.conj(w1) * z1)[:, None, None]
    eye = np.repeat(np.eye(2)[None], 10, 0)
    left = np.concatenate([eye, np.conj(w1)[:, None, None] * eye], axis=2)
    right = np.concatenate([eye, z1[:, None, None] * eye], axis=1)
    step1 = np.abs(lhs - left @ T.evaluate_many(z2) @ right).max()
    z = circle_points(64)
    aa = np.abs(gram(A.evaluate_many(z)) - T.evaluate_many(z)).max()
    ab = np.abs(A.evaluate_many(z) @ B.evaluate_many(z) - np.eye(2)).max()
    u_iso = np.abs(gram(U.evaluate_many(z)) - np.eye(4)).max()
    v_unit = max(np.abs(V.conj().T @ V - np.eye(6)).max(), np.abs(V @ V.conj().T - np.eye(6)).max())
    yc = np.abs(fx["C"].conj().T @ fx["C"] - float_array(fx["Y"])).max()
    cd = np.abs(fx["C"] @ fx["D"] - np.eye(2)).max()
    R = TransferRealization.from_colligation(V, 2, 2, 2, 2)
    real = verify_realization(fx["S"], R, grid=12, tol=1e-10)
    tz = [np.exp(2j * np.pi * rng.random(8)) for _ in range(2)]
    P = V[2:, 2:][None] * R.delta(*tz)[:, None, :]
    nil = np.abs(np.linalg.matrix_power(P, 3)).max()
    elapsed = time.perf_counter() - t0
    record(1, "worked-example fixtures satisfy their identities", {
        "step-1 kernel": step1 <= 1e-10,
        "A*A = T": aa <= 1e-10,
        "AB = I": ab <= 1e-10,
        "U iso-inner": u_iso <= 1e-10,
        "V unitary": v_unit <= 1e-12,
        "Y = C*C, CD = I": yc <= 1e-10 and cd <= 1e-10,
        "realization": real.passed,
        "(V22 Delta)^3 = 0": nil <= 1e-12,
        "runtime < 5 s": elapsed < 5,
    }, elapsed)


def test_criterion_2_pipeline_reproduction(fx):
    t0 = time.perf_counter()
    R, cert = realize_isoinner_2d(fx["S"])
    rep = verify_realization(fx["S"], R, tol=1e-8)
    cmp = compare_factors(cert.fr, fx["A"], tol=1e-8)
    c = np.atleast_2d(cmp.constant_value) if cmp.constant else None
    unitary = c is not None and np.abs(c.conj().T @ c - np.eye(c.shape[1])).max() <= 1e-8
    elapsed = time.perf_counter() - t0
    record(2, "pipeline reproduces the worked realization", {
        "breakdown (2, 2)": R.breakdown == (2, 2),
        "isometry": R.isometry_residual() <= 1e-10,
        "realization": rep.passed,
        "A matches up to a constant unitary": cmp.constant and unitary,
        "runtime < 30 s": elapsed < 30,
    }, elapsed)


def test_criterion_3_minimality():
    t0 = time.perf_counter()
    bad = []
    for seed in range(50):
        N, k = 1 + seed % 3, seed % 6
        g = random_inner_generator(seed, N, k)
        R, _ = realize_isoinner_2d(g.S)
        ok = (R.breakdown == minimal_breakdown(g.S) == g.det_degrees
              and nilpotency_check(R).passed
              and verify_realization(g.S, R, tol=1e-7).passed)
        if not ok:
            bad.append(seed)
    elapsed = time.perf_counter() - t0
    record(3, "50 polynomial inner functions realized minimally", {
        f"seeds {bad}": not bad,
        "runtime < 10 min": elapsed < 600,
    }, elapsed)


def test_criterion_4_one_variable():
    t0 = time.perf_counter()
    bad = []
    for seed in range(100):
        N, k = 1 + seed % 3, 1 + seed % 4
        Q, p, deg = random_blaschke_product(seed, N, k)
        S = RationalMatrixFunction(Q, p)
        R, _ = realize_isoinner_1d(Q, p)
        ok = (R.size == degdet(S) == trim(R).size == deg
              and R.isometry_residual() <= 1e-9
              and verify_realization(S, R, tol=1e-9).passed)
        if not ok:
            bad.append(seed)
    record(4, "100 one-variable rational inner functions", {f"seeds {bad}": not bad}, time.perf_counter() - t0)


def test_criterion_5_fejer_riesz():
    t0 = time.perf_counter()
    bad, kinds = [], set()
    for seed in range(30):
        N = 2 + seed % 2
        T, Rc, kind = random_fr_instance(seed, N, 1 + seed % 3)
        kinds.add(kind)
        fr = fejer_riesz(T)
        res, scale = circle_residual(fr.A, T)
        roots = _det_roots(fr.A0.to_float()) if fr.A0.rows else np.zeros(0)
        cmp = compare_factors(fr, Rc, tol=1e-8)
        ok = (res <= 1e-8 * scale
              and (roots.size == 0 or np.abs(roots).min() >= 1 - 1e-8)
              and cmp.isoinner_residual <= 1e-8 and cmp.factor_residual <= 1e-8)
        if not ok:
            bad.append(seed)
    record(5, "30 Fejer-Riesz factorizations", {
        f"seeds {bad}": not bad,
        "generic, deficient and circle cases": kinds == {"generic", "deficient", "circle"},
    }, time.perf_counter() - t0)


def _roundtrip(S):
    R, _ = realize_isoinner_2d(S)
    dec = tfr_to_decomposition(R, S)
    R2 = decomposition_to_tfr(dec, S)
    roundtrip = R2.size == R.size and verify_realization(S, R2, tol=1e-8).passed
    adjoint = verify_realization(S.breve(), adjoint_realization(R), tol=1e-8).passed
    rd = reflect_decomposition(dec, S, tol=1e-8)
    reflect = rd.info["identity_residual"] <= 1e-8
    _, cb = realize_isoinner_2d(S.breve())
    dominance = domination_check(rd.Gamma2, cb.H, var=2).psd
    return roundtrip, adjoint, reflect, dominance


def test_criterion_6_equivalences(fx):
    t0 = time.perf_counter()
    cases = [("worked", fx["S"])]
    cases += [(f"seed {s}", random_inner_generator(s, 1 + s % 3, 1 + s % 4).S) for s in range(20)]
    fails = {"round trip": [], "adjoint": [], "reflection identity": [], "reflected dominance": []}
    for name, S in cases:
        for label, ok in zip(fails, _roundtrip(S)):
            if not ok:
                fails[label].append(name)
    record(6, "decomposition round trips, adjoints and reflection",
           {f"{k} {v}": not v for k, v in fails.items()}, time.perf_counter() - t0)


def _random_positive(seed):
    rng = np.random.default_rng(seed)
    N = 1 + seed % 2
    R = MatPoly({(i, j): rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
                 for i in range(2) for j in range(2)}, N, N, 2, False) * 0.3
    return (R.conj_reflect() @ R + MatPoly.identity(N, 2, exact=False) * (0.2 + rng.random())).hermitian_part().prune()


def _random_contraction(seed):
    rng = np.random.default_rng(1000 + seed)
    N = 1 + seed % 2
    P = MatPoly({(i, j): rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
                 for i in range(2) for j in range(2) if i + j <= 1}, N, N, 2, False)
    vals = P.evaluate_many(*[c.ravel() for c in np.meshgrid(circle_points(32), circle_points(32))])
    return P * (0.7 / np.max(np.linalg.norm(vals, 2, axis=(1, 2))))


def test_criterion_7_strict_sos():
    t0 = time.perf_counter()
    sos_bad = []
    for seed in range(10):
        T = _random_positive(seed)
        A = sos_factor_strict(T, 0.999 * torus_min_eigenvalue(T, 32))
        if _sos_residual(A, T, 48) > 1e-7:
            sos_bad.append(seed)
    contractions = [("(z1+z2)/4", MatPoly.scalar({(1, 0): 0.25, (0, 1): 0.25}, 2, False))]
    contractions += [(f"seed {s}", _random_contraction(s)) for s in range(10)]
    real_bad = []
    for name, P in contractions:
        R, _, _ = realize_contractive_2d_strict(P)
        if not verify_realization(P, R, tol=1e-7).passed:
            real_bad.append(name)
    record(7, "strict sums of squares and strict contractions", {
        f"sos seeds {sos_bad}": not sos_bad,
        f"contractive realizations {real_bad}": not real_bad,
    }, time.perf_counter() - t0)


def test_criterion_8_scope():
    # The general existence statements (rational inner functions in full
    # generality, asymptotic degree claims) are not checkable by a finite
    # computation. Criteria 3 to 7 stand in for them as property suites.
    record(8, "non-constructive claims covered by the property suites 3-7", {"documented": True}, 0.0)
