"""One-variable matrix Fejér-Riesz factorization.

Given a hermitian matrix Laurent polynomial ``T`` that is positive
semidefinite on the unit circle, :func:`fejer_riesz` returns a matrix
polynomial ``A`` with ``A(z)^* A(z) = T(z)`` on the circle, ``deg A`` at most
the half-degree of ``T``, and a right rational inverse ``B`` analytic in the
disk. Rank-deficient inputs are compressed exactly with the Smith normal form
before the full-rank core is factored numerically.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    ExactRequired,
    MismatchedGram,
    NoConvergence,
    NotHermitian,
    NotPSD,
    NotPSDOnCircle,
    RankDeficient,
    SingularDeterminant,
)
from .poly import MatPoly, RationalMatrixFunction, fit_polynomial, float_array
from .snf import generic_rank_exact, minimal_kernel_basis, smith_normal_form, unimodular_completion

log = logging.getLogger(__name__)

TOL_RANK = 1e-10
TOL_ROOT = 1e-8
BOUNDARY_RADIUS = 1e-6
EXTRACT_RADIUS = 4.0
BAUER_MAX_SIZE = 4096

__all__ = [
    "FRFactor",
    "FactorComparison",
    "factor_constant_psd",
    "right_inverse_constant",
    "compress_degenerate",
    "spectral_factor_full_rank",
    "fejer_riesz",
    "compare_factors",
    "poly_det_adj",
    "circle_residual",
    "refine_factor",
]


# ---------------------------------------------------------------------------
# constant matrices
# ---------------------------------------------------------------------------

def factor_constant_psd(T, tol_rank: float = TOL_RANK) -> np.ndarray:
    """``F`` with ``F^* F = T`` and one row per eigenvalue above ``tol_rank * ||T||``.

    Rows follow descending eigenvalues; the first non-negligible entry of
    each row is made real and nonnegative so the output is deterministic.
    """
    T = float_array(np.atleast_2d(T))
    n = T.shape[0]
    if T.shape != (n, n):
        raise NotHermitian("factor_constant_psd needs a square matrix")
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    norm = float(np.max(np.abs(T))) if T.size else 0.0
    if np.max(np.abs(T - T.conj().T)) > 1e-8 * max(norm, 1e-300):
        raise NotHermitian("matrix is not hermitian")
    H = (T + T.conj().T) / 2
    w, U = np.linalg.eigh(H)
    top = max(float(np.max(np.abs(w))), 0.0)
    if top == 0.0:
        return np.zeros((0, n), dtype=complex)
    if w[0] < -tol_rank * top:
        raise NotPSD(f"eigenvalue {w[0]:.3e} below -tol_rank*||T||")
    order = np.argsort(-w, kind="stable")
    keep = [i for i in order if w[i] > tol_rank * top]
    F = np.sqrt(w[keep])[:, None] * U[:, keep].conj().T
    for row in F:
        mags = np.abs(row)
        j = int(np.argmax(mags > 1e-12 * mags.max()))
        row *= np.conj(row[j]) / abs(row[j])
    return F


def right_inverse_constant(F, tol_rank: float = TOL_RANK) -> np.ndarray:
    """Minimum-norm right inverse of a full-row-rank matrix."""
    F = float_array(np.atleast_2d(F))
    r = F.shape[0]
    if r == 0:
        return np.zeros((F.shape[1], 0), dtype=complex)
    s = np.linalg.svd(F, compute_uv=False)
    if s.size < r or s[-1] <= tol_rank * s[0]:
        raise RankDeficient("matrix does not have full row rank")
    return F.conj().T @ np.linalg.inv(F @ F.conj().T)


# ---------------------------------------------------------------------------
# helpers on Laurent polynomials
# ---------------------------------------------------------------------------

def _circle_points(m, phase=0.0):
    return np.exp(2j * np.pi * (np.arange(m) / m + phase))


def circle_residual(A: MatPoly, T: MatPoly, m: int = 128) -> tuple:
    """``(max ||A^*A - T||, max ||T||)`` over ``m`` circle samples."""
    z = _circle_points(m, 0.0371)
    Tv = T.evaluate_many(z) if not T.is_zero() else np.zeros((m, T.rows, T.cols), dtype=complex)
    Av = A.evaluate_many(z)
    G = np.conj(np.swapaxes(Av, 1, 2)) @ Av
    res = float(np.max(np.linalg.norm(G - Tv, ord=2, axis=(1, 2)))) if T.rows else 0.0
    scale = float(np.max(np.linalg.norm(Tv, ord=2, axis=(1, 2)))) if T.rows else 0.0
    return res, scale


def _min_eig_on_circle(T: MatPoly, m: int = 64):
    if T.rows == 0:
        return 0.0, 0.0
    vals = T.evaluate_many(_circle_points(m, 0.0173))
    vals = (vals + np.conj(np.swapaxes(vals, 1, 2))) / 2
    eigs = np.linalg.eigvalsh(vals)
    return float(eigs.min()), float(np.abs(eigs).max())


def _check_hermitian_psd(T: MatPoly, tol: float):
    if T.rows != T.cols:
        raise NotHermitian("Laurent polynomial is not square")
    if T.exact:
        if not T.is_hermitian():
            raise NotHermitian("Laurent polynomial is not hermitian")
    elif not T.is_hermitian(tol=1e-9):
        raise NotHermitian("Laurent polynomial is not hermitian")
    lo, top = _min_eig_on_circle(T)
    if lo < -tol * max(top, 1e-300):
        raise NotPSDOnCircle(f"minimum eigenvalue {lo:.3e} on the circle")


def _float_generic_rank(T: MatPoly, samples: int = 5, tol: float = 1e-9, seed: int = 0) -> int:
    rng = np.random.default_rng(seed)
    z = np.exp(2j * np.pi * rng.random(samples))
    best = 0
    for v in T.evaluate_many(z):
        s = np.linalg.svd(v, compute_uv=False)
        if s.size and s[0] > 0:
            best = max(best, int(np.sum(s > tol * s[0])))
    return best


def poly_det_adj(A: MatPoly):
    """``(det A, adj A)`` of a square float matrix polynomial, by sampled cofactors."""
    r = A.rows
    if r == 0:
        return MatPoly.scalar({(0,): 1.0}), MatPoly.zeros(0, 0, 1, False)
    d = max(A.degree(), 0)

    def det_fn(z):
        return np.linalg.det(A.evaluate_many(z))[:, None, None]

    def adj_fn(z):
        vals = A.evaluate_many(z)
        out = np.zeros_like(vals)
        if r == 1:
            out[:] = 1.0
            return out
        idx = np.arange(r)
        for i in range(r):
            for j in range(r):
                minor = vals[:, idx != i][:, :, idx != j]
                out[:, j, i] = (-1) ** (i + j) * np.linalg.det(minor)
        return out

    det = fit_polynomial(det_fn, (1, 1), (r * d,), tol=1e-8)
    adj = fit_polynomial(adj_fn, (r, r), ((r - 1) * d,), tol=1e-8)
    return det, adj


# ---------------------------------------------------------------------------
# degenerate compression
# ---------------------------------------------------------------------------

def compress_degenerate(T: MatPoly, tol: float = 1e-9, method: str = "kernel"):
    """Exact compression of a rank-deficient hermitian Laurent polynomial.

    Returns ``(T0, V, V_inv, r)`` where ``conj_reflect(V_inv) @ T @ V_inv``
    equals ``diag(T0, 0)`` exactly, ``V`` is unimodular and ``T0`` is
    ``r x r`` with ``det T0`` not identically zero. Full-rank input returns
    ``V = I``.

    ``method="kernel"`` builds ``V_inv = [X K]`` from a minimal polynomial
    basis ``K`` of the kernel of ``z^n T`` and a completion ``X`` that is
    constant whenever possible, which keeps ``T0`` at the degree of ``T``.
    ``method="smith"`` takes ``V`` from the Smith form of ``z^n T``; it is
    exact too but its transforms can have large degree and height.
    """
    _check_hermitian_psd(T, tol)
    N = T.rows
    if T.exact:
        r = generic_rank_exact(T)
    else:
        r = _float_generic_rank(T)
        if r < N:
            raise ExactRequired("rank-deficient Laurent polynomial needs exact coefficients")
    eye = MatPoly.identity(N, 1, exact=T.exact)
    if r == N:
        return T, eye, eye, r
    n = max(T.laurent_degree(0), 0)
    if method == "smith":
        sf = smith_normal_form(T.shift(n))
        if sf.rank != r:
            raise AssertionError("Smith rank disagrees with sampled generic rank")
        V, V_inv = sf.T2, sf.T2_inv
    elif method == "kernel":
        K = minimal_kernel_basis(T.shift(n))
        X, V = unimodular_completion(K)
        V_inv = MatPoly.hstack([X, K])
    else:
        raise ValueError(f"unknown compression method {method!r}")
    full = V_inv.conj_reflect() @ T @ V_inv
    if not full.submatrix(slice(r, N), None).is_zero() or not full.submatrix(None, slice(r, N)).is_zero():
        raise AssertionError("compressed Laurent polynomial is not block diagonal")
    T0 = full.submatrix(slice(0, r), slice(0, r))
    return T0, V, V_inv, r


# ---------------------------------------------------------------------------
# full-rank spectral factorization
# ---------------------------------------------------------------------------

def _det_poly_coeffs(T: MatPoly):
    """Ascending coefficients of ``det(z^m T(z))`` (``m`` = Laurent half-degree)."""
    r = T.rows
    m = max(T.laurent_degree(0), 0)
    deg = 2 * r * m
    L = 1
    while L < deg + 1:
        L *= 2
    L = max(L, 4)
    z = np.exp(2j * np.pi * np.arange(L) / L)
    vals = np.linalg.det(T.evaluate_many(z)) * z ** (r * m)
    c = np.fft.fft(vals) / L
    c[deg + 1:] = 0
    return c[: deg + 1]


def _det_roots(T: MatPoly, rel: float = 1e-12):
    c = _det_poly_coeffs(T)
    top = float(np.max(np.abs(c))) if c.size else 0.0
    if top == 0.0:
        return None
    big = np.nonzero(np.abs(c) > rel * top)[0]
    lo, hi = big[0], big[-1]
    core = c[lo:hi + 1]
    if core.size <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(core[::-1])


def _pick_root(roots, diag):
    """Next root to extract: boundary cluster first, then the smallest outside root."""
    mod = np.abs(roots)
    near = np.abs(mod - 1) <= BOUNDARY_RADIUS
    if near.any():
        pts = roots[near]
        seed = pts[0]
        cluster = pts[np.abs(pts - seed) <= 1e-4]
        if len(cluster) % 2:
            diag["odd_cluster"] = complex(seed)
            raise NoConvergence("odd boundary root cluster in the determinant", diag)
        beta = cluster.mean()
        return beta / abs(beta)
    out = (mod > 1 + BOUNDARY_RADIUS) & (mod <= EXTRACT_RADIUS)
    if out.any():
        cand = roots[out]
        return cand[np.argmin(np.abs(cand))]
    return None


def _divide_linear(coefs: np.ndarray, lo: int, a: complex, b: complex):
    """Divide ``sum_k coefs[k - lo] z^k`` (vector coefficients) by ``a + b z``.

    Runs the recurrence in the direction whose multiplier has modulus at most
    one. Returns ``(quotient, new_lo, remainder_norm)``.
    """
    d = coefs.shape[0]
    if d <= 1:
        return np.zeros((0,) + coefs.shape[1:], dtype=complex), lo, float(np.max(np.abs(coefs), initial=0.0))
    g = np.zeros((d - 1,) + coefs.shape[1:], dtype=complex)
    if abs(b) >= abs(a):
        g[d - 2] = coefs[d - 1] / b
        for k in range(d - 2, 0, -1):
            g[k - 1] = (coefs[k] - a * g[k]) / b
        rem = coefs[0] - a * g[0]
    else:
        g[0] = coefs[0] / a
        for k in range(1, d - 1):
            g[k] = (coefs[k] - b * g[k - 1]) / a
        rem = coefs[d - 1] - b * g[d - 2]
    return g, lo, float(np.max(np.abs(rem), initial=0.0))


def _extract(T: MatPoly, beta: complex, diag):
    """One zero-extraction step at ``beta``; returns ``(T', W)``."""
    Tb = T.evaluate(beta)
    _, s, Vh = np.linalg.svd(Tb)
    v = Vh[-1].conj()
    r = T.rows
    # unitary W with first column v
    Qm, _ = np.linalg.qr(np.column_stack([v, np.eye(r, dtype=complex)]))
    W = Qm[:, :r]
    W[:, 0] *= np.vdot(W[:, 0], v) / abs(np.vdot(W[:, 0], v))
    Tw = T @ W
    Tw = W.conj().T @ Tw
    arr, lo = Tw.dense()
    lo = lo[0]
    col = arr[:, :, 0]
    qcol, lo_c, rem_c = _divide_linear(col, lo, -beta, 1.0)
    # column 0 of T' (before the row division): exponents lo .. hi-1
    coeffs = {}
    for k in range(arr.shape[0]):
        m = arr[k].copy()
        m[:, 0] = 0
        coeffs[(lo + k,)] = m
    for k in range(qcol.shape[0]):
        coeffs.setdefault((lo_c + k,), np.zeros((r, r), dtype=complex))
        coeffs[(lo_c + k,)] = coeffs[(lo_c + k,)].copy()
        coeffs[(lo_c + k,)][:, 0] = qcol[k]
    T1 = MatPoly(coeffs, r, r, 1, False)
    arr1, lo1 = T1.dense()
    lo1 = lo1[0]
    row = arr1[:, 0, :]
    # row 0 divided by (1/z - conj(beta)) = z^{-1} (1 - conj(beta) z)
    qrow, lo_r, rem_r = _divide_linear(row, lo1 + 1, 1.0, -np.conj(beta))
    coeffs = {}
    for k in range(arr1.shape[0]):
        m = arr1[k].copy()
        m[0, :] = 0
        coeffs[(lo1 + k,)] = m
    for k in range(qrow.shape[0]):
        key = (lo_r + k,)
        m = coeffs.get(key, np.zeros((r, r), dtype=complex)).copy()
        m[0, :] = qrow[k]
        coeffs[key] = m
    T2 = MatPoly(coeffs, r, r, 1, False)
    scale = max(T.max_abs(), 1e-300)
    diag.setdefault("remainders", []).append(max(rem_c, rem_r) / scale)
    diag.setdefault("betas", []).append(complex(beta))
    diag.setdefault("sigma_min", []).append(float(s[-1] / max(s[0], 1e-300)))
    return T2.hermitian_part().prune(), W


def _bauer(T: MatPoly, tol: float, diag):
    """Block Toeplitz Cholesky factor ``A`` with ``A^* A = T`` (det A free of disk zeros)."""
    r = T.rows
    m = max(T.laurent_degree(0), 0)
    if m == 0:
        F = factor_constant_psd(T.coeff(0), tol_rank=0.0)
        if F.shape[0] < r:
            raise NoConvergence("constant core is singular", diag)
        return MatPoly.constant(F)
    scale = max(T.max_abs(), 1e-300)
    blocks = {k: float_array(T.coeff(k)) for k in range(-m, m + 1)}
    n = max(2 * m, 8)
    best = None
    while True:
        size = (n + 1) * r
        big = np.zeros((size, size), dtype=complex)
        for i in range(n + 1):
            for j in range(max(0, i - m), min(n, i + m) + 1):
                big[i * r:(i + 1) * r, j * r:(j + 1) * r] = blocks[j - i]
        try:
            Lc = np.linalg.cholesky(big)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("block Toeplitz matrix is not positive definite", diag) from exc
        last = Lc[n * r:(n + 1) * r]
        coeffs = {(k,): last[:, (n - k) * r:(n - k + 1) * r].conj().T for k in range(m + 1)}
        A = MatPoly(coeffs, r, r, 1, False)
        res = (A.conj_reflect() @ A - T).max_abs() / scale
        if best is None or res < best[0]:
            best = (res, A, n)
        if res <= tol or (2 * n + 1) * r > BAUER_MAX_SIZE:
            break
        n *= 2
    diag["bauer_order"] = best[2]
    diag["bauer_residual"] = best[0]
    return best[1]


def _gram_residual(Ac: np.ndarray, Tc: dict, m: int) -> np.ndarray:
    """Coefficients ``j = 0..m`` of ``T - A^* A`` (``Ac[k]`` is the ``z^k`` coefficient)."""
    out = []
    for j in range(m + 1):
        acc = Tc[j].copy()
        for k in range(m + 1 - j):
            acc -= Ac[k].conj().T @ Ac[k + j]
        out.append(acc)
    return np.array(out)


def refine_factor(A: MatPoly, T: MatPoly, iters: int = 6) -> MatPoly:
    """Gauss-Newton polish of ``A`` (degree at most that of ``T``) towards ``A^* A = T``.

    The linearisation ``A^* dA + dA^* A`` is solved in least squares over the
    real and imaginary parts of the coefficients of ``dA``; the minimum-norm
    step ignores the constant-unitary freedom. The best iterate is returned.
    """
    r, N = A.shape
    if r == 0:
        return A
    m = max(T.laurent_degree(0), 0)
    Tf = T.to_float()
    Tc = {j: float_array(Tf.coeff(j)) for j in range(m + 1)}
    Ac = np.array([float_array(A.coeff(k)) for k in range(m + 1)])
    scale = max(Tf.max_abs(), 1e-300)

    def jacobian(Ac):
        cols = []
        for l in range(m + 1):
            for a in range(r):
                for b in range(N):
                    # P_j = sum_l A_{l-j}^* dA_l for dA = E_ab z^l
                    P = np.zeros((2 * m + 1, N, N), dtype=complex)
                    for j in range(-m, m + 1):
                        k = l - j
                        if 0 <= k <= m:
                            P[j + m][:, b] = Ac[k][a].conj()
                    E = np.array([P[j + m] + P[-j + m].conj().T for j in range(m + 1)])
                    Ei = np.array([1j * P[j + m] - 1j * P[-j + m].conj().T for j in range(m + 1)])
                    cols.append(np.concatenate([E.real.ravel(), E.imag.ravel()]))
                    cols.append(np.concatenate([Ei.real.ravel(), Ei.imag.ravel()]))
        return np.array(cols).T

    R = _gram_residual(Ac, Tc, m)
    best = (float(np.max(np.abs(R))), Ac.copy())
    for _ in range(iters):
        if best[0] <= 1e-15 * scale:
            break
        J = jacobian(Ac)
        rhs = np.concatenate([R.real.ravel(), R.imag.ravel()])
        step = np.linalg.lstsq(J, rhs, rcond=1e-12)[0]
        d = (step[0::2] + 1j * step[1::2]).reshape(m + 1, r, N)
        Ac = Ac + d
        R = _gram_residual(Ac, Tc, m)
        err = float(np.max(np.abs(R)))
        if err < best[0]:
            best = (err, Ac.copy())
        elif err > 2 * best[0]:
            break
    return MatPoly({(k,): best[1][k] for k in range(m + 1)}, r, N, 1, False).prune(rel=1e-17)


def _normalize(A: MatPoly) -> MatPoly:
    """Left-multiply by a unitary so that ``A(0)`` is upper triangular with positive diagonal."""
    A0 = float_array(A.coeff(0))
    Qm, R = np.linalg.qr(A0)
    d = np.diag(R)
    ph = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1), 1)
    Umat = np.diag(ph.conj()) @ Qm.conj().T
    return A.map_coeffs(lambda c: Umat @ c)


def _root_moduli(det: MatPoly) -> np.ndarray:
    arr, lo = det.dense()
    c = np.concatenate([np.zeros(lo[0], dtype=complex), arr[:, 0, 0]])
    top = np.max(np.abs(c)) if c.size else 0.0
    if top == 0:
        return np.zeros(0)
    nz = np.nonzero(np.abs(c) > 1e-13 * top)[0]
    c = c[: nz[-1] + 1]
    return np.abs(np.roots(c[::-1])) if c.size > 1 else np.zeros(0)


def spectral_factor_full_rank(T0: MatPoly, tol_fr: Optional[float] = None, tol_root: float = TOL_ROOT) -> MatPoly:
    """Outer factor ``A0`` of a full-rank hermitian Laurent polynomial.

    Zeros of ``det A0`` on or outside the circle are peeled off one at a time
    through null vectors of ``T0``; the remaining factor has constant
    determinant and is obtained by block Toeplitz Cholesky. ``A0(0)`` is
    normalised to be upper triangular with positive diagonal.
    """
    T = T0.to_float().hermitian_part().prune()
    r = T.rows
    diag: dict = {}
    if r == 0:
        return MatPoly.zeros(0, 0, 1, False)
    scale = max(T.max_abs(), 1e-300)
    steps = []
    cur = T
    cap = 2 * r * max(T.laurent_degree(0), 0) + 2
    for _ in range(cap):
        roots = _det_roots(cur)
        if roots is None:
            raise SingularDeterminant("det T0 vanishes identically; compress first")
        beta = _pick_root(roots, diag)
        if beta is None:
            break
        cur, W = _extract(cur, beta, diag)
        steps.append((W, beta))
    if _det_roots(cur) is None:
        raise SingularDeterminant("det T0 vanishes identically; compress first")
    # Newton polishing below finishes what the Toeplitz iteration leaves
    A = _bauer(cur, 1e-10, diag)
    for W, beta in reversed(steps):
        c0 = np.eye(r, dtype=complex)
        c0[0, 0] = -beta
        c1 = np.zeros((r, r), dtype=complex)
        c1[0, 0] = 1.0
        Dm = MatPoly({(0,): c0, (1,): c1}, r, r, 1, False)
        A = A @ Dm @ MatPoly.constant(W.conj().T)
    A = _normalize(A).prune()
    dmax = max(T.laurent_degree(0), 0)
    A = MatPoly({k: v for k, v in A.items() if 0 <= k[0] <= dmax}, r, r, 1, False)
    A = _normalize(refine_factor(A, T))
    tol = tol_fr if tol_fr is not None else 1e-8
    res, tscale = circle_residual(A, T)
    diag["residual"] = res
    if res > tol * max(tscale, 1e-300):
        raise NoConvergence(f"spectral factor residual {res:.2e} exceeds tolerance", diag)
    det, _ = poly_det_adj(A)
    mods = _root_moduli(det)
    if mods.size and mods.min() < 1 - tol_root:
        diag["det_root_min"] = float(mods.min())
        raise NoConvergence("det A0 has a zero inside the disk", diag)
    return A


# ---------------------------------------------------------------------------
# Fejér-Riesz driver
# ---------------------------------------------------------------------------

@dataclass
class FRFactor:
    """Fejér-Riesz factor ``A`` of ``T`` with right inverse ``B = B_num / B_den``."""

    A: MatPoly
    B_num: MatPoly
    B_den: MatPoly
    r: int
    A0: MatPoly
    V: Optional[MatPoly] = None
    V_inv: Optional[MatPoly] = None
    T: Optional[MatPoly] = None
    info: dict = field(default_factory=dict)

    @property
    def B(self) -> RationalMatrixFunction:
        return RationalMatrixFunction(self.B_num, self.B_den)

    def B_values(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return self.B_num.evaluate_many(z) / self.B_den.evaluate_many(z)[:, :1, :1]

    def to_json_obj(self) -> dict:
        out = {
            "A": self.A.to_json_obj(),
            "B_num": self.B_num.to_json_obj(),
            "B_den": self.B_den.to_json_obj(),
            "r": self.r,
            "A0": self.A0.to_json_obj(),
        }
        if self.V is not None:
            out["V"] = self.V.to_json_obj()
        return out


def fejer_riesz(T: MatPoly, tol_fr: Optional[float] = None, tol_root: float = TOL_ROOT, tol_psd: float = 1e-9) -> FRFactor:
    """Matrix Fejér-Riesz factorization ``T = A^* A`` on the circle.

    ``A = (A0 0) V`` and ``B = V^{-1} (adj A0; 0) / det A0``. Exact input is
    required when ``det T`` vanishes identically.
    """
    if T.nvars != 1:
        raise NotHermitian("fejer_riesz expects a univariate Laurent polynomial")
    N = T.rows
    T0, V, V_inv, r = compress_degenerate(T, tol=tol_psd)
    n = max(T.laurent_degree(0), 0)
    if r == 0:
        A0 = MatPoly.zeros(0, 0, 1, False)
        A = MatPoly.zeros(0, N, 1, False)
        return FRFactor(A, MatPoly.zeros(N, 0, 1, False), MatPoly.scalar({(0,): 1.0}), 0, A0, V, V_inv, T)
    A0 = spectral_factor_full_rank(T0, tol_fr=tol_fr, tol_root=tol_root)
    Vf = V.to_float()
    Vif = V_inv.to_float()
    pad = MatPoly.hstack([A0, MatPoly.zeros(r, N - r, 1, False)]) if r < N else A0
    A = (pad @ Vf).prune()
    A = MatPoly({k: v for k, v in A.items() if 0 <= k[0] <= n}, r, N, 1, False)
    Tf = T.to_float()
    if r < N:
        # the product with V cancels down to degree n; polish what the
        # cancellation lost and rebuild the core so that A V^{-1} = (A0 0)
        res, scale = circle_residual(A, Tf)
        if res > 1e-12 * max(scale, 1e-300):
            A = refine_factor(A, Tf)
            A0 = (A @ Vif.submatrix(None, slice(0, r))).prune(rel=1e-15)
    det, adj = poly_det_adj(A0)
    top = MatPoly.vstack([adj, MatPoly.zeros(N - r, r, 1, False)]) if r < N else adj
    B_num = (Vif @ top).prune()
    tol = tol_fr if tol_fr is not None else 1e-8
    res, scale = circle_residual(A, Tf)
    if res > tol * max(scale, 1e-300):
        raise NoConvergence(f"Fejér-Riesz residual {res:.2e} after assembly", {"residual": res})
    return FRFactor(A, B_num, det, r, A0, V, V_inv, T, {"residual": res, "scale": scale})


# ---------------------------------------------------------------------------
# uniqueness comparison
# ---------------------------------------------------------------------------

@dataclass
class FactorComparison:
    """``Phi = C B`` together with its diagnostics."""

    phi: RationalMatrixFunction
    constant: bool
    constant_value: Optional[np.ndarray]
    isoinner_residual: float
    factor_residual: float


def compare_factors(A, C: MatPoly, tol: float = 1e-8, m: int = 64) -> FactorComparison:
    """Compare two factors of the same Laurent polynomial.

    ``A`` is an :class:`FRFactor` or a triple ``(A, B_num, B_den)``. Returns
    ``Phi = C B`` with checks that ``Phi`` is isometric on the circle and
    ``C = Phi A``; ``constant`` is set when ``Phi`` is a constant matrix.
    """
    if isinstance(A, FRFactor):
        Am, Bn, Bd = A.A, A.B_num, A.B_den
    else:
        Am, Bn, Bd = A
    Am, Bn, Bd, C = Am.to_float(), Bn.to_float(), Bd.to_float(), C.to_float()
    z = _circle_points(m, 0.0213)
    Av, Cv = Am.evaluate_many(z), C.evaluate_many(z)
    GA = np.conj(np.swapaxes(Av, 1, 2)) @ Av
    GC = np.conj(np.swapaxes(Cv, 1, 2)) @ Cv
    scale = max(float(np.max(np.abs(GA))), 1e-300)
    gap = float(np.max(np.abs(GA - GC)))
    if gap > tol * scale:
        raise MismatchedGram(f"A^*A and C^*C differ by {gap:.2e} on the circle")
    num = (C @ Bn).prune()
    phi = RationalMatrixFunction(num, Bd)
    # isometry on the circle, away from zeros of the denominator
    den_v = Bd.evaluate_many(z)[:, 0, 0]
    ok = np.abs(den_v) > 1e-6 * max(float(np.max(np.abs(den_v))), 1e-300)
    Pv = num.evaluate_many(z[ok]) / den_v[ok, None, None]
    iso = float(np.max(np.abs(np.conj(np.swapaxes(Pv, 1, 2)) @ Pv - np.eye(Pv.shape[2])))) if ok.any() else 0.0
    w = 0.7 * np.exp(2j * np.pi * (np.arange(16) / 16 + 0.05))
    Pw = num.evaluate_many(w) / Bd.evaluate_many(w)[:, :1, :1]
    fac = float(np.max(np.abs(Pw @ Am.evaluate_many(w) - C.evaluate_many(w))))
    fac /= max(float(np.max(np.abs(C.evaluate_many(w)))), 1e-300)
    d0 = Bd.coeff(0)[0, 0]
    const_val = None
    constant = False
    if abs(d0) > 0:
        P0 = num.coeff(0) / d0
        diff = (num - Bd * MatPoly.constant(P0)).max_abs()
        if diff <= tol * max(num.max_abs(), 1e-300):
            constant = True
            const_val = P0
    return FactorComparison(phi, constant, const_val, iso, fac)
