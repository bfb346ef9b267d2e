"""Transfer function realizations in one variable.

A realization is a colligation ``U = [[A, B], [C, D]]`` together with a
state breakdown ``(r1, r2)``; the realized function is
``S(z) = A + B Delta(z) (I - D Delta(z))^{-1} C`` with
``Delta(z) = diag(z1 I_r1, z2 I_r2)``. One-variable realizations have
``r2 = 0``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    DenominatorZeroAtOrigin,
    DimensionMismatch,
    InputError,
    NotContractiveOnCircle,
    NotInner,
    NotIsoInnerOnCircle,
    NotSquare,
    RemainderNonzero,
)
from .poly import MatPoly, RationalMatrixFunction, exact_zeros, fit_polynomial, float_array
from .specfact import TOL_RANK, FRFactor, factor_constant_psd, fejer_riesz, right_inverse_constant

__all__ = [
    "TransferRealization",
    "kernel_coefficient_matrix",
    "divided_kernel_blocks",
    "realize_isoinner_1d",
    "realize_contractive_1d",
    "trim",
    "degdet",
    "count_disk_roots",
]

FLAVORS = ("isometric", "coisometric", "unitary", "contractive")


@dataclass
class TransferRealization:
    """Colligation ``[[A, B], [C, D]]`` with breakdown ``(r1, r2)``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    r1: int
    r2: int = 0
    flavor: str = "isometric"

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=complex)
        M, N = self.A.shape
        n = self.r1 + self.r2
        self.B = np.asarray(self.B, dtype=complex).reshape(M, n)
        self.C = np.asarray(self.C, dtype=complex).reshape(n, N)
        self.D = np.asarray(self.D, dtype=complex).reshape(n, n)
        if self.flavor not in FLAVORS:
            raise InputError(f"unknown realization flavor {self.flavor!r}")

    @classmethod
    def from_colligation(cls, U, M: int, N: int, r1: int, r2: int = 0, flavor: str = "isometric"):
        U = np.asarray(U, dtype=complex)
        if U.shape != (M + r1 + r2, N + r1 + r2):
            raise DimensionMismatch(f"colligation shape {U.shape} does not match M={M}, N={N}, r=({r1},{r2})")
        return cls(U[:M, :N], U[:M, N:], U[M:, :N], U[M:, N:], r1, r2, flavor)

    @property
    def M(self) -> int:
        return self.A.shape[0]

    @property
    def N(self) -> int:
        return self.A.shape[1]

    @property
    def size(self) -> int:
        return self.r1 + self.r2

    @property
    def breakdown(self):
        return (self.r1, self.r2)

    @property
    def U(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])

    def isometry_residual(self) -> float:
        U = self.U
        return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[1]), 2)) if U.size else 0.0

    def coisometry_residual(self) -> float:
        U = self.U
        return float(np.linalg.norm(U @ U.conj().T - np.eye(U.shape[0]), 2)) if U.size else 0.0

    def delta(self, z1, z2=None) -> np.ndarray:
        """Diagonal of ``Delta`` at each point, shape ``(P, size)``."""
        z1 = np.atleast_1d(np.asarray(z1, dtype=complex))
        z2 = np.zeros_like(z1) if z2 is None else np.atleast_1d(np.asarray(z2, dtype=complex))
        return np.concatenate(
            [np.repeat(z1[:, None], self.r1, axis=1), np.repeat(z2[:, None], self.r2, axis=1)], axis=1
        )

    def evaluate_many(self, z1, z2=None, return_det=False):
        """Realized function at points; optionally also ``det(I - D Delta)``."""
        d = self.delta(z1, z2)
        P = d.shape[0]
        n = self.size
        if n == 0:
            out = np.repeat(self.A[None], P, axis=0)
            return (out, np.ones(P, dtype=complex)) if return_det else out
        Mtx = np.eye(n)[None] - self.D[None] * d[:, None, :]
        X = np.linalg.solve(Mtx, np.repeat(self.C[None], P, axis=0))
        out = self.A[None] + (self.B[None] * d[:, None, :]) @ X
        if return_det:
            return out, np.linalg.det(Mtx)
        return out

    def __call__(self, z1, z2=None):
        return self.evaluate_many(z1, z2)[0]

    def adjoint(self) -> "TransferRealization":
        flip = {"isometric": "coisometric", "coisometric": "isometric"}.get(self.flavor, self.flavor)
        return TransferRealization(
            self.A.conj().T, self.C.conj().T, self.B.conj().T, self.D.conj().T, self.r1, self.r2, flip
        )

    def to_json_obj(self) -> dict:
        def enc(m):
            return [[[float(x.real), float(x.imag)] for x in row] for row in m]

        return {
            "A": enc(self.A),
            "B": enc(self.B),
            "C": enc(self.C),
            "D": enc(self.D),
            "r": [self.r1, self.r2],
            "flavor": self.flavor,
            "M": self.M,
            "N": self.N,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj) -> "TransferRealization":
        try:
            r1, r2 = (int(x) for x in obj["r"])
            flavor = obj.get("flavor", "isometric")

            def dec(m, shape):
                arr = np.array([[complex(x[0], x[1]) if isinstance(x, (list, tuple)) else complex(x) for x in row] for row in m], dtype=complex)
                return arr.reshape(shape)

            A_raw = obj["A"]
            M = int(obj.get("M", len(A_raw)))
            N = int(obj.get("N", len(A_raw[0]) if A_raw else 0))
            n = r1 + r2
            return cls(dec(obj["A"], (M, N)), dec(obj["B"], (M, n)), dec(obj["C"], (n, N)), dec(obj["D"], (n, n)), r1, r2, flavor)
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise InputError(f"malformed realization object: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "TransferRealization":
        return cls.from_json_obj(json.loads(text))


# ---------------------------------------------------------------------------
# divided kernels
# ---------------------------------------------------------------------------

def divided_kernel_blocks(p_coeffs, Q_coeffs, adj, kron_eye, is_zero):
    """Blocks ``T_jk`` of ``(conj p(w) p(z) I - Q(w)^* Q(z)) / (1 - conj(w) z)``.

    ``p_coeffs[a]`` and ``Q_coeffs[a]`` are the coefficients of ``z^a``
    (objects supporting ``+``, ``-`` and ``@``; ``p`` entries are ``1 x 1``).
    ``adj`` is the involution that plays the role of the conjugate
    transpose, ``kron_eye`` turns a ``1 x 1`` coefficient into a multiple of
    the ``N x N`` identity. Returns ``(blocks, remainder_blocks)``; the
    remainder blocks must vanish for the division to be exact.
    """
    n = len(Q_coeffs) - 1
    K = {}
    for a in range(n + 1):
        for c in range(n + 1):
            K[a, c] = kron_eye(adj(p_coeffs[a]) @ p_coeffs[c]) - adj(Q_coeffs[a]) @ Q_coeffs[c]
    T = {}
    for j in range(n + 1):
        for k in range(n + 1):
            acc = K[j, k]
            for l in range(1, min(j, k) + 1):
                acc = acc + K[j - l, k - l]
            T[j, k] = acc
    blocks = [[T[j, k] for k in range(n)] for j in range(n)]
    rem = [T[n, k] for k in range(n + 1)] + [T[j, n] for j in range(n)]
    return blocks, [x for x in rem if not is_zero(x)]


def _coeff_list(P: MatPoly, n: int):
    return [P.coeff(k) for k in range(n + 1)]


def _as_scalar_poly(p, nvars=1) -> MatPoly:
    if isinstance(p, MatPoly):
        return p
    if isinstance(p, (int, float, complex)):
        return MatPoly.scalar({(0,) * nvars: p}, nvars)
    return MatPoly.scalar({(k,): c for k, c in enumerate(p)})


def _block_matrix(blocks, exact):
    if not blocks:
        return exact_zeros(0, 0) if exact else np.zeros((0, 0), dtype=complex)
    return np.block([[b for b in row] for row in blocks]) if not exact else np.vstack([np.hstack(row) for row in blocks])


def kernel_coefficient_matrix(Q: MatPoly, p, tol: float = 1e-10):
    """Hermitian ``nN x nN`` matrix of the divided kernel of ``S = Q / p``.

    Exact inputs give an exact object array, float inputs a complex array.
    Raises :class:`NotIsoInnerOnCircle` when the division leaves a remainder.
    """
    p = _as_scalar_poly(p)
    if Q.nvars != 1 or p.nvars != 1:
        raise InputError("kernel_coefficient_matrix is one-variable")
    if not Q.is_polynomial() or not p.is_polynomial():
        raise InputError("numerator and denominator must be polynomials")
    exact = Q.exact and p.exact
    if not exact:
        Q, p = Q.to_float(), p.to_float()
    N = Q.cols
    n = max(Q.degree(), p.degree(), 0)
    pc = _coeff_list(p, n)
    qc = _coeff_list(Q, n)
    if exact:
        eye = exact_zeros(N, N)
        for i in range(N):
            eye[i, i] = 1

        def adj(x):
            return np.vectorize(lambda v: v.conjugate(), otypes=[object])(x.T) if x.size else x.T

        def kron_eye(s):
            return eye * s[0, 0]

        def is_zero(x):
            return not any(x.flat)
    else:
        scale = max(p.max_abs() ** 2, Q.max_abs() ** 2, 1e-300)

        def adj(x):
            return x.conj().T

        def kron_eye(s):
            return np.eye(N) * s[0, 0]

        def is_zero(x):
            return float(np.max(np.abs(x), initial=0.0)) <= tol * scale

    blocks, rem = divided_kernel_blocks(pc, qc, adj, kron_eye, is_zero)
    if rem:
        raise NotIsoInnerOnCircle("|p|^2 I - Q^* Q does not vanish on the circle")
    T = _block_matrix(blocks, exact)
    if n > 0:
        Tf = float_array(T)
        w = np.linalg.eigvalsh((Tf + Tf.conj().T) / 2)
        if w.size and w[0] < -max(tol, 1e-9) * max(abs(w).max(), 1.0):
            raise NotIsoInnerOnCircle(f"kernel matrix is not positive semidefinite (min eigenvalue {w[0]:.2e})")
    return T


# ---------------------------------------------------------------------------
# isometric realization
# ---------------------------------------------------------------------------

def _disk_points(m, seed=7, radius=0.9):
    rng = np.random.default_rng(seed)
    return radius * np.sqrt(rng.random(m)) * np.exp(2j * np.pi * rng.random(m))


def realize_isoinner_1d(Q: MatPoly, p=1, tol_rank: float = TOL_RANK, check: bool = True):
    """Isometric realization of the iso-inner function ``Q / p`` in one variable.

    Returns ``(R, F)`` where ``F(z) = Fmat (I, zI, ...)^t`` satisfies
    ``U (p(z) I; z F(z)) = (Q(z); F(z))``.
    """
    p = _as_scalar_poly(p)
    if p.evaluate(0)[0, 0] == 0:
        raise DenominatorZeroAtOrigin("p(0) = 0")
    # S = Q/p is unchanged by a common scale; normalising keeps the kernel
    # eigenvalues on the scale used by the rank tolerance
    c = 1.0 / p.to_float().max_abs()
    Qf, pf = Q.to_float() * c, p.to_float() * c
    if Q.exact and p.exact:
        T = float_array(kernel_coefficient_matrix(Q, p)) * (c * c)
    else:
        T = float_array(kernel_coefficient_matrix(Qf, pf))
    M, N = Q.shape
    n = max(Q.degree(), p.degree(), 0)
    Fm = factor_constant_psd(T, tol_rank) if n > 0 else np.zeros((0, 0), dtype=complex)
    r = Fm.shape[0]
    Binv = right_inverse_constant(Fm, tol_rank) if r else np.zeros((n * N, 0), dtype=complex)
    pc = [complex(pf.coeff(k)[0, 0]) for k in range(n + 1)]
    p0 = pc[0]
    prow = np.hstack([pc[k] * np.eye(N) for k in range(1, n + 1)]) if n else np.zeros((N, 0))
    X = -(prow @ Binv) / p0
    left = np.block([
        [np.hstack([float_array(Qf.coeff(k)) for k in range(n + 1)])],
        [np.hstack([Fm, np.zeros((r, N))])],
    ])
    right = np.block([
        [np.eye(N) / p0, X],
        [np.zeros((n * N, N)), Binv],
    ])
    U = left @ right
    R = TransferRealization.from_colligation(U, M, N, r, 0, "isometric")
    F = MatPoly({(k,): Fm[:, k * N:(k + 1) * N] / c for k in range(n)}, r, N, 1, False)
    if check:
        res = R.isometry_residual()
        if res > 1e-8:
            raise NotIsoInnerOnCircle(f"assembled colligation is not isometric (residual {res:.2e})")
        z = _disk_points(16)
        lhs_in = np.concatenate([pf.evaluate_many(z) * np.eye(N)[None], z[:, None, None] * F.evaluate_many(z) * c], axis=1)
        rhs = np.concatenate([Qf.evaluate_many(z), F.evaluate_many(z) * c], axis=1)
        err = float(np.max(np.abs(U[None] @ lhs_in - rhs), initial=0.0))
        if err > 1e-8 * max(1.0, float(np.max(np.abs(rhs), initial=0.0))):
            raise NotIsoInnerOnCircle(f"colligation identity fails (residual {err:.2e})")
    return R, F


# ---------------------------------------------------------------------------
# trimming
# ---------------------------------------------------------------------------

def _krylov_basis(D: np.ndarray, start: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis of ``span{D^j start}``."""
    n = D.shape[0]
    if start.size == 0 or n == 0:
        return np.zeros((n, 0), dtype=complex)
    scale = max(float(np.linalg.norm(start, 2)), 1.0)
    basis = np.zeros((n, 0), dtype=complex)
    block = start
    for _ in range(n + 1):
        block = block - basis @ (basis.conj().T @ block)
        block = block - basis @ (basis.conj().T @ block)
        if block.size == 0:
            break
        u, s, _ = np.linalg.svd(block, full_matrices=False)
        k = int(np.sum(s > tol * scale))
        if k == 0:
            break
        new = u[:, :k]
        basis = np.hstack([basis, new])
        if basis.shape[1] >= n:
            break
        block = D @ new
    return basis


def trim(R: TransferRealization, tol: float = 1e-9) -> TransferRealization:
    """Remove unreachable and unobservable states of a one-variable realization."""
    if R.r2 != 0:
        raise InputError("trim works on one-variable realizations (r2 = 0)")
    A, B, C, D = R.A, R.B, R.C, R.D
    for _ in range(3):
        n0 = D.shape[0]
        K = _krylov_basis(D, C, tol)
        D, B, C = K.conj().T @ D @ K, B @ K, K.conj().T @ C
        O = _krylov_basis(D.conj().T, B.conj().T, tol)
        D, B, C = O.conj().T @ D @ O, B @ O, O.conj().T @ C
        if D.shape[0] == n0:
            break
    return TransferRealization(A, B, C, D, D.shape[0], 0, R.flavor)


# ---------------------------------------------------------------------------
# determinant degree
# ---------------------------------------------------------------------------

def count_disk_roots(c, tol: float = 1e-6) -> int:
    """Number of roots (with multiplicity) of ``sum c[k] z^k`` with modulus ``< 1 - tol``."""
    c = np.asarray(c, dtype=complex)
    top = float(np.max(np.abs(c), initial=0.0))
    if top == 0.0:
        raise InputError("zero polynomial has no well-defined root count")
    nz = np.nonzero(np.abs(c) > 1e-12 * top)[0]
    low, high = nz[0], nz[-1]
    core = c[low:high + 1]
    roots = np.roots(core[::-1]) if core.size > 1 else np.zeros(0)
    return int(low + np.sum(np.abs(roots) < 1 - tol))


def _sampled_unitarity(S: RationalMatrixFunction, m: int = 64) -> float:
    z = np.exp(2j * np.pi * (np.arange(m) / m + 0.0119))
    den = S.den.evaluate_many(z)[:, 0, 0]
    ok = np.abs(den) > 1e-8 * max(float(np.max(np.abs(den))), 1e-300)
    vals = S.num.evaluate_many(z[ok]) / den[ok, None, None]
    eye = np.eye(S.num.cols)
    return float(np.max(np.abs(np.conj(np.swapaxes(vals, 1, 2)) @ vals - eye), initial=0.0))


def degdet(S, tol: float = 1e-8) -> int:
    """Degree of ``det S`` for a square inner function (number of zeros in the disk)."""
    if isinstance(S, MatPoly):
        S = RationalMatrixFunction.polynomial(S)
    if S.nvars != 1:
        raise InputError("degdet is one-variable")
    M, N = S.shape
    if M != N:
        raise NotSquare("degdet needs a square function")
    if _sampled_unitarity(S) > tol:
        raise NotInner("function is not unitary on the circle")
    Qf = S.num.to_float()
    d = max(Qf.degree(), 0)
    det = fit_polynomial(lambda z: np.linalg.det(Qf.evaluate_many(z))[:, None, None], (1, 1), (N * d,), tol=1e-8)
    arr, lo = det.dense()
    c = np.concatenate([np.zeros(lo[0], dtype=complex), arr[:, 0, 0]])
    parr, plo = S.den.to_float().dense()
    pc = np.concatenate([np.zeros(plo[0], dtype=complex), parr[:, 0, 0]])
    return count_disk_roots(c) - N * count_disk_roots(pc)


# ---------------------------------------------------------------------------
# contractive realization
# ---------------------------------------------------------------------------

def defect_polynomial(Q: MatPoly, p) -> MatPoly:
    """``conj_reflect(p) p I - conj_reflect(Q) Q`` (equals ``|p|^2 I - Q^*Q`` on the circle)."""
    p = _as_scalar_poly(p, Q.nvars)
    N = Q.cols
    return (p.conj_reflect() @ p).kron_identity(N) - Q.conj_reflect() @ Q


def realize_contractive_1d(Q: MatPoly, p=1, tol_rank: float = TOL_RANK, tol_psd: float = 1e-9):
    """Contractive realization of ``S = Q / p`` with ``||S|| <= 1`` on the disk.

    Returns ``(R, fr)``: the realization and the Fejér-Riesz factor of the
    defect ``|p|^2 I - Q^* Q``.
    """
    from .specfact import _min_eig_on_circle  # local: shared private helper

    p = _as_scalar_poly(p)
    L = defect_polynomial(Q, p)
    lo, top = _min_eig_on_circle(L)
    if lo < -tol_psd * max(top, p.max_abs() ** 2, 1e-300):
        raise NotContractiveOnCircle(f"|p|^2 I - Q^*Q has eigenvalue {lo:.2e} on the circle")
    if L.exact and L.is_zero() or (not L.exact and L.max_abs() <= 1e-13 * max(top, 1.0)):
        R, _ = realize_isoinner_1d(Q, p, tol_rank)
        return R, None
    fr = fejer_riesz(L)
    M, N = Q.shape
    stacked = MatPoly.vstack([Q.to_float(), fr.A])
    R_full, _ = realize_isoinner_1d(stacked, p.to_float(), tol_rank)
    U = R_full.U
    r = fr.r
    keep_rows = list(range(M)) + list(range(M + r, U.shape[0]))
    Usub = U[keep_rows]
    R = TransferRealization.from_colligation(Usub, M, N, R_full.r1, 0, "contractive")
    return R, fr
