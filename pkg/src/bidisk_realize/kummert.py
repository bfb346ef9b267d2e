"""Two-variable synthesis of isometric realizations for iso-inner functions.

The pipeline runs the one-variable construction with the second variable
as a parameter on the circle:

1. divide ``conj p(w) p(z) I - Q(w)^* Q(z)`` by ``1 - conj(w1) z1`` with
   ``z2 = w2`` on the circle, giving a hermitian Laurent matrix ``T(z2)``;
2. factor ``T = A^* A`` (matrix Fejér-Riesz);
3. assemble the one-variable iso-inner function ``U(z2)``;
4. realize ``U`` in one variable; the resulting colligation ``V`` realizes
   ``S = Q / p`` with ``Delta = diag(z1 I_r1, z2 I_r2)``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    BidiskError,
    InputError,
    NotInner,
    NotIsoInner,
    NotSquare,
    NotStrictContraction,
    RemainderNonzero,
    SliceUnstable,
    StageError,
)
from .poly import MatPoly, RationalMatrixFunction, divide_exactly, exact_zeros, fit_polynomial
from .realize1 import (
    TransferRealization,
    _as_scalar_poly,
    count_disk_roots,
    divided_kernel_blocks,
    realize_isoinner_1d,
)
from .specfact import TOL_RANK, FRFactor, fejer_riesz

__all__ = [
    "KummertCertificate",
    "step1_parametrized_kernel",
    "step3_assemble_U",
    "realize_isoinner_2d",
    "minimal_breakdown",
    "realize_contractive_2d_strict",
    "dominant_terms",
    "bidisk_grid",
]


@dataclass
class KummertCertificate:
    """Intermediate objects of the two-variable pipeline."""

    T_of_z2: MatPoly
    fr: FRFactor
    U_num: MatPoly
    U_den: MatPoly
    V: np.ndarray
    F: MatPoly
    G: MatPoly
    H: MatPoly
    breakdown: tuple
    n1: int
    residuals: dict = field(default_factory=dict)

    @property
    def U(self) -> RationalMatrixFunction:
        return RationalMatrixFunction(self.U_num, self.U_den)

    def to_json_obj(self) -> dict:
        return {
            "T_of_z2": self.T_of_z2.to_json_obj(),
            "A": self.fr.A.to_json_obj(),
            "B_num": self.fr.B_num.to_json_obj(),
            "B_den": self.fr.B_den.to_json_obj(),
            "U_num": self.U_num.to_json_obj(),
            "U_den": self.U_den.to_json_obj(),
            "V": [[[float(x.real), float(x.imag)] for x in row] for row in self.V],
            "F": self.F.to_json_obj(),
            "G": self.G.to_json_obj(),
            "H": self.H.to_json_obj(),
            "breakdown": list(self.breakdown),
            "n1": self.n1,
            "residuals": {k: float(v) for k, v in sorted(self.residuals.items())},
        }


def bidisk_grid(m: int = 12, radius: float = 0.95):
    """``m x m`` product grid of points with moduli up to ``radius``."""
    k = np.arange(m)
    rad = radius * (0.15 + 0.85 * ((k % 4) + 1) / 4)
    ang = 2 * np.pi * (k / m + 0.0137)
    pts = rad * np.exp(1j * ang)
    z1, z2 = np.meshgrid(pts, pts[::-1] * np.exp(0.3j), indexing="ij")
    return z1.ravel(), z2.ravel()


def _torus_grid(m: int, phase=(0.0113, 0.0271)):
    t = np.arange(m) / m
    z1, z2 = np.meshgrid(np.exp(2j * np.pi * (t + phase[0])), np.exp(2j * np.pi * (t + phase[1])), indexing="ij")
    return z1.ravel(), z2.ravel()


def _split(Q: MatPoly, p: MatPoly, n1: int):
    gq = Q.coefficients_in(0)
    gp = p.coefficients_in(0)
    zq = MatPoly.zeros(Q.rows, Q.cols, 1, Q.exact)
    zp = MatPoly.zeros(1, 1, 1, p.exact)
    return [gp.get(a, zp) for a in range(n1 + 1)], [gq.get(a, zq) for a in range(n1 + 1)]


def _prepare(S):
    if isinstance(S, MatPoly):
        S = RationalMatrixFunction.polynomial(S)
    Q, p = S.num, S.den
    if Q.nvars != 2:
        raise InputError("two-variable pipeline needs a bivariate function")
    if not Q.is_polynomial() or not p.is_polynomial():
        raise InputError("numerator and denominator must be polynomials")
    if p.evaluate((0, 0))[0, 0] == 0:
        raise InputError("p(0, 0) = 0")
    return Q, p


# ---------------------------------------------------------------------------
# step 1
# ---------------------------------------------------------------------------

def step1_parametrized_kernel(Q: MatPoly, p, tol: float = 1e-10) -> MatPoly:
    """Hermitian Laurent matrix ``T(z2)`` of the divided kernel in ``(z1, w1)``."""
    p = _as_scalar_poly(p, 2)
    n1 = max(Q.degrees()[0], p.degrees()[0], 0)
    N = Q.cols
    exact = Q.exact and p.exact
    if not exact:
        Q, p = Q.to_float(), p.to_float()
    pc, qc = _split(Q, p, n1)
    scale = max(Q.max_abs(), p.max_abs(), 1e-300) ** 2

    def is_zero(x):
        return x.is_zero() if x.exact else x.max_abs() <= tol * scale

    blocks, rem = divided_kernel_blocks(pc, qc, lambda x: x.conj_reflect(), lambda s: s.kron_identity(N), is_zero)
    if rem:
        raise NotIsoInner("|p|^2 I - Q^* Q does not vanish on the torus (nonzero remainder)")
    if n1 == 0:
        return MatPoly.zeros(0, 0, 1, exact)
    T = MatPoly.block(blocks)
    return T if exact else T.hermitian_part().prune()


# ---------------------------------------------------------------------------
# step 3
# ---------------------------------------------------------------------------

def _p0_roots_ok(p0: MatPoly, tol_root: float = 1e-8):
    arr, lo = p0.to_float().dense()
    c = np.concatenate([np.zeros(lo[0], dtype=complex), arr[:, 0, 0]])
    return count_disk_roots(c, tol_root) == 0


def step3_assemble_U(Q: MatPoly, p, fr: FRFactor):
    """Numerator and denominator of the one-variable iso-inner ``U(z2)``.

    ``U = (Qvec; (A 0)) [[p0^{-1} I, X], [0, B]]`` with
    ``X = -p0^{-1} (p1 I, ..., pn I) B``, brought over the common
    denominator ``p0 * den(B)``.
    """
    p = _as_scalar_poly(p, 2)
    n1 = max(Q.degrees()[0], p.degrees()[0], 0)
    M, N = Q.shape
    Qf, pf = Q.to_float(), p.to_float()
    pc, qc = _split(Qf, pf, n1)
    p0 = pc[0]
    if not _p0_roots_ok(p0):
        raise SliceUnstable("p(0, z2) has a zero in the disk")
    r = fr.r
    bden = fr.B_den.to_float()
    Bn = fr.B_num.to_float()
    top_left = bden.kron_identity(N) if N else MatPoly.zeros(0, 0, 1, False)
    top_right = MatPoly.zeros(N, r, 1, False)
    for a in range(1, n1 + 1):
        top_right = top_right - pc[a] * Bn.submatrix(slice((a - 1) * N, a * N), None)
    right = MatPoly.block([
        [top_left, top_right],
        [MatPoly.zeros(n1 * N, N, 1, False), p0 * Bn],
    ])
    left = MatPoly.block([
        [MatPoly.hstack(qc)],
        [MatPoly.hstack([fr.A.to_float(), MatPoly.zeros(r, N, 1, False)])],
    ])
    U_num = (left @ right).prune()
    U_den = (p0 @ bden).prune()
    return U_num, U_den


# ---------------------------------------------------------------------------
# full pipeline
# ---------------------------------------------------------------------------

def _lambda(n1: int, N: int) -> MatPoly:
    """``(I, z1 I, ..., z1^{n1-1} I)^t`` as a bivariate polynomial."""
    return MatPoly({(k, 0): np.kron(np.eye(n1)[:, [k]], np.eye(N)) for k in range(n1)}, n1 * N, N, 2, False)


def _embed_z2(P: MatPoly) -> MatPoly:
    return P.embed(1)


def realize_isoinner_2d(S, tol_rank: float = TOL_RANK, check: bool = True, grid: int = 12):
    """Isometric realization of a two-variable iso-inner ``S = Q / p``.

    Returns ``(R, certificate)``. Failures inside a step are re-raised as
    :class:`StageError` carrying the step number.
    """
    Q, p = _prepare(S)
    M, N = Q.shape
    n1 = max(Q.degrees()[0], p.degrees()[0], 0)
    res: dict = {}
    t0 = time.perf_counter()
    try:
        T = step1_parametrized_kernel(Q, p)
    except BidiskError as exc:
        raise StageError(1, exc) from exc
    try:
        if n1 == 0:
            fr = FRFactor(
                MatPoly.zeros(0, 0, 1, False), MatPoly.zeros(0, 0, 1, False),
                MatPoly.scalar({(0,): 1.0}), 0, MatPoly.zeros(0, 0, 1, False),
            )
        else:
            fr = fejer_riesz(T)
    except BidiskError as exc:
        raise StageError(2, exc) from exc
    try:
        U_num, U_den = step3_assemble_U(Q, p, fr)
    except BidiskError as exc:
        raise StageError(3, exc) from exc
    try:
        # U is only as iso-inner as the spectral factor is accurate
        fr_rel = fr.info.get("residual", 0.0) / max(fr.info.get("scale", 1.0), 1e-300)
        R_U, F = realize_isoinner_1d(U_num, U_den, max(tol_rank, 1e3 * fr_rel))
    except BidiskError as exc:
        raise StageError(4, exc) from exc
    r1, r2 = fr.r, R_U.r1
    V = R_U.U
    Qf, pf = Q.to_float(), p.to_float()
    A2 = _embed_z2(fr.A.to_float()) if r1 else MatPoly.zeros(0, n1 * N, 2, False)
    G = (A2 @ _lambda(n1, N)).prune() if r1 else MatPoly.zeros(0, N, 2, False)
    z1 = MatPoly.variable(0, 2, exact=False)
    stacked = MatPoly.vstack([pf.kron_identity(N), z1 * G]) if r1 else pf.kron_identity(N)
    try:
        H = divide_exactly(_embed_z2(F) @ stacked, U_den, var=1) if r2 else MatPoly.zeros(0, N, 2, False)
    except BidiskError as exc:
        raise StageError(4, exc) from exc
    R = TransferRealization.from_colligation(V, M, N, r1, r2, "isometric")
    cert = KummertCertificate(T, fr, U_num, U_den, V, F, G, H, (r1, r2), n1, res)
    res["elapsed_pipeline"] = time.perf_counter() - t0
    if check:
        _check_pipeline(Q, p, R, cert, grid)
    return R, cert


def _check_pipeline(Q, p, R, cert, grid):
    res = cert.residuals
    M, N = Q.shape
    r1, r2 = cert.breakdown
    res["isometry"] = R.isometry_residual()
    rng = np.random.default_rng(11)
    z1 = 0.9 * np.sqrt(rng.random(25)) * np.exp(2j * np.pi * rng.random(25))
    z2 = 0.9 * np.sqrt(rng.random(25)) * np.exp(2j * np.pi * rng.random(25))
    Gv = cert.G.evaluate_many(z1, z2) if r1 else np.zeros((25, 0, N))
    Hv = cert.H.evaluate_many(z1, z2) if r2 else np.zeros((25, 0, N))
    pv = p.to_float().evaluate_many(z1, z2)[:, 0, 0]
    lhs = np.concatenate([pv[:, None, None] * np.eye(N)[None], z1[:, None, None] * Gv, z2[:, None, None] * Hv], axis=1)
    rhs = np.concatenate([Q.to_float().evaluate_many(z1, z2), Gv, Hv], axis=1)
    res["step4_identity"] = float(np.max(np.abs(cert.V[None] @ lhs - rhs), initial=0.0))
    g1, g2 = bidisk_grid(grid)
    S = RationalMatrixFunction(Q, p)
    res["realization"] = float(np.max(np.abs(R.evaluate_many(g1, g2) - S.evaluate_many(g1, g2)), initial=0.0))
    bad = [k for k in ("isometry", "step4_identity", "realization") if not res[k] <= 1e-8]
    if bad:
        raise NotIsoInner(f"pipeline verification failed: {', '.join(f'{k}={res[k]:.2e}' for k in bad)}")


# ---------------------------------------------------------------------------
# minimal breakdown
# ---------------------------------------------------------------------------

def _sampled_unitarity_2d(S: RationalMatrixFunction, m: int = 16) -> float:
    z1, z2 = _torus_grid(m)
    den = S.den.evaluate_many(z1, z2)[:, 0, 0]
    ok = np.abs(den) > 1e-8 * max(float(np.max(np.abs(den))), 1e-300)
    vals = S.num.evaluate_many(z1[ok], z2[ok]) / den[ok, None, None]
    eye = np.eye(S.num.cols)
    return float(np.max(np.abs(np.conj(np.swapaxes(vals, 1, 2)) @ vals - eye), initial=0.0))


def _det_poly2(Q: MatPoly) -> MatPoly:
    N = Q.rows
    d1, d2 = (max(x, 0) for x in Q.degrees())

    def fn(z1, z2):
        return np.linalg.det(Q.evaluate_many(z1, z2))[:, None, None]

    return fit_polynomial(fn, (1, 1), (N * d1, N * d2), tol=1e-8)


def _slice_count(P: MatPoly, var: int, samples: int = 7) -> int:
    """Max over generic circle values of the other variable of disk-root counts."""
    arr, lo = P.dense()
    full = np.zeros((lo[0] + arr.shape[0], lo[1] + arr.shape[1]), dtype=complex)
    full[lo[0]:, lo[1]:] = arr[:, :, 0, 0]
    C = full if var == 0 else full.T
    ts = np.exp(2j * np.pi * (np.arange(samples) / samples + 0.0917))
    best = 0
    for t in ts:
        c = C @ (t ** np.arange(C.shape[1]))
        if np.max(np.abs(c)) == 0:
            continue
        best = max(best, count_disk_roots(c))
    return best


def minimal_breakdown(S, tol: float = 1e-8):
    """Per-variable degrees of ``det S`` for a square inner function."""
    if isinstance(S, MatPoly):
        S = RationalMatrixFunction.polynomial(S)
    M, N = S.shape
    if M != N:
        raise NotSquare("minimal_breakdown needs a square function")
    if _sampled_unitarity_2d(S) > tol:
        raise NotInner("function is not unitary on the torus")
    Qf, pf = S.num.to_float(), S.den.to_float()
    det = _det_poly2(Qf)
    if S.is_polynomial_den():
        # polynomial inner: det S is a unimodular constant times a monomial
        return tuple(int(x) for x in det.degrees())
    out = []
    for var in (0, 1):
        out.append(_slice_count(det, var) - N * _slice_count(pf, var))
    return tuple(out)


# ---------------------------------------------------------------------------
# dominant / subdominant terms
# ---------------------------------------------------------------------------

def dominant_terms(cert: KummertCertificate):
    """``(G, H)``: the dominant z1-term factor and the subdominant z2-term factor."""
    return cert.G, cert.H


# ---------------------------------------------------------------------------
# strict two-variable contractions
# ---------------------------------------------------------------------------

def realize_contractive_2d_strict(P: MatPoly, grid: int = 32, tol_rank: float = TOL_RANK):
    """Contractive realization of a strictly contractive two-variable polynomial.

    ``P`` is stacked with a sum-of-squares factor of ``I - P^* P`` to an
    iso-inner polynomial, which is realized by the two-variable pipeline; the
    output rows that belong to the added factor are dropped.
    """
    from .sos2 import augment_to_isoinner

    if P.nvars != 2:
        raise InputError("realize_contractive_2d_strict needs a bivariate polynomial")
    aug = augment_to_isoinner(P, grid=grid)
    R_full, cert = realize_isoinner_2d(aug.stacked, tol_rank=tol_rank)
    M, N = P.shape
    extra = aug.stacked.rows - M
    U = R_full.U
    keep = list(range(M)) + list(range(M + extra, U.shape[0]))
    R = TransferRealization.from_colligation(U[keep], M, N, R_full.r1, R_full.r2, "contractive")
    return R, cert, aug
