"""Agler decompositions, lurking isometries and related conversions.

A decomposition of ``S = Q / p`` consists of polynomials ``Gamma1``,
``Gamma2`` and an optional ``G0`` with

    conj p(w) p(z) I - Q(w)^* Q(z)
        = sum_j (1 - conj(w_j) z_j) Gamma_j(w)^* Gamma_j(z) + G0(w)^* G0(z).

``G0`` is absent exactly for isometric data.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    ClearingFailed,
    DimensionMismatch,
    InconsistentData,
    InputError,
    NotContraction,
    NotSquare,
    RemainderNonzero,
)
from .poly import MatPoly, RationalMatrixFunction, fit_polynomial
from .realize1 import TransferRealization
from .specfact import factor_constant_psd
from .verify import VerificationReport, verify_decomposition_identity, verify_kernel_psd, verify_realization

__all__ = [
    "AglerDecomposition",
    "tfr_to_decomposition",
    "decomposition_to_tfr",
    "UnitaryEmbedding",
    "embed_in_unitary",
    "unitary_realization",
    "adjoint_realization",
    "reflect_decomposition",
    "DominationVerdict",
    "domination_check",
    "NilpotencyVerdict",
    "nilpotency_check",
]


def _split(S):
    if isinstance(S, MatPoly):
        return S, MatPoly.scalar({(0,) * S.nvars: 1}, S.nvars)
    if isinstance(S, RationalMatrixFunction):
        return S.num, S.den
    raise InputError("expected a MatPoly or RationalMatrixFunction")


def _defect_factor(D: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Factor of a defect ``I - X^* X``; eigenvalues below ``tol`` (absolute) are dropped."""
    n = D.shape[0]
    H = (D + D.conj().T) / 2
    w = np.linalg.eigvalsh(H) if n else np.zeros(0)
    if n == 0 or w[-1] <= tol:
        return np.zeros((0, n), dtype=complex)
    if w[0] < -max(tol, 1e-8):
        raise NotContraction(f"defect has eigenvalue {w[0]:.3e}")
    return factor_constant_psd(H, tol_rank=tol / w[-1])


def _empty(cols: int, nvars: int = 2) -> MatPoly:
    return MatPoly.zeros(0, cols, nvars, False)


@dataclass
class AglerDecomposition:
    """Polynomial Agler decomposition of ``num / den``."""

    Gamma1: MatPoly
    Gamma2: MatPoly
    G0: Optional[MatPoly]
    den: MatPoly
    num: Optional[MatPoly] = None
    info: dict = field(default_factory=dict)

    @property
    def gammas(self):
        return [self.Gamma1, self.Gamma2]

    @property
    def isometric(self) -> bool:
        return self.G0 is None or self.G0.rows == 0

    @property
    def breakdown(self):
        return (self.Gamma1.rows, self.Gamma2.rows)

    def verify(self, Q: Optional[MatPoly] = None, pairs: int = 20, tol: float = 1e-8) -> VerificationReport:
        Q = Q if Q is not None else self.num
        if Q is None:
            raise InputError("the numerator is needed to check the decomposition identity")
        return verify_decomposition_identity(Q, self.den, self.gammas, self.G0, pairs=pairs, tol=tol)

    def to_json_obj(self) -> dict:
        out = {
            "Gamma1": self.Gamma1.to_json_obj(),
            "Gamma2": self.Gamma2.to_json_obj(),
            "den": self.den.to_json_obj(),
            "G0_present": not self.isometric,
        }
        if not self.isometric:
            out["G0"] = self.G0.to_json_obj()
        if self.num is not None:
            out["num"] = self.num.to_json_obj()
        return out

    @classmethod
    def from_json_obj(cls, obj) -> "AglerDecomposition":
        try:
            g0 = MatPoly.from_json_obj(obj["G0"]) if obj.get("G0_present") else None
            num = MatPoly.from_json_obj(obj["num"]) if "num" in obj else None
            return cls(
                MatPoly.from_json_obj(obj["Gamma1"]),
                MatPoly.from_json_obj(obj["Gamma2"]),
                g0,
                MatPoly.from_json_obj(obj["den"]),
                num,
            )
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed decomposition: {exc}") from exc


# ---------------------------------------------------------------------------
# realization -> decomposition
# ---------------------------------------------------------------------------

def _state_values(R: TransferRealization, z1, z2):
    """``F(z) = (I - D Delta(z))^{-1} C`` at points, shape ``(P, size, N)``."""
    d = R.delta(z1, z2)
    n = R.size
    Mtx = np.eye(n)[None] - R.D[None] * d[:, None, :]
    return np.linalg.solve(Mtx, np.repeat(R.C[None], d.shape[0], axis=0)), d


def tfr_to_decomposition(R: TransferRealization, S, tol: float = 1e-9, check: bool = True) -> AglerDecomposition:
    """Decomposition read off a realization: ``Gamma_j = p P_j (I - D Delta)^{-1} C``.

    The products with ``p`` are cleared to polynomials by sampling; a
    contractive colligation also yields ``G0 = p D_U (I; Delta F)`` with
    ``D_U^* D_U = I - U^* U``.
    """
    Q, p = _split(S)
    if Q.nvars != 2:
        raise InputError("decompositions are built for two-variable functions")
    if Q.shape != (R.M, R.N):
        raise DimensionMismatch(f"function shape {Q.shape} vs realization {(R.M, R.N)}")
    if check:
        rep = verify_realization(RationalMatrixFunction(Q, p), R, tol=1e-8)
        if not rep.passed:
            raise InputError(f"realization does not reproduce the function (residual {rep.max_residual:.2e})")
    pf = p.to_float()
    N, n = R.N, R.size
    bound = tuple(max(a, b, 0) + n for a, b in zip(Q.degrees(), p.degrees()))
    U = R.U
    Dfac = _defect_factor(np.eye(U.shape[1]) - U.conj().T @ U)
    g = Dfac.shape[0]

    def sampler(z1, z2):
        F, d = _state_values(R, z1, z2)
        pv = pf.evaluate_many(z1, z2)[:, 0, 0][:, None, None]
        parts = [pv * F]
        if g:
            top = np.concatenate([np.repeat(np.eye(N)[None], len(z1), axis=0), d[:, :, None] * F], axis=1)
            parts.append(pv * (Dfac[None] @ top))
        return np.concatenate(parts, axis=1)

    if n + g == 0:
        return AglerDecomposition(_empty(N), _empty(N), None, p, Q)
    try:
        W = fit_polynomial(sampler, (n + g, N), bound, tol=tol)
    except ClearingFailed as exc:
        raise ClearingFailed(f"p times the state function is not a polynomial: {exc}") from exc
    G1 = W.submatrix(slice(0, R.r1), None)
    G2 = W.submatrix(slice(R.r1, n), None)
    G0 = W.submatrix(slice(n, n + g), None) if g else None
    return AglerDecomposition(G1, G2, G0, p, Q, {"clearing_bound": bound})


# ---------------------------------------------------------------------------
# decomposition -> realization (lurking isometry)
# ---------------------------------------------------------------------------

def _bidisk_samples(count: int, seed: int, radius: float = 0.9):
    rng = np.random.default_rng(seed)
    return [radius * np.sqrt(rng.random(count)) * np.exp(2j * np.pi * rng.random(count)) for _ in range(2)]


def _complement(Mx: np.ndarray, rank: int) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the first ``rank`` left singular vectors."""
    Uu, _, _ = np.linalg.svd(Mx, full_matrices=True)
    return Uu[:, rank:]


def decomposition_to_tfr(dec: AglerDecomposition, S=None, seed: int = 11, tol: float = 1e-8,
                         check: bool = True) -> TransferRealization:
    """Colligation from the lurking isometry ``(I; Delta F) -> (S; F; G)``.

    ``F_j = Gamma_j / p``. The map is identified from ``3 (state + output)``
    seeded bidisk samples, verified to be isometric on its domain and
    extended isometrically on the complement. Without ``G0`` the result is
    isometric; with ``G0`` its rows are dropped and the result is contractive.
    """
    Q, p = _split(S) if S is not None else (dec.num, dec.den)
    if Q is None:
        raise InputError("decomposition_to_tfr needs the function")
    Qf, pf = Q.to_float(), p.to_float()
    M, N = Qf.shape
    r1, r2 = dec.breakdown
    n = r1 + r2
    G0 = dec.G0 if not dec.isometric else None
    g = G0.rows if G0 is not None else 0
    count = 3 * (n + M + g)
    z1, z2 = _bidisk_samples(count, seed)
    pv = pf.evaluate_many(z1, z2)[:, 0, 0][:, None, None]
    Sv = Qf.evaluate_many(z1, z2) / pv
    parts = [dec.Gamma1.to_float().evaluate_many(z1, z2) / pv if r1 else np.zeros((count, 0, N)),
             dec.Gamma2.to_float().evaluate_many(z1, z2) / pv if r2 else np.zeros((count, 0, N))]
    F = np.concatenate(parts, axis=1)
    dl = np.concatenate([np.repeat(z1[:, None], r1, axis=1), np.repeat(z2[:, None], r2, axis=1)], axis=1)
    X = np.concatenate([np.repeat(np.eye(N)[None], count, axis=0), dl[:, :, None] * F], axis=1)
    Yparts = [Sv, F]
    if g:
        Yparts.append(G0.to_float().evaluate_many(z1, z2) / pv)
    Y = np.concatenate(Yparts, axis=1)
    Xm = np.concatenate(list(X), axis=1)  # (N + n, count N)
    Ym = np.concatenate(list(Y), axis=1)  # (M + n + g, count N)
    gram = Xm.conj().T @ Xm - Ym.conj().T @ Ym
    scale = max(float(np.max(np.abs(Xm.conj().T @ Xm))), 1.0)
    mismatch = float(np.max(np.abs(gram)))
    if mismatch > tol * scale:
        raise InconsistentData(f"sampled lurking map is not isometric (Gram mismatch {mismatch:.2e})")
    Ux, s, Vh = np.linalg.svd(Xm, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * s[0])) if s.size else 0
    W = (Ym @ Vh[:rank].conj().T / s[:rank]) @ Ux[:, :rank].conj().T
    dom_c = _complement(Xm, rank)
    out_dim = M + n + g
    k = dom_c.shape[1]
    if k:
        ran_c = _complement(Ym, rank)
        if ran_c.shape[1] < k:
            raise InconsistentData("no room to extend the lurking map isometrically")
        W = W + ran_c[:, :k] @ dom_c.conj().T
    Ucol = W[: M + n]
    flavor = "isometric" if g == 0 else "contractive"
    R = TransferRealization.from_colligation(Ucol, M, N, r1, r2, flavor)
    if check:
        rep = verify_realization(RationalMatrixFunction(Qf, pf), R, tol=tol)
        if not rep.passed:
            raise InconsistentData(f"lurking-isometry colligation misses the function (residual {rep.max_residual:.2e})")
        if g == 0 and R.isometry_residual() > tol:
            raise InconsistentData("lurking-isometry colligation is not isometric")
    return R


# ---------------------------------------------------------------------------
# unitary embedding and adjoints
# ---------------------------------------------------------------------------

@dataclass
class UnitaryEmbedding:
    """Unitary ``U`` containing ``T`` as the block ``U[rows][:, cols]``."""

    U: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    extra_rows: int
    extra_cols: int

    def residual(self) -> float:
        U = self.U
        return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[1]), 2)) if U.size else 0.0


def embed_in_unitary(T, tol_rank: float = 1e-10, split: Optional[tuple] = None) -> UnitaryEmbedding:
    """Halmos dilation ``[[T, D_{T*}], [D_T, -T^*]]`` with rank-truncated defects.

    With ``split = (M, N)`` the matrix is read as a colligation with ``M``
    output rows and ``N`` input columns; the defect rows and columns are then
    placed right after the outputs and inputs so that the state block stays
    last and the enlarged colligation keeps the same state space.
    """
    T = np.atleast_2d(np.asarray(T, dtype=complex))
    m, n = T.shape
    if T.size and np.linalg.norm(T, 2) > 1 + 1e-12:
        raise NotContraction(f"matrix norm {np.linalg.norm(T, 2):.6f} exceeds 1")
    DT = _defect_factor(np.eye(n) - T.conj().T @ T, tol_rank)
    DTs = _defect_factor(np.eye(m) - T @ T.conj().T, tol_rank)
    a, b = DT.shape[0], DTs.shape[0]
    # D_T = W1^* F_T with orthonormal rows W1; likewise for T^*
    W1 = DT / np.linalg.norm(DT, axis=1, keepdims=True) if a else np.zeros((0, n))
    W2 = DTs / np.linalg.norm(DTs, axis=1, keepdims=True) if b else np.zeros((0, m))
    big = np.block([
        [T, DTs.conj().T],
        [DT, -(W1 @ T.conj().T @ W2.conj().T)],
    ]) if (a or b) else T.copy()
    rows = np.arange(m)
    cols = np.arange(n)
    if split is not None:
        Mo, Ni = split
        rperm = list(range(Mo)) + list(range(m, m + a)) + list(range(Mo, m))
        cperm = list(range(Ni)) + list(range(n, n + b)) + list(range(Ni, n))
        big = big[np.ix_(rperm, cperm)]
        rows = np.array([rperm.index(i) for i in range(m)])
        cols = np.array([cperm.index(j) for j in range(n)])
    emb = UnitaryEmbedding(big, rows, cols, a, b)
    if emb.residual() > 1e-10:
        raise NotContraction(f"dilation is not unitary (residual {emb.residual():.2e})")
    return emb


def unitary_realization(R: TransferRealization) -> tuple:
    """Unitary colligation whose realized function has ``R``'s function as its top-left block."""
    emb = embed_in_unitary(R.U, split=(R.M, R.N))
    Rn = TransferRealization.from_colligation(emb.U, R.M + emb.extra_rows, R.N + emb.extra_cols, R.r1, R.r2, "unitary")
    return Rn, emb


def adjoint_realization(R: TransferRealization) -> TransferRealization:
    """Colligation ``U^*``; it realizes ``breve(S)(z) = S(conj z)^*``."""
    return R.adjoint()


# ---------------------------------------------------------------------------
# reflection
# ---------------------------------------------------------------------------

def reflect_decomposition(dec: AglerDecomposition, S=None, tol: float = 1e-9, check: bool = True) -> AglerDecomposition:
    """Decomposition of ``breve(S)`` from one of a square inner ``S``.

    ``Gamma~_j(z) = (1 / z_j) Gamma_j(1/z) breve(Q)(z) / p(1/z)`` where
    ``breve(Q)(z) = Q(conj z)^*``; the denominator of ``breve(S)`` is
    ``p`` with conjugated coefficients.
    """
    Q, p = _split(S) if S is not None else (dec.num, dec.den)
    if Q is None:
        raise InputError("reflect_decomposition needs the function")
    if Q.rows != Q.cols:
        raise NotSquare("reflection needs a square inner function")
    if not dec.isometric:
        raise InputError("reflection needs an isometric decomposition (no G0 term)")
    Qf, pf = Q.to_float(), p.to_float()
    Qb = Qf.breve()
    pb = pf.conjugate()
    N = Q.cols
    gdeg = [max([G.degrees()[j] for G in dec.gammas if G.rows] + [0]) for j in range(2)]
    bound = tuple(max(a, b, 0) + g + 1 for a, b, g in zip(Q.degrees(), p.degrees(), gdeg))
    out = []
    for j, Gm in enumerate(dec.gammas):
        if Gm.rows == 0:
            out.append(_empty(N))
            continue
        Gf = Gm.to_float()

        def sampler(z1, z2, Gf=Gf, j=j):
            w1, w2 = 1 / z1, 1 / z2
            zj = (z1, z2)[j]
            val = Gf.evaluate_many(w1, w2) @ Qb.evaluate_many(z1, z2)
            return val / (zj * pf.evaluate_many(w1, w2)[:, 0, 0])[:, None, None]

        try:
            out.append(fit_polynomial(sampler, (Gm.rows, N), bound, tol=tol))
        except ClearingFailed as exc:
            raise ClearingFailed(f"reflected term {j + 1} is not a polynomial: {exc}") from exc
    res = AglerDecomposition(out[0], out[1], None, pb, Qb)
    if check:
        rep = res.verify()
        res.info["identity_residual"] = rep.max_residual
        if not rep.passed:
            raise ClearingFailed(f"reflected decomposition fails its identity (residual {rep.max_residual:.2e})")
    return res


# ---------------------------------------------------------------------------
# domination
# ---------------------------------------------------------------------------

@dataclass
class DominationVerdict:
    psd: bool
    min_eigenvalue: float
    remainder: float
    rank: int

    def to_json_obj(self) -> dict:
        return {"psd": self.psd, "min_eigenvalue": self.min_eigenvalue, "remainder": self.remainder, "rank": self.rank}


def domination_check(G: MatPoly, Gamma: MatPoly, var: int = 1, points: int = 10, seed: int = 17,
                     tol: float = 1e-8) -> DominationVerdict:
    """Is ``(G(w)^* G(z) - Gamma(w)^* Gamma(z)) / (1 - conj(w_k) z_k)`` a positive kernel?

    ``G`` and ``Gamma`` are z_var-terms of two decompositions of the same
    function and ``k`` is the other variable. Divisibility is checked first:
    the numerator must vanish whenever ``w_k = z_k`` lies on the circle. The
    quotient is then evaluated on a seeded set of bidisk points and its block
    Gram matrix tested.
    """
    if var not in (1, 2):
        raise InputError("var must be 1 or 2")
    k = 2 - var
    Gf, Hf = G.to_float(), Gamma.to_float()
    if Gf.cols != Hf.cols:
        raise DimensionMismatch("both terms must act on the same space")
    N = Gf.cols
    rng = np.random.default_rng(seed)
    m = 24
    a = 0.9 * np.sqrt(rng.random(m)) * np.exp(2j * np.pi * rng.random(m))
    b = 0.9 * np.sqrt(rng.random(m)) * np.exp(2j * np.pi * rng.random(m))
    zeta = np.exp(2j * np.pi * rng.random(m))

    def at(x, circle):
        return (x, circle) if k == 1 else (circle, x)

    def gram(P, wpt, zpt):
        if P.rows == 0:
            return np.zeros((len(wpt[0]), N, N), dtype=complex)
        Pa, Pb = P.evaluate_many(*wpt), P.evaluate_many(*zpt)
        return np.conj(np.swapaxes(Pa, 1, 2)) @ Pb

    wpt, zpt = at(a, zeta), at(b, zeta)
    num = gram(Gf, wpt, zpt) - gram(Hf, wpt, zpt)
    scale = max(float(np.max(np.abs(gram(Gf, wpt, wpt)), initial=0.0)), 1.0)
    remainder = float(np.max(np.abs(num), initial=0.0))
    if remainder > tol * scale:
        raise RemainderNonzero(f"difference is not divisible by 1 - conj(w{k + 1}) z{k + 1} (remainder {remainder:.2e})")
    pts = list(zip(*_bidisk_samples(points, seed + 1, 0.8)))

    def kernel(x, y):
        X = [np.array([c]) for c in x]
        Y = [np.array([c]) for c in y]
        val = gram(Gf, X, Y)[0] - gram(Hf, X, Y)[0]
        return val / (1 - np.conj(x[k]) * y[k])

    ref = max(float(np.max(np.abs(gram(Gf, wpt, wpt)), initial=0.0)),
              float(np.max(np.abs(gram(Hf, wpt, wpt)), initial=0.0)), 1e-300)
    rep = verify_kernel_psd(kernel, pts, tol=tol, scale=ref)
    return DominationVerdict(rep.passed, float(rep.min_eigenvalue), remainder, int(rep.extra["rank"]))


# ---------------------------------------------------------------------------
# nilpotency
# ---------------------------------------------------------------------------

@dataclass
class NilpotencyVerdict:
    passed: bool
    det_residual: float
    power_norm: float
    det_coefficients: Optional[MatPoly] = None

    def to_json_obj(self) -> dict:
        return {"pass": self.passed, "det_residual": self.det_residual, "power_norm": self.power_norm}


def nilpotency_check(R: TransferRealization, tol: float = 1e-9, seed: int = 23) -> NilpotencyVerdict:
    """``det(I - D Delta(z)) == 1`` identically and ``(D Delta(z))^size == 0`` at torus samples."""
    n = R.size
    if n == 0:
        return NilpotencyVerdict(True, 0.0, 0.0)

    def det_fn(z1, z2):
        d = R.delta(z1, z2)
        return np.linalg.det(np.eye(n)[None] - R.D[None] * d[:, None, :])[:, None, None]

    try:
        det = fit_polynomial(det_fn, (1, 1), (R.r1, R.r2), tol=1e-7)
    except ClearingFailed:
        det = None
    if det is None:
        det_res = float("inf")
    else:
        const = complex(det.coeff((0, 0))[0, 0])
        others = max((float(np.max(np.abs(v))) for k, v in det.items() if k != (0, 0)), default=0.0)
        det_res = max(abs(const - 1), others)
    rng = np.random.default_rng(seed)
    z1, z2 = (np.exp(2j * np.pi * rng.random(8)) for _ in range(2))
    d = R.delta(z1, z2)
    DD = R.D[None] * d[:, None, :]
    power = np.linalg.matrix_power(DD, n)
    pnorm = float(np.max(np.linalg.norm(power, 2, axis=(1, 2))))
    scale = max(1.0, float(np.linalg.norm(R.D, 2)) ** n)
    passed = det_res <= tol and pnorm <= max(tol, 1e-9) * scale
    return NilpotencyVerdict(passed, det_res, pnorm, det)
