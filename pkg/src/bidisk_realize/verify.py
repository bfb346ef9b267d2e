"""Sampling-based verifiers and a seeded generator of polynomial inner functions."""
from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, InputError
from .poly import MatPoly, RationalMatrixFunction, exact_eye, exact_zeros
from .realize1 import TransferRealization
from .scalars import GaussianRational, Q as Q_

__all__ = [
    "VerificationReport",
    "verify_isoinner",
    "verify_realization",
    "verify_kernel_psd",
    "verify_decomposition_identity",
    "random_inner_generator",
    "GeneratedInner",
    "cayley_unitary",
    "torus_grid",
    "random_blaschke_product",
    "random_fr_instance",
]


@dataclass
class VerificationReport:
    """Outcome of one sampling check."""

    check: str
    grid: str
    max_residual: float
    passed: bool
    min_eigenvalue: Optional[float] = None
    elapsed: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "check": self.check,
            "grid": self.grid,
            "max_residual": self.max_residual,
            "min_eigenvalue": self.min_eigenvalue,
            "pass": self.passed,
            "elapsed": self.elapsed,
            "extra": self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    def __bool__(self):
        return self.passed


def torus_grid(m: int, nvars: int = 2, phase=(0.0113, 0.0271)):
    t = np.arange(m) / m
    if nvars == 1:
        return (np.exp(2j * np.pi * (t + phase[0])),)
    z1, z2 = np.meshgrid(np.exp(2j * np.pi * (t + phase[0])), np.exp(2j * np.pi * (t + phase[1])), indexing="ij")
    return z1.ravel(), z2.ravel()


def _as_function(S):
    if isinstance(S, MatPoly):
        return RationalMatrixFunction.polynomial(S)
    return S


def _values(S, coords):
    if isinstance(S, TransferRealization):
        return S.evaluate_many(*coords)
    return _as_function(S).evaluate_many(*coords)


def verify_isoinner(S, m: int = 16, tol: float = 1e-10, interior: int = 64, radius: float = 0.95) -> VerificationReport:
    """``max ||S^*S - I||`` on an ``m x m`` torus grid plus an interior norm check."""
    t0 = time.perf_counter()
    S = _as_function(S)
    nv = S.nvars
    coords = torus_grid(m, nv)
    den = S.den.evaluate_many(*coords)[:, 0, 0]
    ok = np.abs(den) > 1e-10 * max(float(np.max(np.abs(den))), 1e-300)
    vals = S.num.evaluate_many(*[c[ok] for c in coords]) / den[ok, None, None]
    gram = np.conj(np.swapaxes(vals, 1, 2)) @ vals - np.eye(S.shape[1])[None]
    res = float(np.max(np.linalg.norm(gram, 2, axis=(1, 2)), initial=0.0))
    rng = np.random.default_rng(5)
    pts = [radius * np.sqrt(rng.random(interior)) * np.exp(2j * np.pi * rng.random(interior)) for _ in range(nv)]
    inner_vals = S.evaluate_many(*pts)
    norm_max = float(np.max(np.linalg.norm(inner_vals, 2, axis=(1, 2)), initial=0.0))
    passed = res <= tol and norm_max <= 1 + max(tol, 1e-9)
    return VerificationReport(
        "isoinner", f"{m}x{m}" if nv == 2 else str(m), res, passed, None, time.perf_counter() - t0,
        {"skipped": int((~ok).sum()), "interior_max_norm": norm_max},
    )


def verify_realization(S, R: TransferRealization, grid: int = 12, tol: float = 1e-8, radius: float = 0.95) -> VerificationReport:
    """Max residual of ``S - (A + B Delta (I - D Delta)^{-1} C)`` on a bidisk grid."""
    from .kummert import bidisk_grid

    t0 = time.perf_counter()
    S = _as_function(S)
    if S.shape != (R.M, R.N):
        raise DimensionMismatch(f"function shape {S.shape} vs realization {(R.M, R.N)}")
    if S.nvars == 2:
        z1, z2 = bidisk_grid(grid, radius)
        coords = (z1, z2)
    else:
        k = np.arange(grid * grid)
        z1 = radius * np.sqrt((k + 0.5) / (grid * grid)) * np.exp(2j * np.pi * k * 0.618034)
        z2 = None
        coords = (z1,)
    vals, det = R.evaluate_many(z1, z2, return_det=True)
    ok = np.abs(det) >= 1e-12
    target = S.evaluate_many(*coords)
    res = float(np.max(np.abs(vals[ok] - target[ok]), initial=0.0))
    return VerificationReport(
        "realization", f"{grid}x{grid}", res, res <= tol, None, time.perf_counter() - t0,
        {"skipped": int((~ok).sum()), "isometry_residual": R.isometry_residual()},
    )


def verify_kernel_psd(kernel: Callable, points: Sequence, tol_rank: float = 1e-10, tol: float = 1e-10,
                      scale: Optional[float] = None) -> VerificationReport:
    """Block Gram matrix ``[K(x_i, x_j)]`` at the points: min eigenvalue and rank.

    Rank and the PSD tolerance are relative to ``scale``, which defaults to
    the largest eigenvalue modulus; pass the size of the terms the kernel was
    formed from when it may cancel to zero.
    """
    t0 = time.perf_counter()
    pts = list(points)
    if not pts:
        return VerificationReport("kernel_psd", "0", 0.0, True, 0.0, 0.0, {"rank": 0})
    blocks = [[np.atleast_2d(np.asarray(kernel(a, b), dtype=complex)) for b in pts] for a in pts]
    Gm = np.block(blocks)
    Gm = (Gm + Gm.conj().T) / 2
    w = np.linalg.eigvalsh(Gm)
    top = float(np.max(np.abs(w), initial=0.0)) if scale is None else float(scale)
    rank = int(np.sum(w > tol_rank * top)) if top > 0 else 0
    lo = float(w[0]) if w.size else 0.0
    passed = lo >= -tol * max(top, 1.0)
    return VerificationReport("kernel_psd", str(len(pts)), max(-lo, 0.0), passed, lo, time.perf_counter() - t0, {"rank": rank})


def verify_decomposition_identity(Q: MatPoly, p: MatPoly, gammas: Sequence[MatPoly], G0: Optional[MatPoly] = None,
                                  pairs: int = 20, seed: int = 3, tol: float = 1e-8) -> VerificationReport:
    """``conj p(w) p(z) I - Q(w)^*Q(z) = sum (1 - conj(w_j) z_j) Gamma_j(w)^*Gamma_j(z) + G0(w)^*G0(z)``."""
    t0 = time.perf_counter()
    nv = Q.nvars
    rng = np.random.default_rng(seed)
    z = [0.9 * np.sqrt(rng.random(pairs)) * np.exp(2j * np.pi * rng.random(pairs)) for _ in range(nv)]
    w = [0.9 * np.sqrt(rng.random(pairs)) * np.exp(2j * np.pi * rng.random(pairs)) for _ in range(nv)]
    Qf, pf = Q.to_float(), p.to_float()
    N = Q.cols

    def herm(P, a, b):
        Pa, Pb = P.evaluate_many(*a), P.evaluate_many(*b)
        return np.conj(np.swapaxes(Pa, 1, 2)) @ Pb

    pw, pz = pf.evaluate_many(*w)[:, 0, 0], pf.evaluate_many(*z)[:, 0, 0]
    lhs = (np.conj(pw) * pz)[:, None, None] * np.eye(N)[None] - herm(Qf, w, z)
    rhs = np.zeros_like(lhs)
    for j, Gm in enumerate(gammas):
        if Gm is None or Gm.rows == 0:
            continue
        rhs += (1 - np.conj(w[j]) * z[j])[:, None, None] * herm(Gm.to_float(), w, z)
    if G0 is not None and G0.rows:
        rhs += herm(G0.to_float(), w, z)
    res = float(np.max(np.abs(lhs - rhs), initial=0.0))
    scale = max(float(np.max(np.abs(lhs), initial=0.0)), 1.0)
    return VerificationReport("decomposition", f"{pairs} pairs", res, res <= tol * scale, None, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# random polynomial inner functions
# ---------------------------------------------------------------------------

def _exact_inverse(M: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    aug = np.concatenate([M.copy(), exact_eye(n)], axis=1)
    for c in range(n):
        piv = next(i for i in range(c, n) if aug[i, c])
        if piv != c:
            aug[[c, piv]] = aug[[piv, c]]
        inv = aug[c, c].inverse()
        aug[c] = aug[c] * inv
        for i in range(n):
            if i != c and aug[i, c]:
                aug[i] = aug[i] - aug[c] * aug[i, c]
    return aug[:, n:]


def cayley_unitary(N: int, rng: random.Random, spread: int = 2) -> np.ndarray:
    """Exact unitary ``(I - K)(I + K)^{-1}`` for a random skew-hermitian Gaussian-integer ``K``."""
    X = exact_zeros(N, N)
    for i in range(N):
        for j in range(N):
            X[i, j] = GaussianRational(rng.randint(-spread, spread), rng.randint(-spread, spread))
    K = X - np.vectorize(lambda v: v.conjugate(), otypes=[object])(X.T)
    I = exact_eye(N)
    return (I - K).dot(_exact_inverse(I + K))


@dataclass
class GeneratedInner:
    """Output of :func:`random_inner_generator`."""

    S: MatPoly
    det_degrees: tuple
    slots: tuple
    seed: int


def random_inner_generator(seed: int, N: int, k: int, slots: Optional[Sequence[Sequence[int]]] = None) -> GeneratedInner:
    """Polynomial inner ``W0 D1(z) W1 ... Dk(z) Wk`` with exact rational unitaries.

    Each ``D_i`` is diagonal with entries from ``{1, z1, z2}`` (slot codes 0,
    1, 2). ``slots`` fixes the diagonal patterns; otherwise they are drawn
    from the seeded generator. Det degrees are the per-variable slot counts.
    """
    if N < 1 or k < 0:
        raise InputError("need N >= 1 and k >= 0")
    rng = random.Random(seed)
    if slots is None:
        slots = tuple(tuple(rng.randint(0, 2) for _ in range(N)) for _ in range(k))
    else:
        slots = tuple(tuple(int(s) for s in row) for row in slots)
        if len(slots) != k or any(len(row) != N for row in slots):
            raise InputError("slots must be k rows of N codes")
    S = MatPoly.constant(cayley_unitary(N, rng), 2)
    for row in slots:
        coeffs: dict = {}
        for i, code in enumerate(row):
            key = {0: (0, 0), 1: (1, 0), 2: (0, 1)}[code]
            m = coeffs.setdefault(key, exact_zeros(N, N))
            m[i, i] = GaussianRational(1)
        Dm = MatPoly(coeffs, N, N, 2, True)
        S = S @ Dm @ MatPoly.constant(cayley_unitary(N, rng), 2)
    d1 = sum(1 for row in slots for c in row if c == 1)
    d2 = sum(1 for row in slots for c in row if c == 2)
    return GeneratedInner(S, (d1, d2), slots, seed)


def _exact_adjoint(M: np.ndarray) -> np.ndarray:
    return np.vectorize(lambda v: v.conjugate(), otypes=[object])(M.T)


def random_blaschke_product(seed: int, N: int, k: int):
    """Rational inner ``Q / p`` in one variable: a product of ``k`` matrix Blaschke factors.

    Factor ``i`` is ``(I - P_i) + P_i (z - a_i) / (1 - conj(a_i) z)`` for an
    exact projection ``P_i`` of rank ``r_i`` and ``|a_i| < 1``, with exact
    unitaries in between. Returns ``(Q, p, sum r_i)``.
    """
    if N < 1 or k < 0:
        raise InputError("need N >= 1 and k >= 0")
    rng = random.Random(seed)
    I = exact_eye(N)
    Q = MatPoly.constant(cayley_unitary(N, rng), 1)
    p = MatPoly.scalar({(0,): GaussianRational(1)}, 1, exact=True)
    deg = 0
    for _ in range(k):
        while True:
            x, y = rng.randint(-6, 6), rng.randint(-6, 6)
            if x * x + y * y < 49:
                break
        a = GaussianRational(Q_(x, 8), Q_(y, 8))
        r = rng.randint(1, N)
        W = cayley_unitary(N, rng)
        P = W[:, :r].dot(_exact_adjoint(W[:, :r]))
        ac = a.conjugate()
        # numerator (1 - conj(a) z)(I - P) + (z - a) P
        num = MatPoly({(0,): (I - P) - P * a, (1,): P - (I - P) * ac}, N, N, 1, True)
        Q = Q @ num @ MatPoly.constant(cayley_unitary(N, rng), 1)
        p = p @ MatPoly.scalar({(0,): GaussianRational(1), (1,): -ac}, 1, exact=True)
        deg += r
    return Q, p, deg


def random_fr_instance(seed: int, N: int = 2, degree: int = 2, kind: Optional[str] = None):
    """``(T, R, kind)`` with ``T = conj_reflect(R) R`` for a seeded exact polynomial ``R``.

    ``kind`` is ``"generic"`` (square ``R``), ``"deficient"`` (``R`` has fewer
    rows than columns, so ``det T`` vanishes identically) or ``"circle"``
    (square ``R`` whose determinant vanishes at ``z = -1``). By default it
    cycles with the seed.
    """
    kinds = ("generic", "deficient", "circle")
    kind = kinds[seed % 3] if kind is None else kind
    if kind not in kinds:
        raise InputError(f"kind must be one of {kinds}")
    rng = random.Random(seed)
    rows = max(N - 1 - (seed // 3) % max(N - 1, 1), 1) if kind == "deficient" else N

    def rand_matrix(r, c):
        m = exact_zeros(r, c)
        for i in range(r):
            for j in range(c):
                m[i, j] = GaussianRational(rng.randint(-2, 2), rng.randint(-2, 2))
        return m

    R = MatPoly({(d,): rand_matrix(rows, N) for d in range(degree + 1)}, rows, N, 1, True)
    if kind == "circle":
        e = exact_eye(N)
        first = exact_zeros(N, N)
        first[0, 0] = GaussianRational(1)
        R = MatPoly({(0,): e, (1,): first}, N, N, 1, True) @ R
    T = R.conj_reflect() @ R
    return T, R, kind
