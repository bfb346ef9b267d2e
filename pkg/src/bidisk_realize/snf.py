"""Exact Smith normal form of univariate matrix polynomials over Q(i).

Scalar polynomials are handled internally as tuples of
:class:`~bidisk_realize.scalars.GaussianRational` coefficients in ascending
order with no trailing zeros; the empty tuple is the zero polynomial.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

import numpy as np

from .errors import FloatInput, InputError
from .poly import MatPoly, exact_eye, exact_zeros
from .scalars import ONE, ZERO, GaussianRational, Q

__all__ = [
    "SmithForm",
    "smith_normal_form",
    "exact_rank",
    "exact_det",
    "exact_nullspace",
    "minimal_kernel_basis",
    "unimodular_completion",
]


# ---------------------------------------------------------------------------
# scalar polynomial helpers
# ---------------------------------------------------------------------------

def _trim(c):
    c = list(c)
    while c and not c[-1]:
        c.pop()
    return tuple(c)


def _deg(a):
    return len(a) - 1


def _add(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] = out[i] + x
    return _trim(out)


def _neg(a):
    return tuple(-x for x in a)


def _sub(a, b):
    return _add(a, _neg(b))


def _mul(a, b):
    if not a or not b:
        return ()
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return _trim(out)


def _scale(a, s):
    return _trim(x * s for x in a) if s else ()


def _divmod(a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(a)
    db = _deg(b)
    inv = b[-1].inverse()
    q = [ZERO] * max(len(a) - db, 0)
    for k in range(len(a) - 1, db - 1, -1):
        c = r[k]
        if not c:
            continue
        f = c * inv
        q[k - db] = f
        for j, y in enumerate(b):
            r[k - db + j] = r[k - db + j] - f * y
    return _trim(q), _trim(r[:db] if db > 0 else [])


def _height(a):
    return max((x.height() for x in a), default=0)


def _key(a):
    return (_deg(a), _height(a))


# ---------------------------------------------------------------------------
# conversions between MatPoly and tuple-matrices
# ---------------------------------------------------------------------------

def _to_entries(P: MatPoly):
    deg = P.degree()
    out = [[[] for _ in range(P.cols)] for _ in range(P.rows)]
    for i in range(P.rows):
        for j in range(P.cols):
            out[i][j] = _trim(P.coeff(k)[i, j] for k in range(deg + 1)) if deg >= 0 else ()
    return out


def _from_entries(E, rows, cols) -> MatPoly:
    deg = max((len(e) for row in E for e in row), default=0)
    coeffs = {}
    for k in range(deg):
        m = exact_zeros(rows, cols)
        for i in range(rows):
            for j in range(cols):
                e = E[i][j]
                if k < len(e):
                    m[i, j] = e[k]
        coeffs[(k,)] = m
    return MatPoly(coeffs, rows, cols, 1, True)


def _identity_entries(n):
    return [[(ONE,) if i == j else () for j in range(n)] for i in range(n)]


# ---------------------------------------------------------------------------
# Smith form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmithForm:
    """``T1 @ D @ T2 == P`` with unimodular ``T1``, ``T2``.

    Attributes
    ----------
    T1, T1_inv, T2, T2_inv:
        Exact square matrix polynomials and their polynomial inverses.
    D:
        Exact diagonal matrix polynomial of the shape of ``P``.
    factors:
        Invariant factors ``d_j`` as MatPoly scalars, monic or zero.
    rank:
        Number of nonzero invariant factors (generic rank of ``P``).
    """

    T1: MatPoly
    T1_inv: MatPoly
    D: MatPoly
    T2: MatPoly
    T2_inv: MatPoly
    factors: tuple
    rank: int


def smith_normal_form(P: MatPoly, check: bool = True) -> SmithForm:
    """Smith normal form of an exact univariate matrix polynomial.

    Pivots are chosen by minimal degree, then smallest coefficient height,
    then row-major position. The result is verified by exact multiplication.
    """
    if not P.exact:
        raise FloatInput("Smith normal form needs exact coefficients")
    if P.nvars != 1 or not P.is_polynomial():
        raise InputError("Smith normal form expects a univariate polynomial (no negative powers)")
    m, n = P.shape
    A = _to_entries(P)
    L, Linv = _identity_entries(m), _identity_entries(m)
    R, Rinv = _identity_entries(n), _identity_entries(n)
    # invariant: L @ P @ R == A, with Linv = L^-1 and Rinv = R^-1

    def row_axpy(i, t, q):
        """row_i -= q * row_t."""
        for j in range(n):
            if A[t][j]:
                A[i][j] = _sub(A[i][j], _mul(q, A[t][j]))
        for j in range(m):
            if L[t][j]:
                L[i][j] = _sub(L[i][j], _mul(q, L[t][j]))
        for k in range(m):
            if Linv[k][i]:
                Linv[k][t] = _add(Linv[k][t], _mul(q, Linv[k][i]))

    def col_axpy(j, t, q):
        """col_j -= q * col_t."""
        for i in range(m):
            if A[i][t]:
                A[i][j] = _sub(A[i][j], _mul(q, A[i][t]))
        for i in range(n):
            if R[i][t]:
                R[i][j] = _sub(R[i][j], _mul(q, R[i][t]))
        for k in range(n):
            if Rinv[j][k]:
                Rinv[t][k] = _add(Rinv[t][k], _mul(q, Rinv[j][k]))

    def swap_rows(a, b):
        if a == b:
            return
        A[a], A[b] = A[b], A[a]
        L[a], L[b] = L[b], L[a]
        for row in Linv:
            row[a], row[b] = row[b], row[a]

    def swap_cols(a, b):
        if a == b:
            return
        for row in A:
            row[a], row[b] = row[b], row[a]
        for row in R:
            row[a], row[b] = row[b], row[a]
        Rinv[a], Rinv[b] = Rinv[b], Rinv[a]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if A[i][j]:
                        k = _key(A[i][j]) + (i, j)
                        if best is None or k < best:
                            best = k
            if best is None:
                break
            swap_rows(t, best[2])
            swap_cols(t, best[3])
            piv = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q, r = _divmod(A[i][t], piv)
                    row_axpy(i, t, q)
                    dirty = dirty or bool(r)
            for j in range(t + 1, n):
                if A[t][j]:
                    q, r = _divmod(A[t][j], piv)
                    col_axpy(j, t, q)
                    dirty = dirty or bool(r)
            if dirty:
                continue
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] and _divmod(A[i][j], piv)[1]:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            # row_t += row_bad, then reduce again
            row_axpy(t, bad, (-ONE,))
        if not A[t][t]:
            break
        lead = A[t][t][-1]
        if lead != ONE:
            inv = lead.inverse()
            A[t] = [_scale(e, inv) for e in A[t]]
            L[t] = [_scale(e, inv) for e in L[t]]
            for k in range(m):
                Linv[k][t] = _scale(Linv[k][t], lead)

    D = _from_entries(A, m, n)
    T1 = _from_entries(Linv, m, m)
    T1_inv = _from_entries(L, m, m)
    T2 = _from_entries(Rinv, n, n)
    T2_inv = _from_entries(R, n, n)
    factors = tuple(MatPoly({(k,): [[c]] for k, c in enumerate(A[i][i])}, 1, 1, 1, True) for i in range(min(m, n)))
    rank = sum(1 for i in range(min(m, n)) if A[i][i])
    if check:
        _verify(P, T1, T1_inv, D, T2, T2_inv, A, rank)
    return SmithForm(T1, T1_inv, D, T2, T2_inv, factors, rank)


def _verify(P, T1, T1_inv, D, T2, T2_inv, A, rank):
    m, n = P.shape
    if not (T1 @ D @ T2).equals(P):
        raise AssertionError("Smith form reconstruction failed")
    if not (T1 @ T1_inv).equals(MatPoly.identity(m)) or not (T2 @ T2_inv).equals(MatPoly.identity(n)):
        raise AssertionError("Smith transforms are not mutually inverse")
    for i in range(m):
        for j in range(n):
            if i != j and A[i][j]:
                raise AssertionError("Smith form is not diagonal")
    for i in range(rank - 1):
        if _divmod(A[i + 1][i + 1], A[i][i])[1]:
            raise AssertionError("invariant factors do not form a divisibility chain")


# ---------------------------------------------------------------------------
# exact dense linear algebra
# ---------------------------------------------------------------------------

def _row_echelon(M: np.ndarray):
    M = M.copy()
    rows, cols = M.shape
    r = 0
    sign = ONE
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i, c]), None)
        if piv is None:
            continue
        if piv != r:
            M[[r, piv]] = M[[piv, r]]
            sign = -sign
        inv = M[r, c].inverse()
        for i in range(r + 1, rows):
            if M[i, c]:
                f = M[i, c] * inv
                M[i, c:] = M[i, c:] - M[r, c:] * f
        r += 1
        if r == rows:
            break
    return M, r, sign


def exact_rank(M) -> int:
    """Rank of an exact matrix by exact Gaussian elimination."""
    M = np.asarray(M, dtype=object)
    if M.size == 0:
        return 0
    return _row_echelon(M)[1]


def exact_det(M) -> GaussianRational:
    M = np.asarray(M, dtype=object)
    if M.shape[0] != M.shape[1]:
        raise InputError("determinant of a non-square matrix")
    if M.size == 0:
        return ONE
    E, r, sign = _row_echelon(M)
    if r < M.shape[0]:
        return ZERO
    d = sign
    for i in range(M.shape[0]):
        d = d * E[i, i]
    return d


def generic_rank_exact(P: MatPoly, samples: int = 5, seed: int = 0) -> int:
    """Generic rank of an exact (Laurent) matrix polynomial via random exact points."""
    rng = random.Random(seed)
    best = 0
    for _ in range(samples):
        pt = GaussianRational(rng.randint(-97, 97), rng.randint(1, 97)) * GaussianRational(1, rng.randint(2, 61))
        pt = pt if P.nvars == 1 else tuple(pt * GaussianRational(rng.randint(1, 9)) + k for k in range(P.nvars))
        best = max(best, exact_rank(P.evaluate(pt)))
    return best


def exact_nullspace(M) -> list:
    """Basis of the right null space of an exact matrix (reduced echelon, free-variable form)."""
    M = np.asarray(M, dtype=object)
    rows, cols = M.shape
    A = [list(M[i]) for i in range(rows)]
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = A[r][c].inverse()
        A[r] = [x * inv if x else x for x in A[r]]
        for i in range(rows):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [x - f * y if y else x for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [ZERO] * cols
        v[f] = ONE
        for i, c in enumerate(pivots):
            if A[i][f]:
                v[c] = -A[i][f]
        basis.append(v)
    return basis


def _unit_scale(vec):
    """Rescale an exact vector by a power of two so its largest entry has modulus in [1/2, 1)."""
    top = max((abs(complex(x)) for x in vec if x), default=0.0)
    if top == 0.0:
        return vec
    e = int(np.floor(np.log2(top))) + 1
    s = GaussianRational(Q(1, 2 ** e) if e >= 0 else Q(2 ** -e))
    return [x * s for x in vec]


def minimal_kernel_basis(P: MatPoly, max_degree: int = None) -> MatPoly:
    """Minimal polynomial basis of the right kernel of an exact univariate ``P``.

    Returned as an ``N x k`` MatPoly whose columns have the smallest possible
    degrees (searched degree by degree through block Sylvester matrices).
    """
    if not P.exact:
        raise FloatInput("kernel basis needs exact coefficients")
    if P.nvars != 1 or not P.is_polynomial():
        raise InputError("kernel basis expects a univariate polynomial")
    m, N = P.shape
    target = N - generic_rank_exact(P)
    D = max(P.degree(), 0)
    cap = max_degree if max_degree is not None else N * D + 1
    found: list = []  # (degree, coefficient list of length degree+1, each an N-vector)
    for d in range(cap + 1):
        if len(found) == target:
            break
        S = exact_zeros(m * (D + d + 1), N * (d + 1))
        for (k,), c in P.items():
            for j in range(d + 1):
                S[(k + j) * m:(k + j + 1) * m, j * N:(j + 1) * N] = c
        null = exact_nullspace(S)
        if len(null) == sum(d - dj + 1 for dj, _ in found):
            continue
        span = []
        for dj, vec in found:
            for s in range(d - dj + 1):
                v = [ZERO] * (N * (d + 1))
                v[s * N:s * N + len(vec)] = vec
                span.append(v)
        rank = exact_rank(np.array(span, dtype=object)) if span else 0
        for v in null:
            trial = span + [v]
            rk = exact_rank(np.array(trial, dtype=object))
            if rk > rank:
                v = _unit_scale(v)
                span.append(v)
                rank = rk
                found.append((d, v))
                if len(found) == target:
                    break
    if len(found) != target:
        raise AssertionError("kernel basis search did not reach the kernel dimension")
    coeffs = {}
    for j, (d, v) in enumerate(found):
        for k in range(d + 1):
            seg = v[k * N:(k + 1) * N]
            if any(seg):
                c = coeffs.setdefault((k,), exact_zeros(N, len(found)))
                c[:, j] = seg
    return MatPoly(coeffs, N, len(found), 1, True)


def _interpolate_exact(points, values):
    """Coefficients of the matrix polynomial through ``values[i]`` at exact ``points[i]``."""
    n = len(points)
    # Newton divided differences on object arrays
    table = [v.copy() for v in values]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            table[i] = (table[i] - table[i - 1]) * (points[i] - points[i - j]).inverse()
    shape = values[0].shape
    coeffs = [exact_zeros(*shape) for _ in range(n)]
    # expand Newton form from the top
    poly = [table[n - 1]]
    for i in range(n - 2, -1, -1):
        new = [exact_zeros(*shape) for _ in range(len(poly) + 1)]
        for k, c in enumerate(poly):
            new[k + 1] = new[k + 1] + c
            new[k] = new[k] - c * points[i]
        new[0] = new[0] + table[i]
        poly = new
    for k, c in enumerate(poly):
        coeffs[k] = c
    return {(k,): c for k, c in enumerate(coeffs) if any(x for x in c.ravel())}


def _poly_inverse_unimodular(M: MatPoly, degree_bound: int) -> MatPoly:
    """Exact polynomial inverse of a unimodular ``M`` by evaluation and interpolation."""
    from .verify import _exact_inverse

    pts = [GaussianRational(k) for k in range(degree_bound + 1)]
    vals = [_exact_inverse(M.evaluate(p)) for p in pts]
    out = MatPoly(_interpolate_exact(pts, vals), M.rows, M.cols, 1, True)
    if not (out @ M).equals(MatPoly.identity(M.rows)):
        raise AssertionError("polynomial inverse check failed")
    return out


def _is_constant_det(M: MatPoly, bound: int) -> bool:
    vals = {exact_det(M.evaluate(GaussianRational(k))) for k in range(bound + 1)}
    return len(vals) == 1 and ZERO not in vals


def _dyadic(x: complex, bits: int = 24) -> GaussianRational:
    d = 2 ** bits
    return GaussianRational(Q(int(round(x.real * d)), d), Q(int(round(x.imag * d)), d))


def _reduce_columns(X: MatPoly, K: MatPoly) -> MatPoly:
    """Shrink the completion columns: ``x -> c (x - K h)`` with exact dyadic ``h`` and scalar ``c``.

    Both moves keep ``[X K]`` unimodular. ``h`` is the rounded least-squares
    solution over polynomial vectors of matching degree.
    """
    N, k = K.shape
    kdeg = [max(K.submatrix(None, [j]).degree(), 0) for j in range(k)]
    Kf = K.to_float()
    cols = []
    for c in range(X.cols):
        x = X.submatrix(None, [c])
        dx = max(x.degree(), 0)
        basis = [(j, s) for j in range(k) for s in range(dx - kdeg[j] + 1)]
        if basis:
            rows = N * (dx + 1)
            Mb = np.zeros((rows, len(basis)), dtype=complex)
            for t, (j, s) in enumerate(basis):
                for (e,), v in Kf.submatrix(None, [j]).items():
                    Mb[(e + s) * N:(e + s + 1) * N, t] = v[:, 0]
            xv = np.zeros(rows, dtype=complex)
            for (e,), v in x.to_float().items():
                xv[e * N:(e + 1) * N] = v[:, 0]
            h = np.linalg.lstsq(Mb, xv, rcond=None)[0]
            hc: dict = {}
            for t, (j, s) in enumerate(basis):
                q = _dyadic(h[t])
                if q:
                    hc.setdefault((s,), exact_zeros(k, 1))[j, 0] = q
            if hc:
                x = x - K @ MatPoly(hc, k, 1, 1, True)
        top = x.to_float().max_abs()
        if top > 0:
            e = int(np.floor(np.log2(top))) + 1
            x = x * GaussianRational(Q(1, 2 ** e) if e >= 0 else Q(2 ** -e))
        cols.append(x)
    return MatPoly.hstack(cols)


def unimodular_completion(K: MatPoly):
    """Complete an irreducible ``N x k`` kernel basis ``K`` to a unimodular ``[X K]``.

    Coordinate columns are tried first, so ``X`` is constant whenever some
    ``k x k`` row block of ``K`` is unimodular; otherwise ``X`` comes from the
    Smith form of ``K``. Returns ``(X, V)`` with ``V = [X K]^{-1}``.
    """
    N, k = K.shape
    r = N - k
    bound = sum(max(K.submatrix(None, slice(j, j + 1)).degree(), 0) for j in range(k))
    X = None
    # float screen: the complementary k x k minor must take one nonzero value
    subsets = list(itertools.combinations(range(N), r))
    pts = np.exp(2j * np.pi * np.array([0.13, 0.37, 0.71])) * np.array([0.6, 1.3, 2.1])
    vals = K.to_float().evaluate_many(np.concatenate([[0.0], pts]))
    rests = np.array([[i for i in range(N) if i not in J] for J in subsets], dtype=int).reshape(len(subsets), k)
    dets = np.linalg.det(vals[:, rests][:, :, :, :])  # (points, subsets)
    ok = (np.abs(dets[0]) > 1e-8) & np.all(np.abs(dets - dets[:1]) <= 1e-7 * np.maximum(np.abs(dets[:1]), 1e-300), axis=0)
    for J, rest, good in zip(subsets, rests, ok):
        if good and _is_constant_det(K.submatrix(list(rest), None), bound):
            X = MatPoly.constant(exact_eye(N)[:, list(J)], 1)
            break
    if X is None:
        sf = smith_normal_form(K)
        if any(f.degree() != 0 for f in sf.factors):
            raise AssertionError("kernel basis is not irreducible")
        X = sf.T1.submatrix(None, slice(k, N))
        X = _reduce_columns(X, K)
    Vinv = MatPoly.hstack([X, K])
    # cofactors are bounded by the sum of the column degrees
    deg_bound = sum(max(Vinv.submatrix(None, [j]).degree(), 0) for j in range(N))
    V = _poly_inverse_unimodular(Vinv, deg_bound)
    return X, V
