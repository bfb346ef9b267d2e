"""Sums of squares for strictly positive trigonometric matrix polynomials.

A hermitian Laurent polynomial ``T`` with ``T >= delta I`` on the torus is
written as ``T = C_n T_n``, the Cesàro mean of a nearby ``T_n`` that is still
positive. The Cesàro mean is an average of ``T_n`` against the Fejér kernel,
and the Fejér kernel is a square, so a quadrature rule on roots of unity turns
that average into an explicit finite sum of squares.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    CesaroOrderExhausted,
    DegreeExceeded,
    InputError,
    NotHermitian,
    NotStrictContraction,
    NotStrictlyPositive,
)
from .poly import MatPoly, RationalMatrixFunction, exact_zeros, float_array
from .scalars import GaussianRational, Q
from .specfact import factor_constant_psd

log = logging.getLogger(__name__)

N_MAX = 512

__all__ = [
    "CesaroOperator",
    "quadrature_integral",
    "sos_factor_strict",
    "augment_to_isoinner",
    "Augmentation",
    "torus_min_eigenvalue",
]


def _torus(m: int, nvars: int):
    t = np.exp(2j * np.pi * np.arange(m) / m)
    grids = np.meshgrid(*([t] * nvars), indexing="ij")
    return [g.ravel() for g in grids]


def torus_min_eigenvalue(T: MatPoly, m: int = 32) -> float:
    """Smallest eigenvalue of the hermitian ``T`` over an ``m``-point-per-variable torus grid."""
    vals = T.to_float().evaluate_many(*_torus(m, T.nvars))
    vals = (vals + np.conj(np.swapaxes(vals, 1, 2))) / 2
    return float(np.linalg.eigvalsh(vals)[:, 0].min())


@dataclass(frozen=True)
class CesaroOperator:
    """Multivariable Cesàro mean of order ``n`` acting on Laurent polynomials.

    Coefficient ``k`` is multiplied by ``prod_j max(0, (n - |k_j|) / n)``.
    ``m`` is the degree bound on which :meth:`invert` is used.
    """

    n: int
    m: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InputError("Cesàro order must be positive")

    def coefficient(self, k, exact: bool = False):
        out = Q(1) if exact else 1.0
        for kj in k:
            w = max(0, self.n - abs(int(kj)))
            out = out * (Q(w, self.n) if exact else w / self.n)
        return out

    def apply(self, L: MatPoly) -> MatPoly:
        coeffs = {}
        for k, v in L.items():
            c = self.coefficient(k, L.exact)
            if c:
                coeffs[k] = v * GaussianRational(c) if L.exact else v * c
        return MatPoly(coeffs, L.rows, L.cols, L.nvars, L.exact)

    def invert(self, L: MatPoly) -> MatPoly:
        """The unique ``L_n`` of the same support with ``C_n L_n = L``."""
        if any(d >= self.n for d in L.laurent_degree()):
            raise DegreeExceeded(f"Cesàro order {self.n} does not exceed the degree {L.laurent_degree()}")
        coeffs = {}
        for k, v in L.items():
            c = self.coefficient(k, L.exact)
            coeffs[k] = v * GaussianRational(1 / c) if L.exact else v / c
        return MatPoly(coeffs, L.rows, L.cols, L.nvars, L.exact)


def quadrature_integral(H: MatPoly, M: int) -> np.ndarray:
    """Mean of ``H`` over the grid of ``(M+1)``-th roots of unity in each variable.

    Exact for Laurent degree at most ``M`` per variable, where it equals the
    constant coefficient. Exact input is averaged by summing the aliased
    coefficients, float input by sampling the grid.
    """
    if any(d > M for d in H.laurent_degree()):
        raise DegreeExceeded(f"degree {H.laurent_degree()} exceeds the quadrature bound {M}")
    if H.exact:
        out = exact_zeros(H.rows, H.cols)
        for k, v in H.items():
            if all(kj % (M + 1) == 0 for kj in k):
                out = out + v
        return out
    vals = H.evaluate_many(*_torus(M + 1, H.nvars))
    return vals.mean(axis=0)


def _fejer_factor_coeffs(n: int, nodes, nvars: int, weight: float):
    """Coefficients of ``h(z, zeta) = weight * n^{-d/2} sum_{k in [0,n)^d} (z conj(zeta))^k`` per node."""
    out = {}
    scale = weight * n ** (-nvars / 2)
    for k in itertools.product(range(n), repeat=nvars):
        ph = np.ones(len(nodes[0]), dtype=complex)
        for j, kj in enumerate(k):
            ph = ph * np.conj(nodes[j]) ** kj
        out[k] = scale * ph
    return out


def sos_factor_strict(T: MatPoly, delta: float, grid: int = 32, n_max: int = N_MAX, tol: float = 1e-8,
                      return_info: bool = False):
    """Tall polynomial ``A`` with ``A^* A = T`` on the torus, for ``T >= delta I``.

    ``n`` starts at ``4m`` (``m`` the largest Laurent degree) and doubles
    until ``T_n = C_n^{-1} T`` stays above ``delta / 2`` on the verification
    grid and on the quadrature nodes. With ``M = n + m`` the stacked rows are
    ``(M+1)^{-d/2} h(z, zeta_q) L_q`` where ``L_q^* L_q = T_n(zeta_q)``.

    Returns ``A`` or ``(A, info)`` when ``return_info`` is set.
    """
    if T.rows != T.cols or not T.is_hermitian(tol=1e-12):
        raise NotHermitian("sos_factor_strict needs a hermitian Laurent polynomial")
    if not delta > 0:
        raise NotStrictlyPositive("delta must be positive")
    d = T.nvars
    lo = torus_min_eigenvalue(T, grid)
    if lo < delta * (1 - 1e-9):
        raise NotStrictlyPositive(f"minimum eigenvalue {lo:.3e} on the torus grid is below delta = {delta:.3e}")
    m = max(max(T.laurent_degree()), 0)
    Tf = T.to_float()
    n = max(4 * m, 1)
    tried = []
    while True:
        if n > n_max:
            raise CesaroOrderExhausted(
                f"T_n stayed below delta/2 up to n = {n_max}", {"orders": tried, "delta": delta}
            )
        Tn = CesaroOperator(n, m).invert(Tf).hermitian_part() if m else Tf
        M = n + m
        nodes = _torus(M + 1, d)
        node_vals = Tn.evaluate_many(*nodes)
        node_vals = (node_vals + np.conj(np.swapaxes(node_vals, 1, 2))) / 2
        low = min(torus_min_eigenvalue(Tn, grid), float(np.linalg.eigvalsh(node_vals)[:, 0].min()))
        tried.append((n, low))
        if low >= delta / 2:
            break
        n *= 2
    N = T.rows
    Ls = [factor_constant_psd(v, tol_rank=0.0) for v in node_vals]
    row_node = np.concatenate([np.full(L.shape[0], q) for q, L in enumerate(Ls)])
    Lstack = np.concatenate(Ls, axis=0)
    weight = (M + 1) ** (-d / 2)
    h = _fejer_factor_coeffs(n, nodes, d, weight)
    A = MatPoly({k: ph[row_node][:, None] * Lstack for k, ph in h.items()}, Lstack.shape[0], N, d, False)
    res = _sos_residual(A, Tf, 64)
    scale = max(float(np.max(np.abs(Tf.evaluate_many(*_torus(8, d))))), 1e-300)
    info = {"n": n, "M": M, "rows": A.rows, "nodes": len(nodes[0]), "residual": res, "orders": tried}
    if res > tol * scale:
        raise CesaroOrderExhausted(f"sum-of-squares residual {res:.2e} above tolerance", info)
    return (A, info) if return_info else A


def _sos_residual(A: MatPoly, T: MatPoly, m: int) -> float:
    pts = _torus(m, A.nvars)
    worst = 0.0
    for s in range(0, len(pts[0]), 512):
        chunk = [p[s:s + 512] for p in pts]
        Av = A.evaluate_many(*chunk)
        G = np.conj(np.swapaxes(Av, 1, 2)) @ Av
        worst = max(worst, float(np.max(np.linalg.norm(G - T.evaluate_many(*chunk), 2, axis=(1, 2)))))
    return worst


@dataclass
class Augmentation:
    """``(P; A)`` with ``A^* A = I - P^* P`` on the torus."""

    P: MatPoly
    A: MatPoly
    stacked: MatPoly
    delta: float
    delta_prime: float
    info: dict = field(default_factory=dict)

    @property
    def function(self) -> RationalMatrixFunction:
        return RationalMatrixFunction.polynomial(self.stacked)


def augment_to_isoinner(P: MatPoly, grid: int = 32, tol: float = 1e-8) -> Augmentation:
    """Stack a strictly contractive polynomial ``P`` over a sum-of-squares factor of ``I - P^* P``."""
    Pf = P.to_float()
    vals = Pf.evaluate_many(*_torus(grid, P.nvars))
    smax = float(np.max(np.linalg.norm(vals, 2, axis=(1, 2)), initial=0.0))
    delta = 1.0 - smax
    if delta <= 1e-12:
        raise NotStrictContraction(f"largest singular value {smax:.6f} on the torus grid is not below 1")
    T = MatPoly.identity(P.cols, P.nvars, exact=False) - Pf.conj_reflect() @ Pf
    delta_prime = 1.0 - (1.0 - delta) ** 2
    A, info = sos_factor_strict(T.hermitian_part().prune(), delta_prime, grid=grid, return_info=True)
    stacked = MatPoly.vstack([Pf, A])
    iso = stacked.evaluate_many(*_torus(grid, P.nvars))
    iso_res = float(np.max(np.abs(np.conj(np.swapaxes(iso, 1, 2)) @ iso - np.eye(P.cols)[None])))
    info["isoinner_residual"] = iso_res
    if iso_res > tol:
        raise CesaroOrderExhausted(f"augmented function is not iso-inner (residual {iso_res:.2e})", info)
    return Augmentation(Pf, A, stacked, delta, delta_prime, info)
