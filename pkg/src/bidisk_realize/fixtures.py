"""Worked 2x2 example: the inner polynomial and every intermediate matrix of its realization.

``S(z) = 1/2 [[z1 (z1 + z2), z1 z2 (z1 - z2)], [z1 - z2, z2 (z1 + z2)]]``
has det degrees ``(2, 2)``. Entries without square roots are exact.
"""
from __future__ import annotations

import numpy as np

from .poly import MatPoly, exact_array
from .scalars import GaussianRational

__all__ = ["kummert_example", "EXAMPLE_NAMES"]

EXAMPLE_NAMES = ("kummert-4x4",)

_R = 1 / np.sqrt(2)


def _exact(entries: dict, rows: int, cols: int, nvars: int) -> MatPoly:
    """``entries[(i, j)] = {exponent: "p/q"}`` as an exact MatPoly."""
    coeffs: dict = {}
    for (i, j), terms in entries.items():
        for k, v in terms.items():
            m = coeffs.setdefault(k, exact_array(np.zeros((rows, cols), dtype=int)))
            m[i, j] = m[i, j] + GaussianRational(v)
    return MatPoly(coeffs, rows, cols, nvars, True)


def _float(coeffs: dict, nvars: int = 1) -> MatPoly:
    coeffs = {k: np.asarray(v, dtype=complex) for k, v in coeffs.items()}
    shape = next(iter(coeffs.values())).shape
    return MatPoly(coeffs, shape[0], shape[1], nvars, False)


def kummert_example() -> dict:
    """All matrices of the worked example keyed by name.

    Keys: ``S`` (bivariate), ``T`` (Laurent in z2), ``A``, ``B``, ``U``,
    ``Y``, ``C``, ``D``, ``F``, ``V`` and the breakdown ``r``.
    """
    h = "1/2"
    S = _exact({
        (0, 0): {(2, 0): h, (1, 1): h},
        (0, 1): {(2, 1): h, (1, 2): "-1/2"},
        (1, 0): {(1, 0): h, (0, 1): "-1/2"},
        (1, 1): {(1, 1): h, (0, 2): h},
    }, 2, 2, 2)
    q = "1/4"
    T = _exact({
        (0, 0): {(0,): "3/4"}, (0, 1): {(1,): q}, (0, 2): {(-1,): q}, (0, 3): {(0,): q},
        (1, 0): {(-1,): q}, (1, 1): {(0,): "3/4"}, (1, 2): {(-2,): "-1/4"}, (1, 3): {(-1,): "-1/4"},
        (2, 0): {(1,): q}, (2, 1): {(2,): "-1/4"}, (2, 2): {(0,): q}, (2, 3): {(1,): q},
        (3, 0): {(0,): q}, (3, 1): {(1,): "-1/4"}, (3, 2): {(-1,): q}, (3, 3): {(0,): q},
    }, 4, 4, 1)
    A = _float({
        (0,): [[_R, 0, 0, 0], [0, 0, 0.5, 0]],
        (1,): [[0, _R, 0, 0], [0.5, 0, 0, 0.5]],
        (2,): [[0, 0, 0, 0], [0, -0.5, 0, 0]],
    })
    B = _float({
        (0,): [[np.sqrt(2), 0], [0, 0], [0, 2], [0, 0]],
        (1,): [[0, 0], [0, 0], [-np.sqrt(2), 0], [0, 0]],
    })
    U = _float({
        (0,): [[0, 0, 0, 1], [0, 0, _R, 0], [_R, 0, 0, 0], [0, 0, _R, 0]],
        (1,): [[0, 0, 0, 0], [-0.5, 0, 0, 0], [0, _R, 0, 0], [0.5, 0, 0, 0]],
        (2,): [[0, 0, 0, 0], [0, 0.5, 0, 0], [0, 0, 0, 0], [0, -0.5, 0, 0]],
    })
    Y = exact_array(np.zeros((8, 8), dtype=int))
    Y[0, 0] = GaussianRational("1/2")
    Y[1, 1] = GaussianRational(1)
    Y[0, 5] = GaussianRational("-1/2")
    Y[5, 0] = GaussianRational("-1/2")
    Y[5, 5] = GaussianRational("1/2")
    C = np.zeros((2, 8), dtype=complex)
    C[0, 0], C[1, 1], C[0, 5] = _R, 1, -_R
    D = np.zeros((8, 2), dtype=complex)
    D[0, 0], D[1, 1] = np.sqrt(2), 1
    F = _float({
        (0,): [[_R, 0, 0, 0], [0, 1, 0, 0]],
        (1,): [[0, -_R, 0, 0], [0, 0, 0, 0]],
    })
    V = np.array([
        [0, 0, 0, 1, 0, 0],
        [0, 0, _R, 0, -_R, 0],
        [_R, 0, 0, 0, 0, _R],
        [0, 0, _R, 0, _R, 0],
        [_R, 0, 0, 0, 0, -_R],
        [0, 1, 0, 0, 0, 0],
    ], dtype=complex)
    return {"S": S, "T": T, "A": A, "B": B, "U": U, "Y": Y, "C": C, "D": D, "F": F, "V": V, "r": (2, 2)}
