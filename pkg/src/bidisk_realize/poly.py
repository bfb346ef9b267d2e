"""Matrix-valued (Laurent) polynomials in one or two variables.

A :class:`MatPoly` stores a sparse map ``exponent tuple -> coefficient
matrix``. Negative exponents are allowed, so the same class carries matrix
Laurent polynomials. Every object is tagged *exact* (entries are
:class:`~bidisk_realize.scalars.GaussianRational` in ``object`` arrays) or
*float* (``complex128`` arrays). Exact and float operands combine into a float
result; nothing is ever converted from float to exact implicitly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ClearingFailed, DegenerateSlice, DenominatorZero, DimensionMismatch, InputError
from .scalars import ONE, ZERO, GaussianRational, format_scalar, parse_scalar, to_exact

PRUNE_REL = 1e-13

__all__ = [
    "MatPoly",
    "RationalMatrixFunction",
    "eval_rational",
    "breve",
    "conj_reflect",
    "slice_stability_check",
    "SliceReport",
    "exact_array",
    "float_array",
    "is_exact_array",
    "fit_polynomial",
]


# ---------------------------------------------------------------------------
# array helpers
# ---------------------------------------------------------------------------

def exact_array(a) -> np.ndarray:
    """Object array of GaussianRational from nested sequences or an array."""
    arr = np.array(a, dtype=object)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = to_exact(x)
    return out


def float_array(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.dtype == object:
        return np.vectorize(complex, otypes=[complex])(arr) if arr.size else arr.astype(complex)
    return arr.astype(complex)


def is_exact_array(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def _is_zero_matrix(m: np.ndarray) -> bool:
    if m.dtype == object:
        return not any(m.flat)
    return not np.any(m)


def exact_zeros(rows, cols):
    out = np.empty((rows, cols), dtype=object)
    out.fill(ZERO)
    return out


def exact_eye(n):
    out = exact_zeros(n, n)
    for i in range(n):
        out[i, i] = ONE
    return out


def conj_t(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose that works for exact object arrays too."""
    if m.dtype == object:
        return np.vectorize(lambda x: x.conjugate(), otypes=[object])(m.T) if m.size else m.T.copy()
    return m.conj().T


def _conj(m: np.ndarray) -> np.ndarray:
    if m.dtype == object:
        return np.vectorize(lambda x: x.conjugate(), otypes=[object])(m) if m.size else m.copy()
    return m.conj()


# ---------------------------------------------------------------------------
# MatPoly
# ---------------------------------------------------------------------------

class MatPoly:
    """Sparse matrix (Laurent) polynomial in ``nvars`` variables (1 or 2).

    Parameters
    ----------
    coeffs:
        Mapping from exponents (``int`` or tuple of length ``nvars``) to
        coefficient matrices of shape ``(rows, cols)``.
    rows, cols:
        Matrix shape; required when ``coeffs`` is empty.
    nvars:
        Number of variables.
    exact:
        Coefficient field tag. Inferred from the coefficient arrays when
        omitted; float coefficients can never be tagged exact.
    """

    __slots__ = ("rows", "cols", "nvars", "exact", "_coeffs", "_dense")
    __array_ufunc__ = None  # let ndarray @ MatPoly dispatch to __rmatmul__

    def __init__(self, coeffs: Mapping, rows=None, cols=None, nvars=1, exact=None):
        if nvars not in (1, 2):
            raise InputError("only one or two variables are supported")
        items = []
        for k, m in dict(coeffs).items():
            key = (int(k),) if np.isscalar(k) else tuple(int(x) for x in k)
            if len(key) != nvars:
                raise InputError(f"exponent {k!r} does not match nvars={nvars}")
            arr = m if isinstance(m, np.ndarray) else np.array(m, dtype=object if _looks_exact(m) else complex)
            if arr.ndim == 0:
                arr = arr.reshape(1, 1)
            items.append((key, arr))
        if rows is None or cols is None:
            if not items:
                raise InputError("shape required for an empty polynomial")
            rows, cols = items[0][1].shape
        if exact is None:
            exact = all(is_exact_array(a) for _, a in items) if items else False
        store = {}
        for key, arr in items:
            if arr.shape != (rows, cols):
                raise DimensionMismatch(f"coefficient {key} has shape {arr.shape}, expected {(rows, cols)}")
            if exact:
                if not is_exact_array(arr):
                    raise InputError("float coefficients cannot be tagged exact")
                arr = arr if all(isinstance(x, GaussianRational) for x in arr.flat) else exact_array(arr)
            else:
                arr = float_array(arr)
                if not np.all(np.isfinite(arr)):
                    raise InputError("non-finite coefficient")
            if key in store:
                arr = store[key] + arr
            if not _is_zero_matrix(arr):
                arr.setflags(write=False)
                store[key] = arr
            else:
                store.pop(key, None)
        self.rows = int(rows)
        self.cols = int(cols)
        self.nvars = nvars
        self.exact = bool(exact)
        self._coeffs = dict(sorted(store.items()))
        self._dense = None

    # -- constructors ----------------------------------------------------
    @classmethod
    def zeros(cls, rows, cols, nvars=1, exact=True):
        return cls({}, rows, cols, nvars, exact)

    @classmethod
    def constant(cls, mat, nvars=1):
        arr = mat if isinstance(mat, np.ndarray) else np.array(mat, dtype=object if _looks_exact(mat) else complex)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.dtype != object:
            arr = arr.astype(complex)
        return cls({(0,) * nvars: arr}, arr.shape[0], arr.shape[1], nvars, arr.dtype == object)

    @classmethod
    def identity(cls, n, nvars=1, exact=True):
        return cls.constant(exact_eye(n) if exact else np.eye(n, dtype=complex), nvars)

    @classmethod
    def monomial(cls, k, mat, nvars=None):
        key = (int(k),) if np.isscalar(k) else tuple(k)
        nv = nvars or len(key)
        arr = mat if isinstance(mat, np.ndarray) else np.array(mat, dtype=object if _looks_exact(mat) else complex)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        return cls({key: arr}, arr.shape[0], arr.shape[1], nv, arr.dtype == object)

    @classmethod
    def variable(cls, i, nvars=1, exact=True, size=1):
        key = tuple(1 if j == i else 0 for j in range(nvars))
        return cls({key: exact_eye(size) if exact else np.eye(size, dtype=complex)}, size, size, nvars, exact)

    @classmethod
    def scalar(cls, terms: Mapping, nvars=1, exact=None):
        """Scalar (1x1) polynomial from ``{exponent: value}``."""
        if exact is None:
            exact = all(not isinstance(v, (float, complex)) for v in terms.values())
        conv = (lambda v: exact_array([[v]])) if exact else (lambda v: np.array([[complex(v)]]))
        return cls({k: conv(v) for k, v in terms.items()}, 1, 1, nvars, exact)

    @classmethod
    def from_dense(cls, arr, offsets=None, exact=False):
        """Build from a dense array ``(d1[, d2], rows, cols)``; ``offsets`` shift exponents."""
        arr = np.asarray(arr)
        nvars = arr.ndim - 2
        offsets = tuple(offsets or (0,) * nvars)
        coeffs = {}
        for idx in product(*(range(s) for s in arr.shape[:nvars])):
            coeffs[tuple(i + o for i, o in zip(idx, offsets))] = arr[idx]
        return cls(coeffs, arr.shape[-2], arr.shape[-1], nvars, exact and arr.dtype == object)

    # -- basic access ----------------------------------------------------
    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def coeffs(self) -> dict:
        return dict(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def keys(self):
        return list(self._coeffs)

    def coeff(self, k) -> np.ndarray:
        key = (int(k),) if np.isscalar(k) else tuple(k)
        c = self._coeffs.get(key)
        if c is not None:
            return c
        return exact_zeros(self.rows, self.cols) if self.exact else np.zeros(self.shape, dtype=complex)

    def __len__(self):
        return len(self._coeffs)

    def is_zero(self):
        return not self._coeffs

    def degrees(self):
        """Per-variable maximum exponent (``-1`` for the zero polynomial)."""
        if not self._coeffs:
            return (-1,) * self.nvars
        return tuple(max(k[i] for k in self._coeffs) for i in range(self.nvars))

    def min_degrees(self):
        if not self._coeffs:
            return (0,) * self.nvars
        return tuple(min(k[i] for k in self._coeffs) for i in range(self.nvars))

    def degree(self, var=None):
        if var is None:
            if self.nvars != 1:
                raise InputError("specify the variable for a bivariate degree")
            var = 0
        return self.degrees()[var]

    def total_degree(self):
        return max((sum(k) for k in self._coeffs), default=-1)

    def laurent_degree(self, var=None):
        """Largest ``|k|`` per variable (or for ``var``)."""
        if not self._coeffs:
            out = (0,) * self.nvars
        else:
            out = tuple(max(abs(k[i]) for k in self._coeffs) for i in range(self.nvars))
        return out if var is None else out[var]

    def is_polynomial(self):
        return all(min(k) >= 0 for k in self._coeffs)

    # -- field conversions -------------------------------------------------
    def to_float(self) -> "MatPoly":
        if not self.exact:
            return self
        return MatPoly({k: float_array(v) for k, v in self._coeffs.items()}, self.rows, self.cols, self.nvars, False)

    def to_exact(self) -> "MatPoly":
        if self.exact:
            return self
        raise InputError("refusing lossy float -> exact conversion")

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(float_array(v)))) for v in self._coeffs.values()), default=0.0)

    def prune(self, rel=PRUNE_REL, abs_tol=0.0) -> "MatPoly":
        """Drop float coefficient matrices below ``rel * global max`` (exact: no-op)."""
        if self.exact or not self._coeffs:
            return self
        thr = max(rel * self.max_abs(), abs_tol)
        kept = {k: v for k, v in self._coeffs.items() if np.max(np.abs(v)) >= thr}
        return MatPoly(kept, self.rows, self.cols, self.nvars, False)

    # -- dense views (float) ---------------------------------------------
    def dense(self):
        """``(array, offsets)`` with ``array[k - offsets] = coeff(k)`` as complex."""
        if self._dense is None:
            lo = self.min_degrees()
            hi = self.degrees()
            if not self._coeffs:
                hi = lo
            shape = tuple(h - l + 1 for l, h in zip(lo, hi)) + (self.rows, self.cols)
            arr = np.zeros(shape, dtype=complex)
            for k, v in self._coeffs.items():
                arr[tuple(a - b for a, b in zip(k, lo))] = float_array(v)
            arr.setflags(write=False)
            self._dense = (arr, lo)
        return self._dense

    # -- arithmetic ------------------------------------------------------
    def _check_compatible(self, other):
        if other.nvars != self.nvars:
            raise DimensionMismatch("variable count mismatch")

    def _combine(self, other, sign):
        self._check_compatible(other)
        if other.shape != self.shape:
            raise DimensionMismatch(f"shape mismatch {self.shape} vs {other.shape}")
        exact = self.exact and other.exact
        a = self if exact else self.to_float()
        b = other if exact else other.to_float()
        out = dict(a._coeffs)
        for k, v in b._coeffs.items():
            out[k] = out[k] + sign * v if k in out else (v if sign > 0 else -v)
        return MatPoly(out, self.rows, self.cols, self.nvars, exact)

    def __add__(self, other):
        if not isinstance(other, MatPoly):
            other = MatPoly.constant(_as_matrix(other, self.shape, self.exact), self.nvars)
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, MatPoly):
            other = MatPoly.constant(_as_matrix(other, self.shape, self.exact), self.nvars)
        return self._combine(other, -1)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return MatPoly({k: -v for k, v in self._coeffs.items()}, self.rows, self.cols, self.nvars, self.exact)

    def __matmul__(self, other):
        if isinstance(other, np.ndarray):
            other = MatPoly.constant(other, self.nvars)
        if not isinstance(other, MatPoly):
            return NotImplemented
        self._check_compatible(other)
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        exact = self.exact and other.exact
        if not exact:
            return _float_matmul(self.to_float(), other.to_float())
        out = {}
        for ka, va in self._coeffs.items():
            for kb, vb in other._coeffs.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                prod_ = va.dot(vb)
                out[k] = out[k] + prod_ if k in out else prod_
        return MatPoly(out, self.rows, other.cols, self.nvars, True)

    def __rmatmul__(self, other):
        if isinstance(other, np.ndarray):
            return MatPoly.constant(other, self.nvars) @ self
        return NotImplemented

    def __mul__(self, other):
        """Scalar multiplication; a 1x1 MatPoly acts as a scalar polynomial."""
        if isinstance(other, MatPoly):
            if other.shape == (1, 1) and self.shape != (1, 1):
                return other.__mul__(self)
            if self.shape == (1, 1):
                exact = self.exact and other.exact
                a = self if exact else self.to_float()
                b = other if exact else other.to_float()
                out = {}
                for ka, va in a._coeffs.items():
                    s = va[0, 0]
                    for kb, vb in b._coeffs.items():
                        k = tuple(x + y for x, y in zip(ka, kb))
                        term = vb * s
                        out[k] = out[k] + term if k in out else term
                return MatPoly(out, other.rows, other.cols, self.nvars, exact)
            raise DimensionMismatch("elementwise product of matrix polynomials is not supported")
        if isinstance(other, (float, complex, np.floating, np.complexfloating)):
            f = self.to_float()
            return MatPoly({k: v * complex(other) for k, v in f._coeffs.items()}, self.rows, self.cols, self.nvars, False)
        if self.exact:
            s = to_exact(other)
            return MatPoly({k: v * s for k, v in self._coeffs.items()}, self.rows, self.cols, self.nvars, True)
        return MatPoly({k: v * complex(other) for k, v in self._coeffs.items()}, self.rows, self.cols, self.nvars, False)

    __rmul__ = __mul__

    def shift(self, k) -> "MatPoly":
        """Multiply by the monomial ``z^k``."""
        kk = (int(k),) * 1 if np.isscalar(k) else tuple(k)
        if len(kk) != self.nvars:
            raise InputError("shift exponent does not match nvars")
        return MatPoly(
            {tuple(a + b for a, b in zip(key, kk)): v for key, v in self._coeffs.items()},
            self.rows, self.cols, self.nvars, self.exact,
        )

    def map_coeffs(self, fn, rows=None, cols=None, exact=None):
        out = {k: fn(v) for k, v in self._coeffs.items()}
        return MatPoly(out, rows or self.rows, cols or self.cols, self.nvars, self.exact if exact is None else exact)

    # -- involutions ------------------------------------------------------
    def conj_reflect(self) -> "MatPoly":
        """``z -> P(1/conj(z))^*``: coefficient ``k`` becomes ``coeff(-k)^*``."""
        return MatPoly(
            {tuple(-x for x in k): conj_t(v) for k, v in self._coeffs.items()},
            self.cols, self.rows, self.nvars, self.exact,
        )

    def breve(self) -> "MatPoly":
        """``z -> P(conj(z))^*``: coefficients conjugate-transposed in place."""
        return MatPoly({k: conj_t(v) for k, v in self._coeffs.items()}, self.cols, self.rows, self.nvars, self.exact)

    def transpose(self) -> "MatPoly":
        return MatPoly({k: v.T.copy() for k, v in self._coeffs.items()}, self.cols, self.rows, self.nvars, self.exact)

    def conjugate(self) -> "MatPoly":
        return MatPoly({k: _conj(v) for k, v in self._coeffs.items()}, self.rows, self.cols, self.nvars, self.exact)

    def swap_variables(self) -> "MatPoly":
        if self.nvars != 2:
            return self
        return MatPoly({(k[1], k[0]): v for k, v in self._coeffs.items()}, self.rows, self.cols, 2, self.exact)

    def is_hermitian(self, tol=0.0) -> bool:
        if self.rows != self.cols:
            return False
        diff = self - self.conj_reflect()
        if self.exact and diff.exact:
            return diff.is_zero()
        return diff.max_abs() <= tol * max(1.0, self.max_abs())

    def hermitian_part(self) -> "MatPoly":
        """Float symmetrisation ``(L + conj_reflect(L)) / 2``."""
        if self.exact:
            return self
        return (self + self.conj_reflect()) * 0.5

    # -- slicing and blocks -----------------------------------------------
    def submatrix(self, rows=None, cols=None) -> "MatPoly":
        r = np.arange(self.rows) if rows is None else np.atleast_1d(np.arange(self.rows)[rows])
        c = np.arange(self.cols) if cols is None else np.atleast_1d(np.arange(self.cols)[cols])
        return MatPoly({k: v[np.ix_(r, c)] for k, v in self._coeffs.items()}, len(r), len(c), self.nvars, self.exact)

    def coefficients_in(self, var: int) -> dict:
        """For a bivariate polynomial: ``{a: univariate MatPoly}`` in the other variable."""
        if self.nvars != 2:
            raise InputError("coefficients_in needs a bivariate polynomial")
        other = 1 - var
        groups: dict = {}
        for k, v in self._coeffs.items():
            groups.setdefault(k[var], {})[(k[other],)] = v
        return {a: MatPoly(d, self.rows, self.cols, 1, self.exact) for a, d in sorted(groups.items())}

    @staticmethod
    def from_coefficients_in(groups: Mapping[int, "MatPoly"], var: int, rows, cols, exact) -> "MatPoly":
        out = {}
        for a, p in groups.items():
            for (b,), v in p.items():
                key = (a, b) if var == 0 else (b, a)
                out[key] = v
        return MatPoly(out, rows, cols, 2, exact)

    def embed(self, var: int) -> "MatPoly":
        """Univariate -> bivariate, placing this polynomial in variable ``var``."""
        if self.nvars != 1:
            raise InputError("embed expects a univariate polynomial")
        return MatPoly(
            {((k[0], 0) if var == 0 else (0, k[0])): v for k, v in self._coeffs.items()},
            self.rows, self.cols, 2, self.exact,
        )

    @staticmethod
    def block(blocks: Sequence[Sequence["MatPoly"]]) -> "MatPoly":
        """Assemble a block matrix; all blocks must share nvars."""
        row_heights = [row[0].rows for row in blocks]
        col_widths = [b.cols for b in blocks[0]]
        nvars = blocks[0][0].nvars
        exact = all(b.exact for row in blocks for b in row)
        R, C = sum(row_heights), sum(col_widths)
        keys = set()
        for row in blocks:
            for b in row:
                keys.update(b._coeffs)
        out = {}
        for k in keys:
            m = exact_zeros(R, C) if exact else np.zeros((R, C), dtype=complex)
            r0 = 0
            for i, row in enumerate(blocks):
                c0 = 0
                for j, b in enumerate(row):
                    if b.rows != row_heights[i] or b.cols != col_widths[j]:
                        raise DimensionMismatch("ragged block layout")
                    v = b._coeffs.get(k)
                    if v is not None:
                        m[r0:r0 + b.rows, c0:c0 + b.cols] = v if exact else float_array(v)
                    c0 += b.cols
                r0 += row_heights[i]
            out[k] = m
        return MatPoly(out, R, C, nvars, exact)

    @staticmethod
    def vstack(parts: Sequence["MatPoly"]) -> "MatPoly":
        return MatPoly.block([[p] for p in parts])

    @staticmethod
    def hstack(parts: Sequence["MatPoly"]) -> "MatPoly":
        return MatPoly.block([list(parts)])

    def kron_identity(self, n: int) -> "MatPoly":
        """Scalar polynomial times ``I_n``."""
        if self.shape != (1, 1):
            raise DimensionMismatch("kron_identity expects a scalar polynomial")
        eye = exact_eye(n) if self.exact else np.eye(n, dtype=complex)
        return MatPoly({k: eye * v[0, 0] for k, v in self._coeffs.items()}, n, n, self.nvars, self.exact)

    # -- evaluation -------------------------------------------------------
    def __call__(self, *point):
        return self.evaluate(point if len(point) != 1 else point[0])

    def evaluate(self, point):
        """Value at one point; exact when both the coefficients and point are exact."""
        pt = _as_point(point, self.nvars)
        exact_pt = all(isinstance(x, (GaussianRational, int)) for x in pt)
        if self.exact and exact_pt:
            pt = [to_exact(x) for x in pt]
            acc = exact_zeros(self.rows, self.cols)
            for k, v in self._coeffs.items():
                s = ONE
                for x, e in zip(pt, k):
                    s = s * _exact_pow(x, e)
                acc = acc + v * s
            return acc
        return self.evaluate_many(*[np.array([complex(x)]) for x in pt])[0]

    def evaluate_many(self, *coords) -> np.ndarray:
        """Vectorised float evaluation at ``len(coords[0])`` points -> ``(P, rows, cols)``."""
        if len(coords) != self.nvars:
            raise InputError(f"need {self.nvars} coordinate arrays")
        zs = [np.asarray(c, dtype=complex).ravel() for c in coords]
        P = zs[0].size
        if not self._coeffs:
            return np.zeros((P, self.rows, self.cols), dtype=complex)
        arr, lo = self.dense()
        pows = []
        for z, l, n in zip(zs, lo, arr.shape[: self.nvars]):
            e = np.arange(l, l + n)
            with np.errstate(divide="ignore", invalid="ignore"):
                pows.append(z[:, None] ** e[None, :])
        if self.nvars == 1:
            return np.einsum("pa,arc->prc", pows[0], arr)
        return np.einsum("pa,pb,abrc->prc", pows[0], pows[1], arr, optimize=True)

    # -- comparison / printing -------------------------------------------
    def equals(self, other: "MatPoly", tol=0.0) -> bool:
        if self.shape != other.shape or self.nvars != other.nvars:
            return False
        diff = self - other
        if diff.exact:
            return diff.is_zero()
        return diff.max_abs() <= tol

    def __eq__(self, other):
        if not isinstance(other, MatPoly):
            return NotImplemented
        return self.exact == other.exact and self.equals(other)

    __hash__ = None

    def __repr__(self):
        tag = "exact" if self.exact else "float"
        return f"MatPoly({self.rows}x{self.cols}, nvars={self.nvars}, {tag}, terms={len(self._coeffs)})"

    # -- serialization ------------------------------------------------------
    def to_json_obj(self) -> dict:
        terms = []
        for k, v in self._coeffs.items():
            terms.append({"k": list(k), "matrix": _matrix_to_json(v)})
        return {
            "rows": self.rows,
            "cols": self.cols,
            "vars": self.nvars,
            "field": "exact" if self.exact else "float",
            "terms": terms,
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "MatPoly":
        try:
            rows, cols, nvars = int(obj["rows"]), int(obj["cols"]), int(obj["vars"])
            terms = obj["terms"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed polynomial object: {exc}") from exc
        coeffs = {}
        exact_flags = []
        for t in terms:
            m, ex = _matrix_from_json(t["matrix"])
            exact_flags.append(ex)
            k = tuple(t["k"])
            coeffs[k] = coeffs[k] + m if k in coeffs else m
        field = obj.get("field")
        exact = (field == "exact") if field else (all(exact_flags) if exact_flags else True)
        if not exact:
            coeffs = {k: float_array(v) for k, v in coeffs.items()}
        elif not all(exact_flags):
            raise InputError("field 'exact' declared but float entries present")
        return cls(coeffs, rows, cols, nvars, exact)

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json(cls, text: str) -> "MatPoly":
        return cls.from_json_obj(json.loads(text))


def _float_matmul(a: MatPoly, b: MatPoly) -> MatPoly:
    if a.is_zero() or b.is_zero():
        return MatPoly({}, a.rows, b.cols, a.nvars, False)
    A, lo_a = a.dense()
    B, lo_b = b.dense()
    nv = a.nvars
    if nv == 1:
        # (da, r, s) x (db, s, c) -> full convolution
        out = np.zeros((A.shape[0] + B.shape[0] - 1, a.rows, b.cols), dtype=complex)
        for i in range(A.shape[0]):
            out[i:i + B.shape[0]] += np.einsum("rs,bsc->brc", A[i], B)
    else:
        out = np.zeros((A.shape[0] + B.shape[0] - 1, A.shape[1] + B.shape[1] - 1, a.rows, b.cols), dtype=complex)
        for i in range(A.shape[0]):
            for j in range(A.shape[1]):
                if np.any(A[i, j]):
                    out[i:i + B.shape[0], j:j + B.shape[1]] += np.einsum("rs,abse->abre", A[i, j], B)
    offs = tuple(x + y for x, y in zip(lo_a, lo_b))
    return MatPoly.from_dense(out, offs)


def _exact_pow(x: GaussianRational, e: int) -> GaussianRational:
    if e < 0:
        return _exact_pow(x.inverse(), -e)
    r = ONE
    base = x
    while e:
        if e & 1:
            r = r * base
        base = base * base
        e >>= 1
    return r


def _looks_exact(m) -> bool:
    arr = np.array(m, dtype=object)
    return arr.size > 0 and all(isinstance(x, (GaussianRational, int, str)) or _is_rational(x) for x in arr.flat)


def _is_rational(x) -> bool:
    from numbers import Rational

    return isinstance(x, Rational) or type(x).__name__ == "mpq"


def _as_matrix(value, shape, exact):
    if isinstance(value, np.ndarray):
        return value
    if exact and not isinstance(value, (float, complex)):
        m = exact_zeros(*shape)
        v = to_exact(value)
        for i in range(min(shape)):
            m[i, i] = v
        return m
    return np.eye(*shape, dtype=complex) * complex(value)


def _as_point(point, nvars):
    if nvars == 1:
        if isinstance(point, (tuple, list)):
            if len(point) != 1:
                raise InputError("univariate polynomial needs one coordinate")
            return [point[0]]
        return [point]
    if not isinstance(point, (tuple, list)) or len(point) != nvars:
        raise InputError(f"need a {nvars}-tuple point")
    return list(point)


def _matrix_to_json(m: np.ndarray):
    if m.dtype == object:
        return [[format_scalar(x) for x in row] for row in m]
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def _matrix_from_json(rows):
    vals = [[parse_scalar(x) for x in row] for row in rows]
    exact = all(isinstance(x, GaussianRational) for row in vals for x in row)
    if exact:
        return exact_array(vals), True
    return np.array([[complex(x) for x in row] for row in vals], dtype=complex), False


# ---------------------------------------------------------------------------
# rational matrix functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalMatrixFunction:
    """``num / den`` with a matrix polynomial numerator and scalar denominator."""

    num: MatPoly
    den: MatPoly
    lowest_terms: bool = False

    def __post_init__(self):
        if self.den.shape != (1, 1):
            raise DimensionMismatch("denominator must be a scalar polynomial")
        if self.den.nvars != self.num.nvars:
            raise DimensionMismatch("numerator and denominator variable counts differ")
        if self.den.is_zero():
            raise DenominatorZero("denominator is identically zero")

    @classmethod
    def polynomial(cls, num: MatPoly, lowest_terms=True):
        one = MatPoly.scalar({(0,) * num.nvars: 1 if num.exact else 1.0}, num.nvars, num.exact)
        return cls(num, one, lowest_terms)

    @property
    def nvars(self):
        return self.num.nvars

    @property
    def shape(self):
        return self.num.shape

    @property
    def exact(self):
        return self.num.exact and self.den.exact

    def degrees(self):
        """Per-variable ``max(deg num, deg den)`` (the n1, n2 of the pipeline)."""
        return tuple(max(a, b) for a, b in zip(self.num.degrees(), self.den.degrees()))

    def is_polynomial_den(self):
        return self.den.degrees() == (0,) * self.nvars and self.den.min_degrees() == (0,) * self.nvars

    def __call__(self, *point):
        return eval_rational(self, point if len(point) != 1 else point[0])

    def evaluate_many(self, *coords):
        num = self.num.evaluate_many(*coords)
        den = self.den.evaluate_many(*coords)[:, 0, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            return num / den[:, None, None]

    def breve(self):
        return breve(self)

    def to_float(self):
        return RationalMatrixFunction(self.num.to_float(), self.den.to_float(), self.lowest_terms)

    def swap_variables(self):
        return RationalMatrixFunction(self.num.swap_variables(), self.den.swap_variables(), self.lowest_terms)

    def to_json_obj(self):
        return {"num": self.num.to_json_obj(), "den": self.den.to_json_obj(), "lowest_terms": self.lowest_terms}

    @classmethod
    def from_json_obj(cls, obj):
        if "num" in obj:
            num = MatPoly.from_json_obj(obj["num"])
            den = MatPoly.from_json_obj(obj["den"]) if obj.get("den") is not None else None
            if den is None:
                return cls.polynomial(num, bool(obj.get("lowest_terms", True)))
            return cls(num, den, bool(obj.get("lowest_terms", False)))
        return cls.polynomial(MatPoly.from_json_obj(obj))


def eval_rational(S: RationalMatrixFunction, point):
    """``num(point) / den(point)``; exact if coefficients and point are exact."""
    d = S.den.evaluate(point)[0, 0]
    if (isinstance(d, GaussianRational) and not d) or (not isinstance(d, GaussianRational) and abs(d) == 0):
        raise DenominatorZero(f"denominator vanishes at {point!r}")
    n = S.num.evaluate(point)
    if isinstance(d, GaussianRational) and n.dtype == object:
        inv = d.inverse()
        return n * inv
    return float_array(n) / complex(d)


def breve(S):
    """``S(conj(z))^*`` for polynomials or rational functions."""
    if isinstance(S, MatPoly):
        return S.breve()
    return RationalMatrixFunction(S.num.breve(), S.den.conjugate(), S.lowest_terms)


def conj_reflect(L: MatPoly) -> MatPoly:
    return L.conj_reflect()


# ---------------------------------------------------------------------------
# slice stability
# ---------------------------------------------------------------------------

@dataclass
class SliceReport:
    """Sampling-based check that the slices of ``p`` have no zeros in the disk."""

    passed: bool
    min_root_modulus: tuple
    samples: int
    tol_root: float
    degenerate: bool = False
    sampling_based: bool = True
    details: dict = field(default_factory=dict)


def _trimmed_roots(c: np.ndarray, rel=1e-14, ref: float = 0.0):
    """Roots of ``sum c[k] z^k`` (ascending), dropping negligible leading terms.

    Returns ``None`` when every coefficient is below ``1e-12 * ref``.
    """
    c = np.asarray(c, dtype=complex)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale <= 1e-12 * ref:
        return None
    nz = np.nonzero(np.abs(c) > rel * scale)[0]
    c = c[: nz[-1] + 1]
    if c.size <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(c[::-1])


def slice_stability_check(p: MatPoly, m: int = 64, tol_root: float = 1e-8, symmetric: bool = True) -> SliceReport:
    """Root moduli of ``z1 -> p(z1, t)`` for ``m`` equispaced ``t`` on the circle.

    With ``symmetric`` the roles of the variables are also swapped. Zeros on
    the circle are allowed; PASS needs every root modulus ``>= 1 - tol_root``.
    Raises :class:`DegenerateSlice` if some sampled slice vanishes
    identically, which means ``p`` has a factor ``z_j - t`` with ``|t| = 1``.
    """
    if p.shape != (1, 1):
        raise DimensionMismatch("slice check expects a scalar polynomial")
    if p.is_zero():
        raise InputError("p is identically zero")
    if not p.is_polynomial():
        raise InputError("slice check expects a polynomial")
    pf = p.to_float()
    mins = []
    if pf.nvars == 1:
        arr, lo = pf.dense()
        c = np.concatenate([np.zeros(lo[0], dtype=complex), arr[:, 0, 0]])
        roots = _trimmed_roots(c)
        mins.append(float(np.min(np.abs(roots))) if roots.size else float("inf"))
    else:
        arr, lo = pf.dense()
        full = np.zeros((lo[0] + arr.shape[0], lo[1] + arr.shape[1]), dtype=complex)
        full[lo[0]:, lo[1]:] = arr[:, :, 0, 0]
        ts = np.exp(2j * np.pi * np.arange(m) / m)
        ref = float(np.max(np.abs(full)))
        for var in ((0, 1) if symmetric else (0,)):
            C = full if var == 0 else full.T
            best = float("inf")
            for t in ts:
                c = C @ (t ** np.arange(C.shape[1]))
                roots = _trimmed_roots(c, ref=ref)
                if roots is None:
                    raise DegenerateSlice(f"slice in variable {var + 1} vanishes at t={t:.6g}")
                if roots.size:
                    best = min(best, float(np.min(np.abs(roots))))
            mins.append(best)
    passed = all(x >= 1 - tol_root for x in mins)
    return SliceReport(passed, tuple(mins), m, tol_root)


# ---------------------------------------------------------------------------
# recovering polynomials from samples
# ---------------------------------------------------------------------------

_PHASES = (0.1234567891, 0.3141592653)


def fit_polynomial(fn, shape, degrees, tol=1e-9, margin=3, seed=0) -> MatPoly:
    """Recover a float matrix polynomial from a vectorised sampler.

    ``fn(*coords)`` must return values of shape ``(P, rows, cols)``. Samples
    are taken on a rotated torus grid with ``degrees[j] + 1 + margin`` nodes
    per variable; coefficients in the margin must vanish and the fit is
    re-checked at random interior points, otherwise :class:`ClearingFailed`
    is raised. Used to clear rational expressions that are known to be
    polynomials.
    """
    degrees = tuple(int(d) for d in np.atleast_1d(degrees))
    nvars = len(degrees)
    sizes = [max(d, 0) + 1 + margin for d in degrees]
    axes = [np.exp(2j * np.pi * (np.arange(L) / L + _PHASES[i])) for i, L in enumerate(sizes)]
    mesh = np.meshgrid(*axes, indexing="ij")
    vals = np.asarray(fn(*[m.ravel() for m in mesh]), dtype=complex)
    vals = vals.reshape(tuple(sizes) + tuple(shape))
    if not np.all(np.isfinite(vals)):
        raise ClearingFailed("non-finite samples while clearing to a polynomial")
    coef = np.fft.fftn(vals, axes=tuple(range(nvars))) / np.prod(sizes)
    for i, L in enumerate(sizes):
        ph = np.exp(-2j * np.pi * np.arange(L) * _PHASES[i])
        coef = coef * ph.reshape((1,) * i + (L,) + (1,) * (nvars - i - 1 + 2))
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    keep = tuple(slice(0, max(d, 0) + 1) for d in degrees)
    mask = np.ones(coef.shape[:nvars], dtype=bool)
    mask[keep] = False
    spill = float(np.max(np.abs(coef[mask]))) if mask.any() else 0.0
    if spill > tol * scale:
        raise ClearingFailed(f"coefficients beyond the degree bound (relative size {spill / scale:.2e})")
    P = MatPoly.from_dense(coef[keep]).prune()
    rng = np.random.default_rng(seed)
    pts = [0.9 * np.sqrt(rng.random(6)) * np.exp(2j * np.pi * rng.random(6)) for _ in range(nvars)]
    direct = np.asarray(fn(*pts), dtype=complex).reshape((6,) + tuple(shape))
    err = float(np.max(np.abs(direct - P.evaluate_many(*pts)))) if P.rows and P.cols else 0.0
    if err > tol * max(scale, float(np.max(np.abs(direct)))):
        raise ClearingFailed(f"polynomial fit does not reproduce interior samples (error {err:.2e})")
    return P


def divide_exactly(num: MatPoly, den: MatPoly, var: int = 0, tol: float = 1e-9) -> MatPoly:
    """Quotient ``num / den`` where ``den`` is a scalar polynomial in variable ``var``.

    The division is expected to be exact; it is solved coefficientwise by
    least squares on the convolution matrix, and a relative residual above
    ``tol`` raises :class:`ClearingFailed`.
    """
    den1 = den.to_float()
    if den1.shape != (1, 1):
        raise DimensionMismatch("divisor must be scalar")
    if den1.nvars == 2:
        other = 1 - var
        if den1.degrees()[other] > 0 or den1.min_degrees()[other] < 0:
            raise InputError("divisor depends on the other variable")
        den1 = MatPoly({(k[var],): v for k, v in den1.items()}, 1, 1, 1, False)
    if not den1.is_polynomial() or den1.is_zero():
        raise InputError("divisor must be a nonzero polynomial")
    darr, dlo = den1.dense()
    d = np.concatenate([np.zeros(dlo[0], dtype=complex), darr[:, 0, 0]])
    # a rounding-level leading coefficient is a root at infinity, not a degree
    nz = np.nonzero(np.abs(d) > 1e-11 * np.max(np.abs(d)))[0]
    d = d[:nz[-1] + 1]
    numf = num.to_float()
    if numf.is_zero():
        return numf
    groups = {(): numf} if numf.nvars == 1 else numf.coefficients_in(1 - var)
    out = {}
    scale = numf.max_abs()
    for key, part in groups.items():
        arr, lo = part.dense() if numf.nvars == 2 else numf.dense()
        lo = lo[0]
        if lo < 0:
            raise InputError("dividend must be a polynomial")
        f = np.concatenate([np.zeros((lo,) + arr.shape[1:], dtype=complex), arr])
        qlen = f.shape[0] - len(d) + 1
        if qlen <= 0:
            if np.max(np.abs(f)) > tol * scale:
                raise ClearingFailed("dividend has lower degree than divisor")
            continue
        conv = np.zeros((f.shape[0], qlen), dtype=complex)
        for j in range(qlen):
            conv[j:j + len(d), j] = d
        rhs = f.reshape(f.shape[0], -1)
        q, *_ = np.linalg.lstsq(conv, rhs, rcond=None)
        err = float(np.max(np.abs(conv @ q - rhs)))
        if err > tol * scale:
            raise ClearingFailed(f"polynomial division leaves a remainder ({err / scale:.2e})")
        q = q.reshape((qlen,) + f.shape[1:])
        for j in range(qlen):
            k = (j,) if numf.nvars == 1 else ((key, j) if var == 1 else (j, key))
            out[k] = q[j]
    return MatPoly(out, num.rows, num.cols, num.nvars, False).prune()
