"""Exact Gaussian-rational scalars and coefficient-field helpers.

Rationals come from :mod:`gmpy2` when it is importable and from
:mod:`fractions` otherwise; both expose ``numerator``/``denominator`` and
interoperate with Python integers, so the rest of the package never looks at
which backend is live.
"""
from __future__ import annotations

import re as _re
from fractions import Fraction
from numbers import Rational

try:  # pragma: no cover - exercised implicitly
    from gmpy2 import mpq as _Q

    BACKEND = "gmpy2"
except ImportError:  # pragma: no cover
    _Q = Fraction
    BACKEND = "fractions"

__all__ = ["GaussianRational", "Q", "BACKEND", "parse_scalar", "format_scalar", "to_exact"]

_RATIONAL_TYPES = (int, Fraction, type(_Q(0)))


def Q(x=0, d=None):
    """Build a backend rational from ints, fractions or ``"a/b"`` strings."""
    if d is not None:
        return _Q(x, d)
    if isinstance(x, str):
        x = x.strip()
        return _Q(Fraction(x))
    if isinstance(x, Fraction):
        return _Q(x.numerator, x.denominator)
    return _Q(x)


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts.

    Instances are immutable. Arithmetic with ``int`` and rational types is
    exact; mixing with ``float``/``complex`` raises ``TypeError`` so exact and
    float data never blend silently.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            re, im = re.re, re.im + Q(im) if im else re.im
        elif isinstance(re, str):
            parsed = _parse(re)
            re, im = parsed.re, parsed.im + Q(im) if im else parsed.im
        elif not isinstance(re, _RATIONAL_TYPES + (Rational,)):
            raise TypeError(f"cannot build exact scalar from {type(re).__name__}")
        object.__setattr__(self, "re", Q(re))
        object.__setattr__(self, "im", Q(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def _raw(cls, re, im):
        obj = object.__new__(cls)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "im", im)
        return obj

    # -- field fields as named in the data model -------------------------
    @property
    def re_num(self):
        return int(self.re.numerator)

    @property
    def re_den(self):
        return int(self.re.denominator)

    @property
    def im_num(self):
        return int(self.im.numerator)

    @property
    def im_den(self):
        return int(self.im.denominator)

    # -- arithmetic ------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, _RATIONAL_TYPES):
            return GaussianRational._raw(Q(other), _ZERO_Q)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational._raw(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not self.im and not o.im:
            return GaussianRational._raw(self.re * o.re, _ZERO_Q)
        return GaussianRational._raw(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def inverse(self):
        if not self.im:
            if not self.re:
                raise ZeroDivisionError("GaussianRational division by zero")
            return GaussianRational._raw(1 / self.re, _ZERO_Q)
        n = self.re * self.re + self.im * self.im
        return GaussianRational._raw(self.re / n, -self.im / n)

    def conjugate(self):
        return GaussianRational._raw(self.re, -self.im)

    def abs2(self):
        """Exact squared modulus as a rational."""
        return self.re * self.re + self.im * self.im

    def height(self):
        """Largest absolute numerator/denominator among both parts."""
        return max(
            abs(int(self.re.numerator)),
            int(self.re.denominator),
            abs(int(self.im.numerator)),
            int(self.im.denominator),
        )

    # -- comparisons / conversions ---------------------------------------
    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __float__(self):
        if self.im:
            raise TypeError("non-real GaussianRational has no float value")
        return float(self.re)

    def __abs__(self):
        return abs(complex(self))

    def __str__(self):
        return format_scalar(self)

    def __repr__(self):
        return f"GaussianRational('{format_scalar(self)}')"

    def __reduce__(self):
        return (GaussianRational, (format_scalar(self),))


_ZERO_Q = Q(0)
ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I_UNIT = GaussianRational(0, 1)

_PART = r"[+-]?\d+(?:/\d+)?"
_SCALAR_RE = _re.compile(
    rf"^\s*(?:(?P<re>{_PART})(?:(?P<isign>[+-])(?P<im>\d+(?:/\d+)?)?i)?"
    rf"|(?P<only_im>[+-]?(?:\d+(?:/\d+)?)?)i)\s*$"
)


def _parse(text):
    m = _SCALAR_RE.match(text)
    if not m:
        raise ValueError(f"not a Gaussian rational literal: {text!r}")
    if m.group("re") is not None:
        re_part = Q(m.group("re"))
        im_part = _ZERO_Q
        if m.group("isign"):
            mag = Q(m.group("im")) if m.group("im") else Q(1)
            im_part = mag if m.group("isign") == "+" else -mag
        return GaussianRational._raw(re_part, im_part)
    only = m.group("only_im")
    if only in ("", "+"):
        return GaussianRational._raw(_ZERO_Q, Q(1))
    if only == "-":
        return GaussianRational._raw(_ZERO_Q, Q(-1))
    return GaussianRational._raw(_ZERO_Q, Q(only))


def _fmt_q(q):
    return f"{int(q.numerator)}/{int(q.denominator)}"


def format_scalar(z):
    """Canonical text: ``"a/b"`` for reals, ``"a/b+c/di"`` otherwise."""
    if isinstance(z, GaussianRational):
        if not z.im:
            return _fmt_q(z.re)
        sign = "-" if z.im < 0 else "+"
        return f"{_fmt_q(z.re)}{sign}{_fmt_q(abs(z.im))}i"
    z = complex(z)
    return repr(z.real) if z.imag == 0 else f"{z.real!r}{z.imag:+}i"


def parse_scalar(obj):
    """Decode one JSON matrix entry.

    Strings are exact literals; ``[re, im]`` pairs and bare numbers are float.
    """
    if isinstance(obj, str):
        return _parse(obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return complex(float(obj[0]), float(obj[1]))
    if isinstance(obj, (int, float)):
        return complex(obj)
    raise ValueError(f"cannot decode scalar entry {obj!r}")


def to_exact(x):
    """Convert ints/rationals/GaussianRational (not floats) to GaussianRational."""
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, _RATIONAL_TYPES) or isinstance(x, Rational):
        return GaussianRational(x)
    if isinstance(x, str):
        return _parse(x)
    raise TypeError(f"refusing lossy conversion of {type(x).__name__} to exact scalar")


def rationalize(x, max_denominator=10**12):
    """Lossy float -> GaussianRational via continued fractions."""
    x = complex(x)
    return GaussianRational(
        Fraction(x.real).limit_denominator(max_denominator),
        Fraction(x.imag).limit_denominator(max_denominator),
    )
