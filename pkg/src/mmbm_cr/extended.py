"""Vectorised double-double arithmetic.

An :class:`ExtendedReal` stores an array value as the unevaluated sum
``hi + lo`` of two float64 arrays with ``|lo| <= ulp(hi)/2``, giving about
106 significant bits.  The class implements just enough of the ndarray
protocol (indexing, broadcasting arithmetic, ``@``, ``sum``, ``.T``) for
the algorithms in this package to run unchanged on either float64 arrays or
double-double arrays.

The error-free transformations are the classical ones of Dekker and Knuth;
products use Veltkamp splitting since ``math.fma`` is not available on all
supported Python versions.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ExtendedReal", "EPS_DD", "two_sum", "two_prod", "is_extended"]

#: Unit roundoff-like spacing used for double-double tolerances.
EPS_DD = 2.0**-104

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    s = a + b
    err = b - (s - a)
    return s, err


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def _add(ahi, alo, bhi, blo):
    s, e = two_sum(ahi, bhi)
    t, f = two_sum(alo, blo)
    e = e + t
    s, e = _quick_two_sum(s, e)
    e = e + f
    return _quick_two_sum(s, e)


def _mul(ahi, alo, bhi, blo):
    p, e = two_prod(ahi, bhi)
    e = e + (ahi * blo + alo * bhi)
    return _quick_two_sum(p, e)


def _div(ahi, alo, bhi, blo):
    with np.errstate(divide="ignore", invalid="ignore"):
        q1 = ahi / bhi
        rhi, rlo = _add(ahi, alo, *_neg(*_mul(q1, 0.0 * q1, bhi, blo)))
        q2 = rhi / bhi
        rhi, rlo = _add(rhi, rlo, *_neg(*_mul(q2, 0.0 * q2, bhi, blo)))
        q3 = rhi / bhi
        q1, q2 = _quick_two_sum(q1, q2)
        hi, lo = _add(q1, q2, q3, 0.0 * q3)
        # exact zero numerators keep their sign and produce no NaN noise
        hi = np.where(ahi == 0, q1, hi)
        lo = np.where(ahi == 0, 0.0, lo)
    return hi, lo


def _neg(hi, lo):
    return -hi, -lo


def is_extended(x) -> bool:
    return isinstance(x, ExtendedReal)


def _parts(x):
    if isinstance(x, ExtendedReal):
        return x.hi, x.lo
    a = np.asarray(x, dtype=float)
    return a, np.zeros_like(a)


class ExtendedReal:
    """Array of double-double numbers (``hi + lo``)."""

    __slots__ = ("hi", "lo")
    __array_ufunc__ = None  # let numpy defer to the reflected operators

    def __init__(self, hi, lo=None):
        hi = np.array(hi, dtype=float)
        lo = np.zeros_like(hi) if lo is None else np.array(lo, dtype=float)
        self.hi, self.lo = np.broadcast_arrays(hi, lo)
        self.hi = np.array(self.hi)
        self.lo = np.array(self.lo)

    @classmethod
    def _raw(cls, hi, lo):
        obj = cls.__new__(cls)
        obj.hi = hi
        obj.lo = lo
        return obj

    @classmethod
    def from_string(cls, text: str) -> "ExtendedReal":
        """Round a decimal string to the nearest double-double."""
        from fractions import Fraction

        exact = Fraction(text)
        hi = float(exact)
        lo = float(exact - Fraction(hi))
        return cls(hi, lo)

    # array protocol ---------------------------------------------------
    @property
    def shape(self):
        return self.hi.shape

    @property
    def ndim(self):
        return self.hi.ndim

    @property
    def size(self):
        return self.hi.size

    def __len__(self):
        return len(self.hi)

    @property
    def T(self):
        return ExtendedReal._raw(self.hi.T, self.lo.T)

    def reshape(self, *shape):
        return ExtendedReal._raw(self.hi.reshape(*shape), self.lo.reshape(*shape))

    def copy(self):
        return ExtendedReal._raw(self.hi.copy(), self.lo.copy())

    def __getitem__(self, key):
        return ExtendedReal._raw(self.hi[key], self.lo[key])

    def __setitem__(self, key, value):
        hi, lo = _parts(value)
        self.hi[key] = hi
        self.lo[key] = lo

    def to_float(self) -> np.ndarray:
        return self.hi + self.lo

    def __float__(self):
        return float(self.hi + self.lo)

    def __repr__(self):
        return f"ExtendedReal(hi={self.hi!r}, lo={self.lo!r})"

    # arithmetic -------------------------------------------------------
    def __neg__(self):
        return ExtendedReal._raw(-self.hi, -self.lo)

    def __abs__(self):
        neg = np.signbit(self.hi)
        return ExtendedReal._raw(np.abs(self.hi), np.where(neg, -self.lo, self.lo))

    def __add__(self, other):
        return ExtendedReal._raw(*_add(self.hi, self.lo, *_parts(other)))

    __radd__ = __add__

    def __sub__(self, other):
        bhi, blo = _parts(other)
        return ExtendedReal._raw(*_add(self.hi, self.lo, -bhi, -blo))

    def __rsub__(self, other):
        ahi, alo = _parts(other)
        return ExtendedReal._raw(*_add(ahi, alo, -self.hi, -self.lo))

    def __mul__(self, other):
        return ExtendedReal._raw(*_mul(self.hi, self.lo, *_parts(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return ExtendedReal._raw(*_div(self.hi, self.lo, *_parts(other)))

    def __rtruediv__(self, other):
        ahi, alo = _parts(other)
        return ExtendedReal._raw(*_div(ahi, alo, self.hi, self.lo))

    def __matmul__(self, other):
        return _matmul(self, other)

    def __rmatmul__(self, other):
        return _matmul(other, self)

    def sum(self, axis=None):
        if axis is None:
            flat = self.reshape(-1)
            return _reduce_sum(flat, 0)
        return _reduce_sum(self, axis)


def _reduce_sum(x: ExtendedReal, axis: int) -> ExtendedReal:
    axis = axis % x.ndim
    hi = np.moveaxis(x.hi, axis, 0)
    lo = np.moveaxis(x.lo, axis, 0)
    acc_hi = np.zeros(hi.shape[1:])
    acc_lo = np.zeros(hi.shape[1:])
    for k in range(hi.shape[0]):
        acc_hi, acc_lo = _add(acc_hi, acc_lo, hi[k], lo[k])
    return ExtendedReal._raw(acc_hi, acc_lo)


def _matmul(a, b) -> ExtendedReal:
    ahi, alo = _parts(a)
    bhi, blo = _parts(b)
    vec_a = ahi.ndim == 1
    vec_b = bhi.ndim == 1
    if vec_a:
        ahi, alo = ahi[None, :], alo[None, :]
    if vec_b:
        bhi, blo = bhi[:, None], blo[:, None]
    if ahi.shape[1] != bhi.shape[0]:
        raise ValueError(f"matmul shape mismatch {ahi.shape} @ {bhi.shape}")
    acc_hi = np.zeros((ahi.shape[0], bhi.shape[1]))
    acc_lo = np.zeros_like(acc_hi)
    for k in range(ahi.shape[1]):
        phi, plo = _mul(ahi[:, k, None], alo[:, k, None], bhi[None, k, :], blo[None, k, :])
        acc_hi, acc_lo = _add(acc_hi, acc_lo, phi, plo)
    if vec_a:
        acc_hi, acc_lo = acc_hi[0], acc_lo[0]
    if vec_b:
        acc_hi, acc_lo = acc_hi[..., 0], acc_lo[..., 0]
    return ExtendedReal._raw(acc_hi, acc_lo)
