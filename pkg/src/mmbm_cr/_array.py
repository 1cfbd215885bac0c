"""Helpers that let the kernels run on float64 or double-double arrays."""

from __future__ import annotations

import numpy as np

from .extended import EPS_DD, ExtendedReal

EPS = float(np.finfo(float).eps)


def is_dd(x) -> bool:
    return isinstance(x, ExtendedReal)


def zeros(shape, like=None):
    if is_dd(like):
        return ExtendedReal(np.zeros(shape))
    return np.zeros(shape)


def ones(n, like=None):
    if is_dd(like):
        return ExtendedReal(np.ones(n))
    return np.ones(n)


def lift(x, like=None):
    """Convert float data to the arithmetic of ``like``."""
    if is_dd(like):
        return x if is_dd(x) else ExtendedReal(np.asarray(x, dtype=float))
    return np.array(x, dtype=float)


def hi(x) -> np.ndarray:
    """Float64 view used for sign tests and reporting."""
    return x.hi if is_dd(x) else np.asarray(x)


def as_float(x) -> np.ndarray:
    return x.to_float() if is_dd(x) else np.asarray(x, dtype=float)


def eps_of(x) -> float:
    return EPS_DD if is_dd(x) else EPS


def offdiag(x):
    """Copy of a square matrix with its diagonal slots set to zero."""
    out = x.copy()
    idx = np.arange(x.shape[0])
    out[idx, idx] = 0.0
    return out


def is_nonneg(x) -> bool:
    """Exact sign check: no entry carries a sign bit (so ``-0.0`` fails)."""
    return not bool(np.signbit(hi(x)).any())


def is_nonpos(x) -> bool:
    return not bool((hi(x) > 0).any())
