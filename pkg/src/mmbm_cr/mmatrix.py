"""Subtraction-free kernels for regular M-matrices given by triplets.

A regular M-matrix ``M`` is handled through a triplet representation
``(offdiag(M), v, w)`` with ``M v = w``, ``v > 0`` and ``w >= 0``.  The
diagonal is never stored; it is rebuilt when needed from the triplet,
which is what makes Gaussian elimination free of cancellation (the GTH
trick).  All functions accept float64 arrays or
:class:`~mmbm_cr.extended.ExtendedReal` arrays.

Internally the elimination works on the magnitudes ``N = -offdiag(M) >= 0``
so that every update is a sum of nonnegative terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _array as xa
from .errors import InvalidTriplet, NotSingular, Reducible, SingularMatrix

__all__ = [
    "TripletRep",
    "GthFactors",
    "gth_factor",
    "gth_solve",
    "gth_solve_transpose",
    "gth_invert",
    "perron_left",
    "sub_triplet",
    "schur_triplet",
    "reconstruct_diag",
    "split_indices",
]


@dataclass(frozen=True)
class TripletRep:
    """Triplet ``(m, v, w)`` for a regular M-matrix.

    ``m`` is stored as a dense ``n x n`` array whose diagonal slots are zero
    and whose off-diagonal entries are ``<= 0``.
    """

    m: object
    v: object
    w: object

    def __post_init__(self):
        n = self.m.shape[0]
        if self.m.shape != (n, n) or self.v.shape != (n,) or self.w.shape != (n,):
            raise InvalidTriplet(
                f"inconsistent shapes m{self.m.shape} v{self.v.shape} w{self.w.shape}"
            )
        if not xa.is_nonpos(self.m):
            raise InvalidTriplet("off-diagonal entries must be <= 0")
        if n and not (xa.hi(self.v) > 0).all():
            raise InvalidTriplet("v must be strictly positive")
        if not (xa.hi(self.w) >= 0).all():
            raise InvalidTriplet("w must be nonnegative")

    @property
    def n(self) -> int:
        return self.m.shape[0]

    @classmethod
    def from_matrix(cls, M, v=None) -> "TripletRep":
        """Triplet for an explicit M-matrix; ``w = M v`` is formed densely.

        Only meant for tests and small fixtures, since forming ``M v`` can
        cancel.
        """
        M = np.asarray(M, dtype=float)
        v = np.ones(M.shape[0]) if v is None else np.asarray(v, dtype=float)
        w = M @ v
        w[w < 0] = 0.0
        return cls(xa.offdiag(M), v, w)

    def transpose(self, v, w) -> "TripletRep":
        """Triplet for ``M^T`` given a new pair with ``M^T v = w``."""
        return TripletRep(self.m.T.copy(), v, w)

    def dense(self) -> np.ndarray:
        """Assemble ``M`` explicitly in float64 (diagonal via the triplet)."""
        M = xa.as_float(self.m).copy()
        idx = np.arange(self.n)
        M[idx, idx] = xa.as_float(reconstruct_diag(self))
        return M


def reconstruct_diag(t: TripletRep):
    """``diag(M)_i = (w_i + sum_j |m_ij| v_j) / v_i``, with no subtraction."""
    return (t.w + abs(t.m) @ t.v) / t.v


def split_indices(n: int, keep: Sequence[int]):
    """Order-preserving split of ``range(n)`` into ``keep`` and the rest."""
    keep = np.asarray(sorted(set(int(i) for i in keep)), dtype=int)
    if keep.size and (keep[0] < 0 or keep[-1] >= n):
        raise IndexError(f"indices out of range for n={n}")
    mask = np.ones(n, dtype=bool)
    mask[keep] = False
    return keep, np.flatnonzero(mask)


@dataclass(frozen=True)
class GthFactors:
    """LU factors of an M-matrix from GTH elimination.

    ``lower[i, k]`` (``i > k``) holds ``|L_ik|`` and ``upper[k, j]``
    (``j > k``) holds ``|U_kj|``; both live in one array ``nm``.
    ``pivots`` is the diagonal of ``U``.
    """

    nm: object
    pivots: object

    @property
    def n(self) -> int:
        return self.nm.shape[0]

    def solve(self, b):
        """Solve ``M x = b`` for ``b >= 0`` (vector or matrix of columns)."""
        x, vec = _as_columns(b)
        nm, piv = self.nm, self.pivots
        n = self.n
        for k in range(n - 1):
            x[k + 1 :] = x[k + 1 :] + nm[k + 1 :, k, None] * x[k, None, :]
        for k in range(n - 1, -1, -1):
            x[k] = x[k] / piv[k]
            if k:
                x[:k] = x[:k] + nm[:k, k, None] * x[k, None, :]
        return x[:, 0] if vec else x

    def solve_transpose(self, b):
        """Solve ``M^T x = b`` for ``b >= 0`` using the same factors."""
        x, vec = _as_columns(b)
        nm, piv = self.nm, self.pivots
        n = self.n
        for k in range(n):
            x[k] = x[k] / piv[k]
            if k + 1 < n:
                x[k + 1 :] = x[k + 1 :] + nm[k, k + 1 :, None] * x[k, None, :]
        for k in range(n - 2, -1, -1):
            x[k] = x[k] + nm[k + 1 :, k] @ x[k + 1 :]
        return x[:, 0] if vec else x


def _as_columns(b):
    vec = b.ndim == 1
    x = b.reshape(-1, 1).copy() if vec else b.copy()
    if xa.is_dd(x):
        return x, vec
    return np.array(x, dtype=float), vec


def _eliminate(t: TripletRep, steps: int):
    """Run ``steps`` GTH elimination steps; returns (nm, pivots, w)."""
    nm = abs(t.m)
    w = t.w.copy()
    v = t.v
    n = t.n
    pivots = xa.zeros(n, like=nm)
    for k in range(steps):
        piv = (w[k] + nm[k, k + 1 :] @ v[k + 1 :]) / v[k]
        if xa.hi(piv) == 0:
            raise SingularMatrix(f"zero pivot at elimination step {k}")
        pivots[k] = piv
        if k + 1 < n:
            lk = nm[k + 1 :, k] / piv
            nm[k + 1 :, k] = lk
            nm[k + 1 :, k + 1 :] = nm[k + 1 :, k + 1 :] + lk[:, None] * nm[k, None, k + 1 :]
            tail = np.arange(k + 1, n)
            nm[tail, tail] = 0.0
            w[k + 1 :] = w[k + 1 :] + lk * w[k]
    return nm, pivots, w


def gth_factor(t: TripletRep) -> GthFactors:
    """Factor an invertible regular M-matrix; raises SingularMatrix."""
    nm, pivots, _ = _eliminate(t, t.n)
    return GthFactors(nm, pivots)


def gth_solve(t: TripletRep, u):
    """Return ``x = M^{-1} u`` with componentwise relative accuracy."""
    return gth_factor(t).solve(u)


def gth_solve_transpose(t: TripletRep, b):
    """Return ``x = M^{-T} b``."""
    return gth_factor(t).solve_transpose(b)


def gth_invert(t: TripletRep):
    return gth_factor(t).solve(xa.lift(np.eye(t.n), like=t.m))


def perron_left(t: TripletRep):
    """Positive left kernel vector ``u`` (``u M = 0``, ``sum(u) = 1``).

    ``t`` must represent a singular irreducible M-matrix, typically
    ``(offdiag(-Q), 1, 0)`` for a generator ``Q``.  The first ``n - 1``
    pivots are eliminated; the last one must come out exactly zero.
    """
    n = t.n
    try:
        nm, pivots, w = _eliminate(t, n - 1)
    except SingularMatrix as exc:
        raise Reducible(str(exc)) from exc
    last = w[n - 1] / t.v[n - 1]
    if xa.hi(last) != 0:
        raise NotSingular(f"last pivot is {float(xa.hi(last)):.3e}, not zero")
    x = xa.zeros(n, like=nm)
    x[n - 1] = 1.0
    for k in range(n - 2, -1, -1):
        x[k] = nm[k + 1 :, k] @ x[k + 1 :]
    if not (xa.hi(x) > 0).all():
        raise Reducible("kernel vector has zero entries")
    return x / x.sum()


def sub_triplet(t: TripletRep, keep: Sequence[int]) -> TripletRep:
    """Triplet for the principal submatrix on ``keep``.

    The new right-hand vector is ``w_keep + |M_keep,rest| v_rest``.
    """
    keep, rest = split_indices(t.n, keep)
    m = t.m[np.ix_(keep, keep)]
    w = t.w[keep]
    if rest.size:
        w = w + abs(t.m[np.ix_(keep, rest)]) @ t.v[rest]
    return TripletRep(m, t.v[keep], w)


def schur_triplet(t: TripletRep, keep: Sequence[int]):
    """Schur complement onto ``keep`` after eliminating the other indices.

    With ``1 = keep`` and ``2 = rest``, returns ``(triplet of S, Psi)``
    where ``S = M11 - M12 M22^{-1} M21`` and ``Psi = -M12 M22^{-1} >= 0``.
    The triplet is ``(offdiag(S), v1, w1 + Psi w2)``.
    """
    keep, rest = split_indices(t.n, keep)
    m11 = t.m[np.ix_(keep, keep)]
    if not rest.size:
        return TripletRep(m11.copy(), t.v[keep], t.w[keep]), xa.zeros((keep.size, 0), like=t.m)
    t22 = sub_triplet(t, rest)
    n12 = abs(t.m[np.ix_(keep, rest)])
    n21 = abs(t.m[np.ix_(rest, keep)])
    if keep.size:
        psi = gth_factor(t22).solve_transpose(n12.T).T
    else:
        psi = xa.zeros((0, rest.size), like=t.m)
    m_s = xa.offdiag(m11 - psi @ n21)
    w_s = t.w[keep] + psi @ t.w[rest]
    return TripletRep(m_s, t.v[keep], w_s), psi
