"""Markov-modulated Brownian motion models: validation and classification."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import _array as xa
from .cr import Recurrence, classify_drift
from .errors import AssumptionA2, AssumptionA3, InvalidGenerator, Reducible
from .extended import ExtendedReal
from .mmatrix import TripletRep, perron_left

_DD_ZERO = ExtendedReal(0.0)

__all__ = ["MmbmModel", "validate_and_classify", "mean_drift", "choose_h", "perron_vector"]


@dataclass(frozen=True)
class MmbmModel:
    """Validated model ``P(z) = V z^2 - D z + Q``.

    Arrays are kept in the caller's state order.  ``e1``, ``e2``, ``e3`` hold
    original indices of the states with ``v > 0``, ``v = 0, d > 0`` and
    ``v = 0, d < 0``; ``perm`` is their concatenation (block order).
    ``Q`` has its diagonal replaced by minus the off-diagonal row sums.
    """

    v_diag: np.ndarray
    d_diag: np.ndarray
    Q: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray

    @property
    def n(self) -> int:
        return self.v_diag.size

    @property
    def n1(self) -> int:
        return self.e1.size

    @property
    def n2(self) -> int:
        return self.e2.size

    @property
    def n3(self) -> int:
        return self.e3.size

    @property
    def perm(self) -> np.ndarray:
        return np.concatenate([self.e1, self.e2, self.e3])

    @property
    def keep(self) -> np.ndarray:
        """Original indices of ``E1 u E2`` in block order."""
        return np.concatenate([self.e1, self.e2])

    def blocked(self):
        """``(v, d, Q)`` permuted to block order ``(E1, E2, E3)``."""
        p = self.perm
        return self.v_diag[p], self.d_diag[p], self.Q[np.ix_(p, p)]


def validate_and_classify(V, D, Q, *, rowsum_tol: float | None = None) -> MmbmModel:
    """Check assumptions A1-A3 and split the states into E1, E2, E3.

    ``V`` and ``D`` may be given as vectors or as diagonal matrices.  Row sums
    of ``Q`` must vanish up to ``rowsum_tol`` (relative to the largest
    off-diagonal rate of the row, default ``4 n eps``); the stored generator
    then gets the exact diagonal ``-sum_{j != i} q_ij``.
    """
    v = _as_diag_vector(V, "V")
    d = _as_diag_vector(D, "D")
    Q = np.array(Q, dtype=float)
    n = v.size
    if d.size != n or Q.shape != (n, n):
        raise InvalidGenerator(f"dimension mismatch: V {v.size}, D {d.size}, Q {Q.shape}")
    if n < 2:
        raise InvalidGenerator("a model needs at least two phases")
    if not (np.isfinite(v).all() and np.isfinite(d).all() and np.isfinite(Q).all()):
        raise InvalidGenerator("non-finite parameters")
    off = xa.offdiag(Q)
    if (off < 0).any():
        raise InvalidGenerator("off-diagonal rates of Q must be nonnegative")
    if rowsum_tol is None:
        rowsum_tol = 4 * n * xa.EPS
    rows = off.sum(axis=1)
    if (np.abs(Q.sum(axis=1)) > rowsum_tol * np.maximum(rows, np.abs(np.diag(Q)))).any():
        raise InvalidGenerator("rows of Q must sum to zero")
    nlab, _ = connected_components(off > 0, directed=True, connection="strong")
    if nlab != 1:
        raise Reducible(f"Q is reducible ({nlab} communicating classes)")
    if (v < 0).any():
        raise InvalidGenerator("variances must be nonnegative")
    if not (v > 0).any():
        raise AssumptionA2("V = 0: all variances vanish")
    bad = np.flatnonzero((v == 0) & (d == 0))
    if bad.size:
        raise AssumptionA3(f"states {bad.tolist()} have zero variance and zero drift")
    Qc = off.copy()
    Qc[np.arange(n), np.arange(n)] = -rows
    return MmbmModel(
        v_diag=v,
        d_diag=d,
        Q=Qc,
        e1=np.flatnonzero(v > 0),
        e2=np.flatnonzero((v == 0) & (d > 0)),
        e3=np.flatnonzero((v == 0) & (d < 0)),
    )


def _as_diag_vector(x, name):
    a = np.array(x, dtype=float)
    if a.ndim == 2:
        if a.shape[0] != a.shape[1] or np.count_nonzero(a - np.diag(np.diag(a))):
            raise InvalidGenerator(f"{name} must be diagonal")
        a = np.diag(a).copy()
    if a.ndim != 1:
        raise InvalidGenerator(f"{name} must be a vector or a diagonal matrix")
    return a


def perron_vector(m: MmbmModel, like=None):
    """Left Perron vector of ``Q`` from the triplet ``(offdiag(-Q), 1, 0)``."""
    off = xa.lift(-xa.offdiag(m.Q), like=like)
    # -0.0 entries are fine for a nonpositive off-diagonal
    n = m.n
    return perron_left(TripletRep(off, xa.ones(n, like=like), xa.zeros(n, like=like)))


def mean_drift(m: MmbmModel, u=None):
    """Continuous-time mean drift ``u D 1`` and its recurrence class."""
    if u is None:
        u = perron_vector(m)
    dc = float(xa.as_float(xa.lift(u, like=_DD_ZERO) @ ExtendedReal(m.d_diag)))
    u = xa.as_float(u)
    scale = float(u @ np.abs(m.d_diag))
    return dc, classify_drift(dc, scale)


def _h_bound(v: float, d: float, q: float) -> float:
    """Largest ``h`` for which the guarded subtraction in state i is safe."""
    a = 2.0 * abs(q)
    if d > 0:
        # v + h d >= 2|q| h^2
        if a == 0:
            return math.inf
        return (d + math.sqrt(d * d + 4.0 * a * v)) / (2.0 * a)
    if v > 0:
        # v >= 2(|d| h + |q| h^2); root written without cancellation
        return 2.0 * v / (2.0 * abs(d) + math.sqrt(4.0 * d * d + 4.0 * a * v))
    return math.inf


def choose_h(m: MmbmModel, safety: float = 0.5) -> float:
    """Step parameter for the map ``y = 1 + h z``.

    Takes the smallest per-state bound that keeps every diagonal subtraction
    of the form ``b - a`` with ``b >= 2a`` and multiplies it by ``safety``.
    States in E3 impose no bound.
    """
    bounds = [
        _h_bound(m.v_diag[i], m.d_diag[i], m.Q[i, i])
        for i in np.concatenate([m.e1, m.e2])
    ]
    h = float(min(bounds, default=math.inf))
    if not math.isfinite(h):
        h = 1.0
    return safety * h
