"""Subtraction-free cyclic reduction for discrete-time QBD matrix equations.

Given nonnegative ``A``, ``C`` and an M-matrix ``B`` with
``(A - B + C) 1 = 0``, cyclic reduction computes the minimal nonnegative
solutions ``G`` of ``A - B G + C G^2 = 0`` and ``R`` of ``R^2 A - R B + C = 0``.
Every iterate is carried as ``A_k``, ``C_k`` and the off-diagonal parts of
``B_k`` and ``Bhat_k``; diagonals are implied by the row-sum identities

* ``(A_k - B_k + C_k) 1 = 0``
* ``(A_0 - Bhat_k + C_k) 1 = 0``
* ``u (A_k - Bhat_k + C_0) = 0``

so all inversions go through GTH elimination and no two like-signed
numbers are ever subtracted.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from . import _array as xa
from .errors import Breakdown, NoConvergence, SingularMatrix, InvalidTriplet
from .extended import ExtendedReal
from .mmatrix import TripletRep, gth_factor, perron_left, reconstruct_diag

__all__ = [
    "Recurrence",
    "QbdTriple",
    "CrState",
    "CrOutput",
    "drift_d",
    "classify_drift",
    "cr_init",
    "cr_step",
    "cr_run",
]

log = logging.getLogger(__name__)

_DD_ZERO = ExtendedReal(0.0)


class Recurrence(enum.Enum):
    POSITIVE = "PositiveRecurrent"
    NULL = "NullRecurrent"
    TRANSIENT = "Transient"


@dataclass(frozen=True)
class QbdTriple:
    """Coefficients of ``F(y) = A y^2 - B y + C``.

    ``B`` is a triplet with ``v = 1`` and ``w = (A + C) 1``; ``u`` is the
    left Perron vector of ``A - B + C``.
    """

    A: object
    B: TripletRep
    C: object
    u: object

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @classmethod
    def from_blocks(cls, A, offB, C, u=None) -> "QbdTriple":
        """Build the triple from ``A``, ``offdiag(B)`` and ``C``.

        When ``u`` is omitted it is computed from the triplet
        ``(offdiag(B - A - C), 1, 0)`` of the singular M-matrix ``-(A - B + C)``.
        """
        n = A.shape[0]
        if not (xa.is_nonneg(A) and xa.is_nonneg(C)):
            raise InvalidTriplet("A and C must be entrywise nonnegative")
        one = xa.ones(n, like=A)
        B = TripletRep(xa.offdiag(offB), one, A.sum(axis=1) + C.sum(axis=1))
        if u is None:
            u = perron_left(TripletRep(xa.offdiag(offB - A - C), one, xa.zeros(n, like=A)))
        return cls(A, B, C, u)

    def dense_B(self) -> np.ndarray:
        return self.B.dense()


def classify_drift(d: float, scale: float, eps: float = xa.EPS) -> Recurrence:
    """Sign class of a mean drift; ``|d| <= 10 eps scale`` counts as zero."""
    if abs(d) <= 10.0 * eps * scale:
        return Recurrence.NULL
    return Recurrence.POSITIVE if d < 0 else Recurrence.TRANSIENT


def drift_d(q: QbdTriple):
    """Mean drift ``u (C - A) 1`` and its recurrence class.

    The difference cancels by nature, so it is accumulated in double-double
    even for float64 triples; only the rounding of the entries remains.
    """
    u, A, C = (xa.lift(x, like=_DD_ZERO) for x in (q.u, q.A, q.C))
    d = float(xa.as_float(u @ (C.sum(axis=1) - A.sum(axis=1))))
    scale = float(np.max(np.abs(xa.as_float(q.C) - xa.as_float(q.A)).sum(axis=1), initial=0.0))
    return d, classify_drift(d, scale, xa.eps_of(q.A))


@dataclass(frozen=True)
class CrState:
    """One cyclic-reduction iterate.

    ``offB`` and ``offBhat`` are the (nonpositive) off-diagonal parts;
    ``uA = u A_k`` and ``C1 = C_k 1`` are carried for the limits.
    """

    k: int
    A: object
    C: object
    offB: object
    offBhat: object
    uA: object
    C1: object

    def B_triplet(self) -> TripletRep:
        n = self.A.shape[0]
        return TripletRep(self.offB, xa.ones(n, like=self.A), self.A.sum(axis=1) + self.C1)

    def Bhat_triplet(self, q: QbdTriple) -> TripletRep:
        n = self.A.shape[0]
        return TripletRep(self.offBhat, xa.ones(n, like=self.A), q.A.sum(axis=1) + self.C1)


def cr_init(q: QbdTriple) -> CrState:
    return CrState(
        k=0,
        A=q.A,
        C=q.C,
        offB=q.B.m,
        offBhat=q.B.m,
        uA=q.u @ q.A,
        C1=q.C.sum(axis=1),
    )


def cr_step(s: CrState, q: QbdTriple) -> CrState:
    """One step of the recurrences, all inversions via GTH."""
    try:
        lu = gth_factor(s.B_triplet())
    except (SingularMatrix, InvalidTriplet) as exc:
        raise Breakdown(f"B_{s.k} is not a valid M-matrix triplet: {exc}") from exc
    binv_a = lu.solve(s.A)
    binv_c = lu.solve(s.C)
    a_next = s.A @ binv_a
    c_next = s.C @ binv_c
    cba = xa.offdiag(s.C @ binv_a)
    abc = xa.offdiag(s.A @ binv_c)
    return CrState(
        k=s.k + 1,
        A=a_next,
        C=c_next,
        offB=s.offB - (abc + cba),
        offBhat=s.offBhat - cba,
        uA=q.u @ a_next,
        C1=c_next.sum(axis=1),
    )


@dataclass(frozen=True)
class CrOutput:
    G: object
    R: object
    offBhat: object
    vhat: object
    what: object
    iterations: int
    recurrence: Recurrence
    drift: float
    Bhat: TripletRep
    history: list = field(default_factory=list)
    states: list | None = None


def _change(old: CrState, new: CrState, q: QbdTriple) -> float:
    """Largest relative change of the data that determines ``Bhat_k``."""
    eps = xa.eps_of(q.A)
    ob = np.abs(xa.as_float(new.offBhat))
    delta = np.abs(xa.as_float(new.offBhat - old.offBhat))
    floor = eps * float(ob.max(initial=0.0))
    worst = 0.0
    if ob.size:
        denom = np.maximum(ob, floor)
        mask = denom > 0
        if mask.any():
            worst = float((delta[mask] / denom[mask]).max())
    # w of the Bhat triplet is A_0 1 + C_k 1; v of the transpose is uC_0 + uA_k
    wb = xa.as_float(q.A.sum(axis=1) + new.C1)
    dw = np.abs(xa.as_float(new.C1 - old.C1))
    vb = xa.as_float(q.u @ q.C + new.uA)
    dv = np.abs(xa.as_float(new.uA - old.uA))
    for d, ref in ((dw, wb), (dv, vb)):
        m = ref > 0
        if m.any():
            worst = max(worst, float((d[m] / ref[m]).max()))
    return worst


def cr_run(
    q: QbdTriple,
    tol: float | None = None,
    max_iter: int = 64,
    *,
    keep_states: bool = False,
) -> CrOutput:
    """Iterate cyclic reduction to convergence and extract ``G`` and ``R``.

    Stops when the relative change of ``offdiag(Bhat_k)`` (and of the
    vectors completing its triplets) drops below ``tol`` (default
    ``n * eps``), or when ``||A_k|| ||C_k||`` becomes negligible.  Null
    recurrent problems converge only linearly, so the cap is raised for them.
    """
    n = q.n
    eps = xa.eps_of(q.A)
    if tol is None:
        tol = n * eps
    drift, rec = drift_d(q)
    if rec is Recurrence.NULL:
        max_iter = max(max_iter, 256)
    scale = float(np.max(xa.as_float(q.A.sum(axis=1) + q.C.sum(axis=1)), initial=0.0))
    state = cr_init(q)
    states = [state] if keep_states else None
    history = []
    converged = False
    for _ in range(max_iter):
        new = cr_step(state, q)
        change = _change(state, new, q)
        history.append(change)
        state = new
        if keep_states:
            states.append(state)
        na = float(np.abs(xa.as_float(state.A)).sum(axis=1).max(initial=0.0))
        nc = float(np.abs(xa.as_float(state.C)).sum(axis=1).max(initial=0.0))
        log.debug("CR step %d: change %.3e, |A||C| %.3e", state.k, change, na * nc)
        if change <= tol or na * nc <= (tol * scale) ** 2:
            converged = True
            break
    if not converged:
        raise NoConvergence(f"cyclic reduction did not converge in {max_iter} steps")

    bhat = state.Bhat_triplet(q)
    G = gth_factor(bhat).solve(q.A)
    bhat_t = bhat.transpose(q.u, q.u @ q.C + state.uA)
    R = gth_factor(bhat_t).solve(q.C.T).T
    return CrOutput(
        G=G,
        R=R,
        offBhat=state.offBhat,
        vhat=state.uA,
        what=state.C1,
        iterations=state.k,
        recurrence=rec,
        drift=drift,
        Bhat=bhat,
        history=history,
        states=states,
    )


def dense_diag(t: TripletRep) -> np.ndarray:
    """Float64 diagonal implied by a triplet (convenience for callers)."""
    return xa.as_float(reconstruct_diag(t))
