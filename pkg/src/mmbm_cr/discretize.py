"""Map ``P(z) = V z^2 - D z + Q`` to a discrete-time QBD triple via ``y = 1 + h z``.

Three constructions are provided, all in block order ``(E1, E2, E3)``:

``posv``
    plain substitution, valid when every variance is positive;
``shifted``
    the polynomial is first multiplied on the right by
    ``diag(I, I, (1 + h z) I)``, which turns the infinite eigenvalues of the
    E3 states into zeros of the discrete problem;
``sda``
    substitution first, then right multiplication by ``M^{-1}`` and
    ``diag(I, I, y I)``.  The result is finally scaled on the right by
    ``K = diag(M 1)`` so that its row sums vanish and ``B`` admits a
    triplet with ``v = 1``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _array as xa
from .cr import QbdTriple
from .errors import HViolation
from .extended import ExtendedReal
from .mmatrix import TripletRep, gth_invert
from .model import MmbmModel, perron_vector

__all__ = [
    "Mode",
    "Discretization",
    "discretize",
    "discretize_posV",
    "discretize_shifted",
    "discretize_sda",
    "exact_generator",
]


class Mode(enum.Enum):
    POSV = "posv"
    SHIFTED = "shifted"
    SDA = "sda"


@dataclass(frozen=True)
class Discretization:
    h: float
    mode: Mode
    triple: QbdTriple
    n1: int
    n2: int
    n3: int
    perm: np.ndarray
    extras: dict = field(default_factory=dict)

    @property
    def keep(self) -> slice:
        return slice(0, self.n1 + self.n2)

    @property
    def e3(self) -> slice:
        return slice(self.n1 + self.n2, self.n1 + self.n2 + self.n3)


def _lifted_model(m: MmbmModel, h: float, like):
    v, d, Q = m.blocked()
    if xa.is_dd(like):
        ih = 1.0 / ExtendedReal(h)
        return xa.lift(v, like), xa.lift(d, like), exact_generator(Q), ih
    return v, d, Q, 1.0 / h


def exact_generator(Q) -> ExtendedReal:
    """``Q`` in double-double with the diagonal rebuilt as ``-sum offdiag``.

    The float64 diagonal of a validated model is that sum rounded once; the
    triplet-based kernels always see the exact value, so the extended runs
    must too.
    """
    Qe = xa.offdiag(ExtendedReal(Q))
    idx = np.arange(Qe.shape[0])
    Qe[idx, idx] = -Qe.sum(axis=1)
    return Qe


def _c_diagonal(v, d, q, h, ih, precise: bool):
    """``h^-2 v + h^-1 d + q`` for E1/E2 states as one guarded subtraction.

    With ``precise`` the O(n) entries are formed in double-double and rounded.
    """
    if precise and not xa.is_dd(v):
        ih_dd = 1.0 / ExtendedReal(h)
        dd = _c_diagonal(ExtendedReal(v), ExtendedReal(d), ExtendedReal(q), h, ih_dd, False)
        return xa.as_float(dd)
    dh = d * ih
    dpos = xa.hi(dh) > 0
    zero = dh * 0.0
    pos = v * (ih * ih) + _where(dpos, dh, zero)
    neg = abs(q) + _where(dpos, zero, abs(dh))
    return pos - neg


def _where(mask, a, b):
    if xa.is_dd(a):
        out = b.copy()
        out[mask] = a[mask]
        return out
    return np.where(mask, a, b)


def _check_c_diag(c, h):
    bad = np.flatnonzero(xa.hi(c) < 0)
    if bad.size:
        raise HViolation(f"h = {h:.6g} makes C negative on block-order states {bad.tolist()}")
    # b - a with b >= 2a may round to -0.0 only when b == a == 0
    return abs(c)


def discretize_posV(m: MmbmModel, h: float, *, like=None, u=None, precise=False) -> Discretization:
    """Coefficients ``A = h^-2 V``, ``B = 2 h^-2 V + h^-1 D``, ``C = A + h^-1 D + Q``."""
    if m.n2 or m.n3:
        raise ValueError("posv mode needs every variance to be positive")
    return discretize_shifted(m, h, like=like, u=u, precise=precise, _mode=Mode.POSV)


def discretize_shifted(
    m: MmbmModel, h: float, *, like=None, u=None, precise=False, _mode=Mode.SHIFTED
) -> Discretization:
    """Shifted coefficients; the E3 block column of ``C`` is exactly zero."""
    v, d, Q, ih = _lifted_model(m, h, like)
    n, n1, n2, n3 = m.n, m.n1, m.n2, m.n3
    k = n1 + n2
    i12 = np.arange(k)
    i3 = np.arange(k, n)
    offq = xa.offdiag(Q)

    cdiag = _check_c_diag(_c_diagonal(v[i12], d[i12], Q[i12, i12], h, ih, precise), h)

    A = xa.zeros((n, n), like=Q)
    A[np.arange(n1), np.arange(n1)] = v[:n1] * (ih * ih)
    A[i3, i3] = abs(d[i3]) * ih

    C = xa.zeros((n, n), like=Q)
    C[np.ix_(i12, i12)] = offq[np.ix_(i12, i12)]
    C[i12, i12] = cdiag
    C[np.ix_(i3, i12)] = offq[np.ix_(i3, i12)]

    offB = xa.zeros((n, n), like=Q)
    offB[np.ix_(i12, i3)] = -offq[np.ix_(i12, i3)]
    offB[np.ix_(i3, i3)] = -offq[np.ix_(i3, i3)]

    if u is None:
        u = perron_vector(m, like=Q)[m.perm]
    triple = QbdTriple.from_blocks(A, offB, C, u=u)
    return Discretization(h, _mode, triple, n1, n2, n3, m.perm)


def discretize_sda(m: MmbmModel, h: float, *, like=None, u=None, precise=False) -> Discretization:
    """SDA-like coefficients ``(A K, B K, C K)`` with ``K = diag(M 1)``.

    ``extras`` holds the unscaled blocks ``A_check``, ``C_check``, the
    off-diagonal of ``B_check``, the M-matrix ``M`` as a triplet and ``K``.
    """
    v, d, Q, ih = _lifted_model(m, h, like)
    n, n1, n2, n3 = m.n, m.n1, m.n2, m.n3
    k = n1 + n2
    i1 = np.arange(n1)
    i12 = np.arange(k)
    i3 = np.arange(k, n)
    offq = xa.offdiag(Q)

    cdiag = _check_c_diag(_c_diagonal(v[i12], d[i12], Q[i12, i12], h, ih, precise), h)

    kvec = xa.zeros(n, like=Q)
    kvec[i1] = v[i1] * (ih * ih)
    kvec[np.arange(n1, k)] = d[np.arange(n1, k)] * ih
    kvec[i3] = abs(d[i3]) * ih
    offM = xa.zeros((n, n), like=Q)
    offM[np.ix_(i3, np.arange(n))] = -offq[np.ix_(i3, np.arange(n))]
    tM = TripletRep(xa.offdiag(offM), xa.ones(n, like=Q), kvec)
    Minv = gth_invert(tM)

    ctop = offq[i12, :].copy()
    ctop[i12, i12] = cdiag
    cm = ctop @ Minv
    b3 = (abs(d[i3]) * ih)[:, None] * Minv[i3, :]

    A_chk = xa.zeros((n, n), like=Q)
    A_chk[i1, i1] = 1.0
    A_chk[np.ix_(i3, i3)] = b3[:, i3]
    C_chk = xa.zeros((n, n), like=Q)
    C_chk[np.ix_(i12, i12)] = cm[:, i12]
    offB_chk = xa.zeros((n, n), like=Q)
    offB_chk[np.ix_(i12, i3)] = -cm[:, i3]
    offB_chk[np.ix_(i3, i12)] = -b3[:, i12]

    A = A_chk * kvec[None, :]
    C = C_chk * kvec[None, :]
    offB = offB_chk * kvec[None, :]
    if u is None:
        u = perron_vector(m, like=Q)[m.perm]
    triple = QbdTriple.from_blocks(A, offB, C, u=u)
    extras = {
        "A_check": A_chk,
        "C_check": C_chk,
        "offB_check": offB_chk,
        "M": tM,
        "K": kvec,
    }
    return Discretization(h, Mode.SDA, triple, n1, n2, n3, m.perm, extras)


def discretize(m: MmbmModel, h: float, mode: Mode | str = "auto", **kw) -> Discretization:
    if isinstance(mode, str):
        mode = mode.lower()
        if mode == "auto":
            mode = Mode.POSV if (m.n2 == 0 and m.n3 == 0) else Mode.SHIFTED
        else:
            mode = Mode(mode)
    if mode is Mode.POSV:
        return discretize_posV(m, h, **kw)
    if mode is Mode.SHIFTED:
        return discretize_shifted(m, h, **kw)
    return discretize_sda(m, h, **kw)
