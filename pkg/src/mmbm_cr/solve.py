"""End-to-end computation of the c-stable invariant pair and stationary density.

The invariant pair ``(X, [I Psi])`` satisfies ``X^2 U V - X U D + U Q = 0``.
``X`` is a subgenerator, returned both densely and as ``X = P - s I`` with
``P >= 0``; ``Psi >= 0``.  The rows and columns of ``X`` (and the rows of
``Psi``) belong to the states with positive variance or positive drift,
sorted by original index; the columns of ``Psi`` belong to the remaining
states, also sorted.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _array as xa
from .cr import CrOutput, Recurrence, cr_run, drift_d
from .discretize import Discretization, Mode, discretize
from .errors import NotPositiveRecurrent
from .mmatrix import TripletRep, gth_factor, reconstruct_diag, schur_triplet, sub_triplet
from .model import MmbmModel, choose_h, mean_drift, perron_vector

__all__ = [
    "InvariantPair",
    "StationarySolution",
    "deflate",
    "x_triplet",
    "stationary_coeffs",
    "eval_density",
    "relative_residual",
    "solve",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InvariantPair:
    """Deflated pair in block order (internal to the pipeline).

    ``Y`` is the d-stable factor, ``Psi = -B12 B22^{-1}``, ``S`` the triplet
    of the Schur complement ``B11 + Psi B21`` and ``B22`` the triplet of the
    E3 block of ``Bhat_inf``.
    """

    Y: object
    Psi: object
    S: TripletRep
    B22: TripletRep
    h: float


def deflate(cr: CrOutput, disc: Discretization) -> InvariantPair:
    """Remove the spurious zero eigenvalues of ``R`` (block order)."""
    keep = np.arange(disc.n1 + disc.n2)
    e3 = np.arange(disc.n1 + disc.n2, disc.triple.n)
    bhat = cr.Bhat
    S, psi = schur_triplet(bhat, keep)
    b22 = sub_triplet(bhat, e3)
    C0 = disc.triple.C
    c11 = C0[np.ix_(keep, keep)]
    c21 = C0[np.ix_(e3, keep)]
    top = c11 + psi @ c21 if e3.size else c11
    Y = gth_factor(S).solve_transpose(top.T).T
    return InvariantPair(Y=Y, Psi=psi, S=S, B22=b22, h=disc.h)


def _p0_and_rhs(cr: CrOutput, pair: InvariantPair, disc: Discretization):
    keep = np.arange(disc.n1 + disc.n2)
    e3 = np.arange(disc.n1 + disc.n2, disc.triple.n)
    vhat = cr.vhat
    if not e3.size:
        return vhat[e3], vhat[keep]
    p0 = gth_factor(pair.B22).solve_transpose(vhat[e3])
    c21 = disc.triple.C[np.ix_(e3, keep)]
    b21 = abs(cr.Bhat.m[np.ix_(e3, keep)])
    return p0, vhat[keep] + p0 @ (c21 + b21)


def x_triplet(cr: CrOutput, pair: InvariantPair, u, disc: Discretization):
    """Triplet ``(offdiag(-X^T), u1^T, w^T)`` of ``-X^T`` plus ``p0``.

    ``w = h^-1 (vhat1 + vhat2 B22^{-1} (C21 - B21)) S^{-1}``, where
    ``C21 - B21`` is accumulated as ``C21 + |B21|``.  Returns ``(t, p0)``.
    """
    keep = np.arange(disc.n1 + disc.n2)
    p0, rhs = _p0_and_rhs(cr, pair, disc)
    w = gth_factor(pair.S).solve_transpose(rhs) / disc.h
    off = -xa.offdiag(pair.Y).T / disc.h
    return TripletRep(off, u[keep], w), p0


@dataclass(frozen=True)
class StationarySolution:
    """Everything the pipeline produces, in the caller's state indexing.

    ``keep`` lists the original indices of the rows of ``X``; ``e3`` the
    original indices of the columns of ``Psi``.  ``p0`` and ``v_coef`` are
    ``None`` unless the model is positive recurrent.
    """

    X: np.ndarray
    s: float
    P: np.ndarray
    Psi: np.ndarray
    keep: np.ndarray
    e3: np.ndarray
    xt: TripletRep
    u: np.ndarray
    p0: np.ndarray | None
    v_coef: np.ndarray | None
    h: float
    mode: Mode
    iterations: int
    recurrence: Recurrence
    drift: float
    residual: float = math.nan
    diagnostics: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.u.size

    def U(self) -> np.ndarray:
        """``[I Psi]`` as an ``l x n`` matrix in original column order."""
        ell = self.keep.size
        out = np.zeros((ell, self.n))
        out[np.arange(ell), self.keep] = 1.0
        out[:, self.e3] = self.Psi
        return out


def stationary_coeffs(cr: CrOutput, pair: InvariantPair, u, disc: Discretization, rec: Recurrence):
    """Mass at zero ``p0 = vhat2 B22^{-1}`` and density coefficient ``v``."""
    if rec is not Recurrence.POSITIVE:
        raise NotPositiveRecurrent(f"model is {rec.value}; no stationary density")
    t, p0 = x_triplet(cr, pair, u, disc)
    return p0, t.w


def eval_density(
    sol: StationarySolution,
    x: float,
    *,
    max_exponent: float = 500.0,
    squaring_threshold: float = 2000.0,
) -> np.ndarray:
    """Stationary density ``p(x) = v exp(X x) [I Psi]`` by uniformization.

    ``exp(X x) = exp(-s x) exp(P x)``; the series for ``v exp(P x)`` has only
    nonnegative terms.  When ``s x`` exceeds ``max_exponent`` the interval
    is split into equal substeps applied one after the other.  Beyond
    ``squaring_threshold`` the cost of that (proportional to ``s x``) is
    avoided by forming ``exp(X x / 2^j)`` with ``s x / 2^j <= 1`` and
    squaring ``j`` times; products of nonnegative matrices stay exactly
    nonnegative.
    """
    if sol.v_coef is None:
        raise NotPositiveRecurrent("density coefficients are only defined for positive recurrent models")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if sol.s * x > squaring_threshold:
        r = sol.v_coef @ _squared_exp(sol.P, sol.s, x)
    else:
        r = _uniformized(sol.v_coef, sol.P, sol.s, x, max_exponent)
    out = np.zeros(sol.n)
    out[sol.keep] = r
    if sol.e3.size:
        out[sol.e3] = r @ sol.Psi
    return out


def _uniformized(v, P, s, x, max_exponent):
    total = s * x
    steps = max(1, math.ceil(total / max_exponent))
    dx = x / steps
    r = np.array(v, dtype=float)
    for _ in range(steps):
        r = _series(r, P, s * dx, dx) * math.exp(-s * dx)
    return r


def _squared_exp(P, s, x):
    j = max(0, math.ceil(math.log2(s * x)))
    dx = x / 2.0**j
    E = _series(np.eye(P.shape[0]), P, s * dx, dx) * math.exp(-s * dx)
    for _ in range(j):
        E = E @ E
    return E


def _series(r, P, sdx, dx):
    term = r.copy()
    acc = r.copy()
    k = 0
    eps = xa.EPS
    while True:
        k += 1
        term = (term @ P) * (dx / k)
        acc = acc + term
        if k > sdx and np.all(term <= eps * acc):
            return acc
        if k > 10 * sdx + 1000:
            return acc


def relative_residual(model: MmbmModel, X, U) -> float:
    """``||X^2 U V - X U D + U Q||_2 / (||U||_2 (||V||_2 + ||D||_2 + ||Q||_2))``."""
    V = np.diag(model.v_diag)
    D = np.diag(model.d_diag)
    if xa.is_dd(X):
        XU = X @ U
        res = xa.as_float((X @ XU) @ V - XU @ D + U @ model.Q)
        Uf = xa.as_float(U)
    else:
        res = X @ (X @ U) @ V - (X @ U) @ D + U @ model.Q
        Uf = U
    denom = np.linalg.norm(Uf, 2) * (
        np.linalg.norm(V, 2) + np.linalg.norm(D, 2) + np.linalg.norm(model.Q, 2)
    )
    return float(np.linalg.norm(res, 2) / denom)


@dataclass(frozen=True)
class PipelineParts:
    """Intermediate objects of one pipeline run (block order)."""

    model: MmbmModel
    disc: Discretization
    cr: CrOutput
    pair: InvariantPair
    xt: TripletRep
    p0: object
    X: object
    u: object
    recurrence: Recurrence
    drift: float


def run_pipeline(
    model: MmbmModel,
    mode: Mode | str = "auto",
    h: float | None = None,
    tol: float | None = None,
    *,
    like=None,
    precise: bool = False,
    max_iter: int = 64,
) -> PipelineParts:
    """Run every stage in the arithmetic of ``like`` (float64 or double-double)."""
    u_orig = perron_vector(model, like=like)
    dc, rec = mean_drift(model, u_orig)
    if h is None:
        h = choose_h(model)
    disc = discretize(model, h, mode, like=like, u=u_orig[model.perm], precise=precise)
    log.info("mode %s, h = %.6g, n = (%d, %d, %d)", disc.mode.value, h, model.n1, model.n2, model.n3)
    cr = cr_run(disc.triple, tol=tol, max_iter=max_iter)
    log.info("CR converged in %d iterations", cr.iterations)
    pair = deflate(cr, disc)
    u_blk = u_orig[model.perm]
    xt, p0 = x_triplet(cr, pair, u_blk, disc)
    X = -xt.m.T.copy()
    ell = disc.n1 + disc.n2
    X[np.arange(ell), np.arange(ell)] = -reconstruct_diag(xt)
    return PipelineParts(model, disc, cr, pair, xt, p0, X, u_orig, rec, dc)


def assemble(parts: PipelineParts) -> StationarySolution:
    """Round to float64 and permute the block-order results back."""
    model, disc = parts.model, parts.disc
    keep_blk = model.keep
    order = np.argsort(keep_blk, kind="stable")
    keep = keep_blk[order]
    e3 = model.e3
    f = xa.as_float
    X = f(parts.X)[np.ix_(order, order)]
    Y = f(parts.pair.Y)[np.ix_(order, order)]
    Psi = f(parts.pair.Psi)[order, :]
    u = f(parts.u)
    xt = TripletRep(f(parts.xt.m)[np.ix_(order, order)], f(parts.xt.v)[order], f(parts.xt.w)[order])
    positive = parts.recurrence is Recurrence.POSITIVE
    p0 = f(parts.p0) if positive else None
    v_coef = f(parts.xt.w)[order] if positive else None
    P = Y / disc.h
    sol = StationarySolution(
        X=X,
        s=1.0 / disc.h,
        P=P,
        Psi=Psi,
        keep=keep,
        e3=e3,
        xt=xt,
        u=u,
        p0=p0,
        v_coef=v_coef,
        h=disc.h,
        mode=disc.mode,
        iterations=parts.cr.iterations,
        recurrence=parts.recurrence,
        drift=parts.drift,
    )
    diag_pair = (np.diag(Y) - 1.0) / disc.h
    diag_t = np.diag(X)
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = np.abs(diag_pair - diag_t) / np.abs(diag_t)
    diagnostics = {
        "discrete_drift": drift_d(disc.triple)[0],
        "diag_consistency": float(np.nanmax(gap, initial=0.0)),
    }
    residual = relative_residual(model, X, sol.U())
    return _replace(sol, residual=residual, diagnostics=diagnostics)


def _replace(sol, **kw):
    from dataclasses import replace

    return replace(sol, **kw)


def solve(
    model: MmbmModel,
    mode: Mode | str = "auto",
    h: float | None = None,
    tol: float | None = None,
    *,
    precise: bool = False,
    max_iter: int = 64,
) -> StationarySolution:
    """Compute the c-stable invariant pair and, if positive recurrent, the
    stationary-density coefficients of ``model``.

    ``mode`` is ``"auto"`` (``posv`` when no variance vanishes, ``shifted``
    otherwise), ``"posv"``, ``"shifted"`` or ``"sda"``.  ``h`` defaults to
    :func:`~mmbm_cr.model.choose_h`.
    """
    parts = run_pipeline(model, mode, h, tol, precise=precise, max_iter=max_iter)
    return assemble(parts)
