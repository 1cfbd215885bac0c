"""Reference computations used to judge the working-precision results.

* :func:`oracle_solve` reruns the whole pipeline in double-double
  arithmetic and refuses to return unless its own residual is tiny.
* :func:`qbd_fixed_point_G` solves ``A - B G + C G^2 = 0`` by the classical
  monotone fixed-point iteration, independently of cyclic reduction.
* :func:`compare` evaluates residual and forward-error metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from . import _array as xa
from .cr import QbdTriple
from .discretize import exact_generator
from .errors import DimensionMismatch, NoConvergence, OracleInconclusive
from .extended import ExtendedReal
from .model import MmbmModel, choose_h
from .solve import StationarySolution, assemble, relative_residual, run_pipeline

__all__ = ["ErrorReport", "oracle_solve", "residual_extended", "qbd_fixed_point_G", "compare"]

#: Residual an extended-precision run must reach to count as a reference.
ORACLE_RESIDUAL = 1e-28


@dataclass(frozen=True)
class ErrorReport:
    """Errors of a solution against a reference.

    ``residual`` is the relative residual of the candidate; ``fwd_*`` are
    normwise relative errors in the 2-norm; ``cw_*`` are the largest
    componentwise relative errors over entries whose reference is nonzero.
    Entries where the reference is exactly zero must be exactly zero in the
    candidate too, otherwise the componentwise error is ``inf``.
    """

    residual: float
    fwd_X: float
    fwd_Psi: float
    cw_X: float
    cw_Psi: float


def residual_extended(model: MmbmModel, X, Psi) -> float:
    """Relative residual of a block-order pair evaluated in double-double.

    ``X`` and ``Psi`` are :class:`ExtendedReal` arrays in block order
    ``(E1, E2 | E3)``.
    """
    v, d, Q = model.blocked()
    ell, n = X.shape[0], model.n
    U = ExtendedReal(np.zeros((ell, n)))
    U[np.arange(ell), np.arange(ell)] = 1.0
    if n > ell:
        U[:, ell:] = Psi
    XU = X @ U
    Ve = ExtendedReal(v)
    De = ExtendedReal(d)
    res = (X @ XU) * Ve[None, :] - XU * De[None, :] + U @ exact_generator(Q)
    Uf = U.to_float()
    denom = np.linalg.norm(Uf, 2) * (np.abs(v).max() + np.abs(d).max() + np.linalg.norm(Q, 2))
    return float(np.linalg.norm(res.to_float(), 2) / denom)


def oracle_solve(
    model: MmbmModel,
    mode="auto",
    h: float | None = None,
    tol: float | None = None,
    *,
    max_iter: int = 128,
) -> StationarySolution:
    """Run the pipeline in double-double and round the result to float64.

    ``h`` defaults to the same value :func:`~mmbm_cr.solve.solve` would use,
    so both runs discretise the same problem.  The extended residual is
    stored in ``residual`` and must not exceed ``1e-28``.

    Raises
    ------
    OracleInconclusive
        if the self-check fails.
    """
    if h is None:
        h = choose_h(model)
    like = ExtendedReal(0.0)
    parts = run_pipeline(model, mode, h, tol, like=like, max_iter=max_iter)
    res_dd = residual_extended(model, parts.X, parts.pair.Psi)
    if not res_dd <= ORACLE_RESIDUAL:
        raise OracleInconclusive(f"extended-precision residual {res_dd:.3e} exceeds {ORACLE_RESIDUAL:.0e}")
    sol = assemble(parts)
    diagnostics = dict(sol.diagnostics, residual_float=sol.residual)
    return replace(sol, residual=res_dd, diagnostics=diagnostics)


def qbd_fixed_point_G(q: QbdTriple, tol: float = 1e-14, max_iter: int = 10**6) -> np.ndarray:
    """Minimal nonnegative ``G`` by ``G_{j+1} = B^{-1} (A + C G_j^2)``, ``G_0 = 0``.

    ``B`` is assembled densely (diagonal from its triplet) and factored
    once with LAPACK; the iteration is monotone so it converges to the
    minimal solution, linearly.
    """
    A = xa.as_float(q.A)
    C = xa.as_float(q.C)
    lu = scipy.linalg.lu_factor(q.dense_B())
    G = np.zeros_like(A)
    for _ in range(max_iter):
        new = scipy.linalg.lu_solve(lu, A + C @ (G @ G))
        if np.max(np.abs(new - G), initial=0.0) <= tol:
            return new
        G = new
    raise NoConvergence(f"fixed-point iteration for G did not converge in {max_iter} steps")


def _normwise(x, ref) -> float:
    if ref.size == 0:
        return 0.0
    nref = np.linalg.norm(ref, 2)
    diff = np.linalg.norm(x - ref, 2)
    if nref == 0:
        return 0.0 if diff == 0 else float("inf")
    return float(diff / nref)


def _componentwise(x, ref) -> float:
    if ref.size == 0:
        return 0.0
    zero = ref == 0
    if np.any(x[zero] != 0):
        return float("inf")
    nz = ~zero
    if not nz.any():
        return 0.0
    return float(np.max(np.abs(x[nz] - ref[nz]) / np.abs(ref[nz])))


def compare(sol: StationarySolution, ref: StationarySolution, model: MmbmModel | None = None) -> ErrorReport:
    """Residual of ``sol`` plus forward errors of ``(X, Psi)`` against ``ref``.

    When ``model`` is given the residual is recomputed from it; otherwise
    the residual stored in ``sol`` is reported.
    """
    if sol.X.shape != ref.X.shape or sol.Psi.shape != ref.Psi.shape:
        raise DimensionMismatch(
            f"X {sol.X.shape} vs {ref.X.shape}, Psi {sol.Psi.shape} vs {ref.Psi.shape}"
        )
    if not (np.array_equal(sol.keep, ref.keep) and np.array_equal(sol.e3, ref.e3)):
        raise DimensionMismatch("solutions use different state partitions")
    residual = relative_residual(model, sol.X, sol.U()) if model is not None else sol.residual
    return ErrorReport(
        residual=float(residual),
        fwd_X=_normwise(sol.X, ref.X),
        fwd_Psi=_normwise(sol.Psi, ref.Psi),
        cw_X=_componentwise(sol.X, ref.X),
        cw_Psi=_componentwise(sol.Psi, ref.Psi),
    )
