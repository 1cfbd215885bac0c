import numpy as np
import pytest
from dataclasses import replace

from _triples import random_triple
from mmbm_cr.cr import QbdTriple
from mmbm_cr.errors import DimensionMismatch, NoConvergence
from mmbm_cr.generate import generate
from mmbm_cr.model import validate_and_classify
from mmbm_cr.oracle import ORACLE_RESIDUAL, compare, oracle_solve, qbd_fixed_point_G
from mmbm_cr.solve import solve

Q2 = [[-1.0, 1.0], [1.0, -1.0]]


def scalar(a, c):
    return QbdTriple.from_blocks(np.array([[a]]), np.zeros((1, 1)), np.array([[c]]))


@pytest.mark.parametrize("a, c, G", [(0.2, 0.3, 2 / 3), (0.3, 0.2, 1.0)])
def test_fixed_point_scalar(a, c, G):
    # convergence to 1 is slow (rate 2/3), so the stopping error is ~ 2 tol
    assert abs(qbd_fixed_point_G(scalar(a, c))[0, 0] - G) <= 1e-13


def test_fixed_point_first_iterate():
    q = random_triple(np.random.default_rng(3), 4, min_rel_drift=0.05)
    G1 = qbd_fixed_point_G(q, tol=np.inf)
    np.testing.assert_allclose(G1, np.linalg.solve(q.dense_B(), q.A), rtol=1e-13, atol=1e-16)


def test_fixed_point_cap():
    with pytest.raises(NoConvergence):
        qbd_fixed_point_G(scalar(0.25, 0.25), max_iter=50)


def test_oracle_on_small_model():
    m = validate_and_classify([1, 1], [-1, -2], Q2)
    ref = oracle_solve(m)
    sol = solve(m)
    assert ref.residual <= ORACLE_RESIDUAL
    np.testing.assert_allclose(sol.X, ref.X, rtol=1e-13)


def test_oracle_is_deterministic():
    m = generate("rands", 6, 2).model
    a, b = oracle_solve(m), oracle_solve(m)
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.Psi, b.Psi)


def test_compare_identical_and_perturbed():
    m = generate("rands", 7, 0).model
    sol = solve(m)
    rep = compare(sol, sol)
    assert (rep.fwd_X, rep.fwd_Psi, rep.cw_X, rep.cw_Psi) == (0.0, 0.0, 0.0, 0.0)
    X = sol.X.copy()
    i = np.unravel_index(np.argmax(np.abs(X)), X.shape)
    X[i] *= 1 + 1e-8
    rep = compare(replace(sol, X=X), sol)
    assert rep.fwd_X == pytest.approx(1e-8 * abs(sol.X[i]) / np.linalg.norm(sol.X, 2), rel=1e-6)
    assert rep.cw_X == pytest.approx(1e-8, rel=1e-6)


def test_compare_structural_zero_and_mismatch():
    m = validate_and_classify([1, 0], [0, -1], Q2)
    sol = solve(m)
    ref = replace(sol, Psi=np.zeros((1, 1)))
    assert compare(sol, ref).cw_Psi == float("inf")
    other = solve(validate_and_classify([1, 1], [-1, -2], Q2))
    with pytest.raises(DimensionMismatch):
        compare(sol, other)


def test_compare_recomputes_residual():
    m = generate("rand", 6, 1).model
    sol = solve(m)
    assert compare(sol, sol, m).residual == pytest.approx(sol.residual, rel=1e-15)
