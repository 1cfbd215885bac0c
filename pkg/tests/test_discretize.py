import numpy as np
import pytest

from mmbm_cr import _array as xa
from mmbm_cr.cr import drift_d
from mmbm_cr.discretize import Mode, discretize, discretize_posV, discretize_sda, discretize_shifted
from mmbm_cr.errors import HViolation
from mmbm_cr.extended import ExtendedReal
from mmbm_cr.generate import generate
from mmbm_cr.mmatrix import reconstruct_diag
from mmbm_cr.model import choose_h, mean_drift, validate_and_classify

Q2 = [[-1.0, 1.0], [1.0, -1.0]]


def dense(triple):
    return xa.as_float(triple.A), triple.B.dense(), xa.as_float(triple.C)


def test_posv_hand_values():
    m = validate_and_classify([1, 1], [1, -1], Q2)
    A, B, C = dense(discretize_posV(m, 0.25).triple)
    np.testing.assert_array_equal(A, 16 * np.eye(2))
    np.testing.assert_array_equal(B, np.diag([36.0, 28.0]))
    np.testing.assert_array_equal(C, [[19.0, 1.0], [1.0, 11.0]])
    np.testing.assert_array_equal(A - B + C, Q2)


def test_posv_zero_drift():
    m = validate_and_classify([1, 1], [0, 0], Q2)
    A, B, C = dense(discretize_posV(m, 0.5).triple)
    np.testing.assert_array_equal(A, 4 * np.eye(2))
    np.testing.assert_array_equal(B, 8 * np.eye(2))
    np.testing.assert_array_equal(C, [[3.0, 1.0], [1.0, 3.0]])


def test_shifted_hand_values():
    m = validate_and_classify([1, 0], [0, -1], Q2)
    A, B, C = dense(discretize_shifted(m, 0.5).triple)
    np.testing.assert_array_equal(A, [[4.0, 0.0], [0.0, 2.0]])
    np.testing.assert_array_equal(B, [[8.0, -1.0], [0.0, 3.0]])
    np.testing.assert_array_equal(C, [[3.0, 0.0], [1.0, 0.0]])


def test_shifted_equals_posv_without_zero_variances():
    m = generate("rand", 6, 1).model
    h = choose_h(m)
    a, b = discretize_posV(m, h).triple, discretize_shifted(m, h).triple
    for x, y in ((a.A, b.A), (a.C, b.C), (a.B.m, b.B.m), (a.B.w, b.B.w)):
        np.testing.assert_array_equal(x, y)


@pytest.mark.parametrize("seed", range(5))
def test_shifted_last_block_column_of_C_is_zero(seed):
    m = generate("rands", 9, seed).model
    d = discretize(m, choose_h(m))
    assert d.mode is Mode.SHIFTED
    assert np.all(d.triple.C[:, d.e3] == 0)


def test_sda_values_and_identity_blocks():
    m = validate_and_classify([1, 0], [0, -1], Q2)
    d = discretize_sda(m, 0.5)
    A, B, C = dense(d.triple)
    # K = (h^-2 v_1, h^-1 |d_2|) = (4, 2)
    np.testing.assert_array_equal(d.extras["K"], [4.0, 2.0])
    np.testing.assert_allclose(d.extras["A_check"], [[1.0, 0.0], [0.0, 2 / 3]], rtol=1e-15)
    np.testing.assert_allclose(A, [[4.0, 0.0], [0.0, 4 / 3]], rtol=1e-15)
    np.testing.assert_allclose(B, [[8.0, -2 / 3], [-2 / 3, 2.0]], rtol=1e-15)
    np.testing.assert_allclose(C, [[10 / 3, 0.0], [0.0, 0.0]], rtol=1e-15)
    np.testing.assert_allclose((A - B + C).sum(axis=1), 0.0, atol=1e-15)


def test_sda_identity_blocks_in_unscaled_B():
    m = generate("rands", 9, 2).model
    d = discretize_sda(m, choose_h(m))
    K = xa.as_float(d.extras["K"])
    Bdiag = xa.as_float(reconstruct_diag(d.triple.B)) / K
    n1 = m.n1
    # blocks (2,2) and (3,3) of the unscaled B are identities
    np.testing.assert_allclose(Bdiag[n1:], 1.0, rtol=1e-14)
    off = xa.as_float(d.extras["offB_check"])
    assert np.all(off[n1 : m.n1 + m.n2, n1 : m.n1 + m.n2] == 0)
    assert np.all(off[m.n1 + m.n2 :, m.n1 + m.n2 :] == 0)


def test_h_violation():
    m = validate_and_classify([1, 1], [-1, -1], Q2)
    with pytest.raises(HViolation):
        discretize_posV(m, 10.0)


def test_posv_requires_positive_variances():
    m = validate_and_classify([1, 0], [0, -1], Q2)
    with pytest.raises(ValueError):
        discretize(m, 0.1, "posv")


@pytest.mark.parametrize("family", ["rand", "rands"])
@pytest.mark.parametrize("mode", ["auto", "sda"])
def test_drift_scales_with_h(family, mode):
    for seed in range(5):
        m = generate(family, 8, seed).model
        h = choose_h(m)
        dd, _ = drift_d(discretize(m, h, mode).triple)
        dc, _ = mean_drift(m)
        if mode == "sda":
            # K rescales columns; the drift keeps its sign only
            assert np.sign(dd) == np.sign(dc)
        else:
            assert dd == pytest.approx(dc / h, rel=1e-12)


def test_precise_flag_matches_extended():
    m = generate("imbs", 8, 3).model
    h = choose_h(m)
    plain = discretize(m, h, precise=True).triple
    ext = discretize(m, h, like=ExtendedReal(0.0)).triple
    np.testing.assert_array_equal(np.diag(plain.C), np.diag(ext.C.to_float()))
