import json

import numpy as np
import pytest

from mmbm_cr.errors import AssumptionA2, ParseError
from mmbm_cr.generate import generate_raw
from mmbm_cr.io import read_model, read_solution, write_model, write_solution
from mmbm_cr.solve import relative_residual, solve


def test_model_round_trip_is_exact(tmp_path):
    v, d, Q = generate_raw("imbs", 7, 1)
    write_model(tmp_path / "m.json", v, d, Q)
    m = read_model(tmp_path / "m.json")
    np.testing.assert_array_equal(m.v_diag, v)
    np.testing.assert_array_equal(m.d_diag, d)
    np.testing.assert_array_equal(m.Q - np.diag(np.diag(m.Q)), Q - np.diag(np.diag(Q)))
    doc = json.loads((tmp_path / "m.json").read_text())
    assert all(isinstance(x, str) for x in doc["v"])


def test_numbers_or_strings_accepted(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{"v": [1, "0.5"], "d": ["-1", -2.0], "q": [["-1", "1"], [1, -1]]}')
    m = read_model(p)
    assert m.v_diag.tolist() == [1.0, 0.5]


@pytest.mark.parametrize(
    "text",
    ['{"v": [1, 1], "d": [1, 1]}', '{"v": [true, 1], "d": [1, 1], "q": [[-1, 1], [1, -1]]}', "[1, 2]", "{", '{"v": ["x", 1], "d": [1, 1], "q": [[-1, 1], [1, -1]]}'],
)
def test_parse_errors(tmp_path, text):
    p = tmp_path / "m.json"
    p.write_text(text)
    with pytest.raises(ParseError):
        read_model(p)


def test_missing_file():
    with pytest.raises(ParseError):
        read_model("/nonexistent/model.json")


def test_validation_errors_pass_through(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{"v": ["0", "0"], "d": ["1", "-1"], "q": [["-1", "1"], ["1", "-1"]]}')
    with pytest.raises(AssumptionA2):
        read_model(p)


@pytest.mark.parametrize("family, seed", [("rands", 0), ("rand", 1), ("imb", 2)])
def test_solution_round_trip(tmp_path, family, seed):
    v, d, Q = generate_raw(family, 8, seed)
    write_model(tmp_path / "m.json", v, d, Q)
    m = read_model(tmp_path / "m.json")
    sol = solve(m)
    write_solution(tmp_path / "s.json", m, sol)
    m2, sol2 = read_solution(tmp_path / "s.json")
    for a, b in ((sol.X, sol2.X), (sol.P, sol2.P), (sol.Psi, sol2.Psi), (sol.u, sol2.u)):
        np.testing.assert_array_equal(a, b)
    assert sol2.mode is sol.mode and sol2.recurrence is sol.recurrence and sol2.h == sol.h
    r = relative_residual(m2, sol2.X, sol2.U())
    assert r == pytest.approx(sol.residual, rel=1e-15)
    assert sol2.residual == sol.residual
