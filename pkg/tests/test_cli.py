import json
import os
import subprocess
import sys

import numpy as np
import pytest

from mmbm_cr.cli import main


def test_gen_solve_density(tmp_path, capsys):
    m, s = str(tmp_path / "m.json"), str(tmp_path / "s.json")
    assert main(["gen", "--family", "rands", "--n", "8", "--seed", "0", "--out", m]) == 0
    assert main(["solve", "--in", m, "--out", s]) == 0
    doc = json.loads(open(s).read())
    assert min(float(x) for row in doc["P"] for x in row) >= 0
    assert min(float(x) for row in doc["Psi"] for x in row) >= 0
    assert main(["density", "--in", s, "--x", "0,1.5"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    p0 = np.array([float(t) for t in lines[0].split(",")[1:]])
    keep = doc["keep"]
    v = np.array([float(t) for t in doc["v_coef"]])
    np.testing.assert_array_equal(p0[keep], v)


def test_solve_with_explicit_mode_and_h(tmp_path):
    m, s = str(tmp_path / "m.json"), str(tmp_path / "s.json")
    main(["gen", "--family", "rand", "--n", "5", "--seed", "1", "--out", m])
    assert main(["solve", "--in", m, "--mode", "sda", "--h", "0.01", "--tol", "1e-15", "--out", s]) == 0
    assert json.loads(open(s).read())["h"] == "0.01"


@pytest.mark.parametrize(
    "content, code",
    [
        ('{"v":["0","0"],"d":["1","-1"],"q":[["-1","1"],["1","-1"]]}', 3),
        ("{not json", 2),
        ('{"v":["1","1"],"d":["-1","-1"],"q":[["-1","1"],["1","-1"]]}', 0),
    ],
)
def test_exit_codes(tmp_path, content, code, capsys):
    m = tmp_path / "m.json"
    m.write_text(content)
    assert main(["solve", "--in", str(m), "--out", str(tmp_path / "s.json")]) == code
    if code == 3:
        assert "AssumptionA2" in capsys.readouterr().err


def test_h_violation_and_mode_mismatch(tmp_path):
    m = str(tmp_path / "m.json")
    main(["gen", "--family", "rands", "--n", "6", "--seed", "0", "--out", m])
    assert main(["solve", "--in", m, "--h", "100", "--out", str(tmp_path / "s")]) == 3
    assert main(["solve", "--in", m, "--mode", "posv", "--out", str(tmp_path / "s")]) == 2


def test_no_convergence_exit(tmp_path, monkeypatch):
    import importlib

    solve_mod = importlib.import_module("mmbm_cr.solve")

    m = str(tmp_path / "m.json")
    main(["gen", "--family", "rand", "--n", "4", "--seed", "0", "--out", m])
    orig = solve_mod.run_pipeline
    monkeypatch.setattr(solve_mod, "run_pipeline", lambda *a, **k: orig(*a, **{**k, "max_iter": 1}))
    assert main(["solve", "--in", m, "--out", str(tmp_path / "s")]) == 4


def test_density_on_transient_model(tmp_path):
    m, s = str(tmp_path / "m.json"), str(tmp_path / "s.json")
    (tmp_path / "m.json").write_text('{"v":["1","1"],"d":["2","1"],"q":[["-1","1"],["1","-1"]]}')
    assert main(["solve", "--in", m, "--out", s]) == 0
    assert main(["density", "--in", s, "--x", "1"]) == 5


def test_bench_csv(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "--families", "rand", "--sizes", "6", "--seeds", "2", "--no-timing", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("problem_id,mode,h,iterations,residual,fwd_X,fwd_Psi,cw_X,wall_time")
    assert len(lines) == 3


def test_module_entry_point_and_log_env(tmp_path):
    env = dict(os.environ, MMBM_LOG="INFO")
    m = str(tmp_path / "m.json")
    r = subprocess.run([sys.executable, "-m", "mmbm_cr", "gen", "--family", "rand", "--n", "4", "--seed", "3", "--out", m],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0
    r = subprocess.run([sys.executable, "-m", "mmbm_cr", "solve", "--in", m, "--out", str(tmp_path / "s.json")],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0 and "CR converged" in r.stderr
    r = subprocess.run([sys.executable, "-m", "mmbm_cr", "solve"], capture_output=True, text=True)
    assert r.returncode == 2
