"""JSON model and solution files.

A model file is ``{"v": [...], "d": [...], "q": [[...], ...]}``.  Numbers
may be JSON numbers or decimal strings; they are written as the shortest
decimal strings that round-trip exactly.  A solution file repeats the model
and adds the pipeline output.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .cr import Recurrence
from .discretize import Mode
from .errors import MmbmError, ParseError
from .mmatrix import TripletRep
from .model import MmbmModel, validate_and_classify
from .solve import StationarySolution

__all__ = [
    "model_to_dict",
    "load_model",
    "read_model",
    "write_model",
    "solution_to_dict",
    "read_solution",
    "write_solution",
]


def _enc(a) -> list | str | None:
    if a is None:
        return None
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        return repr(float(a))
    return [_enc(x) for x in a]


def _dec(x, what: str, ndim: int) -> np.ndarray:
    try:
        a = np.array(_floats(x), dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: {exc}") from exc
    if ndim == 2 and a.size == 0:
        a = a.reshape(0, 0)
    if a.ndim != ndim:
        raise ParseError(f"{what} must be a {ndim}-dimensional array")
    return a


def _floats(x):
    if isinstance(x, list):
        return [_floats(e) for e in x]
    if isinstance(x, bool) or not isinstance(x, (str, int, float)):
        raise ValueError(f"not a number: {x!r}")
    return float(x)


def _read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    return doc


def model_to_dict(m: MmbmModel) -> dict:
    return {"v": _enc(m.v_diag), "d": _enc(m.d_diag), "q": _enc(m.Q)}


def load_model(doc: dict) -> MmbmModel:
    """Validate the ``v``, ``d``, ``q`` entries of a parsed document."""
    missing = [k for k in ("v", "d", "q") if k not in doc]
    if missing:
        raise ParseError(f"missing keys: {', '.join(missing)}")
    v = _dec(doc["v"], "v", 1)
    d = _dec(doc["d"], "d", 1)
    q = _dec(doc["q"], "q", 2)
    return validate_and_classify(v, d, q)


def read_model(path) -> MmbmModel:
    return load_model(_read_json(path))


def write_model(path, v, d, Q) -> None:
    doc = {"v": _enc(v), "d": _enc(d), "q": _enc(Q)}
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def solution_to_dict(m: MmbmModel, sol: StationarySolution) -> dict:
    return {
        "model": model_to_dict(m),
        "mode": sol.mode.value,
        "h": repr(float(sol.h)),
        "iterations": sol.iterations,
        "recurrence": sol.recurrence.value,
        "drift": repr(float(sol.drift)),
        "keep": sol.keep.tolist(),
        "e3": sol.e3.tolist(),
        "s": repr(float(sol.s)),
        "P": _enc(sol.P),
        "X": _enc(sol.X),
        "Psi": _enc(sol.Psi),
        "u": _enc(sol.u),
        "p0": _enc(sol.p0),
        "v_coef": _enc(sol.v_coef),
        "xtriplet": {"m": _enc(sol.xt.m), "v": _enc(sol.xt.v), "w": _enc(sol.xt.w)},
        "diagnostics": {"residual": repr(float(sol.residual)), **{k: repr(float(x)) for k, x in sol.diagnostics.items()}},
    }


def write_solution(path, m: MmbmModel, sol: StationarySolution) -> None:
    doc = solution_to_dict(m, sol)
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def read_solution(path) -> tuple[MmbmModel, StationarySolution]:
    """Parse a solution file back into the model and the solution."""
    doc = _read_json(path)
    try:
        m = load_model(doc["model"])
        ell = len(doc["keep"])
        n3 = len(doc["e3"])
        psi = _dec(doc["Psi"], "Psi", 2).reshape(ell, n3)
        diag = {k: float(v) for k, v in doc["diagnostics"].items()}
        residual = diag.pop("residual")
        opt = lambda key: None if doc[key] is None else _dec(doc[key], key, 1)  # noqa: E731
        xt = doc["xtriplet"]
        sol = StationarySolution(
            X=_dec(doc["X"], "X", 2).reshape(ell, ell),
            s=float(doc["s"]),
            P=_dec(doc["P"], "P", 2).reshape(ell, ell),
            Psi=psi,
            keep=np.asarray(doc["keep"], dtype=int),
            e3=np.asarray(doc["e3"], dtype=int),
            xt=TripletRep(
                _dec(xt["m"], "xtriplet.m", 2).reshape(ell, ell),
                _dec(xt["v"], "xtriplet.v", 1),
                _dec(xt["w"], "xtriplet.w", 1),
            ),
            u=_dec(doc["u"], "u", 1),
            p0=opt("p0"),
            v_coef=opt("v_coef"),
            h=float(doc["h"]),
            mode=Mode(doc["mode"]),
            iterations=int(doc["iterations"]),
            recurrence=Recurrence(doc["recurrence"]),
            drift=float(doc["drift"]),
            residual=residual,
            diagnostics=diag,
        )
    except MmbmError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed solution file {path}: {exc}") from exc
    return m, sol
