"""Batch runs over the generated families, one CSV row per (problem, mode)."""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import asdict, dataclass, fields
from typing import Iterable

from .errors import MmbmError
from .generate import generate
from .model import choose_h
from .oracle import compare, oracle_solve
from .solve import solve

__all__ = ["BenchRow", "run_bench", "write_csv", "BENCH_COLUMNS"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchRow:
    problem_id: str
    mode: str
    h: float
    iterations: int
    residual: float
    fwd_X: float
    fwd_Psi: float
    cw_X: float
    wall_time: float
    error: str = ""


BENCH_COLUMNS = [f.name for f in fields(BenchRow)]


def _seeds(seeds) -> list[int]:
    return list(range(seeds)) if isinstance(seeds, int) else [int(s) for s in seeds]


def run_bench(
    families: Iterable[str],
    sizes: Iterable[int],
    seeds: int | Iterable[int],
    modes: Iterable[str] = ("auto",),
    *,
    oracle: bool = True,
    timing: bool = True,
) -> list[BenchRow]:
    """Generate, solve, compare with the oracle; never abort on one failure.

    ``seeds`` is a count (seeds ``0 .. seeds-1``) or an explicit list.  A
    failing cell keeps whatever was computed and names the exception in
    ``error``.  With ``timing=False`` the wall time is reported as ``0`` so
    that repeated runs give identical tables.
    """
    rows = []
    seeds = _seeds(seeds)
    modes = list(modes)
    for family in families:
        for n in sizes:
            for seed in seeds:
                for mode in modes:
                    rows.append(_cell(family, int(n), seed, mode, oracle, timing))
    return rows


def _cell(family, n, seed, mode, use_oracle, timing) -> BenchRow:
    nan = math.nan
    pid = f"{family}{n}-s{seed}"
    out = dict(problem_id=pid, mode=mode, h=nan, iterations=0, residual=nan,
               fwd_X=nan, fwd_Psi=nan, cw_X=nan, wall_time=0.0, error="")
    try:
        spec = generate(family, n, seed)
        out["h"] = choose_h(spec.model)
        t0 = time.perf_counter()
        sol = solve(spec.model, mode)
        elapsed = time.perf_counter() - t0
        out.update(mode=sol.mode.value, iterations=sol.iterations, residual=sol.residual,
                   wall_time=elapsed if timing else 0.0)
        if use_oracle:
            ref = oracle_solve(spec.model, sol.mode, sol.h)
            rep = compare(sol, ref)
            out.update(fwd_X=rep.fwd_X, fwd_Psi=rep.fwd_Psi, cw_X=rep.cw_X)
    except (MmbmError, ValueError, ArithmeticError) as exc:
        log.warning("%s/%s failed: %s", pid, mode, exc)
        out["error"] = f"{type(exc).__name__}: {exc}"
    return BenchRow(**out)


def write_csv(rows: Iterable[BenchRow], path_or_file) -> None:
    """Write rows with the columns of :class:`BenchRow`, floats in repr form."""
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in asdict(r).values()])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            emit(fh)
