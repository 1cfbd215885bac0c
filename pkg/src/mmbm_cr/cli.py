"""Command-line interface: ``python -m mmbm_cr {gen,solve,density,bench}``.

Exit codes: 0 success, 2 unreadable input or bad arguments, 3 rejected
model, 4 no convergence, 5 any other numerical failure.  Set ``MMBM_LOG``
(e.g. ``INFO``, ``DEBUG``) for progress messages on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import (
    BadSize,
    HViolation,
    MmbmError,
    ModelError,
    NoConvergence,
    ParseError,
    Reducible,
)

__all__ = ["main", "solve_file", "EXIT_OK", "EXIT_PARSE", "EXIT_MODEL", "EXIT_NOCONV", "EXIT_NUMERIC"]

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_MODEL = 3
EXIT_NOCONV = 4
EXIT_NUMERIC = 5

log = logging.getLogger("mmbm_cr")


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, (ModelError, Reducible, HViolation, BadSize)):
        return EXIT_MODEL
    if isinstance(exc, NoConvergence):
        return EXIT_NOCONV
    return EXIT_NUMERIC


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text}") from exc


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text}") from exc


def _h_arg(text: str):
    if text == "auto":
        return None
    try:
        h = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("h must be a positive number or 'auto'") from exc
    if not h > 0:
        raise argparse.ArgumentTypeError("h must be positive")
    return h


def solve_file(in_path, mode="auto", h=None, tol=None, out_path=None) -> int:
    """Solve the model in ``in_path`` and write the solution to ``out_path``."""
    from .io import read_model, write_solution
    from .solve import solve

    try:
        m = read_model(in_path)
        sol = solve(m, mode, h, tol)
        write_solution(out_path, m, sol)
    except MmbmError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code(exc)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    log.info("residual %.3e after %d iterations", sol.residual, sol.iterations)
    return EXIT_OK


def _cmd_gen(a) -> int:
    from .generate import generate_raw
    from .io import write_model

    v, d, Q = generate_raw(a.family, a.n, a.seed)
    write_model(a.out, v, d, Q)
    return EXIT_OK


def _cmd_solve(a) -> int:
    return solve_file(a.inp, a.mode, a.h, a.tol, a.out)


def _cmd_density(a) -> int:
    from .io import read_solution
    from .solve import eval_density

    _, sol = read_solution(a.inp)
    for x in a.x:
        p = eval_density(sol, x)
        print(",".join([repr(x)] + [repr(float(t)) for t in p]))
    return EXIT_OK


def _cmd_bench(a) -> int:
    from .bench import run_bench, write_csv

    rows = run_bench(a.families, a.sizes, a.seeds, a.modes, oracle=not a.no_oracle, timing=not a.no_timing)
    if a.out == "-":
        write_csv(rows, sys.stdout)
    else:
        write_csv(rows, a.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mmbm-cr", description="Stationary analysis of Markov-modulated Brownian motion.")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="write a random model file")
    g.add_argument("--family", required=True, choices=["rand", "rands", "imb", "imbs"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("solve", help="solve a model file")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--mode", default="auto", choices=["auto", "posv", "shifted", "sda"])
    s.add_argument("--h", type=_h_arg, default=None)
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_solve)

    d = sub.add_parser("density", help="evaluate the stationary density from a solution file")
    d.add_argument("--in", dest="inp", required=True)
    d.add_argument("--x", type=_csv_floats, required=True)
    d.set_defaults(func=_cmd_density)

    b = sub.add_parser("bench", help="run the benchmark table")
    b.add_argument("--families", type=lambda t: [x for x in t.split(",") if x], required=True)
    b.add_argument("--sizes", type=_csv_ints, required=True)
    b.add_argument("--seeds", type=int, required=True)
    b.add_argument("--modes", type=lambda t: [x for x in t.split(",") if x], default=["auto"])
    b.add_argument("--no-oracle", action="store_true", help="skip the extended-precision reference")
    b.add_argument("--no-timing", action="store_true", help="report zero wall time (deterministic output)")
    b.add_argument("--out", required=True, help="CSV path, or - for stdout")
    b.set_defaults(func=_cmd_bench)
    return p


def main(argv=None) -> int:
    level = os.environ.get("MMBM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MmbmError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code(exc)
    except ValueError as exc:
        # argument combinations argparse cannot see, e.g. posv with zero variances
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
