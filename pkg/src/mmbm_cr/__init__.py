"""Componentwise accurate stationary analysis of Markov-modulated Brownian motion.

The core is a subtraction-free cyclic reduction for quadratic matrix
equations of quasi-birth-death type; every M-matrix is handled through a
triplet representation and inverted by GTH elimination.  On top of it,
:func:`solve` computes the c-stable invariant pair ``(X, [I Psi])`` of
``V z^2 - D z + Q``, a triplet representation of ``-X^T`` and the
coefficients of the stationary density.
"""

from .cr import CrOutput, QbdTriple, Recurrence, cr_run, drift_d
from .discretize import Discretization, Mode, discretize
from .errors import *  # noqa: F401,F403
from .extended import ExtendedReal
from .generate import Family, ProblemSpec, generate
from .mmatrix import TripletRep, gth_factor, gth_invert, gth_solve, perron_left, schur_triplet
from .model import MmbmModel, choose_h, mean_drift, validate_and_classify
from .oracle import ErrorReport, compare, oracle_solve, qbd_fixed_point_G
from .solve import StationarySolution, eval_density, relative_residual, solve

__version__ = "0.1.0"

__all__ = [
    "CrOutput", "QbdTriple", "Recurrence", "cr_run", "drift_d",
    "Discretization", "Mode", "discretize",
    "ExtendedReal",
    "Family", "ProblemSpec", "generate",
    "TripletRep", "gth_factor", "gth_invert", "gth_solve", "perron_left", "schur_triplet",
    "MmbmModel", "choose_h", "mean_drift", "validate_and_classify",
    "ErrorReport", "compare", "oracle_solve", "qbd_fixed_point_G",
    "StationarySolution", "eval_density", "relative_residual", "solve",
]
