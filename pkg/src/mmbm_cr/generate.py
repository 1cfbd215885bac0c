"""Reproducible random test families.

``rand``
    ``V = diag(|N|)``, ``D = diag(N)``, ``Q`` with ``|N|`` off-diagonal rates;
``imb``
    every standard normal draw ``N`` is replaced by ``N * exp(5 N')``, so
    entries span many orders of magnitude;
``rands``, ``imbs``
    as above with the last four variances set to zero.

Normal deviates come from the Philox-4x64 counter-based generator through
an explicit Box-Muller transform, so streams are fixed by ``(family, n,
seed)`` alone and do not depend on numpy's (version-dependent) normal
sampler.  Draws are taken in this order: ``v`` (n), ``d`` (n), then the
``n x n`` rate matrix row by row (diagonal draws are discarded).  For the
imbalanced families each matrix consumes the normals for its values first
and then those for its scale factors.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import BadSize
from .model import MmbmModel, validate_and_classify

__all__ = ["Family", "ProblemSpec", "NormalStream", "generate", "generate_raw"]


class Family(enum.Enum):
    RAND = "rand"
    RANDS = "rands"
    IMB = "imb"
    IMBS = "imbs"
    CUSTOM = "custom"

    @property
    def zero_variances(self) -> bool:
        return self in (Family.RANDS, Family.IMBS)

    @property
    def imbalanced(self) -> bool:
        return self in (Family.IMB, Family.IMBS)


@dataclass(frozen=True)
class ProblemSpec:
    family: Family
    n: int
    seed: int
    model: MmbmModel

    @property
    def problem_id(self) -> str:
        return f"{self.family.value}{self.n}-s{self.seed}"


class NormalStream:
    """Standard normals by Box-Muller on Philox uniforms in ``(0, 1]``."""

    def __init__(self, seed: int):
        self._bits = np.random.Philox(key=int(seed) & (2**64 - 1), counter=0)

    def _uniform(self, size: int) -> np.ndarray:
        raw = self._bits.random_raw(size)
        # top 53 bits; +1 keeps the value away from zero for the logarithm
        return ((raw >> np.uint64(11)).astype(float) + 1.0) * 2.0**-53

    def normal(self, size: int) -> np.ndarray:
        pairs = (size + 1) // 2
        u1 = self._uniform(pairs)
        u2 = self._uniform(pairs)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(2.0 * np.pi * u2)
        z[1::2] = r * np.sin(2.0 * np.pi * u2)
        return z[:size]


def _draw(stream: NormalStream, shape, imbalanced: bool) -> np.ndarray:
    size = int(np.prod(shape))
    x = stream.normal(size)
    if imbalanced:
        x = x * np.exp(5.0 * stream.normal(size))
    return x.reshape(shape)


def generate_raw(family: Family | str, n: int, seed: int):
    """Return ``(v, d, Q)`` before validation."""
    family = Family(family) if isinstance(family, str) else family
    if family is Family.CUSTOM:
        raise ValueError("custom problems are read from files, not generated")
    if n < 2 or (family.zero_variances and n < 5):
        raise BadSize(f"n = {n} too small for family {family.value}")
    stream = NormalStream(seed)
    imb = family.imbalanced
    v = np.abs(_draw(stream, n, imb))
    d = _draw(stream, n, imb)
    T = np.abs(_draw(stream, (n, n), imb))
    np.fill_diagonal(T, 0.0)
    Q = T - np.diag(T.sum(axis=1))
    if family.zero_variances:
        v[-4:] = 0.0
    return v, d, Q


def generate(family: Family | str, n: int, seed: int) -> ProblemSpec:
    """Draw a validated problem; identical arguments give identical models."""
    family = Family(family) if isinstance(family, str) else family
    v, d, Q = generate_raw(family, n, seed)
    return ProblemSpec(family, n, int(seed), validate_and_classify(v, d, Q))
