"""Random QBD triples for property tests."""

import numpy as np

from mmbm_cr.cr import QbdTriple, Recurrence, drift_d


def random_triple(rng, n, *, density=0.7, min_rel_drift=0.0):
    """Draw ``(A, offdiag(B), C)`` with random sparsity until the drift
    ``u (C - A) 1`` is at least ``min_rel_drift`` times ``u (C + A) 1``."""
    while True:
        mask = lambda: rng.random((n, n)) < density  # noqa: E731
        A = rng.exponential(size=(n, n)) * mask()
        C = rng.exponential(size=(n, n)) * mask()
        offB = -rng.exponential(size=(n, n)) * mask()
        np.fill_diagonal(offB, 0.0)
        # keep the chain irreducible through a cycle in the off-diagonal of B
        idx = np.arange(n)
        offB[idx, (idx + 1) % n] -= 0.1
        A *= rng.uniform(0.2, 2.0)
        q = QbdTriple.from_blocks(A, offB, C)
        d, rec = drift_d(q)
        scale = float(q.u @ (A.sum(axis=1) + C.sum(axis=1)))
        if rec is not Recurrence.NULL and abs(d) >= min_rel_drift * scale:
            return q


def null_triple(n=3):
    """Symmetric triple with ``A = C``, hence zero drift."""
    A = np.full((n, n), 0.25 / n)
    offB = -np.full((n, n), 0.1)
    np.fill_diagonal(offB, 0.0)
    return QbdTriple.from_blocks(A, offB, A.copy())
