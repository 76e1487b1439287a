"""Synthetic benchmark databases.

Streams come from ``numpy.random.default_rng(seed)`` (the PCG64 bit
generator), drawn item by item, so a given (parameters, seed) pair always
yields the same database with this numpy major version.
"""
from __future__ import annotations

import numpy as np

from .core import VerticalDatabase

RNG_ALGORITHM = "PCG64"


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def generate_bernoulli(M: int, N: int, p: float, seed: int = 0) -> VerticalDatabase:
    """Each of ``M`` items appears independently in each of ``N`` transactions with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    if M < 0 or N < 0:
        raise ValueError("M and N must be non-negative")
    rng = _rng(seed)
    lists = []
    for _ in range(M):
        present = rng.random(N) < p
        lists.append((np.flatnonzero(present) + 1).astype(np.int32))
    return VerticalDatabase(
        names=tuple(f"x{k}" for k in range(1, M + 1)),
        tid_lists=tuple(lists),
        n_transactions=N,
    )


def plant_dependency(
    db: VerticalDatabase,
    source: int,
    target: int,
    copy_prob: float,
    seed: int = 0,
    base_rate: float | None = None,
) -> VerticalDatabase:
    """Redraw ``target`` so that it depends on ``source``.

    In transactions containing ``source`` the target is present with
    probability ``copy_prob``; elsewhere with ``(1 - copy_prob) * base_rate``,
    clipped to 1.

    ``base_rate`` defaults to ``p_t / (1 - p_s)`` from the current marginals.
    When source and target share a rate ``p`` this leaves the target's
    marginal at ``p`` for every ``copy_prob``, and ``copy_prob = p`` makes the
    redrawn target independent of the source.
    """
    if source == target:
        raise ValueError("source and target must differ")
    if not 0.0 <= copy_prob <= 1.0:
        raise ValueError("copy_prob must be in [0, 1]")
    N = db.n_transactions
    if base_rate is None:
        p_s = len(db.tid_lists[source]) / N if N else 0.0
        p_t = len(db.tid_lists[target]) / N if N else 0.0
        base_rate = p_t / (1.0 - p_s) if p_s < 1.0 else 0.0
    in_source = np.zeros(N, dtype=bool)
    in_source[db.tid_lists[source] - 1] = True
    draw = _rng(seed).random(N)
    prob = np.where(in_source, copy_prob, min((1.0 - copy_prob) * base_rate, 1.0))
    lists = list(db.tid_lists)
    lists[target] = (np.flatnonzero(draw < prob) + 1).astype(np.int32)
    return VerticalDatabase(names=db.names, tid_lists=tuple(lists), n_transactions=N)
