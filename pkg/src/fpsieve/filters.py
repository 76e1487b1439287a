"""Statistical-independence filter and same-frequency grouping."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Iterable

import numpy as np
from numba import njit

from .core import LevelContext, Pattern, compute_rate


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    epsilon: float
    ratio_deviation: float


@njit(cache=True, nogil=True)
def deviation_and_epsilon(f_pattern, f_prefix, f_last, n, sigma):
    """Return ``(|f/(Nq) - 1|, sigma * sqrt(1 - q) / sqrt(Nq))`` with q = (f_prefix/N)(f_last/N).

    The tolerance is ``sigma`` binomial standard deviations of the pattern
    count expected if prefix and last element were independent, expressed
    relative to that expected count.
    """
    q = (f_prefix / n) * (f_last / n)
    nq = n * q
    deviation = abs(f_pattern / nq - 1.0)
    epsilon = sigma * math.sqrt(max(1.0 - q, 0.0)) / math.sqrt(nq)
    return deviation, epsilon


def independence_check(
    f_pattern: int, f_prefix: int, f_last: int, n: int, sigma_multiplier: float = 3.0
) -> FilterDecision:
    """Decide whether a pattern is explained by independence of its prefix and last element.

    ``keep`` is True when the observed count deviates from the independent
    expectation by more than the tolerance, i.e. the pattern is non-reducible.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (1 <= f_prefix <= n and 1 <= f_last <= n):
        raise ValueError("component frequencies must lie in [1, n]")
    if not 0 <= f_pattern <= min(f_prefix, f_last):
        raise ValueError("pattern frequency exceeds a component frequency")
    dev, eps = deviation_and_epsilon(f_pattern, f_prefix, f_last, n, float(sigma_multiplier))
    return FilterDecision(keep=bool(dev > eps), epsilon=float(eps), ratio_deviation=float(dev))


def same_frequency_group(child: LevelContext, ref_frequency: int) -> tuple[LevelContext, tuple[int, ...]]:
    """Split off the elements present in every transaction of ``child``.

    Returns the compacted child (storage rebuilt so lists stay contiguous,
    rate recomputed) and the removed ItemIds in storage order.
    """
    hit = child.freqs == ref_frequency
    if not hit.any():
        return child, ()
    group = tuple(int(x) for x in child.names[hit])
    keep = np.flatnonzero(~hit)
    chunks = [child.raw_list(j) for j in keep]
    sizes = np.array([len(c) for c in chunks], dtype=np.int64)
    addrs = np.zeros(len(keep), dtype=np.int64)
    if len(keep):
        addrs[1:] = np.cumsum(sizes)[:-1]
    storage = np.concatenate(chunks) if chunks else child.storage[:0].copy()
    freqs = child.freqs[keep]
    pruned = replace(
        child,
        storage=storage,
        names=child.names[keep],
        freqs=freqs,
        addrs=addrs,
        ends=addrs + sizes,
        rate=compute_rate(freqs),
        group=child.group + group,
    )
    return pruned, group


def expand_grouped(patterns: Iterable[Pattern]) -> dict[frozenset[int], int]:
    """Itemset -> support for every pattern implied by grouped patterns.

    Each grouped pattern stands for its reference chain joined with any
    subset of its group elements, all at the same support.
    """
    out: dict[frozenset[int], int] = {}
    for pattern in patterns:
        base = frozenset(pattern.items)
        group = pattern.group
        for r in range(len(group) + 1):
            for extra in combinations(group, r):
                out[base | frozenset(extra)] = pattern.support
    return out
