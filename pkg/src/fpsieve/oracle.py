"""Brute-force frequent itemset enumeration, for checking the miner at desk scale.

Deliberately naive: every candidate itemset is counted by a full pass over
the transactions, with no pruning, ordering or shared work.
"""
from __future__ import annotations

from itertools import combinations
from math import comb

from .core import VerticalDatabase

DEFAULT_BUDGET = 100_000


class OracleBudgetError(RuntimeError):
    pass


def enumerate_frequent(
    db: VerticalDatabase, min_support: int, max_len: int, budget: int = DEFAULT_BUDGET
) -> dict[frozenset[int], int]:
    M = db.item_count
    width = min(max_len, M)
    if comb(M, width) > budget:
        raise OracleBudgetError(f"C({M}, {width}) = {comb(M, width)} itemsets exceeds budget {budget}")
    transactions = db.to_transactions()
    found: dict[frozenset[int], int] = {}
    for k in range(1, width + 1):
        for itemset in combinations(range(M), k):
            support = 0
            for row in transactions:
                if all(item in row for item in itemset):
                    support += 1
            if support >= min_support:
                found[frozenset(itemset)] = support
    return found
