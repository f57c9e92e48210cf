"""Exact small-graph matching primitives for syndrome pairing.

The decoder reduces minimum-cost syndrome pairing (pair two defects at
their graph distance or send either to the boundary at its own cost) to
maximum-weight matching on a "savings" graph: pairing i with j saves
``b_i + b_j - d_ij`` over sending both to the boundary, and only pairs
with positive savings can ever appear in an optimal solution.  Defects
rarely interact, so the positive-savings graph splits into small
connected components that are matched exactly by exhaustive subset DP.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numba import njit

__all__ = [
    "match_component",
    "match_component_py",
    "min_cost_pairing",
    "MAX_DP_NODES",
]

MAX_DP_NODES = 20  # 2**20-entry DP tables; larger components fall back


@njit(cache=True)
def match_component(k, savings, dp, choice):
    """Maximum-weight matching on a dense savings matrix via subset DP.

    ``savings`` is (k, k) with non-positive entries meaning "no edge";
    ``dp`` (float64) and ``choice`` (int32) are scratch buffers of length
    at least 2**k.  Returns the total savings; afterwards ``choice[mask]``
    holds the partner chosen for the lowest vertex of ``mask`` (-1 for
    unmatched), from which callers backtrack the pair list.
    """
    dp[0] = 0.0
    for mask in range(1, 1 << k):
        i = 0
        while not (mask >> i) & 1:
            i += 1
        rest = mask & ~(1 << i)
        best = dp[rest]  # vertex i left unmatched
        best_j = -1
        for j in range(i + 1, k):
            if (rest >> j) & 1 and savings[i, j] > 0.0:
                cand = savings[i, j] + dp[rest & ~(1 << j)]
                if cand > best:
                    best = cand
                    best_j = j
        dp[mask] = best
        choice[mask] = best_j
    return dp[(1 << k) - 1]


def backtrack_pairs(k: int, choice: np.ndarray) -> list[tuple[int, int]]:
    """Recover the matched pairs recorded by :func:`match_component`."""
    pairs = []
    mask = (1 << k) - 1
    while mask:
        i = (mask & -mask).bit_length() - 1
        j = int(choice[mask])
        if j < 0:
            mask &= ~(1 << i)
        else:
            pairs.append((i, j))
            mask &= ~(1 << i) & ~(1 << j)
    return pairs


def match_component_py(k: int, savings: np.ndarray) -> tuple[float, list[tuple[int, int]]]:
    """Memoized-recursion twin of :func:`match_component` for components
    larger than ``MAX_DP_NODES`` (rare) and for cross-checking in tests.
    Exact for any k; only visits subsets reachable through positive edges.
    """

    @lru_cache(maxsize=None)
    def best(mask: int) -> tuple[float, int]:
        if mask == 0:
            return 0.0, -1
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        value, pick = best(rest)[0], -1
        for j in range(i + 1, k):
            if (rest >> j) & 1 and savings[i, j] > 0.0:
                cand = savings[i, j] + best(rest & ~(1 << j))[0]
                if cand > value:
                    value, pick = cand, j
        return value, pick

    total = best((1 << k) - 1)[0]
    pairs = []
    mask = (1 << k) - 1
    while mask:
        i = (mask & -mask).bit_length() - 1
        _, j = best(mask)
        if j < 0:
            mask &= ~(1 << i)
        else:
            pairs.append((i, j))
            mask &= ~(1 << i) & ~(1 << j)
    best.cache_clear()
    return total, pairs


def min_cost_pairing(
    pair_cost: np.ndarray, boundary_cost: np.ndarray
) -> tuple[float, list[tuple[int, int]]]:
    """Exhaustive minimum-cost pairing over the *original* cost model.

    Every defect either pairs with another (``pair_cost[i, j]``) or goes
    to the boundary (``boundary_cost[i]``, encoded as a pair (i, -1)).
    Enumerates all pairings directly — no savings transform, no DP reuse —
    so it serves as an independent oracle.  Ties break lexicographically
    on the sorted pair list.  Exponential: intended for <= 12 defects.
    """
    k = len(boundary_cost)
    if k > 14:
        raise ValueError(f"exhaustive pairing limited to 14 defects, got {k}")
    best: tuple[float, tuple[tuple[int, int], ...]] = (float("inf"), ())

    def recurse(remaining: tuple[int, ...], cost: float, pairs: tuple):
        nonlocal best
        if not remaining:
            key = tuple(sorted(pairs))
            if cost < best[0] - 1e-12 or (
                abs(cost - best[0]) <= 1e-12 and key < best[1]
            ):
                best = (cost, key)
            return
        i, rest = remaining[0], remaining[1:]
        recurse(rest, cost + boundary_cost[i], pairs + ((i, -1),))
        for idx, j in enumerate(rest):
            c = pair_cost[i, j]
            if np.isfinite(c):
                recurse(
                    rest[:idx] + rest[idx + 1 :], cost + c, pairs + ((i, j),)
                )

    recurse(tuple(range(k)), 0.0, ())
    return best[0], list(best[1])
