"""Tiny GF(2) toolkit over integer bitmasks.

Rows are Python ints (bit ``i`` = column ``i``), which keeps row reduction,
membership tests and coset canonicalization allocation-free for the vector
lengths that show up here (a few hundred columns).
"""

from __future__ import annotations

from typing import Sequence

__all__ = ["ReducedBasis", "reduce_basis"]


class ReducedBasis:
    """A row-reduced GF(2) basis supporting reduction and membership tests."""

    __slots__ = ("rows", "pivots")

    def __init__(self, rows: list[int], pivots: list[int]):
        self.rows = rows
        self.pivots = pivots

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, v: int) -> int:
        """Canonical coset representative of ``v`` modulo the row space."""
        for row, piv in zip(self.rows, self.pivots):
            if (v >> piv) & 1:
                v ^= row
        return v

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0


def reduce_basis(vectors: Sequence[int]) -> ReducedBasis:
    """Row-reduce ``vectors`` to echelon form (lowest set bit as pivot)."""
    rows: list[int] = []
    pivots: list[int] = []
    for v in vectors:
        for row, piv in zip(rows, pivots):
            if (v >> piv) & 1:
                v ^= row
        if v:
            piv = (v & -v).bit_length() - 1
            # back-eliminate so reduce() gives a unique representative
            for i, r in enumerate(rows):
                if (r >> piv) & 1:
                    rows[i] = r ^ v
            rows.append(v)
            pivots.append(piv)
    order = sorted(range(len(rows)), key=lambda i: pivots[i])
    return ReducedBasis([rows[i] for i in order], [pivots[i] for i in order])
