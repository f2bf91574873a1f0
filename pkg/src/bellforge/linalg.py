"""Fraction-free integer elimination: rank, determinants, solves."""
from __future__ import annotations

from math import gcd

import numpy as np


def bareiss_rank(rows) -> int:
    """Exact rank of an integer matrix by Bareiss elimination."""
    m = [list(map(int, r)) for r in rows]
    if not m:
        return 0
    nrows, ncols = len(m), len(m[0])
    rank, prev = 0, 1
    for col in range(ncols):
        piv = next((r for r in range(rank, nrows) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        p = m[rank][col]
        for r in range(rank + 1, nrows):
            a = m[r][col]
            row, prow = m[r], m[rank]
            for c in range(col + 1, ncols):
                row[c] = (p * row[c] - a * prow[c]) // prev
            row[col] = 0
        prev = p
        rank += 1
        if rank == nrows:
            break
    return rank


def bareiss_solve(a, b):
    """Solve ``a x = b`` for square integer ``a`` without fractions.

    Returns ``(det, y)`` with ``a y = det * b``; ``det == 0`` means singular
    (``y`` is then None).  ``b`` is a list of right-hand-side columns given
    as rows of the augmented block, i.e. ``b[i][j]`` is row i of column j.
    """
    n = len(a)
    k = len(b[0]) if b else 0
    m = [list(map(int, a[i])) + list(map(int, b[i])) for i in range(n)]
    width = n + k
    sign, prev = 1, 1
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return 0, None
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            sign = -sign
        p = m[col][col]
        prow = m[col]
        for r in range(n):
            if r == col:
                continue
            row = m[r]
            f = row[col]
            for c in range(width):
                if c != col:
                    row[c] = (p * row[c] - f * prow[c]) // prev
            row[col] = 0
        prev = p
    # fraction-free Gauss-Jordan leaves every diagonal entry equal to the
    # determinant of the row-swapped matrix
    det = m[n - 1][n - 1]
    y = [[m[i][n + j] * sign for j in range(k)] for i in range(n)]
    return det * sign, y


class RowSpace:
    """Incrementally grown echelon basis over the integers.

    Rows are reduced fraction-free (cross-multiplication, then division by the
    row gcd), so ``add`` is exact and the rank never depends on a tolerance.
    """

    def __init__(self, width: int):
        self.width = width
        self.pivots: list[int] = []
        self.rows: list[list[int]] = []

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, v) -> list[int]:
        v = list(map(int, v))
        for piv, row in zip(self.pivots, self.rows):
            a = v[piv]
            if a:
                p = row[piv]
                v = [p * x - a * y for x, y in zip(v, row)]
                g = 0
                for x in v:
                    if x:
                        g = gcd(g, x)
                        if g == 1:
                            break
                if g > 1:
                    v = [x // g for x in v]
        return v

    def add(self, v) -> bool:
        """Insert ``v``; returns True if it was independent of the basis."""
        if self.rank == self.width:
            return False
        r = self.reduce(v)
        piv = next((i for i, x in enumerate(r) if x), None)
        if piv is None:
            return False
        self.pivots.append(piv)
        self.rows.append(r)
        return True


# Rows independent modulo a prime are independent over the rationals (a
# rational dependency, scaled to coprime integers, survives reduction mod p),
# so modular rank is a lower bound on exact rank that is cheap to vectorize.
MODULUS = 8_388_593  # largest prime below 2**23; products stay inside int64


class ModularRowSpace:
    """Reduced row-echelon basis modulo ``MODULUS``, grown batch by batch."""

    def __init__(self, width: int, p: int = MODULUS):
        self.width = width
        self.p = p
        self.pivots: list[int] = []
        self.basis = np.zeros((0, width), dtype=np.int64)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def add_batch(self, rows: np.ndarray) -> list[int]:
        """Insert rows; returns indices (into ``rows``) that raised the rank."""
        p = self.p
        B = np.mod(np.asarray(rows, dtype=np.int64), p)
        if self.pivots:
            B = np.mod(B - np.mod(B[:, self.pivots] @ self.basis, p), p)
        taken = []
        for i in range(B.shape[0]):
            if self.rank == self.width:
                break
            row = B[i]
            nz = np.flatnonzero(row)
            if nz.size == 0:
                continue
            piv = int(nz[0])
            row = np.mod(row * pow(int(row[piv]), -1, p), p)
            # keep the basis fully reduced and clear the pivot from later rows
            if self.rank:
                f = self.basis[:, piv].copy()
                self.basis = np.mod(self.basis - np.mod(np.outer(f, row), p), p)
            rest = B[i + 1 :]
            if rest.shape[0]:
                f = rest[:, piv].copy()
                B[i + 1 :] = np.mod(rest - np.mod(np.outer(f, row), p), p)
            self.basis = np.vstack([self.basis, row])
            self.pivots.append(piv)
            taken.append(i)
        return taken
