"""Exact rank and determinant of rational matrices.

Rank uses fraction-free Bareiss elimination on integers (each row is first
scaled by its denominators' least common multiple, which changes neither
rank nor the zero pattern), so intermediate values stay integral and exact.
Pivoting is deterministic: the first row with a nonzero entry wins.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for row in rows:
        fr = [Fraction(x) for x in row]
        den = math.lcm(*(x.denominator for x in fr)) if fr else 1
        out.append([int(x * den) for x in fr])
    return out


def exact_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    M = _integer_rows(rows)
    if not M or not M[0]:
        return 0
    n_rows, n_cols = len(M), len(M[0])
    if any(len(r) != n_cols for r in M):
        raise ValueError("ragged matrix")
    rank = 0
    prev = 1
    r = 0
    for c in range(n_cols):
        pivot = next((i for i in range(r, n_rows) if M[i][c]), None)
        if pivot is None:
            continue
        M[r], M[pivot] = M[pivot], M[r]
        for i in range(r + 1, n_rows):
            for j in range(c + 1, n_cols):
                M[i][j] = (M[i][j] * M[r][c] - M[i][c] * M[r][j]) // prev
            M[i][c] = 0
        prev = M[r][c]
        rank += 1
        r += 1
        if r == n_rows:
            break
    return rank


def exact_det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("determinant needs a square matrix")
    M = [[Fraction(x) for x in row] for row in rows]
    det = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if M[i][c]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            M[c], M[pivot] = M[pivot], M[c]
            det = -det
        det *= M[c][c]
        inv = 1 / M[c][c]
        for i in range(c + 1, n):
            f = M[i][c] * inv
            if f:
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return det
