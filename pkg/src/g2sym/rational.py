"""Exact linear algebra over Q for small dense matrices.

Matrices are lists of rows.  Entries may be ints or Fractions.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

Matrix = Sequence[Sequence]


def _integer_rows(rows: Matrix) -> list[list[int]]:
    # scale each row by the lcm of its denominators; rank is unchanged
    out = []
    for row in rows:
        fr = [Fraction(x) for x in row]
        den = math.lcm(*(f.denominator for f in fr)) if fr else 1
        out.append([int(f * den) for f in fr])
    return out


def rank(rows: Matrix) -> int:
    """Rank by fraction-free (Bareiss) elimination."""
    m = _integer_rows(rows)
    if not m or not m[0]:
        return 0
    nrows, ncols = len(m), len(m[0])
    r = 0
    prev = 1
    for c in range(ncols):
        if r == nrows:
            break
        pivot = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        p = m[r][c]
        for i in range(r + 1, nrows):
            a = m[i][c]
            row_i, row_r = m[i], m[r]
            for j in range(c + 1, ncols):
                # exact division is guaranteed by Sylvester's identity
                row_i[j] = (p * row_i[j] - a * row_r[j]) // prev
            row_i[c] = 0
        prev = p
        r += 1
    return r


def rref(rows: Matrix) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return m, []
    nrows, ncols = len(m), len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        pivot = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def nullspace(rows: Matrix, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {x : A x = 0}, one vector per free column (free entry = 1)."""
    if ncols is None:
        if not rows:
            raise ValueError("ncols required for a matrix with no rows")
        ncols = len(rows[0])
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    R, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -R[i][f]
        basis.append(v)
    return basis


def matmul_vec(rows: Matrix, v: Sequence) -> list:
    return [sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in rows]


def transpose(rows: Matrix, ncols: int | None = None) -> list[list]:
    if not rows:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*rows)]
