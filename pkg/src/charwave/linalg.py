"""Exact linear algebra over the rationals by fraction-free elimination."""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence


def _integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    out = []
    for row in rows:
        row = [Fraction(v) for v in row]
        scale = lcm(*(v.denominator for v in row)) if row else 1
        out.append([int(v * scale) for v in row])
    return out


def echelon(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list[int]], list[int]]:
    """Bareiss elimination. Returns integer echelon rows and pivot columns."""
    m = _integer_rows(rows)
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r, prev = 0, 1
    for col in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r][col]
        for i in range(r + 1, len(m)):
            a = m[i][col]
            if a == 0:
                m[i] = [(piv * x) // prev for x in m[i]]
                continue
            m[i] = [(piv * x - a * y) // prev for x, y in zip(m[i], m[r])]
        prev = piv
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    return len(echelon(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Basis of ``{c : rows @ c = 0}`` as primitive integer vectors (Fractions)."""
    ech, pivots = echelon(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        sol = [Fraction(0)] * ncols
        sol[f] = Fraction(1)
        for row, pc in reversed(list(zip(ech, pivots))):
            s = sum((Fraction(row[j]) * sol[j] for j in range(pc + 1, ncols) if row[j]), Fraction(0))
            sol[pc] = -s / row[pc]
        den = lcm(*(v.denominator for v in sol))
        ints = [int(v * den) for v in sol]
        g = 0
        for v in ints:
            g = gcd(g, v)
        basis.append([Fraction(v // g) for v in ints])
    return basis
