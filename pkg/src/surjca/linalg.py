"""Exact linear algebra over the rationals (row reduction, nullspace, rank)."""

from __future__ import annotations

from fractions import Fraction


def rref(rows, ncols: int):
    """Reduced row echelon form.  Returns ``(rows, pivot_columns)``; rows are lists
    of Fractions and zero rows are dropped."""
    a = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                ai, ar = a[i], a[r]
                a[i] = [x - f * y for x, y in zip(ai, ar)]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def nullspace(rows, ncols: int) -> list:
    """Basis of ``{v : A v = 0}``, one vector per free column."""
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[fc]
        basis.append(v)
    return basis


def rank(rows, ncols: int) -> int:
    return len(rref(rows, ncols)[1]) if rows else 0


def extend_basis(base: list, candidates: list, ncols: int) -> list:
    """Candidates that, added greedily, raise the rank of ``base``."""
    chosen = []
    current = list(base)
    r = rank(current, ncols)
    for v in candidates:
        r2 = rank(current + [v], ncols)
        if r2 > r:
            chosen.append(v)
            current.append(v)
            r = r2
    return chosen
