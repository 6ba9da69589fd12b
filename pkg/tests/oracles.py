"""Brute-force oracles, independent of the library's elimination code."""

from fractions import Fraction
from itertools import combinations


def cofactor_det(rows):
    """Laplace expansion along the first row, in exact rational arithmetic."""
    n = len(rows)
    if n == 1:
        return Fraction(rows[0][0])
    total = Fraction(0)
    for j in range(n):
        minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
        sign = -1 if j % 2 else 1
        total += sign * Fraction(rows[0][j]) * cofactor_det(minor)
    return total


def minor_rank(rows):
    """Largest k with a nonzero k-by-k minor."""
    m, n = len(rows), len(rows[0])
    for k in range(min(m, n), 0, -1):
        for ri in combinations(range(m), k):
            for ci in combinations(range(n), k):
                if cofactor_det([[rows[i][j] for j in ci] for i in ri]) != 0:
                    return k
    return 0


def mat_vec(rows, x):
    return [sum(a * b for a, b in zip(r, x)) for r in rows]
