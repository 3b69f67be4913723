"""Small dense linear solves over exact rationals."""
from __future__ import annotations

from fractions import Fraction


class SingularMatrix(ArithmeticError):
    pass


def gauss_solve(A, b):
    """Solve ``A x = b`` by Gauss-Jordan elimination; entries may be Fractions or ints.

    No rounding happens anywhere, so the returned solution satisfies the system exactly.
    """
    n = len(A)
    M = [[Fraction(v) for v in row] + [Fraction(rhs)] for row, rhs in zip(A, b)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if M[i][col] != 0), None)
        if pivot is None:
            raise SingularMatrix(f"no pivot in column {col}")
        if pivot != col:
            M[col], M[pivot] = M[pivot], M[col]
        inv = 1 / M[col][col]
        row = [v * inv for v in M[col]]
        M[col] = row
        for i in range(n):
            if i != col and M[i][col] != 0:
                f = M[i][col]
                M[i] = [a - f * c for a, c in zip(M[i], row)]
    return [M[i][n] for i in range(n)]
