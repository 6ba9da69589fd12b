"""Un-instrumented twin of the system under test.

Same algorithms, same floating-point evaluation order, no dispatch sites.  Used
to confirm that an empty mutation context leaves results bit-identical.
"""

from __future__ import annotations

import math
import random

from .errors import DimensionError, SingularMatrixError
from .matrix import AXES, PIVOT_TOLERANCE, Matrix, _max_abs, _require_square
from .solvers import SYMMETRY_TOLERANCE, SolveResult, _as_vector


def scalar_elementwise(A, b, kind):
    b = float(b)
    if not math.isfinite(b):
        raise ValueError("scalar operand must be finite")
    if kind == "add":
        data = [x + b for x in A.data]
    elif kind == "subtract":
        data = [x - b for x in A.data]
    elif kind == "multiply":
        data = [x * b for x in A.data]
    else:
        raise ValueError(kind)
    return Matrix(A.rows, A.cols, tuple(data))


def matrix_add(A, B):
    if A.shape != B.shape:
        raise DimensionError("shape mismatch")
    return Matrix(A.rows, A.cols, tuple(x + y for x, y in zip(A.data, B.data)))


def matrix_multiply(A, B):
    if A.cols != B.rows:
        raise DimensionError("shape mismatch")
    n, p = A.cols, B.cols
    out = []
    for i in range(A.rows):
        for j in range(p):
            acc = 0.0
            for k in range(n):
                acc = acc + A.data[i * n + k] * B.data[k * p + j]
            out.append(acc)
    return Matrix(A.rows, p, tuple(out))


def power(A, n):
    _require_square(A)
    if not isinstance(n, int) or n < 0:
        raise ValueError("exponent must be a nonnegative integer")
    result = Matrix.identity(A.rows)
    for _ in range(n):
        result = matrix_multiply(result, A)
    return result


def determinant(A):
    _require_square(A)
    n = A.rows
    a = A.to_rows()
    tol = PIVOT_TOLERANCE * _max_abs(A)
    det = 1.0
    for k in range(n):
        p = k
        for i in range(k + 1, n):
            if abs(a[i][k]) > abs(a[p][k]):
                p = i
        pivot = a[p][k]
        if abs(pivot) <= tol:
            return 0.0
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = det * -1.0
        det = det * pivot
        for i in range(k + 1, n):
            f = a[i][k] / pivot
            for j in range(k + 1, n):
                a[i][j] = a[i][j] - f * a[k][j]
    return det


def rank(A):
    a = A.to_rows()
    m, n = A.rows, A.cols
    tol = PIVOT_TOLERANCE * _max_abs(A)
    r = 0
    for c in range(n):
        if r >= m:
            break
        p = r
        for i in range(r + 1, m):
            if abs(a[i][c]) > abs(a[p][c]):
                p = i
        if abs(a[p][c]) <= tol:
            continue
        a[r], a[p] = a[p], a[r]
        for i in range(r + 1, m):
            f = a[i][c] / a[r][c]
            for j in range(c, n):
                a[i][j] = a[i][j] - f * a[r][j]
        r += 1
    return r


def equals(A, B, precision=0.0):
    if precision < 0 or not math.isfinite(precision):
        raise ValueError("precision must be a finite nonnegative number")
    if A.shape != B.shape:
        return False
    return all(abs(x - y) <= precision for x, y in zip(A.data, B.data))


def transpose(A):
    return Matrix(A.cols, A.rows, tuple(A[i, j] for j in range(A.cols) for i in range(A.rows)))


def rotate90(A):
    return Matrix(A.cols, A.rows, tuple(A[A.rows - 1 - j, i] for i in range(A.cols) for j in range(A.rows)))


def shuffle(A, seed):
    rng = random.Random(seed)
    data = list(A.data)
    for i in range(len(data) - 1, 0, -1):
        j = rng.randrange(i + 1)
        data[i], data[j] = data[j], data[i]
    return Matrix(A.rows, A.cols, tuple(data))


def select_submatrix(A, row_idx, col_idx):
    if not row_idx or not col_idx:
        raise ValueError("row and column selections must be non-empty")
    for r in row_idx:
        if not 0 <= r < A.rows:
            raise IndexError(r)
    for c in col_idx:
        if not 0 <= c < A.cols:
            raise IndexError(c)
    return Matrix(len(row_idx), len(col_idx), tuple(A[r, c] for r in row_idx for c in col_idx))


def slice_top_left(A, r, c):
    if not (1 <= r <= A.rows and 1 <= c <= A.cols):
        raise IndexError((r, c))
    return Matrix(r, c, tuple(A[i, j] for i in range(r) for j in range(c)))


def remove_last(A, axis):
    if axis not in AXES:
        raise ValueError(axis)
    if axis == "row":
        if A.rows < 2:
            raise DimensionError("would leave an empty matrix")
        return Matrix(A.rows - 1, A.cols, A.data[: (A.rows - 1) * A.cols])
    if A.cols < 2:
        raise DimensionError("would leave an empty matrix")
    return Matrix(A.rows, A.cols - 1, tuple(A[i, j] for i in range(A.rows) for j in range(A.cols - 1)))


def set_row(A, i, value):
    if not 0 <= i < A.rows:
        raise IndexError(i)
    rows = A.to_rows()
    rows[i] = [value] * A.cols
    return Matrix.from_rows(rows)


def insert(A, B, dest_row, dest_col):
    if dest_row < 0 or dest_col < 0:
        raise IndexError("destination must be nonnegative")
    if dest_row + B.rows > A.rows or dest_col + B.cols > A.cols:
        raise DimensionError("block does not fit")
    rows = A.to_rows()
    for p in range(B.rows):
        for q in range(B.cols):
            rows[dest_row + p][dest_col + q] = B[p, q]
    return Matrix.from_rows(rows)


def transform_axis(A, axis, i, f):
    if axis not in AXES:
        raise ValueError(axis)
    bound = A.rows if axis == "row" else A.cols
    if not 0 <= i < bound:
        raise IndexError(i)
    rows = A.to_rows()
    if axis == "row":
        rows[i] = [f(x) for x in rows[i]]
    else:
        for r in rows:
            r[i] = f(r[i])
    return Matrix.from_rows(rows)


def update_column(A, j, f):
    if not 0 <= j < A.cols:
        raise IndexError(j)
    return transform_axis(A, "column", j, f)


def zero(r, c):
    if r < 1 or c < 1:
        raise DimensionError("empty shape")
    return Matrix(r, c, (0.0,) * (r * c))


# ------------------------------------------------------------------ solvers


def _householder(A):
    m, n = A.rows, A.cols
    R = A.to_rows()
    Q = [[1.0 if i == j else 0.0 for j in range(m)] for i in range(m)]
    for k in range(min(m - 1, n)):
        if all(R[i][k] == 0.0 for i in range(k + 1, m)):
            continue
        norm2 = 0.0
        for i in range(k, m):
            norm2 = norm2 + R[i][k] * R[i][k]
        if norm2 == 0.0:
            continue
        norm = math.sqrt(norm2)
        alpha = -norm if R[k][k] >= 0.0 else norm
        v = [R[i][k] for i in range(k, m)]
        v[0] = v[0] - alpha
        vnorm2 = 0.0
        for x in v:
            vnorm2 = vnorm2 + x * x
        for j in range(k, n):
            s = 0.0
            for i, vi in enumerate(v):
                s = s + vi * R[k + i][j]
            f = 2.0 * s / vnorm2
            for i, vi in enumerate(v):
                R[k + i][j] = R[k + i][j] - f * vi
        for i in range(k + 1, m):
            R[i][k] = 0.0
        for row in Q:
            s = 0.0
            for i, vi in enumerate(v):
                s = s + row[k + i] * vi
            f = 2.0 * s / vnorm2
            for i, vi in enumerate(v):
                row[k + i] = row[k + i] - f * vi
    return Q, R


def qr_decompose(A):
    Q, R = _householder(A)
    return Matrix.from_rows(Q), Matrix.from_rows(R)


def solve_least_squares(A, b):
    b = _as_vector(b)
    m, n = A.rows, A.cols
    if m < n or len(b) != m:
        raise DimensionError("shape mismatch")
    Q, R = _householder(A)
    tol = PIVOT_TOLERANCE * _max_abs(A)
    if any(abs(R[i][i]) <= tol for i in range(n)):
        raise SingularMatrixError("matrix is rank deficient")
    c = []
    for i in range(n):
        s = 0.0
        for r in range(m):
            s = s + Q[r][i] * b[r]
        c.append(s)
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        s = c[i]
        for j in range(i + 1, n):
            s = s - R[i][j] * x[j]
        x[i] = s / R[i][i]
    return SolveResult.build(A, x, b)


def _lu_factor(A):
    _require_square(A)
    n = A.rows
    a = A.to_rows()
    perm = list(range(n))
    L = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    tol = PIVOT_TOLERANCE * _max_abs(A)
    for k in range(n):
        p = max(range(k, n), key=lambda i: (abs(a[i][k]), -i))
        if abs(a[p][k]) <= tol:
            raise SingularMatrixError("zero pivot in LU factorization")
        if p != k:
            a[k], a[p] = a[p], a[k]
            perm[k], perm[p] = perm[p], perm[k]
            L[k][:k], L[p][:k] = L[p][:k], L[k][:k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            L[i][k] = f
            a[i][k] = 0.0
            for j in range(k + 1, n):
                a[i][j] = a[i][j] - f * a[k][j]
    return perm, L, a


def lu_decompose(A):
    perm, L, U = _lu_factor(A)
    return perm, Matrix.from_rows(L), Matrix.from_rows(U)


def solve_forward_back_substitution(A, b):
    b = _as_vector(b)
    if len(b) != A.rows:
        raise DimensionError("shape mismatch")
    perm, L, U = _lu_factor(A)
    n = A.rows
    y = [0.0] * n
    for i in range(n):
        s = b[perm[i]]
        for j in range(i):
            s = s - L[i][j] * y[j]
        y[i] = s
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        s = y[i]
        for j in range(i + 1, n):
            s = s - U[i][j] * x[j]
        x[i] = s / U[i][i]
    return SolveResult.build(A, x, b)


def _cholesky(A):
    _require_square(A)
    n = A.rows
    a = A.to_rows()
    for i in range(n):
        for j in range(i + 1, n):
            if abs(a[i][j] - a[j][i]) > SYMMETRY_TOLERANCE:
                raise ValueError("matrix is not symmetric")
    L = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = 0.0
            for k in range(j):
                s = s + L[i][k] * L[j][k]
            if i == j:
                d = a[i][i] - s
                if d <= 0.0:
                    raise SingularMatrixError("matrix is not positive definite")
                L[i][i] = math.sqrt(d)
            else:
                L[i][j] = (a[i][j] - s) / L[j][j]
    return L


def cholesky_decompose(A):
    return Matrix.from_rows(_cholesky(A))


def solve_square_root(A, g):
    g = _as_vector(g)
    if len(g) != A.rows:
        raise DimensionError("shape mismatch")
    L = _cholesky(A)
    n = A.rows
    y = [0.0] * n
    for i in range(n):
        s = g[i]
        for k in range(i):
            s = s - L[i][k] * y[k]
        y[i] = s / L[i][i]
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        s = y[i]
        for k in range(i + 1, n):
            s = s - L[k][i] * x[k]
        x[i] = s / L[i][i]
    return SolveResult.build(A, x, g)
