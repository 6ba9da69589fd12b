"""Instrumented linear-system solvers.

Three independent solvers, each with its own factorization and triangular
solves so that their mutation sites stay separate:

* least squares via Householder QR,
* forward/back substitution on an LU factorization with partial pivoting,
* the square-root (Cholesky) method for symmetric positive definite systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, SingularMatrixError
from .matrix import PIVOT_TOLERANCE, Matrix, _max_abs, _require_square
from .mutation import PRISTINE, MutationContext, sites

SYMMETRY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Vector:
    data: tuple[float, ...]

    def __post_init__(self):
        data = tuple(float(x) for x in self.data)
        if not data:
            raise DimensionError("empty vector")
        for x in data:
            if not math.isfinite(x):
                raise ValueError("vector entries must be finite")
        object.__setattr__(self, "data", data)

    def __len__(self) -> int:
        return len(self.data)

    def __getitem__(self, i: int) -> float:
        return self.data[i]

    def to_array(self) -> np.ndarray:
        return np.array(self.data, dtype=float)

    def elementwise(self, fn) -> "Vector":
        return Vector(tuple(fn(x) for x in self.data))

    def comparable(self):
        return self.data


@dataclass(frozen=True)
class SolveResult:
    solution: Vector
    residual_norm: float

    @classmethod
    def build(cls, A: Matrix, solution: Sequence[float], rhs: Vector) -> "SolveResult":
        x = Vector(tuple(solution))
        residual = A.to_array() @ x.to_array() - rhs.to_array()
        return cls(x, float(np.linalg.norm(residual)))

    def comparable(self):
        return self.solution.data


def _as_vector(v) -> Vector:
    return v if isinstance(v, Vector) else Vector(tuple(v))


# ----------------------------------------------------------------- least squares

_qr = sites("least_squares", "qr_decompose")
_QR_NORM_MUL = _qr.arith("*")
_QR_NORM_ACC = _qr.arith("+")
_QR_EMPTY = _qr.compare("==")
_QR_SIGN = _qr.compare(">=")
_QR_V0 = _qr.arith("-")
_QR_VN_MUL = _qr.arith("*")
_QR_VN_ACC = _qr.arith("+")
_QR_R_MUL = _qr.arith("*")
_QR_R_ACC = _qr.arith("+")
_QR_R_TWICE = _qr.arith("*")
_QR_R_SCALE = _qr.arith("/")
_QR_R_PROD = _qr.arith("*")
_QR_R_UPD = _qr.arith("-")
_QR_Q_MUL = _qr.arith("*")
_QR_Q_ACC = _qr.arith("+")
_QR_Q_TWICE = _qr.arith("*")
_QR_Q_SCALE = _qr.arith("/")
_QR_Q_PROD = _qr.arith("*")
_QR_Q_UPD = _qr.arith("-")


def _householder(A: Matrix, ctx: MutationContext) -> tuple[list[list[float]], list[list[float]]]:
    m, n = A.rows, A.cols
    R = A.to_rows()
    Q = [[1.0 if i == j else 0.0 for j in range(m)] for i in range(m)]
    for k in range(min(m - 1, n)):
        if all(R[i][k] == 0.0 for i in range(k + 1, m)):
            continue  # already reduced; keeps QR(I) = (I, I)
        norm2 = 0.0
        for i in range(k, m):
            norm2 = ctx.arith(_QR_NORM_ACC, norm2, ctx.arith(_QR_NORM_MUL, R[i][k], R[i][k]))
        if ctx.cmp(_QR_EMPTY, norm2, 0.0):
            continue
        norm = math.sqrt(norm2)
        alpha = -norm if ctx.cmp(_QR_SIGN, R[k][k], 0.0) else norm
        v = [R[i][k] for i in range(k, m)]
        v[0] = ctx.arith(_QR_V0, v[0], alpha)
        vnorm2 = 0.0
        for x in v:
            vnorm2 = ctx.arith(_QR_VN_ACC, vnorm2, ctx.arith(_QR_VN_MUL, x, x))
        # R <- H R, applied column by column
        for j in range(k, n):
            s = 0.0
            for i, vi in enumerate(v):
                s = ctx.arith(_QR_R_ACC, s, ctx.arith(_QR_R_MUL, vi, R[k + i][j]))
            f = ctx.arith(_QR_R_SCALE, ctx.arith(_QR_R_TWICE, 2.0, s), vnorm2)
            for i, vi in enumerate(v):
                R[k + i][j] = ctx.arith(_QR_R_UPD, R[k + i][j], ctx.arith(_QR_R_PROD, f, vi))
        for i in range(k + 1, m):
            R[i][k] = 0.0
        # Q <- Q H, applied row by row
        for row in Q:
            s = 0.0
            for i, vi in enumerate(v):
                s = ctx.arith(_QR_Q_ACC, s, ctx.arith(_QR_Q_MUL, row[k + i], vi))
            f = ctx.arith(_QR_Q_SCALE, ctx.arith(_QR_Q_TWICE, 2.0, s), vnorm2)
            for i, vi in enumerate(v):
                row[k + i] = ctx.arith(_QR_Q_UPD, row[k + i], ctx.arith(_QR_Q_PROD, f, vi))
    return Q, R


def qr_decompose(A: Matrix, ctx: MutationContext | None = None) -> tuple[Matrix, Matrix]:
    """Full Householder QR: ``Q`` is ``m x m`` orthogonal, ``R`` is ``m x n`` upper triangular."""
    ctx = ctx or PRISTINE
    Q, R = _householder(A, ctx)
    return Matrix.from_rows(Q), Matrix.from_rows(R)


_ls = sites("least_squares", "solve_least_squares")
_LS_RANK = _ls.compare("<=")
_LS_QTB_MUL = _ls.arith("*")
_LS_QTB_ACC = _ls.arith("+")
_LS_NEXT = _ls.increment(1)
_LS_PROD = _ls.arith("*")
_LS_SUB = _ls.arith("-")
_LS_DIV = _ls.arith("/")


def solve_least_squares(A: Matrix, b, ctx: MutationContext | None = None) -> SolveResult:
    """Minimise ``||Ax - b||`` for full-column-rank ``A`` with ``rows >= cols``."""
    ctx = ctx or PRISTINE
    b = _as_vector(b)
    m, n = A.rows, A.cols
    if m < n:
        raise DimensionError(f"least squares needs rows >= cols, got {m}x{n}")
    if len(b) != m:
        raise DimensionError(f"right-hand side has {len(b)} entries, expected {m}")
    Q, R = _householder(A, ctx)
    tol = PIVOT_TOLERANCE * _max_abs(A)
    for i in range(n):
        if ctx.cmp(_LS_RANK, abs(R[i][i]), tol):
            raise SingularMatrixError("matrix is rank deficient")
    c = []
    for i in range(n):
        s = 0.0
        for r in range(m):
            s = ctx.arith(_LS_QTB_ACC, s, ctx.arith(_LS_QTB_MUL, Q[r][i], b[r]))
        c.append(s)
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        s = c[i]
        for j in range(ctx.inc(_LS_NEXT, i), n):
            s = ctx.arith(_LS_SUB, s, ctx.arith(_LS_PROD, R[i][j], x[j]))
        x[i] = ctx.arith(_LS_DIV, s, R[i][i])
    return SolveResult.build(A, x, b)


# ------------------------------------------------------ forward/back substitution

_lu = sites("forward_back", "lu_decompose")
_LU_NEXT = _lu.increment(1)
_LU_PIVOT = _lu.compare(">")
_LU_SINGULAR = _lu.compare("<=")
_LU_FACTOR = _lu.arith("/")
_LU_PROD = _lu.arith("*")
_LU_UPD = _lu.arith("-")


def _lu_factor(A: Matrix, ctx: MutationContext):
    _require_square(A)
    n = A.rows
    a = A.to_rows()
    perm = list(range(n))
    L = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    tol = PIVOT_TOLERANCE * _max_abs(A)
    for k in range(n):
        p = k
        for i in range(ctx.inc(_LU_NEXT, k), n):
            if ctx.cmp(_LU_PIVOT, abs(a[i][k]), abs(a[p][k])):
                p = i
        if ctx.cmp(_LU_SINGULAR, abs(a[p][k]), tol):
            raise SingularMatrixError("zero pivot in LU factorization")
        if p != k:
            a[k], a[p] = a[p], a[k]
            perm[k], perm[p] = perm[p], perm[k]
            L[k][:k], L[p][:k] = L[p][:k], L[k][:k]
        for i in range(k + 1, n):
            f = ctx.arith(_LU_FACTOR, a[i][k], a[k][k])
            L[i][k] = f
            a[i][k] = 0.0
            for j in range(k + 1, n):
                a[i][j] = ctx.arith(_LU_UPD, a[i][j], ctx.arith(_LU_PROD, f, a[k][j]))
    return perm, L, a


def lu_decompose(A: Matrix, ctx: MutationContext | None = None) -> tuple[list[int], Matrix, Matrix]:
    """``PA = LU``; ``perm[i]`` is the row of ``A`` that lands in row ``i``."""
    ctx = ctx or PRISTINE
    perm, L, U = _lu_factor(A, ctx)
    return perm, Matrix.from_rows(L), Matrix.from_rows(U)


_fb = sites("forward_back", "solve_forward_back_substitution")
_FW_PROD = _fb.arith("*")
_FW_SUB = _fb.arith("-")
_BK_NEXT = _fb.increment(1)
_BK_PROD = _fb.arith("*")
_BK_SUB = _fb.arith("-")
_BK_DIV = _fb.arith("/")


def solve_forward_back_substitution(A: Matrix, b, ctx: MutationContext | None = None) -> SolveResult:
    ctx = ctx or PRISTINE
    b = _as_vector(b)
    if len(b) != A.rows:
        raise DimensionError(f"right-hand side has {len(b)} entries, expected {A.rows}")
    perm, L, U = _lu_factor(A, ctx)
    n = A.rows
    y = [0.0] * n
    for i in range(n):
        s = b[perm[i]]
        for j in range(i):
            s = ctx.arith(_FW_SUB, s, ctx.arith(_FW_PROD, L[i][j], y[j]))
        y[i] = s
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        s = y[i]
        for j in range(ctx.inc(_BK_NEXT, i), n):
            s = ctx.arith(_BK_SUB, s, ctx.arith(_BK_PROD, U[i][j], x[j]))
        x[i] = ctx.arith(_BK_DIV, s, U[i][i])
    return SolveResult.build(A, x, b)


# -------------------------------------------------------------- square root

_ch = sites("square_root", "cholesky_decompose")
_CH_DIFF = _ch.arith("-")
_CH_ASYM = _ch.compare(">")
_CH_MUL = _ch.arith("*")
_CH_ACC = _ch.arith("+")
_CH_DIAG = _ch.arith("-")
_CH_PD = _ch.compare("<=")
_CH_OFF = _ch.arith("-")
_CH_DIV = _ch.arith("/")


def _cholesky(A: Matrix, ctx: MutationContext) -> list[list[float]]:
    _require_square(A)
    n = A.rows
    a = A.to_rows()
    for i in range(n):
        for j in range(i + 1, n):
            if ctx.cmp(_CH_ASYM, abs(ctx.arith(_CH_DIFF, a[i][j], a[j][i])), SYMMETRY_TOLERANCE):
                raise ValueError("matrix is not symmetric")
    L = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = 0.0
            for k in range(j):
                s = ctx.arith(_CH_ACC, s, ctx.arith(_CH_MUL, L[i][k], L[j][k]))
            if i == j:
                d = ctx.arith(_CH_DIAG, a[i][i], s)
                if ctx.cmp(_CH_PD, d, 0.0):
                    raise SingularMatrixError("matrix is not positive definite")
                L[i][i] = math.sqrt(d)
            else:
                L[i][j] = ctx.arith(_CH_DIV, ctx.arith(_CH_OFF, a[i][j], s), L[j][j])
    return L


def cholesky_decompose(A: Matrix, ctx: MutationContext | None = None) -> Matrix:
    """Lower-triangular ``L`` with ``L L^T = A``."""
    ctx = ctx or PRISTINE
    return Matrix.from_rows(_cholesky(A, ctx))


_sq = sites("square_root", "solve_square_root")
_SQ_FW_PROD = _sq.arith("*")
_SQ_FW_SUB = _sq.arith("-")
_SQ_FW_DIV = _sq.arith("/")
_SQ_BK_NEXT = _sq.increment(1)
_SQ_BK_PROD = _sq.arith("*")
_SQ_BK_SUB = _sq.arith("-")
_SQ_BK_DIV = _sq.arith("/")


def solve_square_root(A: Matrix, g, ctx: MutationContext | None = None) -> SolveResult:
    """Solve ``A u = g`` for symmetric positive definite ``A`` via ``A = L L^T``."""
    ctx = ctx or PRISTINE
    g = _as_vector(g)
    if len(g) != A.rows:
        raise DimensionError(f"right-hand side has {len(g)} entries, expected {A.rows}")
    L = _cholesky(A, ctx)
    n = A.rows
    y = [0.0] * n
    for i in range(n):
        s = g[i]
        for k in range(i):
            s = ctx.arith(_SQ_FW_SUB, s, ctx.arith(_SQ_FW_PROD, L[i][k], y[k]))
        y[i] = ctx.arith(_SQ_FW_DIV, s, L[i][i])
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        s = y[i]
        for k in range(ctx.inc(_SQ_BK_NEXT, i), n):
            s = ctx.arith(_SQ_BK_SUB, s, ctx.arith(_SQ_BK_PROD, L[k][i], x[k]))
        x[i] = ctx.arith(_SQ_BK_DIV, s, L[i][i])
    return SolveResult.build(A, x, g)
