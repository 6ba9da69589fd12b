"""Dense real matrices and the instrumented matrix method surface.

Operations are pure functions.  Each takes an optional ``ctx`` (a
:class:`~mtlab.mutation.MutationContext`); leaving it out gives pristine
behaviour.  Indices are zero-based throughout.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError
from .mutation import PRISTINE, MutationContext, sites

PIVOT_TOLERANCE = 1e-10
AXES = ("row", "column")
SCALAR_KINDS = ("add", "subtract", "multiply")


@dataclass(frozen=True)
class Matrix:
    rows: int
    cols: int
    data: tuple[float, ...]

    def __post_init__(self):
        if not isinstance(self.rows, int) or not isinstance(self.cols, int):
            raise TypeError("matrix dimensions must be integers")
        if self.rows < 1 or self.cols < 1:
            raise DimensionError(f"matrix shape must be positive, got {self.rows}x{self.cols}")
        data = tuple(float(x) for x in self.data)
        if len(data) != self.rows * self.cols:
            raise DimensionError(f"{len(data)} entries for a {self.rows}x{self.cols} matrix")
        for x in data:
            if not math.isfinite(x):
                raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "Matrix":
        if not rows or not rows[0]:
            raise DimensionError("empty matrix")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DimensionError("ragged rows")
        return cls(len(rows), width, tuple(x for r in rows for x in r))

    @classmethod
    def from_array(cls, arr) -> "Matrix":
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2:
            raise DimensionError("expected a 2-d array")
        return cls(arr.shape[0], arr.shape[1], tuple(arr.ravel().tolist()))

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(n, n, tuple(1.0 if i == j else 0.0 for i in range(n) for j in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> float:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"({i}, {j}) outside {self.rows}x{self.cols}")
        return self.data[i * self.cols + j]

    def to_rows(self) -> list[list[float]]:
        c = self.cols
        return [list(self.data[i * c:(i + 1) * c]) for i in range(self.rows)]

    def to_array(self) -> np.ndarray:
        return np.array(self.data, dtype=float).reshape(self.rows, self.cols)

    def elementwise(self, fn: Callable[[float], float]) -> "Matrix":
        return Matrix(self.rows, self.cols, tuple(fn(x) for x in self.data))

    def comparable(self):
        return (self.rows, self.cols, self.data)


@dataclass(frozen=True)
class ElementFunction:
    """A named real-to-real mapping used by the per-line transform methods."""

    name: str
    fn: Callable[[float], float]

    def __call__(self, x: float) -> float:
        return self.fn(x)


FUNCTIONS = {
    f.name: f
    for f in (
        ElementFunction("identity", lambda x: x),
        ElementFunction("negate", lambda x: -x),
        ElementFunction("double", lambda x: 2.0 * x),
        ElementFunction("increment", lambda x: x + 1.0),
        ElementFunction("square", lambda x: x * x),
    )
}


def _get(A: Matrix, idx) -> float:
    if not isinstance(idx, int) or not 0 <= idx < len(A.data):
        raise IndexError(f"flat index {idx!r} outside {A.rows}x{A.cols}")
    return A.data[idx]


def _slot(idx, size: int) -> int:
    if not isinstance(idx, int) or not 0 <= idx < size:
        raise IndexError(f"index {idx!r} outside [0, {size})")
    return idx


def _max_abs(A: Matrix) -> float:
    return max(abs(x) for x in A.data)


def _require_square(A: Matrix) -> None:
    if A.rows != A.cols:
        raise DimensionError(f"square matrix required, got {A.rows}x{A.cols}")


# -------------------------------------------------------------------- arithmetic

_se = sites("matrix", "scalar_elementwise")
_SE_ADD = _se.arith("+")
_SE_SUB = _se.arith("-")
_SE_MUL = _se.arith("*")
_SE_SITES = {"add": _SE_ADD, "subtract": _SE_SUB, "multiply": _SE_MUL}


def scalar_elementwise(A: Matrix, b: float, kind: str, ctx: MutationContext | None = None) -> Matrix:
    ctx = ctx or PRISTINE
    b = float(b)
    if not math.isfinite(b):
        raise ValueError("scalar operand must be finite")
    try:
        site = _SE_SITES[kind]
    except KeyError:
        raise ValueError(f"unknown scalar operation {kind!r}") from None
    return Matrix(A.rows, A.cols, tuple(ctx.arith(site, x, b) for x in A.data))


_ma = sites("matrix", "matrix_add")
_MA_ADD = _ma.arith("+")


def matrix_add(A: Matrix, B: Matrix, ctx: MutationContext | None = None) -> Matrix:
    ctx = ctx or PRISTINE
    if A.shape != B.shape:
        raise DimensionError(f"cannot add {A.rows}x{A.cols} and {B.rows}x{B.cols}")
    return Matrix(A.rows, A.cols, tuple(ctx.arith(_MA_ADD, x, y) for x, y in zip(A.data, B.data)))


_mm = sites("matrix", "matrix_multiply")
_MM_ZERO = _mm.constant(0.0)
_MM_MUL = _mm.arith("*")
_MM_ADD = _mm.arith("+")


def matrix_multiply(A: Matrix, B: Matrix, ctx: MutationContext | None = None) -> Matrix:
    ctx = ctx or PRISTINE
    if A.cols != B.rows:
        raise DimensionError(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")
    a, b = A.data, B.data
    n, p = A.cols, B.cols
    out = []
    for i in range(A.rows):
        for j in range(p):
            acc = ctx.const(_MM_ZERO)
            for k in range(n):
                acc = ctx.arith(_MM_ADD, acc, ctx.arith(_MM_MUL, a[i * n + k], b[k * p + j]))
            out.append(acc)
    return Matrix(A.rows, p, tuple(out))


_pw = sites("matrix", "power")
_PW_ONE = _pw.constant(1.0)
_PW_LOOP = _pw.compare("<")
_PW_STEP = _pw.increment(1)


def power(A: Matrix, n: int, ctx: MutationContext | None = None) -> Matrix:
    ctx = ctx or PRISTINE
    _require_square(A)
    if not isinstance(n, int) or n < 0:
        raise ValueError("exponent must be a nonnegative integer")
    one = ctx.const(_PW_ONE)
    size = A.rows
    result = Matrix(size, size, tuple(one if i == j else 0.0 for i in range(size) for j in range(size)))
    k = 0
    while ctx.cmp(_PW_LOOP, k, n):
        result = matrix_multiply(result, A, ctx)
        k = ctx.inc(_PW_STEP, k)
    return result


# ------------------------------------------------------------ scalar summaries

_det = sites("matrix", "determinant")
_DET_ONE = _det.constant(1.0)
_DET_NEXT = _det.increment(1)
_DET_PIVOT = _det.compare(">")
_DET_SINGULAR = _det.compare("<=")
_DET_FLIP = _det.arith("*")
_DET_ACC = _det.arith("*")
_DET_FACTOR = _det.arith("/")
_DET_PROD = _det.arith("*")
_DET_UPDATE = _det.arith("-")
_DET_RET = _det.returns()


def determinant(A: Matrix, ctx: MutationContext | None = None) -> float:
    """Determinant by Gaussian elimination with partial pivoting."""
    ctx = ctx or PRISTINE
    _require_square(A)
    n = A.rows
    a = A.to_rows()
    tol = PIVOT_TOLERANCE * _max_abs(A)
    det = ctx.const(_DET_ONE)
    for k in range(n):
        p = k
        for i in range(ctx.inc(_DET_NEXT, k), n):
            if ctx.cmp(_DET_PIVOT, abs(a[i][k]), abs(a[p][k])):
                p = i
        pivot = a[p][k]
        if ctx.cmp(_DET_SINGULAR, abs(pivot), tol):
            return ctx.ret(_DET_RET, 0.0)
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = ctx.arith(_DET_FLIP, det, -1.0)
        det = ctx.arith(_DET_ACC, det, pivot)
        for i in range(k + 1, n):
            f = ctx.arith(_DET_FACTOR, a[i][k], pivot)
            for j in range(k + 1, n):
                a[i][j] = ctx.arith(_DET_UPDATE, a[i][j], ctx.arith(_DET_PROD, f, a[k][j]))
    return ctx.ret(_DET_RET, det)


_rk = sites("matrix", "rank")
_RK_DONE = _rk.compare(">=")
_RK_NEXT = _rk.increment(1)
_RK_PIVOT = _rk.compare(">")
_RK_ZERO = _rk.compare("<=")
_RK_FACTOR = _rk.arith("/")
_RK_PROD = _rk.arith("*")
_RK_UPDATE = _rk.arith("-")
_RK_COUNT = _rk.increment(1)
_RK_RET = _rk.returns()


def rank(A: Matrix, ctx: MutationContext | None = None) -> int:
    """Numerical rank: pivots above ``PIVOT_TOLERANCE * max|A|`` in row echelon form."""
    ctx = ctx or PRISTINE
    a = A.to_rows()
    m, n = A.rows, A.cols
    tol = PIVOT_TOLERANCE * _max_abs(A)
    r = 0
    for c in range(n):
        if ctx.cmp(_RK_DONE, r, m):
            break
        p = r
        for i in range(ctx.inc(_RK_NEXT, r), m):
            if ctx.cmp(_RK_PIVOT, abs(a[i][c]), abs(a[p][c])):
                p = i
        if ctx.cmp(_RK_ZERO, abs(a[p][c]), tol):
            continue
        a[r], a[p] = a[p], a[r]
        for i in range(r + 1, m):
            f = ctx.arith(_RK_FACTOR, a[i][c], a[r][c])
            for j in range(c, n):
                a[i][j] = ctx.arith(_RK_UPDATE, a[i][j], ctx.arith(_RK_PROD, f, a[r][j]))
        r = ctx.inc(_RK_COUNT, r)
    return ctx.ret(_RK_RET, r)


_eq = sites("matrix", "equals")
_EQ_ROWS = _eq.compare("!=")
_EQ_COLS = _eq.compare("!=")
_EQ_DIFF = _eq.arith("-")
_EQ_TOL = _eq.compare(">")


def equals(A: Matrix, B: Matrix, precision: float = 0.0, ctx: MutationContext | None = None) -> bool:
    ctx = ctx or PRISTINE
    if precision < 0 or not math.isfinite(precision):
        raise ValueError("precision must be a finite nonnegative number")
    if ctx.cmp(_EQ_ROWS, A.rows, B.rows) or ctx.cmp(_EQ_COLS, A.cols, B.cols):
        return False
    for x, y in zip(A.data, B.data):
        if ctx.cmp(_EQ_TOL, abs(ctx.arith(_EQ_DIFF, x, y)), precision):
            return False
    return True


# ---------------------------------------------------------------- rearranging

_tr = sites("matrix", "transpose")
_TR_ROW = _tr.arith("*")
_TR_IDX = _tr.arith("+")


def transpose(A: Matrix, ctx: MutationContext | None = None) -> Matrix:
    ctx = ctx or PRISTINE
    data = [
        _get(A, ctx.arith(_TR_IDX, ctx.arith(_TR_ROW, i, A.cols), j))
        for j in range(A.cols)
        for i in range(A.rows)
    ]
    return Matrix(A.cols, A.rows, tuple(data))


_ro = sites("matrix", "rotate90")
_RO_LAST = _ro.increment(-1)
_RO_SRC = _ro.arith("-")
_RO_ROW = _ro.arith("*")
_RO_IDX = _ro.arith("+")


def rotate90(A: Matrix, ctx: MutationContext | None = None) -> Matrix:
    """Quarter turn clockwise: ``out[i, j] = A[rows - 1 - j, i]``."""
    ctx = ctx or PRISTINE
    last = ctx.inc(_RO_LAST, A.rows)
    data = []
    for i in range(A.cols):
        for j in range(A.rows):
            src = ctx.arith(_RO_SRC, last, j)
            data.append(_get(A, ctx.arith(_RO_IDX, ctx.arith(_RO_ROW, src, A.cols), i)))
    return Matrix(A.cols, A.rows, tuple(data))


_sh = sites("matrix", "shuffle")
_SH_LAST = _sh.increment(-1)
_SH_LOOP = _sh.compare(">")
_SH_BOUND = _sh.increment(1)
_SH_STEP = _sh.increment(-1)


def shuffle(A: Matrix, seed: int, ctx: MutationContext | None = None) -> Matrix:
    """Seeded Fisher-Yates over the row-major entries."""
    ctx = ctx or PRISTINE
    rng = random.Random(seed)
    data = list(A.data)
    i = ctx.inc(_SH_LAST, len(data))
    while ctx.cmp(_SH_LOOP, i, 0):
        j = rng.randrange(ctx.inc(_SH_BOUND, i))
        data[i], data[j] = data[j], data[i]
        i = ctx.inc(_SH_STEP, i)
    return Matrix(A.rows, A.cols, tuple(data))


# ------------------------------------------------------------------ sub-blocks

_sel = sites("matrix", "select_submatrix")
_SEL_ROW_LO = _sel.compare("<")
_SEL_ROW_HI = _sel.compare(">=")
_SEL_COL_LO = _sel.compare("<")
_SEL_COL_HI = _sel.compare(">=")
_SEL_ROW = _sel.arith("*")
_SEL_IDX = _sel.arith("+")


def select_submatrix(
    A: Matrix, row_idx: Sequence[int], col_idx: Sequence[int], ctx: MutationContext | None = None
) -> Matrix:
    ctx = ctx or PRISTINE
    if not row_idx or not col_idx:
        raise ValueError("row and column selections must be non-empty")
    for r in row_idx:
        if ctx.cmp(_SEL_ROW_LO, r, 0) or ctx.cmp(_SEL_ROW_HI, r, A.rows):
            raise IndexError(f"row {r} outside [0, {A.rows})")
    for c in col_idx:
        if ctx.cmp(_SEL_COL_LO, c, 0) or ctx.cmp(_SEL_COL_HI, c, A.cols):
            raise IndexError(f"column {c} outside [0, {A.cols})")
    data = [_get(A, ctx.arith(_SEL_IDX, ctx.arith(_SEL_ROW, r, A.cols), c)) for r in row_idx for c in col_idx]
    return Matrix(len(row_idx), len(col_idx), tuple(data))


_sl = sites("matrix", "slice_top_left")
_SL_ROWS = _sl.compare(">")
_SL_COLS = _sl.compare(">")
_SL_ROW = _sl.arith("*")
_SL_IDX = _sl.arith("+")


def slice_top_left(A: Matrix, r: int, c: int, ctx: MutationContext | None = None) -> Matrix:
    ctx = ctx or PRISTINE
    if r < 1 or c < 1 or ctx.cmp(_SL_ROWS, r, A.rows) or ctx.cmp(_SL_COLS, c, A.cols):
        raise IndexError(f"cannot take a {r}x{c} corner of a {A.rows}x{A.cols} matrix")
    data = [_get(A, ctx.arith(_SL_IDX, ctx.arith(_SL_ROW, i, A.cols), j)) for i in range(r) for j in range(c)]
    return Matrix(r, c, tuple(data))


_rl = sites("matrix", "remove_last")
_RL_MIN = _rl.compare("<")
_RL_NEW = _rl.increment(-1)


def remove_last(A: Matrix, axis: str, ctx: MutationContext | None = None) -> Matrix:
    ctx = ctx or PRISTINE
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    size = A.rows if axis == "row" else A.cols
    if ctx.cmp(_RL_MIN, size, 2):
        raise DimensionError(f"removing the last {axis} would leave an empty matrix")
    new = ctx.inc(_RL_NEW, size)
    if axis == "row":
        data = [_get(A, i * A.cols + j) for i in range(new) for j in range(A.cols)]
        return Matrix(new, A.cols, tuple(data))
    data = [A[i, j] for i in range(A.rows) for j in range(new)]
    return Matrix(A.rows, new, tuple(data))


_sr = sites("matrix", "set_row")
_SR_LO = _sr.compare("<")
_SR_HI = _sr.compare(">=")
_SR_ROW = _sr.arith("*")
_SR_IDX = _sr.arith("+")


def set_row(A: Matrix, i: int, value: float, ctx: MutationContext | None = None) -> Matrix:
    ctx = ctx or PRISTINE
    if ctx.cmp(_SR_LO, i, 0) or ctx.cmp(_SR_HI, i, A.rows):
        raise IndexError(f"row {i} outside [0, {A.rows})")
    data = list(A.data)
    base = ctx.arith(_SR_ROW, i, A.cols)
    for j in range(A.cols):
        data[_slot(ctx.arith(_SR_IDX, base, j), len(data))] = value
    return Matrix(A.rows, A.cols, tuple(data))


_in = sites("matrix", "insert")
_IN_REND = _in.arith("+")
_IN_RFIT = _in.compare(">")
_IN_CEND = _in.arith("+")
_IN_CFIT = _in.compare(">")
_IN_ROW = _in.arith("+")
_IN_COL = _in.arith("+")


def insert(A: Matrix, B: Matrix, dest_row: int, dest_col: int, ctx: MutationContext | None = None) -> Matrix:
    """Copy of ``A`` with the block at ``(dest_row, dest_col)`` overwritten by ``B``."""
    ctx = ctx or PRISTINE
    if dest_row < 0 or dest_col < 0:
        raise IndexError("destination must be nonnegative")
    if ctx.cmp(_IN_RFIT, ctx.arith(_IN_REND, dest_row, B.rows), A.rows) or ctx.cmp(
        _IN_CFIT, ctx.arith(_IN_CEND, dest_col, B.cols), A.cols
    ):
        raise DimensionError(f"{B.rows}x{B.cols} block does not fit at ({dest_row}, {dest_col})")
    data = list(A.data)
    for p in range(B.rows):
        r = _slot(ctx.arith(_IN_ROW, dest_row, p), A.rows)
        for q in range(B.cols):
            c = _slot(ctx.arith(_IN_COL, dest_col, q), A.cols)
            data[r * A.cols + c] = B.data[p * B.cols + q]
    return Matrix(A.rows, A.cols, tuple(data))


# ---------------------------------------------------------- per-line updates

_ta = sites("matrix", "transform_axis")
_TA_LO = _ta.compare("<")
_TA_HI = _ta.compare(">=")
_TA_ROW = _ta.arith("*")
_TA_IDX = _ta.arith("+")


def transform_axis(A: Matrix, axis: str, i: int, f: ElementFunction, ctx: MutationContext | None = None) -> Matrix:
    """Map the entries of row or column ``i`` through ``f``."""
    ctx = ctx or PRISTINE
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    bound, length = (A.rows, A.cols) if axis == "row" else (A.cols, A.rows)
    if ctx.cmp(_TA_LO, i, 0) or ctx.cmp(_TA_HI, i, bound):
        raise IndexError(f"{axis} {i} outside [0, {bound})")
    data = list(A.data)
    for k in range(length):
        r, c = (i, k) if axis == "row" else (k, i)
        idx = _slot(ctx.arith(_TA_IDX, ctx.arith(_TA_ROW, r, A.cols), c), len(data))
        data[idx] = f(data[idx])
    return Matrix(A.rows, A.cols, tuple(data))


_uc = sites("matrix", "update_column")
_UC_LO = _uc.compare("<")
_UC_HI = _uc.compare(">=")
_UC_ROW = _uc.arith("*")
_UC_IDX = _uc.arith("+")


def update_column(A: Matrix, j: int, f: ElementFunction, ctx: MutationContext | None = None) -> Matrix:
    ctx = ctx or PRISTINE
    if ctx.cmp(_UC_LO, j, 0) or ctx.cmp(_UC_HI, j, A.cols):
        raise IndexError(f"column {j} outside [0, {A.cols})")
    data = list(A.data)
    for r in range(A.rows):
        idx = _slot(ctx.arith(_UC_IDX, ctx.arith(_UC_ROW, r, A.cols), j), len(data))
        data[idx] = f(data[idx])
    return Matrix(A.rows, A.cols, tuple(data))


_ze = sites("matrix", "zero")
_ZE_ROWS = _ze.compare("<")
_ZE_COLS = _ze.compare("<")
_ZE_FILL = _ze.constant(0.0)


def zero(r: int, c: int, ctx: MutationContext | None = None) -> Matrix:
    ctx = ctx or PRISTINE
    if ctx.cmp(_ZE_ROWS, r, 1) or ctx.cmp(_ZE_COLS, c, 1):
        raise DimensionError(f"cannot create a {r}x{c} matrix")
    fill = ctx.const(_ZE_FILL)
    return Matrix(r, c, tuple(fill for _ in range(r * c)))


def sum_entries(A: Matrix) -> float:
    """Correctly rounded entry sum (independent of entry order)."""
    return math.fsum(A.data)
