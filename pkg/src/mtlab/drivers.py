"""Seeded random call drivers for every instrumented operation.

A driver draws arguments for one operation, including a share of invalid ones
so that guard comparisons are exercised too.  Drivers feed the equivalent-
mutant screen and the instrumented-versus-reference comparison.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable

from . import matrix as mx
from . import reference as ref
from . import solvers as sv
from .matrix import FUNCTIONS, Matrix
from .mutation import MutationContext
from .seeding import derive_seed


def _entry(rng: random.Random) -> float:
    if rng.random() < 0.6:
        return float(rng.randint(-9, 9))
    return round(rng.uniform(-10.0, 10.0), 3)


def _matrix(rng: random.Random, rows: int, cols: int, degenerate: float = 0.0) -> Matrix:
    data = [[_entry(rng) for _ in range(cols)] for _ in range(rows)]
    if rows > 1 and rng.random() < degenerate:
        src, dst = rng.sample(range(rows), 2)
        k = float(rng.choice([1, 2, -1]))
        data[dst] = [k * x for x in data[src]]
    return Matrix.from_rows(data)


def _shape(rng: random.Random, lo: int = 1, hi: int = 5) -> tuple[int, int]:
    return rng.randint(lo, hi), rng.randint(lo, hi)


def _spd(rng: random.Random, n: int) -> Matrix:
    B = [[round(rng.uniform(-3.0, 3.0), 3) for _ in range(n)] for _ in range(n)]
    data = [
        [sum(B[k][i] * B[k][j] for k in range(n)) + (1.0 if i == j else 0.0) for j in range(n)] for i in range(n)
    ]
    return Matrix.from_rows(data)


def _vector(rng: random.Random, n: int) -> sv.Vector:
    return sv.Vector(tuple(_entry(rng) for _ in range(n)))


# argument makers -----------------------------------------------------------


def _args_scalar(rng):
    return _matrix(rng, *_shape(rng)), float(rng.randint(-5, 5)), rng.choice(mx.SCALAR_KINDS)


def _args_add(rng):
    r, c = _shape(rng)
    B = _matrix(rng, r, c) if rng.random() > 0.1 else _matrix(rng, r + 1, c)
    return _matrix(rng, r, c), B


def _args_multiply(rng):
    r, k = _shape(rng)
    c = rng.randint(1, 5)
    B = _matrix(rng, k, c) if rng.random() > 0.1 else _matrix(rng, k + 1, c)
    return _matrix(rng, r, k), B


def _args_power(rng):
    n = rng.randint(1, 4)
    A = Matrix.from_rows([[float(rng.randint(-3, 3)) for _ in range(n)] for _ in range(n)])
    return A, rng.randint(0, 4)


def _args_square(rng):
    n = rng.randint(1, 5)
    return (_matrix(rng, n, n, degenerate=0.3),)


def _args_rank(rng):
    return (_matrix(rng, *_shape(rng), degenerate=0.4),)


def _args_equals(rng):
    r, c = _shape(rng)
    A = _matrix(rng, r, c)
    roll = rng.random()
    if roll < 0.4:
        B = A
    elif roll < 0.85:
        i = rng.randrange(r * c)
        data = list(A.data)
        data[i] += rng.choice([1e-4, 0.5, 1.0, -1.0])
        B = Matrix(r, c, tuple(data))
    else:
        B = _matrix(rng, r, c + 1)
    return A, B, rng.choice([0.0, 1e-3, 0.5, 1.0])


def _args_plain(rng):
    return (_matrix(rng, *_shape(rng)),)


def _args_shuffle(rng):
    return _matrix(rng, *_shape(rng)), rng.randrange(2**31)


def _index_list(rng, size):
    picks = [rng.randrange(size) for _ in range(rng.randint(1, size + 1))]
    if rng.random() < 0.15:
        picks[rng.randrange(len(picks))] = rng.choice([-1, size])
    return picks


def _args_select(rng):
    A = _matrix(rng, *_shape(rng))
    return A, _index_list(rng, A.rows), _index_list(rng, A.cols)


def _args_slice(rng):
    A = _matrix(rng, *_shape(rng))
    return A, rng.randint(1, A.rows + 1), rng.randint(1, A.cols + 1)


def _args_remove(rng):
    return _matrix(rng, *_shape(rng)), rng.choice(mx.AXES)


def _args_set_row(rng):
    A = _matrix(rng, *_shape(rng))
    return A, rng.randint(-1, A.rows), float(rng.randint(-9, 9))


def _args_insert(rng):
    A = _matrix(rng, *_shape(rng))
    B = _matrix(rng, rng.randint(1, A.rows), rng.randint(1, A.cols))
    return A, B, rng.randint(0, A.rows - B.rows + 1), rng.randint(0, A.cols - B.cols + 1)


def _args_transform(rng):
    A = _matrix(rng, *_shape(rng))
    axis = rng.choice(mx.AXES)
    bound = A.rows if axis == "row" else A.cols
    return A, axis, rng.randint(-1, bound), FUNCTIONS[rng.choice(sorted(FUNCTIONS))]


def _args_update(rng):
    A = _matrix(rng, *_shape(rng))
    return A, rng.randint(-1, A.cols), FUNCTIONS[rng.choice(sorted(FUNCTIONS))]


def _args_zero(rng):
    return rng.randint(0, 5), rng.randint(0, 5)


def _args_tall(rng):
    n = rng.randint(1, 4)
    return (_matrix(rng, n + rng.randint(0, 2), n, degenerate=0.15),)


def _args_lsq(rng):
    (A,) = _args_tall(rng)
    return A, _vector(rng, A.rows)


def _args_lu(rng):
    n = rng.randint(1, 5)
    return (_matrix(rng, n, n, degenerate=0.15),)


def _args_fbs(rng):
    (A,) = _args_lu(rng)
    return A, _vector(rng, A.rows)


def _args_chol(rng):
    n = rng.randint(1, 5)
    A = _spd(rng, n)
    roll = rng.random()
    if roll < 0.1 and n > 1:
        data = A.to_rows()
        data[0][n - 1] += 1.0
        A = Matrix.from_rows(data)
    elif roll < 0.2:
        A = A.elementwise(lambda x: -x)
    return (A,)


def _args_srs(rng):
    (A,) = _args_chol(rng)
    return A, _vector(rng, A.rows)


@dataclass(frozen=True)
class Driver:
    operation: str
    make_args: Callable[[random.Random], tuple]
    invoke: Callable[..., Any]
    reference: Callable[..., Any]

    def draw(self, seed: int, n: int) -> list[tuple]:
        rng = random.Random(derive_seed(seed, "driver", self.operation))
        return [self.make_args(rng) for _ in range(n)]

    def calls(self, seed: int, n: int) -> list[Callable[[MutationContext], Any]]:
        return [self.bind(args) for args in self.draw(seed, n)]

    def bind(self, args: tuple) -> Callable[[MutationContext], Any]:
        def call(ctx: MutationContext):
            return self.invoke(*args, ctx=ctx)

        return call


DRIVERS: dict[str, Driver] = {
    d.operation: d
    for d in (
        Driver("scalar_elementwise", _args_scalar, mx.scalar_elementwise, ref.scalar_elementwise),
        Driver("matrix_add", _args_add, mx.matrix_add, ref.matrix_add),
        Driver("matrix_multiply", _args_multiply, mx.matrix_multiply, ref.matrix_multiply),
        Driver("power", _args_power, mx.power, ref.power),
        Driver("determinant", _args_square, mx.determinant, ref.determinant),
        Driver("rank", _args_rank, mx.rank, ref.rank),
        Driver("equals", _args_equals, mx.equals, ref.equals),
        Driver("transpose", _args_plain, mx.transpose, ref.transpose),
        Driver("rotate90", _args_plain, mx.rotate90, ref.rotate90),
        Driver("shuffle", _args_shuffle, mx.shuffle, ref.shuffle),
        Driver("select_submatrix", _args_select, mx.select_submatrix, ref.select_submatrix),
        Driver("slice_top_left", _args_slice, mx.slice_top_left, ref.slice_top_left),
        Driver("remove_last", _args_remove, mx.remove_last, ref.remove_last),
        Driver("set_row", _args_set_row, mx.set_row, ref.set_row),
        Driver("insert", _args_insert, mx.insert, ref.insert),
        Driver("transform_axis", _args_transform, mx.transform_axis, ref.transform_axis),
        Driver("update_column", _args_update, mx.update_column, ref.update_column),
        Driver("zero", _args_zero, mx.zero, ref.zero),
        Driver("qr_decompose", _args_tall, sv.qr_decompose, ref.qr_decompose),
        Driver("solve_least_squares", _args_lsq, sv.solve_least_squares, ref.solve_least_squares),
        Driver("lu_decompose", _args_lu, sv.lu_decompose, ref.lu_decompose),
        Driver(
            "solve_forward_back_substitution",
            _args_fbs,
            sv.solve_forward_back_substitution,
            ref.solve_forward_back_substitution,
        ),
        Driver("cholesky_decompose", _args_chol, sv.cholesky_decompose, ref.cholesky_decompose),
        Driver("solve_square_root", _args_srs, sv.solve_square_root, ref.solve_square_root),
    )
}
