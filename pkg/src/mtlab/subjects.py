"""The methods under test and the seeded source-test generator.

Each :class:`Method` says how a test calls the system under test: which matrix
(and, for solvers, which right-hand side) it takes, which extra parameters it
draws, and which generation profiles produce valid inputs for it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import matrix as mx
from . import solvers as sv
from .matrix import FUNCTIONS, Matrix
from .mutation import PRISTINE, MutationContext
from .seeding import derive_seed
from .solvers import Vector

MATRIX_ONLY = "matrix-only"
MATRIX_AND_VECTOR = "matrix-and-vector"
CONDITION_LIMIT = 1e4
MAX_REDRAWS = 1000


@dataclass(frozen=True)
class Method:
    name: str
    area: str
    kind: str
    call: Callable[[MutationContext, Matrix, Vector | None, dict], Any]
    draw_params: Callable[[random.Random, Matrix], dict] = lambda rng, A: {}
    profiles: tuple[str, ...] = ("default",)
    square_only: bool = False

    def invoke(self, ctx: MutationContext | None, A: Matrix, v: Vector | None, params: dict):
        return self.call(ctx or PRISTINE, A, v, params)


@dataclass(frozen=True)
class SourceTestCase:
    test_id: str
    method: str
    matrix: Matrix
    vector: Vector | None = None
    params: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def source(self):
        return self.matrix if self.vector is None else (self.matrix, self.vector)

    def run(self, ctx: MutationContext | None = None, source=None):
        A, v = _split(source if source is not None else self.source)
        return METHODS[self.method].invoke(ctx, A, v, self.params)

    def describe(self) -> dict:
        out = {"test_id": self.test_id, "method": self.method, "seed": self.seed, "matrix": self.matrix.to_rows()}
        if self.vector is not None:
            out["vector"] = list(self.vector.data)
        if self.params:
            out["params"] = self.params
        return out


def _split(source):
    if isinstance(source, tuple):
        return source
    return source, None


# ----------------------------------------------------------- parameter draws


def _draw_scalar(rng, A):
    return {"b": float(rng.randint(1, 5))}


def _draw_equals(rng, A):
    other = A.to_rows()
    if rng.random() < 0.5:
        i, j = rng.randrange(A.rows), rng.randrange(A.cols)
        other[i][j] += 1.0
    return {"other": other, "precision": rng.choice([0.0, 0.5])}


def _draw_insert(rng, A):
    br, bc = rng.randint(1, A.rows), rng.randint(1, A.cols)
    block = [[float(rng.randint(1, 9)) for _ in range(bc)] for _ in range(br)]
    return {"block": block, "row": rng.randint(0, A.rows - br), "col": rng.randint(0, A.cols - bc)}


def _draw_power(rng, A):
    return {"n": rng.randint(0, 4)}


def _draw_select(rng, A):
    rows = rng.sample(range(A.rows), rng.randint(1, A.rows))
    cols = rng.sample(range(A.cols), rng.randint(1, A.cols))
    return {"rows": rows, "cols": cols}


def _draw_set_row(rng, A):
    return {"row": rng.randrange(A.rows), "value": float(rng.randint(0, 9))}


def _draw_shuffle(rng, A):
    return {"seed": rng.randrange(2**31)}


def _draw_slice(rng, A):
    return {"r": rng.randint(1, A.rows), "c": rng.randint(1, A.cols)}


# Non-decreasing on nonnegative entries, so the sum-growth relations stay sound.
MONOTONE_FUNCTIONS = ("double", "identity", "increment", "square")


def _pick_function(rng, A):
    pool = MONOTONE_FUNCTIONS if min(A.data) >= 0 else sorted(FUNCTIONS)
    return rng.choice(pool)


def _draw_row_fn(rng, A):
    return {"index": rng.randrange(A.rows), "function": _pick_function(rng, A)}


def _draw_col_fn(rng, A):
    return {"index": rng.randrange(A.cols), "function": _pick_function(rng, A)}


def _mat(name: str, call, draw=None, square_only: bool = False) -> Method:
    profiles = ("default", "signed") if square_only else ("default", "signed", "rectangular")
    return Method(name, "matrix", MATRIX_ONLY, call, draw or (lambda rng, A: {}), profiles, square_only)


_MATRIX_METHODS = [
    _mat("add", lambda c, A, v, p: mx.scalar_elementwise(A, p["b"], "add", c), _draw_scalar),
    _mat("determinant", lambda c, A, v, p: mx.determinant(A, c), square_only=True),
    _mat(
        "equals",
        lambda c, A, v, p: mx.equals(A, Matrix.from_rows(p["other"]), p["precision"], c),
        _draw_equals,
    ),
    _mat(
        "insert",
        lambda c, A, v, p: mx.insert(A, Matrix.from_rows(p["block"]), p["row"], p["col"], c),
        _draw_insert,
    ),
    _mat("multiply", lambda c, A, v, p: mx.scalar_elementwise(A, p["b"], "multiply", c), _draw_scalar),
    _mat("power", lambda c, A, v, p: mx.power(A, p["n"], c), _draw_power, square_only=True),
    _mat("rank", lambda c, A, v, p: mx.rank(A, c)),
    _mat("remove_last_column", lambda c, A, v, p: mx.remove_last(A, "column", c)),
    _mat("remove_last_row", lambda c, A, v, p: mx.remove_last(A, "row", c)),
    _mat("rotate", lambda c, A, v, p: mx.rotate90(A, c)),
    _mat("select", lambda c, A, v, p: mx.select_submatrix(A, p["rows"], p["cols"], c), _draw_select),
    _mat("set_row", lambda c, A, v, p: mx.set_row(A, p["row"], p["value"], c), _draw_set_row),
    _mat("shuffle", lambda c, A, v, p: mx.shuffle(A, p["seed"], c), _draw_shuffle),
    _mat("slice_top_left", lambda c, A, v, p: mx.slice_top_left(A, p["r"], p["c"], c), _draw_slice),
    _mat("subtract", lambda c, A, v, p: mx.scalar_elementwise(A, p["b"], "subtract", c), _draw_scalar),
    _mat(
        "transform_column",
        lambda c, A, v, p: mx.transform_axis(A, "column", p["index"], FUNCTIONS[p["function"]], c),
        _draw_col_fn,
    ),
    _mat(
        "transform_row",
        lambda c, A, v, p: mx.transform_axis(A, "row", p["index"], FUNCTIONS[p["function"]], c),
        _draw_row_fn,
    ),
    _mat("transpose", lambda c, A, v, p: mx.transpose(A, c)),
    _mat(
        "update_column",
        lambda c, A, v, p: mx.update_column(A, p["index"], FUNCTIONS[p["function"]], c),
        _draw_col_fn,
    ),
    _mat("zero", lambda c, A, v, p: mx.zero(A.rows, A.cols, c)),
]

_SOLVER_METHODS = [
    Method(
        "least_squares",
        "least_squares",
        MATRIX_AND_VECTOR,
        lambda c, A, v, p: sv.solve_least_squares(A, v, c),
        profiles=("square", "overdetermined"),
    ),
    Method(
        "forward_back",
        "forward_back",
        MATRIX_AND_VECTOR,
        lambda c, A, v, p: sv.solve_forward_back_substitution(A, v, c),
        profiles=("general",),
    ),
    Method(
        "square_root",
        "square_root",
        MATRIX_AND_VECTOR,
        lambda c, A, v, p: sv.solve_square_root(A, v, c),
        profiles=("spd",),
    ),
]

METHODS: dict[str, Method] = {m.name: m for m in _MATRIX_METHODS + _SOLVER_METHODS}
AREA_METHODS: dict[str, tuple[str, ...]] = {}
for _m in METHODS.values():
    AREA_METHODS.setdefault(_m.area, ())
    AREA_METHODS[_m.area] += (_m.name,)


# ------------------------------------------------------------ input profiles


def _int_matrix(rng, rows, cols, lo, hi) -> Matrix:
    return Matrix(rows, cols, tuple(float(rng.randint(lo, hi)) for _ in range(rows * cols)))


def _real_rows(rng, rows, cols) -> list[list[float]]:
    return [[rng.uniform(-10.0, 10.0) for _ in range(cols)] for _ in range(rows)]


def _well_conditioned(rows: list[list[float]]) -> bool:
    return bool(np.linalg.cond(np.array(rows)) < CONDITION_LIMIT)


def _draw_input(method: Method, profile: str, rng: random.Random) -> tuple[Matrix, Vector | None]:
    if method.kind == MATRIX_ONLY:
        n = rng.randint(2, 5)
        if profile == "default":
            return _int_matrix(rng, n, n, 1, 9), None
        if profile == "signed":
            return _int_matrix(rng, n, n, -9, 9), None
        return _int_matrix(rng, n, rng.randint(2, 5), 1, 9), None
    n = rng.randint(2, 5)
    if profile == "spd":
        B = _real_rows(rng, n, n)
        data = [
            [sum(B[k][i] * B[k][j] for k in range(n)) + (1.0 if i == j else 0.0) for j in range(n)]
            for i in range(n)
        ]
    else:
        rows = n + rng.randint(1, 2) if profile == "overdetermined" else n
        data = _real_rows(rng, rows, n)
    if not _well_conditioned(data):
        raise _Redraw
    v = Vector(tuple(rng.uniform(-10.0, 10.0) for _ in range(len(data))))
    return Matrix.from_rows(data), v


class _Redraw(Exception):
    pass


def generate_suite(method: str, n: int, seed: int, profile: str | None = None) -> list[SourceTestCase]:
    """``n`` seeded source tests for ``method``, each valid on the pristine SUT."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    m = METHODS[method]
    if n < 1:
        raise ValueError("suite size must be at least 1")
    profile = profile or m.profiles[0]
    if profile not in m.profiles:
        raise ValueError(f"profile {profile!r} cannot produce valid inputs for {method}")
    rng = random.Random(derive_seed(seed, "suite", method, profile))
    cases = []
    for k in range(n):
        for _ in range(MAX_REDRAWS):
            try:
                A, v = _draw_input(m, profile, rng)
            except _Redraw:
                continue
            params = m.draw_params(rng, A)
            case = SourceTestCase(f"{method}#{k}", method, A, v, params, derive_seed(seed, method, k))
            try:
                case.run()
            except Exception:  # noqa: BLE001 - invalid draw, try again
                continue
            cases.append(case)
            break
        else:
            raise ValueError(f"could not draw a valid input for {method}")
    return cases
