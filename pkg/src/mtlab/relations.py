"""The catalog of metamorphic relations and their applicability screen.

Matrix relations (MR1..MR10) compare entry sums of the source and follow-up
outputs.  Solver relations (MR11..MR16) compare solution vectors directly.
Transforms that are themselves matrix operations (adding a constant, adding
or multiplying matrices, transposing) are computed with the system under test
under the caller's mutation context, so a fault in those operations is felt by
the follow-up run.  Permutations and vector scaling are computed directly.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from . import matrix as mx
from .matrix import Matrix
from .mutation import PRISTINE, Crashed, MutationContext
from .seeding import derive_seed
from .solvers import SolveResult, Vector
from .subjects import MATRIX_AND_VECTOR, MATRIX_ONLY, METHODS, generate_suite

SUM_GE = "SumGreaterEqual"
SUM_EQ = "SumEqual"
VEC_EQ = "VectorEqual"
DEFAULT_TOLERANCE = 1e-6
DEFAULT_SCREEN_TRIALS = 1000


@dataclass(frozen=True)
class MetamorphicRelation:
    mr_id: str
    name: str
    input_kind: str
    relation: str
    constant: float | None = None

    @property
    def number(self) -> int:
        return int(self.mr_id[2:])


CATALOG: dict[str, MetamorphicRelation] = {
    mr.mr_id: mr
    for mr in (
        MetamorphicRelation("MR1", "Addition", MATRIX_ONLY, SUM_GE, 3.0),
        MetamorphicRelation("MR2", "AdditionWithIdentityMatrix", MATRIX_ONLY, SUM_GE),
        MetamorphicRelation("MR3", "Multiplication", MATRIX_ONLY, SUM_GE, 2.0),
        MetamorphicRelation("MR4", "MultiplicationWithIdentityMatrix", MATRIX_ONLY, SUM_EQ),
        MetamorphicRelation("MR5", "Transpose", MATRIX_ONLY, SUM_EQ),
        MetamorphicRelation("MR6", "MatrixAddition", MATRIX_ONLY, SUM_GE),
        MetamorphicRelation("MR7", "MatrixMultiplication", MATRIX_ONLY, SUM_GE),
        MetamorphicRelation("MR8", "PermuteColumn", MATRIX_ONLY, SUM_EQ),
        MetamorphicRelation("MR9", "PermuteRow", MATRIX_ONLY, SUM_EQ),
        MetamorphicRelation("MR10", "PermuteElement", MATRIX_ONLY, SUM_EQ),
        MetamorphicRelation("MR11", "Multiplication", MATRIX_AND_VECTOR, VEC_EQ, 2.0),
        MetamorphicRelation("MR12", "PermuteRowElement", MATRIX_AND_VECTOR, VEC_EQ),
        MetamorphicRelation("MR13", "MatrixVectorAddition", MATRIX_AND_VECTOR, VEC_EQ),
        MetamorphicRelation("MR14", "MultiplicationWithTransposeMatrix", MATRIX_AND_VECTOR, VEC_EQ),
        MetamorphicRelation("MR15", "MultiplicationWithIdentityMatrix", MATRIX_AND_VECTOR, VEC_EQ),
        MetamorphicRelation("MR16", "MultiplicationWithNegative", MATRIX_AND_VECTOR, VEC_EQ, -2.0),
    )
}
MR_IDS = tuple(CATALOG)


def get_relation(mr) -> MetamorphicRelation:
    if isinstance(mr, MetamorphicRelation):
        return mr
    try:
        return CATALOG[mr]
    except KeyError:
        raise ValueError(f"unknown relation {mr!r}") from None


def relations_for(kind: str) -> tuple[str, ...]:
    return tuple(mr_id for mr_id, mr in CATALOG.items() if mr.input_kind == kind)


@dataclass(frozen=True)
class FollowUp:
    matrix: Matrix
    vector: Vector | None = None
    record: dict = field(default_factory=dict)

    @property
    def source(self):
        return self.matrix if self.vector is None else (self.matrix, self.vector)


# ---------------------------------------------------------------- transforms


def _rect_identity(rows: int, cols: int) -> Matrix:
    return Matrix(rows, cols, tuple(1.0 if i == j else 0.0 for i in range(rows) for j in range(cols)))


def _permutation(n: int, rng: random.Random) -> list[int]:
    if n < 2:
        raise ValueError("a permutation needs at least two rows or columns")
    perm = list(range(n))
    while perm == sorted(perm):
        rng.shuffle(perm)
    return perm


def _permute_rows(A: Matrix, perm) -> Matrix:
    return Matrix.from_rows([A.to_rows()[p] for p in perm])


def _permute_cols(A: Matrix, perm) -> Matrix:
    return Matrix.from_rows([[row[p] for p in perm] for row in A.to_rows()])


def _split_input(mr: MetamorphicRelation, source) -> tuple[Matrix, Vector | None]:
    if mr.input_kind == MATRIX_ONLY:
        if not isinstance(source, Matrix):
            raise ValueError(f"{mr.mr_id} takes a matrix input")
        return source, None
    if not (
        isinstance(source, tuple)
        and len(source) == 2
        and isinstance(source[0], Matrix)
        and isinstance(source[1], Vector)
    ):
        raise ValueError(f"{mr.mr_id} takes a (matrix, vector) input")
    return source


def _scaled(v: Vector, b: float) -> Vector:
    return Vector(tuple(b * x for x in v.data))


def transform_source(mr, source, seed: int = 0, ctx: MutationContext | None = None) -> FollowUp:
    """Build the follow-up input for ``source``.  Never modifies ``source``."""
    mr = get_relation(mr)
    ctx = ctx or PRISTINE
    A, v = _split_input(mr, source)
    rng = random.Random(derive_seed(seed, "transform", mr.mr_id))
    rec: dict = {}
    if mr.constant is not None:
        rec["b"] = mr.constant
    n = mr.number

    if n == 1:
        return FollowUp(mx.scalar_elementwise(A, mr.constant, "add", ctx), None, rec)
    if n == 2:
        return FollowUp(mx.matrix_add(A, _rect_identity(A.rows, A.cols), ctx), None, rec)
    if n == 3:
        return FollowUp(mx.scalar_elementwise(A, mr.constant, "multiply", ctx), None, rec)
    if n == 4:
        return FollowUp(mx.matrix_multiply(A, Matrix.identity(A.cols), ctx), None, rec)
    if n == 5:
        return FollowUp(mx.transpose(A, ctx), None, rec)
    if n == 6:
        return FollowUp(mx.matrix_add(A, A, ctx), None, rec)
    if n == 7:
        return FollowUp(mx.matrix_multiply(A, A, ctx), None, rec)
    if n == 8:
        rec["perm"] = _permutation(A.cols, rng)
        return FollowUp(_permute_cols(A, rec["perm"]), None, rec)
    if n == 9:
        rec["perm"] = _permutation(A.rows, rng)
        return FollowUp(_permute_rows(A, rec["perm"]), None, rec)
    if n == 10:
        if A.rows < 2 or A.cols < 2:
            raise ValueError("element swap needs at least two rows and two columns")
        last_r, last_c = A.rows - 1, A.cols - 1
        i, j = rng.randrange(last_r), rng.randrange(last_c)
        rows = A.to_rows()
        rows[i][last_c], rows[last_r][j] = rows[last_r][j], rows[i][last_c]
        rec["swap"] = [[i, last_c], [last_r, j]]
        return FollowUp(Matrix.from_rows(rows), None, rec)
    if n in (11, 16):
        return FollowUp(mx.scalar_elementwise(A, mr.constant, "multiply", ctx), _scaled(v, mr.constant), rec)
    if n == 12:
        rec["perm"] = _permutation(A.rows, rng)
        return FollowUp(_permute_rows(A, rec["perm"]), Vector(tuple(v[p] for p in rec["perm"])), rec)
    if n == 13:
        return FollowUp(mx.matrix_add(A, A, ctx), Vector(tuple(x + x for x in v.data)), rec)
    if n == 14:
        At = mx.transpose(A, ctx)
        Atv = mx.matrix_multiply(At, Matrix(len(v), 1, v.data), ctx)
        return FollowUp(mx.matrix_multiply(At, A, ctx), Vector(Atv.data), rec)
    # MR15
    return FollowUp(mx.matrix_multiply(Matrix.identity(A.rows), A, ctx), v, rec)


# ------------------------------------------------------------------- checks


def aggregate(output) -> float:
    if isinstance(output, Matrix):
        return mx.sum_entries(output)
    if isinstance(output, bool):
        return 1.0 if output else 0.0
    if isinstance(output, (int, float)):
        return float(output)
    raise TypeError(f"cannot aggregate {type(output).__name__}; vectors are compared directly")


def _solution(output) -> tuple[float, ...]:
    if isinstance(output, SolveResult):
        return output.solution.data
    if isinstance(output, Vector):
        return output.data
    raise TypeError(f"expected a solver output, got {type(output).__name__}")


def check_relation(mr, source_out, follow_out, tol: float = DEFAULT_TOLERANCE) -> bool:
    """True when the relation holds; a crash on either side is a violation."""
    mr = get_relation(mr)
    if isinstance(source_out, Crashed) or isinstance(follow_out, Crashed):
        return False
    if mr.relation == VEC_EQ:
        xs, ys = _solution(source_out), _solution(follow_out)
        if len(xs) != len(ys):
            return False
        scale = max(1.0, max((abs(x) for x in xs), default=0.0))
        diff = max((abs(x - y) for x, y in zip(xs, ys)), default=0.0)
        return diff <= tol * scale
    s, f = aggregate(source_out), aggregate(follow_out)
    if not (math.isfinite(s) and math.isfinite(f)):
        return False
    scale = max(1.0, abs(s))
    if mr.relation == SUM_GE:
        return f >= s - tol * scale
    return abs(f - s) <= tol * scale


# --------------------------------------------------------------- screening


@dataclass(frozen=True)
class ApplicabilityRecord:
    method: str
    mr: str
    applicable: bool
    screen_trials: int
    violations: int
    reason: str = ""


def holds_on(case, mr, tol: float = DEFAULT_TOLERANCE, source_out=None) -> bool | None:
    """Check one relation on one pristine source test; None if the follow-up is undefined."""
    mr = get_relation(mr)
    try:
        fol = transform_source(mr, case.source, case.seed)
        follow_out = case.run(source=fol.source)
    except Exception:  # noqa: BLE001 - follow-up outside the method's domain
        return None
    if source_out is None:
        source_out = case.run()
    return check_relation(mr, source_out, follow_out, tol)


def screen_method(
    method: str, mrs, trials: int = DEFAULT_SCREEN_TRIALS, seed: int = 0, tol: float = DEFAULT_TOLERANCE
) -> list[ApplicabilityRecord]:
    """Screen several relations for one method on a shared pool of inputs."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if trials < 1:
        raise ValueError("screening needs at least one trial")
    relations = [get_relation(mr) for mr in mrs]
    kind = METHODS[method].kind
    pool = None
    records = []
    for mr in relations:
        if kind != mr.input_kind:
            records.append(ApplicabilityRecord(method, mr.mr_id, False, 0, 0, "input kind mismatch"))
            continue
        if pool is None:
            cases = generate_suite(method, trials, derive_seed(seed, "screen"))
            pool = [(case, case.run()) for case in cases]
        checked = violations = 0
        for case, out in pool:
            verdict = holds_on(case, mr, tol, out)
            if verdict is None:
                continue
            checked += 1
            violations += not verdict
        if checked == 0:
            records.append(ApplicabilityRecord(method, mr.mr_id, False, 0, 0, "no valid follow-up input"))
        elif violations:
            records.append(ApplicabilityRecord(method, mr.mr_id, False, checked, violations, "relation violated"))
        else:
            records.append(ApplicabilityRecord(method, mr.mr_id, True, checked, 0))
    return records


def screen_applicability(
    mr, method: str, trials: int = DEFAULT_SCREEN_TRIALS, seed: int = 0, tol: float = DEFAULT_TOLERANCE
) -> ApplicabilityRecord:
    return screen_method(method, [mr], trials, seed, tol)[0]


def screen_all(methods, mrs, trials: int = DEFAULT_SCREEN_TRIALS, seed: int = 0, tol: float = DEFAULT_TOLERANCE):
    return [rec for m in methods for rec in screen_method(m, mrs, trials, seed, tol)]


def applicability_tsv(records) -> str:
    lines = ["method\tmr\tapplicable\ttrials\tviolations\treason"]
    for r in records:
        lines.append(
            f"{r.method}\t{r.mr}\t{'yes' if r.applicable else 'no'}\t{r.screen_trials}\t{r.violations}\t{r.reason}"
        )
    return "\n".join(lines) + "\n"
