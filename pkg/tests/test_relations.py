import math
import random

import numpy as np
import pytest

from mtlab import matrix as mx
from mtlab import solvers as sv
from mtlab.matrix import Matrix
from mtlab.mutation import Crashed, MutationContext
from mtlab.relations import (
    CATALOG,
    MR_IDS,
    ApplicabilityRecord,
    aggregate,
    applicability_tsv,
    check_relation,
    relations_for,
    screen_applicability,
    screen_method,
    transform_source,
)
from mtlab.solvers import Vector
from mtlab.subjects import MATRIX_AND_VECTOR, MATRIX_ONLY, SourceTestCase

M = Matrix.from_rows
A2 = M([[1, 2], [3, 4]])
V2 = Vector((5.0, 6.0))


def conditioned_system(rng, n):
    while True:
        A = np.array([[rng.uniform(-10, 10) for _ in range(n)] for _ in range(n)])
        if np.linalg.cond(A) < 1e3:
            return Matrix.from_array(A), Vector(tuple(rng.uniform(-10, 10) for _ in range(n)))


class TestCatalog:
    def test_sixteen_relations_with_kinds(self):
        assert MR_IDS == tuple(f"MR{i}" for i in range(1, 17))
        assert relations_for(MATRIX_ONLY) == MR_IDS[:10]
        assert relations_for(MATRIX_AND_VECTOR) == MR_IDS[10:]

    def test_relation_types(self):
        ge = {i for i, r in CATALOG.items() if r.relation == "SumGreaterEqual"}
        assert ge == {"MR1", "MR2", "MR3", "MR6", "MR7"}
        assert all(CATALOG[f"MR{i}"].relation == "VectorEqual" for i in range(11, 17))

    def test_constants(self):
        assert CATALOG["MR1"].constant == 3
        assert CATALOG["MR3"].constant == 2
        assert CATALOG["MR11"].constant == 2
        assert CATALOG["MR16"].constant == -2


class TestTransforms:
    def test_transpose(self):
        assert transform_source("MR5", A2).matrix == M([[1, 3], [2, 4]])

    def test_add_constant(self):
        fol = transform_source("MR1", A2)
        assert fol.matrix == M([[4, 5], [6, 7]])
        assert fol.record == {"b": 3}

    def test_scale_system(self):
        fol = transform_source("MR11", (A2, V2))
        assert fol.matrix == M([[2, 4], [6, 8]])
        assert fol.vector.data == (10.0, 12.0)

    def test_other_matrix_transforms(self):
        assert transform_source("MR2", A2).matrix == M([[2, 2], [3, 5]])
        assert transform_source("MR2", M([[1, 2, 3]])).matrix == M([[2, 2, 3]])
        assert transform_source("MR3", A2).matrix == M([[2, 4], [6, 8]])
        assert transform_source("MR4", A2).matrix == A2
        assert transform_source("MR6", A2).matrix == M([[2, 4], [6, 8]])
        assert transform_source("MR7", A2).matrix == M([[7, 10], [15, 22]])

    def test_permutations_are_seeded_and_recorded(self):
        A = M([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
        for mr in ("MR8", "MR9"):
            a, b = transform_source(mr, A, seed=4), transform_source(mr, A, seed=4)
            assert a == b
            perm = a.record["perm"]
            assert sorted(perm) == [0, 1, 2] and perm != [0, 1, 2]
        assert transform_source("MR9", A, seed=4).matrix == M([A.to_rows()[p] for p in transform_source("MR9", A, 4).record["perm"]])

    def test_element_swap_rule(self):
        A = M([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
        for seed in range(20):
            fol = transform_source("MR10", A, seed=seed)
            (i, c), (r, j) = fol.record["swap"]
            assert c == 2 and r == 2 and i < 2 and j < 2
            rows = A.to_rows()
            rows[i][c], rows[r][j] = rows[r][j], rows[i][c]
            assert fol.matrix == M(rows)
            assert sorted(fol.matrix.data) == sorted(A.data)

    def test_solver_transforms(self):
        fol = transform_source("MR12", (A2, V2), seed=1)
        assert fol.record["perm"] == [1, 0]
        assert fol.matrix == M([[3, 4], [1, 2]]) and fol.vector.data == (6.0, 5.0)
        fol = transform_source("MR13", (A2, V2))
        assert fol.matrix == M([[2, 4], [6, 8]]) and fol.vector.data == (10.0, 12.0)
        fol = transform_source("MR14", (A2, V2))
        assert fol.matrix == M([[10, 14], [14, 20]]) and fol.vector.data == (23.0, 34.0)
        fol = transform_source("MR15", (A2, V2))
        assert fol.matrix == A2 and fol.vector == V2
        fol = transform_source("MR16", (A2, V2))
        assert fol.matrix == M([[-2, -4], [-6, -8]]) and fol.vector.data == (-10.0, -12.0)

    def test_source_untouched(self):
        A = M([[1, 2, 3], [4, 5, 6]])
        v = Vector((1.0, 2.0))
        snapshot = (A.to_rows(), v.data)
        for mr in MR_IDS:
            src = A if CATALOG[mr].input_kind == MATRIX_ONLY else (A, v)
            try:
                transform_source(mr, src, seed=3)
            except ValueError:
                pass
            assert (A.to_rows(), v.data) == snapshot

    def test_kind_mismatch(self):
        with pytest.raises(ValueError):
            transform_source("MR1", (A2, V2))
        with pytest.raises(ValueError):
            transform_source("MR11", A2)

    def test_permutation_needs_two(self):
        with pytest.raises(ValueError):
            transform_source("MR9", M([[1, 2, 3]]))
        with pytest.raises(ValueError):
            transform_source("MR8", M([[1], [2]]))
        with pytest.raises(ValueError):
            transform_source("MR10", M([[1, 2, 3]]))

    def test_unknown_relation(self):
        with pytest.raises(ValueError):
            transform_source("MR17", A2)


class TestAggregate:
    def test_examples(self):
        assert aggregate(mx.zero(2, 3)) == 0
        assert aggregate(A2) == 10
        assert aggregate(True) == 1 and aggregate(False) == 0
        assert aggregate(-2.5) == -2.5
        assert aggregate(3) == 3.0

    def test_vectors_not_aggregated(self):
        with pytest.raises(TypeError):
            aggregate(V2)


class TestCheck:
    def test_equal_outputs_hold(self):
        assert check_relation("MR4", A2, A2)
        assert not check_relation("MR4", A2, M([[1, 2], [3, 5]]))

    def test_greater_equal(self):
        assert check_relation("MR1", A2, M([[4, 5], [6, 7]]))
        assert not check_relation("MR1", M([[4, 5], [6, 7]]), A2)
        # within tolerance scaled by the source aggregate
        assert check_relation("MR1", 1000.0, 1000.0 - 5e-4)
        assert not check_relation("MR1", 1000.0, 1000.0 - 2e-3)

    def test_crash_is_violation(self):
        assert not check_relation("MR4", Crashed("ZeroDivisionError"), A2)
        assert not check_relation("MR4", A2, Crashed("timeout"))
        assert not check_relation("MR15", Crashed("ValueError"), V2)

    def test_vectors(self):
        assert check_relation("MR15", V2, Vector((5.0, 6.0 + 1e-9)))
        assert not check_relation("MR15", V2, Vector((5.0, 6.1)))
        assert not check_relation("MR15", V2, Vector((5.0, 6.0, 0.0)))

    def test_non_finite_aggregate_is_violation(self):
        assert not check_relation("MR4", 1.0, math.inf)

    def test_negative_scaling_on_pristine_solver(self):
        rng = random.Random(8)
        for _ in range(200):
            A, v = conditioned_system(rng, rng.randint(1, 5))
            src = sv.solve_least_squares(A, v)
            for mr in ("MR11", "MR16"):
                fol = transform_source(mr, (A, v))
                out = sv.solve_least_squares(fol.matrix, fol.vector)
                assert check_relation(mr, src, out, tol=1e-8)

    def test_ge_relation_is_one_sided(self):
        class SkipScaling(MutationContext):
            __slots__ = ()

            def arith(self, site, a, b):
                if site.site_id == "matrix.scalar_elementwise#2":
                    return a
                return super().arith(site, a, b)

        case = SourceTestCase("t#0", "transpose", M([[1, 2], [3, 4]]))
        fol = transform_source("MR3", case.source, ctx=SkipScaling())
        assert fol.matrix == case.matrix  # scaling dropped
        assert check_relation("MR3", case.run(), case.run(source=fol.source))

    def test_permutations_exact_on_entry_sums(self):
        rng = random.Random(9)
        for _ in range(200):
            cols = rng.randint(2, 5)
            A = M([[rng.randint(-9, 9) for _ in range(cols)] for _ in range(rng.randint(2, 5))])
            case = SourceTestCase("s#0", "add", A, params={"b": 3.0})
            for mr in ("MR5", "MR8", "MR9", "MR10"):
                fol = transform_source(mr, A, seed=rng.randrange(1000))
                out = case.run(source=fol.source)
                assert sorted(out.data) == sorted(case.run().data)
                assert check_relation(mr, case.run(), out, tol=0.0)


class TestScreening:
    def test_identity_product_for_power(self):
        rec = screen_applicability("MR4", "power", trials=200, seed=2)
        assert rec.applicable and rec.violations == 0 and rec.screen_trials == 200

    def test_transpose_for_determinant(self):
        assert screen_applicability("MR5", "determinant", trials=200, seed=2).applicable

    def test_add_constant_for_determinant(self):
        rec = screen_applicability("MR1", "determinant", trials=200, seed=2)
        assert not rec.applicable and rec.violations > 0 and rec.reason == "relation violated"

    def test_kind_mismatch_reason(self):
        rec = screen_applicability("MR11", "transpose", trials=10)
        assert (rec.applicable, rec.reason) == (False, "input kind mismatch")

    def test_errors(self):
        with pytest.raises(ValueError):
            screen_applicability("MR1", "nope", trials=10)
        with pytest.raises(ValueError):
            screen_applicability("MR1", "add", trials=0)

    def test_shared_pool_matches_single(self):
        many = screen_method("rank", ["MR1", "MR4", "MR5"], trials=100, seed=3)
        single = [screen_applicability(mr, "rank", trials=100, seed=3) for mr in ("MR1", "MR4", "MR5")]
        assert many == single

    def test_tsv_export(self):
        recs = [
            ApplicabilityRecord("power", "MR4", True, 50, 0),
            ApplicabilityRecord("determinant", "MR1", False, 50, 7, "relation violated"),
        ]
        lines = applicability_tsv(recs).splitlines()
        assert lines[0].split("\t") == ["method", "mr", "applicable", "trials", "violations", "reason"]
        assert lines[1] == "power\tMR4\tyes\t50\t0\t"
        assert lines[2] == "determinant\tMR1\tno\t50\t7\trelation violated"
