"""
Why a shape-only assertion misses faults that a relation catches
================================================================

One mutant, one input, three oracles.
"""

# %% A fault that keeps the output shape
# The mutant adds one to whatever `determinant` returns.  A generated
# assertion that only checks "returns a finite float" cannot see it.
from mtlab import Matrix, generate_mutants, enumerate_sites, run_with_mutant
from mtlab import matrix as mx
from mtlab.harness import output_facts
from mtlab.relations import check_relation, transform_source

mutants = generate_mutants(enumerate_sites())
plus_one = next(m for m in mutants
                if m.site.operation == "determinant" and m.operator.name == "return-plus-one")
print("mutant", plus_one.mutant_id, plus_one.site.site_id, plus_one.operator.label)

A = Matrix.from_rows([[2, 3], [1, 4]])
pristine = mx.determinant(A)
mutated = run_with_mutant(plus_one, lambda ctx: mx.determinant(A, ctx))
print("pristine", pristine, "mutated", mutated)

# %% Trivial oracle: same facts, so the mutant survives
print("trivial facts equal:", output_facts(pristine) == output_facts(mutated))

# %% Full regression: compares values, so it kills
print("regression kills:", abs(pristine - mutated) > 1e-12)

# %% Metamorphic oracle, no expected value needed
# MR5 says det(A^T) == det(A).  The mutant shifts both sides by one, so
# MR5 alone cannot see this fault.  MR4 (A times I) cannot either.
for mr in ("MR4", "MR5"):
    fol = transform_source(mr, A)
    src_out = run_with_mutant(plus_one, lambda ctx: mx.determinant(A, ctx))
    fol_out = run_with_mutant(plus_one, lambda ctx: mx.determinant(fol.matrix, ctx))
    print(mr, "holds under the mutant:", check_relation(mr, src_out, fol_out))

# %% A fault MT does catch where the weak assertion does not
# Flip + to - inside matrix_add.  `power` never calls matrix_add, but MR6
# builds its follow-up (A + A) with the library under test, so the fault
# zeroes the follow-up input and the >= relation breaks.
flip = next(m for m in mutants
            if m.site.site_id == "matrix.matrix_add#0" and m.operator.label == "aor-replace(+->-)")
src = lambda ctx: mx.power(A, 2, ctx)
fol = lambda ctx: mx.power(transform_source("MR6", A, ctx=ctx).matrix, 2, ctx)
s, f = run_with_mutant(flip, src), run_with_mutant(flip, fol)
print("MR6 source sum", mx.sum_entries(s), "follow-up sum", mx.sum_entries(f))
print("MR6 holds under the mutant:", check_relation("MR6", s, f))
