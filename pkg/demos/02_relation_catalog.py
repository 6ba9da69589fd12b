"""
A tour of the sixteen relations
===============================

Builds every follow-up input for one source, then screens a few
(method, relation) pairs the way a campaign does.
"""

# %%
from mtlab import CATALOG, Matrix, Vector, screen_applicability, transform_source

A = Matrix.from_rows([[1, 2], [3, 4]])
v = Vector((5.0, 6.0))

# %% Matrix-only relations (MR1-MR10) compare entry sums
for mr_id, mr in CATALOG.items():
    source = A if mr.input_kind == "matrix-only" else (A, v)
    fol = transform_source(mr_id, source, seed=7)
    extra = f" v'={list(fol.vector.data)}" if fol.vector is not None else ""
    print(f"{mr_id:>4} {mr.name:<36} {mr.relation:<15} A'={fol.matrix.to_rows()}{extra} {fol.record or ''}")

# %% Screening decides where a relation may be used as an oracle
# Adding a constant does not move a determinant monotonically, so MR1 is
# rejected for `determinant`; A*I = A is exact, so MR4 is kept everywhere.
for mr, method in [("MR4", "power"), ("MR5", "determinant"), ("MR1", "determinant"),
                   ("MR12", "square_root"), ("MR14", "least_squares")]:
    rec = screen_applicability(mr, method, trials=200, seed=1)
    verdict = "applicable" if rec.applicable else f"excluded ({rec.reason}, {rec.violations} violations)"
    print(f"{method:>14} {mr:<5} {verdict}")
