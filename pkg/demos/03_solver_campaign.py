"""
A small campaign on the least-squares solver
============================================

Every least-squares mutant, a four-test suite, all three oracles.  Prints
the score table and the per-mutant fault detection ratios.  Runs in a few
seconds; `mtlab run` does the same for every method.
"""

# %%
from mtlab.experiment import RunConfig, render_report, run_experiment

config = RunConfig(seed=1, suite_size=4, methods=("least_squares",), screen_trials=200)
result = run_experiment(config)
print(result.verdict())

# %% Which mutants only the relations found
only_mt = result.comparison["only_first"]["least_squares"]
print(len(only_mt), "mutants killed by MT and missed by the trivial assertion:", only_mt[:12], "...")

# %% Tables, exactly as `mtlab report` renders them
print(render_report(result.document()))
