"""Acceptance criteria 1-9, one recorded pass/fail line each.

Heavy campaign runs come from the session fixtures in conftest.py.
"""

import random
import time
from fractions import Fraction

import numpy as np
import pytest

from mtlab import matrix as mx
from mtlab import solvers as sv
from mtlab.drivers import DRIVERS
from mtlab.experiment import MT, RunConfig, fdr_table, render_fdr, run_experiment
from mtlab.harness import KILLED, REGRESSION, SURVIVED, TRIVIAL, KillMatrix, fault_detection_ratio, soundness_check
from mtlab.matrix import Matrix
from mtlab.mutation import AREAS, PRISTINE, differential_trace, trace_hits
from mtlab.relations import MR_IDS, check_relation, screen_all, transform_source
from mtlab.seeding import derive_seed
from mtlab.solvers import SolveResult, Vector
from mtlab.subjects import AREA_METHODS, generate_suite
from oracles import cofactor_det, mat_vec, minor_rank


# ----------------------------------------------------------------- helpers


def fingerprint(value):
    """Bit-exact, comparable description of any SUT output or raised error type."""
    if isinstance(value, BaseException):
        return ("raised", type(value).__name__)
    if isinstance(value, Matrix):
        return ("matrix", value.shape, tuple(x.hex() for x in value.data))
    if isinstance(value, SolveResult):
        return ("solve", fingerprint(value.solution), value.residual_norm.hex())
    if isinstance(value, Vector):
        return ("vector", tuple(x.hex() for x in value.data))
    if isinstance(value, bool):
        return ("bool", value)
    if isinstance(value, float):
        return ("float", value.hex())
    if isinstance(value, int):
        return ("int", value)
    if isinstance(value, (tuple, list)):
        return ("seq", tuple(fingerprint(v) for v in value))
    raise TypeError(type(value))


def outcome(fn, *args, **kwargs):
    try:
        return fingerprint(fn(*args, **kwargs))
    except Exception as exc:  # noqa: BLE001
        return fingerprint(exc)


def conditioned(rng, rows, cols, limit=1e3):
    while True:
        A = [[rng.uniform(-10, 10) for _ in range(cols)] for _ in range(rows)]
        if np.linalg.cond(np.array(A)) < limit:
            return A


def spd(rng, n):
    B = [[rng.uniform(-10, 10) for _ in range(n)] for _ in range(n)]
    return [[sum(B[k][i] * B[k][j] for k in range(n)) + (i == j) for j in range(n)] for i in range(n)]


def recovers(solve, A, rng):
    x0 = [rng.uniform(-10, 10) for _ in range(len(A[0]))]
    x = solve(Matrix.from_rows(A), Vector(tuple(mat_vec(A, x0)))).solution.data
    return max(abs(a - b) for a, b in zip(x, x0)) <= 1e-8 * max(1.0, max(map(abs, x0)))


# ----------------------------------------------------------------- criteria


def test_criterion_1_pristine_soundness(verdict):
    start = time.perf_counter()
    records = screen_all(AREA_METHODS_ALL, MR_IDS, seed=1)
    checks, violations = soundness_check(records, per_pair=100, seed=1)
    elapsed = time.perf_counter() - start
    pairs = sum(r.applicable for r in records)
    ok = not violations and checks >= 5000 and elapsed < 60
    verdict(1, ok, f"{pairs} applicable pairs, {checks} fresh checks, {len(violations)} violations, {elapsed:.1f}s")
    assert ok, violations[:10]


AREA_METHODS_ALL = tuple(m for area in AREAS for m in AREA_METHODS[area])


def test_criterion_2_mt_beats_trivial_per_area(default_run, verdict):
    result, elapsed = default_run
    mt, trivial = result.reports[MT].scores, result.reports[TRIVIAL].scores
    per_area = {a: (mt[a], trivial[a]) for a in AREAS}
    ok = all(x > y for x, y in per_area.values()) and elapsed < 600
    detail = " ".join(f"{a}={x:.3f}>{y:.3f}" for a, (x, y) in per_area.items())
    verdict(2, ok, f"{detail} ({elapsed:.0f}s)")
    assert ok


def test_criterion_3_mt_exclusive_kills(default_run, verdict):
    result, _ = default_run
    only_mt = result.comparison["only_first"]
    assert result.comparison["first"] == MT and result.comparison["second"] == TRIVIAL
    ok = all(len(only_mt[a]) >= 1 for a in AREAS)
    verdict(3, ok, " ".join(f"{a}={len(only_mt[a])}" for a in AREAS) + " mutants killed by MT only")
    assert ok


@pytest.fixture(scope="module")
def second_corpus_run():
    return run_experiment(RunConfig(seed=2))


def test_criterion_4_oracle_ordering(default_run, second_corpus_run, verdict):
    failures = []
    for result in (default_run[0], second_corpus_run):
        reg, mt, tr = (result.reports[k].scores for k in (REGRESSION, MT, TRIVIAL))
        for key in list(AREAS) + ["overall"]:
            if not (reg[key] >= mt[key] and reg[key] >= tr[key]):
                failures.append((result.config.seed, key, reg[key], mt[key], tr[key]))
    ok = not failures
    verdict(4, ok, f"regression >= MT and >= trivial on 2 corpora x 5 scopes; failures: {failures or 'none'}")
    assert ok


def test_criterion_5_numerical_oracles(verdict):
    rng = random.Random(derive_seed(1, "acceptance", 5))
    det_bad = 0
    for _ in range(500):
        n = rng.randint(1, 4)
        rows = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
        exact = cofactor_det(rows)
        got = Fraction(mx.determinant(Matrix.from_rows(rows)))
        # relative error, measured against 1 for singular matrices
        det_bad += abs(got - exact) > Fraction(1, 10**9) * max(1, abs(exact))
    rank_bad = 0
    for k in range(500):
        r, c = rng.randint(1, 4), rng.randint(1, 4)
        if k % 2:  # product of thin factors: rank deficiency is common
            inner = rng.randint(1, min(r, c))
            L = [[rng.randint(-3, 3) for _ in range(inner)] for _ in range(r)]
            R = [[rng.randint(-3, 3) for _ in range(c)] for _ in range(inner)]
            rows = [[sum(L[i][t] * R[t][j] for t in range(inner)) for j in range(c)] for i in range(r)]
        else:
            rows = [[rng.randint(-2, 2) for _ in range(c)] for _ in range(r)]
        rank_bad += mx.rank(Matrix.from_rows(rows)) != minor_rank(rows)
    solver_bad = {"least_squares": 0, "forward_back": 0, "square_root": 0}
    for k in range(200):
        n = rng.randint(1, 5)
        solver_bad["least_squares"] += not recovers(sv.solve_least_squares, conditioned(rng, n + k % 3, n), rng)
        solver_bad["forward_back"] += not recovers(sv.solve_forward_back_substitution, conditioned(rng, n, n), rng)
        solver_bad["square_root"] += not recovers(sv.solve_square_root, spd(rng, n), rng)
    ok = det_bad == 0 and rank_bad == 0 and not any(solver_bad.values())
    verdict(5, ok, f"determinant misses {det_bad}/500, rank misses {rank_bad}/500, solver misses {solver_bad} of 200 each")
    assert ok


PERMUTATION_INVARIANT = ("add", "multiply", "subtract", "transpose", "rotate", "shuffle", "zero")


def test_criterion_6_exact_identity_relations(verdict):
    matrix_methods = AREA_METHODS["matrix"]
    mr4 = mr5 = 0
    failures = []
    for k in range(1000):
        method = matrix_methods[k % len(matrix_methods)]
        case = generate_suite(method, 1, derive_seed(1, "identity", k))[0]
        assert all(float(x).is_integer() for x in case.matrix.data)
        src = case.run()
        fol = case.run(source=transform_source("MR4", case.source, case.seed).source)
        mr4 += 1
        if not check_relation("MR4", src, fol, tol=0.0):
            failures.append(("MR4", case.test_id, k))
        method = PERMUTATION_INVARIANT[k % len(PERMUTATION_INVARIANT)]
        case = generate_suite(method, 1, derive_seed(1, "identity", k))[0]
        fol = case.run(source=transform_source("MR5", case.source, case.seed).source)
        mr5 += 1
        if not check_relation("MR5", case.run(), fol, tol=0.0):
            failures.append(("MR5", case.test_id, k))
    ok = not failures
    verdict(6, ok, f"MR4 {mr4} cases over all matrix methods, MR5 {mr5} cases; {len(failures)} failures at tol=0")
    assert ok, failures[:10]


def test_criterion_7_fdr_arithmetic(corpus, verdict):
    # mutant a: source kills t0; MR11 kills all; MR12 kills t1,t3; MR15 kills t0,t1,t2
    # mutant b: source kills none; MR11 kills t2; MR12 kills none; MR15 kills all but t3
    tests = ("ls#0", "ls#1", "ls#2", "ls#3")
    a, b = [m for m in corpus if m.area == "least_squares" and m.status == "active"][:2]
    pattern = {
        (a.mutant_id, TRIVIAL): {0},
        (a.mutant_id, "MR11"): {0, 1, 2, 3},
        (a.mutant_id, "MR12"): {1, 3},
        (a.mutant_id, "MR15"): {0, 1, 2},
        (b.mutant_id, TRIVIAL): set(),
        (b.mutant_id, "MR11"): {2},
        (b.mutant_id, "MR12"): set(),
        (b.mutant_id, "MR15"): {0, 1, 2},
    }
    oracles = (TRIVIAL, "MR11", "MR12", "MR15")
    km = KillMatrix(tests, {t: "least_squares" for t in tests}, oracles, {a.mutant_id: a, b.mutant_id: b})
    for (mid, oracle), killers in pattern.items():
        for i, t in enumerate(tests):
            km.add(mid, oracle, t, KILLED if i in killers else SURVIVED)
    hand = {
        (a.mutant_id, TRIVIAL): 0.25, (a.mutant_id, "MR11"): 1.0,
        (a.mutant_id, "MR12"): 0.5, (a.mutant_id, "MR15"): 0.75,
        (b.mutant_id, TRIVIAL): 0.0, (b.mutant_id, "MR11"): 0.25,
        (b.mutant_id, "MR12"): 0.0, (b.mutant_id, "MR15"): 0.75,
    }
    got = {key: fault_detection_ratio(km, *key) for key in hand}
    table = render_fdr("least_squares", fdr_table(km, oracles)).splitlines()
    rows = {line.split()[0]: line for line in table[3:]}
    ok = got == hand and rows[str(b.mutant_id)].split() == [str(b.mutant_id), "0.25", "0.75"]
    verdict(7, ok, f"{sum(got[k] == v for k, v in hand.items())}/8 hand-counted ratios exact; blank cells for 0")
    assert ok, (got, table)


def test_criterion_8_determinism(default_run, repeat_run, parallel_run, verdict):
    first = default_run[0]
    same_twice = first.report_json() == repeat_run.report_json()
    same_jobs = first.report_json() == parallel_run.report_json()
    same_csv = first.kill_matrix_csv() == repeat_run.kill_matrix_csv() == parallel_run.kill_matrix_csv()
    ok = same_twice and same_jobs and same_csv
    verdict(8, ok, f"repeat identical={same_twice}, 1 vs 3 workers identical={same_jobs}, kill matrices identical={same_csv}")
    assert ok


def test_criterion_9_mutation_isolation(corpus, verdict):
    rng = random.Random(derive_seed(1, "acceptance", 9))
    sample = rng.sample([m for m in corpus if m.status == "active"], 100)
    traced = {}  # operation -> [(call, pristine hits)]
    exactly_one = 0
    worst = 0
    for m in sample:
        op = m.site.operation
        if op not in traced:
            traced[op] = [(c, trace_hits(c)[1]) for c in DRIVERS[op].calls(derive_seed(1, "equivalence"), 200)]
        seen_one = False
        for call, hits in traced[op]:
            if m.site.site_id not in hits:
                continue
            perturbed = differential_trace(m, call)
            worst = max(worst, len(perturbed))
            if perturbed == {m.site.site_id}:
                seen_one = True
                break
        exactly_one += seen_one

    identical = 0
    names = sorted(DRIVERS)
    for k in range(1000):
        driver = DRIVERS[names[k % len(names)]]
        args = driver.draw(derive_seed(1, "reference", k), 1)[0]
        identical += outcome(driver.invoke, *args, ctx=PRISTINE) == outcome(driver.reference, *args)
    ok = exactly_one == 100 and worst <= 1 and identical == 1000
    verdict(9, ok, f"{exactly_one}/100 mutants perturb exactly their own site (max {worst}); "
                   f"{identical}/1000 pristine calls bit-identical to reference")
    assert ok
