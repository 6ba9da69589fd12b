"""Campaign execution, kill matrices and metrics.

A campaign runs every source test (and, for metamorphic oracles, every
follow-up) of a suite against a set of mutants.  Pristine runs are executed
once with coverage tracing; a mutant is only re-executed on the runs that reach
its site, since the other runs cannot observe it.
"""

from __future__ import annotations

import csv
import io
import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from .errors import UndefinedMetricError
from .matrix import Matrix
from .mutation import DEFAULT_BUDGET, Crashed, Mutant, outputs_close, run_with_mutant, trace_hits
from .relations import (
    CATALOG,
    DEFAULT_TOLERANCE,
    ApplicabilityRecord,
    check_relation,
    get_relation,
    screen_applicability,
    transform_source,
)
from .solvers import SolveResult
from .subjects import METHODS, SourceTestCase

TRIVIAL = "trivial-assertion"
REGRESSION = "full-regression"
BASELINES = (TRIVIAL, REGRESSION)
REGRESSION_TOLERANCE = 1e-12

KILLED = "killed"
SURVIVED = "survived"
INAPPLICABLE = "inapplicable"


def is_mr(oracle: str) -> bool:
    return oracle in CATALOG


def oracle_order(oracles: Iterable[str]) -> tuple[str, ...]:
    """Baselines first, then relations by number."""
    oracles = set(oracles)
    base = [o for o in BASELINES if o in oracles]
    mrs = sorted((o for o in oracles if is_mr(o)), key=lambda o: CATALOG[o].number)
    unknown = oracles - set(base) - set(mrs)
    if unknown:
        raise ValueError(f"unknown oracle(s): {sorted(unknown)}")
    return tuple(base + mrs)


def output_facts(out) -> tuple:
    """What a weak generated assertion pins down: shape, finiteness, crash."""
    if isinstance(out, Crashed):
        return ("crash",)
    if isinstance(out, Matrix):
        return ("matrix", out.rows, out.cols)
    if isinstance(out, SolveResult):
        return ("vector", len(out.solution), math.isfinite(out.residual_norm))
    if isinstance(out, bool):
        return ("bool",)
    if isinstance(out, (int, float)):
        return ("scalar", math.isfinite(out))
    return (type(out).__name__,)


# ----------------------------------------------------------- preparation


@dataclass(frozen=True)
class PristineRun:
    call: Callable
    output: Any
    hits: frozenset

    def under(self, mutant, budget: int):
        if mutant is None or mutant.site.site_id not in self.hits:
            return self.output
        return run_with_mutant(mutant, self.call, budget=budget)


@dataclass(frozen=True)
class PreparedTest:
    case: SourceTestCase
    source: PristineRun
    followups: dict
    excluded: tuple = ()

    @property
    def covered(self) -> frozenset:
        hits = set(self.source.hits)
        for run in self.followups.values():
            hits |= run.hits
        return frozenset(hits)


def _follow_call(case: SourceTestCase, mr: str):
    def call(ctx):
        fol = transform_source(mr, case.source, case.seed, ctx)
        return case.run(ctx, fol.source)

    return call


def _applicable(applicability, method: str, mr: str, tol: float) -> bool:
    if applicability is None:
        return screen_applicability(mr, method, tol=tol).applicable
    if isinstance(applicability, Mapping):
        return bool(applicability.get((method, mr), False))
    for rec in applicability:
        if rec.method == method and rec.mr == mr:
            return rec.applicable
    return False


def normalise_applicability(applicability, suite, mrs, tol) -> dict:
    table = {}
    for method in sorted({c.method for c in suite}):
        for mr in mrs:
            if METHODS[method].kind == CATALOG[mr].input_kind:
                table[(method, mr)] = _applicable(applicability, method, mr, tol)
    return table


def prepare_tests(suite: Sequence[SourceTestCase], mrs: Sequence[str], applicability: Mapping, tol: float):
    """Pristine source and follow-up runs with coverage.

    A relation that fails or cannot be built on the pristine program for a
    particular input is excluded for that input only.
    """
    prepared = []
    for case in suite:
        source = PristineRun(case.run, *trace_hits(case.run))
        if isinstance(source.output, Crashed):
            raise ValueError(f"{case.test_id} crashes on the pristine build")
        followups, excluded = {}, []
        for mr in mrs:
            if not applicability.get((case.method, mr), False):
                continue
            call = _follow_call(case, mr)
            run = PristineRun(call, *trace_hits(call))
            if isinstance(run.output, Crashed) or not check_relation(mr, source.output, run.output, tol):
                excluded.append(mr)
                continue
            followups[mr] = run
        prepared.append(PreparedTest(case, source, followups, tuple(excluded)))
    return prepared


# ---------------------------------------------------------------- evaluation


def _note(*outs) -> str:
    for out in outs:
        if isinstance(out, Crashed):
            return out.reason if out.timeout else f"crash:{out.reason}"
    return ""


def evaluate_mutant(mutant, prepared, oracles, tol: float = DEFAULT_TOLERANCE, budget: int = DEFAULT_BUDGET):
    """Kill-matrix entries ``(mutant_id, oracle, test_id, outcome, note)`` for one mutant."""
    mid = 0 if mutant is None else mutant.mutant_id
    entries = []
    for t in prepared:
        if mutant is not None and mutant.site.site_id not in t.covered:
            continue
        src = t.source.under(mutant, budget)
        for oracle in oracles:
            if oracle == TRIVIAL:
                killed = output_facts(src) != output_facts(t.source.output)
                entries.append((mid, oracle, t.case.test_id, KILLED if killed else SURVIVED, _note(src)))
            elif oracle == REGRESSION:
                killed = not outputs_close(src, t.source.output, REGRESSION_TOLERANCE)
                entries.append((mid, oracle, t.case.test_id, KILLED if killed else SURVIVED, _note(src)))
            elif oracle in t.followups:
                fol = t.followups[oracle].under(mutant, budget)
                holds = check_relation(oracle, src, fol, tol)
                entries.append((mid, oracle, t.case.test_id, SURVIVED if holds else KILLED, _note(src, fol)))
            else:
                entries.append((mid, oracle, t.case.test_id, INAPPLICABLE, ""))
    return entries


_WORKER_STATE: tuple | None = None


def _work(indices):
    mutants, prepared, oracles, tol, budget = _WORKER_STATE
    out = []
    for i in indices:
        out.extend(evaluate_mutant(mutants[i], prepared, oracles, tol, budget))
    return out


def _parallel_entries(mutants, prepared, oracles, tol, budget, jobs):
    global _WORKER_STATE
    if jobs <= 1 or len(mutants) < 2:
        return [e for m in mutants for e in evaluate_mutant(m, prepared, oracles, tol, budget)]
    chunks = [list(range(i, len(mutants), jobs * 4)) for i in range(min(len(mutants), jobs * 4))]
    _WORKER_STATE = (list(mutants), prepared, oracles, tol, budget)
    try:
        # forked workers inherit the prepared runs, which hold unpicklable closures
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
            results = list(pool.map(_work, chunks))
    finally:
        _WORKER_STATE = None
    return [e for chunk in results for e in chunk]


# --------------------------------------------------------------- kill matrix


@dataclass
class KillMatrix:
    suite: tuple[str, ...]
    test_methods: dict[str, str]
    oracles: tuple[str, ...]
    mutants: dict[int, Mutant | None]
    entries: dict[tuple[int, str, str], str] = field(default_factory=dict)
    notes: dict[tuple[int, str, str], str] = field(default_factory=dict)
    excluded: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def add(self, mutant_id: int, oracle: str, test_id: str, outcome: str, note: str = "") -> None:
        key = (mutant_id, oracle, test_id)
        if key in self.entries:
            raise ValueError(f"duplicate kill-matrix entry {key}")
        self.entries[key] = outcome
        if note:
            self.notes[key] = note

    def outcome(self, mutant_id: int, oracle: str, test_id: str) -> str:
        return self.entries.get((mutant_id, oracle, test_id), INAPPLICABLE)

    def killed(self, mutant_id: int, oracle: str, test_id: str) -> bool:
        return self.outcome(mutant_id, oracle, test_id) == KILLED

    @property
    def active_ids(self) -> tuple[int, ...]:
        return tuple(sorted(i for i, m in self.mutants.items() if m is None or m.status == "active"))

    def covered(self, mutant_id: int) -> bool:
        return any(k[0] == mutant_id for k in self.entries)

    def killers(self, mutant_id: int, oracles: Iterable[str]) -> set[str]:
        oracles = set(oracles)
        return {t for (m, o, t), v in self.entries.items() if m == mutant_id and o in oracles and v == KILLED}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mutant_id", "oracle", "test_id", "outcome", "note"])
        order_o = {o: i for i, o in enumerate(self.oracles)}
        order_t = {t: i for i, t in enumerate(self.suite)}
        for key in sorted(self.entries, key=lambda k: (k[0], order_o[k[1]], order_t[k[2]])):
            w.writerow([key[0], key[1], key[2], self.entries[key], self.notes.get(key, "")])
        return buf.getvalue()


def run_campaign(
    suite: Sequence[SourceTestCase],
    oracles: Iterable[str],
    mutants: Sequence[Mutant | None],
    applicability=None,
    tol: float = DEFAULT_TOLERANCE,
    jobs: int = 1,
    budget: int = DEFAULT_BUDGET,
) -> KillMatrix:
    """Evaluate every given mutant under every oracle on every covering test.

    ``None`` in ``mutants`` is the pristine pseudo-mutant, reported as id 0.
    """
    oracles = oracle_order(oracles)
    mrs = [o for o in oracles if is_mr(o)]
    ids = [t.test_id for t in suite]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate test ids in suite")
    table = normalise_applicability(applicability, suite, mrs, tol)
    prepared = prepare_tests(suite, mrs, table, tol)
    km = KillMatrix(
        tuple(ids),
        {t.test_id: t.method for t in suite},
        oracles,
        {(0 if m is None else m.mutant_id): m for m in mutants},
        excluded={p.case.test_id: p.excluded for p in prepared if p.excluded},
    )
    for entry in _parallel_entries(list(mutants), prepared, oracles, tol, budget, jobs):
        km.add(*entry)
    return km


def run_mt_campaign(suite, mrs, mutants, applicability=None, tol=DEFAULT_TOLERANCE, jobs=1) -> KillMatrix:
    mrs = [get_relation(mr).mr_id for mr in mrs]
    return run_campaign(suite, mrs, mutants, applicability, tol, jobs)


def run_baseline_campaign(suite, oracle: str, mutants, jobs: int = 1) -> KillMatrix:
    if oracle not in BASELINES:
        raise ValueError(f"baseline oracle must be one of {BASELINES}")
    return run_campaign(suite, [oracle], mutants, {}, jobs=jobs)


# ------------------------------------------------------------------ metrics


def _select(km: KillMatrix, oracle_set: Iterable[str]) -> set[str]:
    chosen = set(oracle_set)
    missing = chosen - set(km.oracles)
    if missing:
        raise ValueError(f"kill matrix lacks oracle(s) {sorted(missing)}")
    return chosen


def killed_mutants(km: KillMatrix, oracle_set: Iterable[str], tests: Iterable[str] | None = None) -> set[int]:
    chosen = _select(km, oracle_set)
    tests = set(km.suite if tests is None else tests)
    active = set(km.active_ids)
    return {m for (m, o, t), v in km.entries.items() if v == KILLED and o in chosen and t in tests and m in active}


def mutation_score(km: KillMatrix, oracle_set: Iterable[str]) -> float:
    active = km.active_ids
    if not active:
        raise UndefinedMetricError("no active mutants")
    return len(killed_mutants(km, oracle_set)) / len(active)


def fault_detection_ratio(km: KillMatrix, mutant_id: int, oracle: str) -> float:
    if mutant_id not in km.active_ids:
        raise UndefinedMetricError(f"mutant {mutant_id} is not active in this corpus")
    if not km.covered(mutant_id):
        raise UndefinedMetricError(f"mutant {mutant_id} is not reached by any test")
    _select(km, [oracle])
    return sum(km.killed(mutant_id, oracle, t) for t in km.suite) / len(km.suite)


@dataclass(frozen=True)
class MetricsReport:
    label: str
    oracles: tuple[str, ...]
    corpus_hash: str
    scores: dict[str, float]
    killed: dict[str, tuple[int, ...]]
    active: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "oracles": list(self.oracles),
            "scores": self.scores,
            "killed": {k: list(v) for k, v in self.killed.items()},
            "active": self.active,
        }


def build_metrics(matrices: Mapping[str, KillMatrix], oracle_set, label: str, corpus_hash: str) -> MetricsReport:
    """Scores per area, per method, and overall from per-area kill matrices.

    Each area is scored on the members of ``oracle_set`` its matrix carries.
    """
    oracle_set = tuple(oracle_set)
    scores, killed, active = {}, {}, {}
    for area, km in matrices.items():
        ids = km.active_ids
        active[area] = len(ids)
        own = [o for o in oracle_set if o in km.oracles]
        k = killed_mutants(km, own)
        killed[area] = tuple(sorted(k))
        if ids:
            scores[area] = len(k) / len(ids)
        for method in dict.fromkeys(km.test_methods.values()):
            tests = {t for t, m in km.test_methods.items() if m == method}
            reached = {m for (m, _, t) in km.entries if t in tests and m in ids}
            if reached:
                scores[f"method:{method}"] = len(killed_mutants(km, own, tests)) / len(reached)
    total = sum(active.values())
    if total:
        scores["overall"] = sum(len(v) for v in killed.values()) / total
    return MetricsReport(label, oracle_set, corpus_hash, scores, killed, active)


def compare_reports(first: MetricsReport, second: MetricsReport) -> dict:
    """Score deltas (first minus second) and per-area kill-set differences."""
    if first.corpus_hash != second.corpus_hash or first.active != second.active:
        raise ValueError("reports were computed on different mutant corpora")
    keys = sorted(set(first.scores) & set(second.scores))
    out: dict = {
        "first": first.label,
        "second": second.label,
        "delta": {k: first.scores[k] - second.scores[k] for k in keys},
        "only_first": {},
        "only_second": {},
        "both": {},
    }
    for area in first.killed:
        a, b = set(first.killed[area]), set(second.killed.get(area, ()))
        out["only_first"][area] = sorted(a - b)
        out["only_second"][area] = sorted(b - a)
        out["both"][area] = sorted(a & b)
    return out


# ------------------------------------------------------------ soundness


def soundness_check(
    records: Iterable[ApplicabilityRecord], per_pair: int = 100, seed: int = 0, tol: float = DEFAULT_TOLERANCE
) -> tuple[int, list[tuple[str, str, str]]]:
    """Re-check every applicable pair on fresh pristine inputs.

    Returns the number of checks made and the violating ``(method, mr, test_id)``.
    """
    from .relations import holds_on
    from .seeding import derive_seed
    from .subjects import generate_suite

    checks, violations = 0, []
    for rec in records:
        if not rec.applicable:
            continue
        for case in generate_suite(rec.method, per_pair, derive_seed(seed, "fresh", rec.mr)):
            verdict = holds_on(case, rec.mr, tol)
            checks += 1
            if verdict is not True:
                violations.append((rec.method, rec.mr, case.test_id))
    return checks, violations
