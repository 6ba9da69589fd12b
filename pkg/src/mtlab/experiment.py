"""End-to-end experiment: corpus, screening, suites, campaigns, report."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .harness import (
    INAPPLICABLE,
    REGRESSION,
    TRIVIAL,
    KillMatrix,
    MetricsReport,
    build_metrics,
    compare_reports,
    fault_detection_ratio,
    is_mr,
    oracle_order,
    run_campaign,
)
from .mutation import AREAS, Mutant, enumerate_sites, generate_mutants, manifest_hash, screen_corpus
from .relations import CATALOG, DEFAULT_SCREEN_TRIALS, DEFAULT_TOLERANCE, MR_IDS, applicability_tsv, screen_all
from .seeding import derive_seed
from .subjects import AREA_METHODS, METHODS, generate_suite

ORACLE_CHOICES = ("trivial-assertion", "full-regression", "metamorphic")
MT = "MT"
MT_PLUS_TRIVIAL = "MT+trivial"
REPORT_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    seed: int = 1
    suite_size: int = 4
    methods: tuple[str, ...] | str = "all"
    mrs: tuple[str, ...] | str = "all"
    oracles: tuple[str, ...] = ORACLE_CHOICES
    out_dir: str = "mt-out"
    screen_trials: int = DEFAULT_SCREEN_TRIALS
    tolerance: float = DEFAULT_TOLERANCE
    jobs: int = 1
    dry_run: bool = False

    def validate(self) -> "RunConfig":
        """Raise ValueError on any bad field."""
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if not isinstance(self.suite_size, int) or self.suite_size < 1:
            raise ValueError("suite size must be at least 1")
        if not isinstance(self.screen_trials, int) or self.screen_trials < 1:
            raise ValueError("screen trials must be at least 1")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        if not (isinstance(self.tolerance, (int, float)) and math.isfinite(self.tolerance) and self.tolerance >= 0):
            raise ValueError("tolerance must be a finite nonnegative number")
        for m in self.method_list:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        for mr in self.mr_list:
            if mr not in CATALOG:
                raise ValueError(f"unknown relation {mr!r}")
        if not self.oracles or any(o not in ORACLE_CHOICES for o in self.oracles):
            raise ValueError(f"oracles must be drawn from {ORACLE_CHOICES}")
        if not self.method_list or ("metamorphic" in self.oracles and not self.mr_list):
            raise ValueError("empty method or relation selection")
        return self

    @property
    def method_list(self) -> tuple[str, ...]:
        return tuple(METHODS) if self.methods == "all" else tuple(self.methods)

    @property
    def mr_list(self) -> tuple[str, ...]:
        if self.mrs == "all":
            return MR_IDS
        return tuple(sorted(set(self.mrs), key=lambda m: CATALOG[m].number if m in CATALOG else 0))

    @property
    def oracle_names(self) -> tuple[str, ...]:
        names = [o for o in (TRIVIAL, REGRESSION) if o in self.oracles]
        if "metamorphic" in self.oracles:
            names += list(self.mr_list)
        return oracle_order(names)

    def to_dict(self) -> dict:
        """Everything that affects results; output location and worker count do not."""
        d = asdict(self)
        d.pop("out_dir")
        d.pop("jobs")
        d["methods"] = list(self.method_list)
        d["mrs"] = list(self.mr_list)
        d["oracles"] = list(self.oracles)
        return d


def build_corpus(seed: int) -> list[Mutant]:
    return screen_corpus(generate_mutants(enumerate_sites()), derive_seed(seed, "equivalence"))


def corpus_counts(mutants) -> dict:
    counts = {a: {"raw": 0, "active": 0, "presumed-equivalent": 0, "uncovered": 0} for a in AREAS}
    for m in mutants:
        counts[m.area]["raw"] += 1
        counts[m.area][m.status] += 1
    return counts


@dataclass
class ExperimentResult:
    config: RunConfig
    mutants: list[Mutant]
    corpus_hash: str
    applicability: list
    suites: dict
    matrices: dict[str, KillMatrix]
    reports: dict[str, MetricsReport]
    comparison: dict | None
    fdr: dict = field(default_factory=dict)

    def kill_matrix_csv(self) -> str:
        """All areas in one CSV, preceded by a ``#`` provenance line."""
        parts = [f"# manifest_sha256={self.corpus_hash}\n"]
        for i, area in enumerate(self.matrices):
            text = self.matrices[area].to_csv()
            parts.append(text if i == 0 else text.split("\n", 1)[1])
        return "".join(parts)

    def document(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "config": self.config.to_dict(),
            "corpus": {"manifest_sha256": self.corpus_hash, "counts": corpus_counts(self.mutants)},
            "suites": {m: [{"test_id": c.test_id, "seed": c.seed, "shape": list(c.matrix.shape)} for c in cs]
                       for m, cs in self.suites.items()},
            "applicability": [asdict(r) for r in self.applicability],
            "excluded_inputs": {a: {t: list(v) for t, v in km.excluded.items()} for a, km in self.matrices.items()},
            "scores": {label: r.to_dict() for label, r in self.reports.items()},
            "comparison": self.comparison,
            "fdr": self.fdr,
        }

    def report_json(self) -> str:
        return json.dumps(self.document(), indent=2, sort_keys=True) + "\n"

    def verdict(self) -> str:
        mt = self.reports.get(MT)
        tr = self.reports.get(TRIVIAL)
        if mt is None or tr is None:
            return "MT=n/a trivial=n/a delta=n/a"
        x, y = mt.scores.get("overall", 0.0), tr.scores.get("overall", 0.0)
        return f"MT={x:.4f} trivial={y:.4f} delta={x - y:+.4f}"


def fdr_table(km: KillMatrix, oracles) -> dict:
    """Per-mutant fault detection ratios; columns are the baseline then relations."""
    columns = [o for o in oracles if o == TRIVIAL or is_mr(o)]
    rows = []
    for mid in km.active_ids:
        if mid == 0 or not km.covered(mid):
            continue
        rows.append([mid, [fault_detection_ratio(km, mid, o) for o in columns]])
    return {"columns": columns, "suite_size": len(km.suite), "rows": rows}


def run_experiment(config: RunConfig, mutants: list[Mutant] | None = None) -> ExperimentResult:
    config = config.validate()
    if mutants is None:
        mutants = build_corpus(config.seed)
    corpus_hash = manifest_hash(mutants)
    methods = config.method_list
    oracles = config.oracle_names
    relation_oracles = [o for o in oracles if is_mr(o)]
    applicability = screen_all(methods, relation_oracles, config.screen_trials, config.seed, config.tolerance)
    suites = {m: generate_suite(m, config.suite_size, config.seed) for m in methods}

    matrices: dict[str, KillMatrix] = {}
    for area in AREAS:
        area_methods = [m for m in AREA_METHODS[area] if m in suites]
        if not area_methods:
            continue
        suite = [c for m in area_methods for c in suites[m]]
        kinds = {METHODS[m].kind for m in area_methods}
        area_oracles = [o for o in oracles if not is_mr(o) or CATALOG[o].input_kind in kinds]
        if config.dry_run:
            targets = [None]
        else:
            targets = [m for m in mutants if m.area == area and m.status == "active"]
        matrices[area] = run_campaign(
            suite, area_oracles, targets, applicability, config.tolerance, config.jobs
        )

    groups: dict[str, list[str]] = {}
    if TRIVIAL in oracles:
        groups[TRIVIAL] = [TRIVIAL]
    if REGRESSION in oracles:
        groups[REGRESSION] = [REGRESSION]
    if relation_oracles:
        groups[MT] = relation_oracles
        if TRIVIAL in oracles:
            groups[MT_PLUS_TRIVIAL] = relation_oracles + [TRIVIAL]
        for mr in relation_oracles:
            groups[mr] = [mr]

    # a single relation is only scored where it applied to at least one test
    used = {a: {o for (_, o, _), v in km.entries.items() if v != INAPPLICABLE} for a, km in matrices.items()}
    reports = {}
    for label, members in groups.items():
        present = used if label in CATALOG else {a: set(km.oracles) for a, km in matrices.items()}
        per_area = {a: km for a, km in matrices.items() if set(members) & present[a]}
        if not per_area:
            continue
        reports[label] = build_metrics(per_area, members, label, corpus_hash)

    comparison = compare_reports(reports[MT], reports[TRIVIAL]) if MT in reports and TRIVIAL in reports else None
    fdr = {area: fdr_table(km, km.oracles) for area, km in matrices.items()}
    return ExperimentResult(config, mutants, corpus_hash, applicability, suites, matrices, reports, comparison, fdr)


# ------------------------------------------------------------------ output


def write_outputs(result: ExperimentResult, out_dir: str | Path) -> dict[str, str]:
    """Write report files; returns file name to sha256."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "report.json": result.report_json(),
        "comparison.json": json.dumps(result.comparison, indent=2, sort_keys=True) + "\n",
        "kill_matrix.csv": result.kill_matrix_csv(),
        "applicability.tsv": applicability_tsv(result.applicability),
    }
    digests = {}
    for name, text in files.items():
        (out / name).write_text(text)
        digests[name] = hashlib.sha256(text.encode()).hexdigest()
    return digests


def format_ratio(x: float) -> str:
    """Blank for zero, otherwise up to three decimals without trailing zeros."""
    if x == 0:
        return ""
    text = f"{x:.3f}".rstrip("0").rstrip(".")
    return text


def render_fdr(area: str, table: dict) -> str:
    headers = ["mutant"] + ["source" if c == TRIVIAL else c for c in table["columns"]]
    body = [[str(mid)] + [format_ratio(v) for v in values] for mid, values in table["rows"]]
    widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h) for i, h in enumerate(headers)]
    lines = [f"Fault detection ratio: {area} (suite size {table['suite_size']})"]
    lines.append("  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def render_scores(doc: dict) -> str:
    scores = doc["scores"]
    labels = [l for l in (TRIVIAL, REGRESSION, MT, MT_PLUS_TRIVIAL) if l in scores]
    labels += sorted((l for l in scores if l in CATALOG), key=lambda l: CATALOG[l].number)
    areas = [a for a in AREAS if any(a in scores[l]["scores"] for l in labels)]
    header = ["oracle"] + areas + ["overall"]
    rows = []
    if not labels:
        return "Mutation scores\n(none)\n"
    for l in labels:
        s = scores[l]["scores"]
        rows.append([l] + [f"{s[a]:.4f}" if a in s else "" for a in areas + ["overall"]])
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(len(header))]
    lines = ["Mutation scores"]
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def render_report(doc: dict) -> str:
    parts = [f"Corpus manifest sha256 {doc['corpus']['manifest_sha256']}\n", render_scores(doc)]
    for area in sorted(doc["fdr"], key=lambda a: AREAS.index(a) if a in AREAS else len(AREAS)):
        parts.append(render_fdr(area, doc["fdr"][area]))
    return "\n".join(parts)
