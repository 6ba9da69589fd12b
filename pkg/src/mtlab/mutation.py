"""Single-point operator mutation through registered dispatch sites.

Every mutable expression in the system under test is written as a call on a
:class:`MutationContext`, e.g. ``ctx.arith(SITE, a, b)``.  Sites are
registered when their module is imported, so the full site list is fixed for a
given build and can be enumerated without running anything.  A context either
selects one mutant (one site, one operator) or none; with no mutant every site
evaluates its original expression.

The context is passed explicitly to each call, never stored globally, which
keeps mutant executions independent and safe to run in parallel.
"""

from __future__ import annotations

import hashlib
import importlib
import json
import math
import operator
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from .errors import ExecutionBudgetExceeded

# Import order fixes the registration order, and so site ids and mutant ids.
SUT_MODULES = ("mtlab.matrix", "mtlab.solvers")
AREAS = ("matrix", "least_squares", "forward_back", "square_root")

SITE_KINDS = ("arith", "comparison", "increment", "returnValue", "constant")

ARITH = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "/": operator.truediv,
}
COMPARE = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "==": operator.eq,
    "!=": operator.ne,
}
ROR_BOUNDARY = {"<": "<=", "<=": "<", ">": ">=", ">=": ">"}
NEGATE = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}

DEFAULT_BUDGET = 200_000
SCREEN_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MutationSite:
    site_id: str
    module: str
    operation: str
    ordinal: int
    kind: str
    # operator symbol for arith/comparison, step for increment, value for constant
    original: Any = None

    @property
    def location(self) -> tuple[str, str, int]:
        return (self.module, self.operation, self.ordinal)


_SITES: list[MutationSite] = []
_SITE_IDS: set[str] = set()


class SiteGroup:
    """Registers the sites of one operation, numbering them in source order."""

    def __init__(self, module: str, operation: str):
        self.module = module
        self.operation = operation
        self._ordinal = 0

    def _register(self, kind: str, original: Any) -> MutationSite:
        site_id = f"{self.module}.{self.operation}#{self._ordinal}"
        if site_id in _SITE_IDS:
            raise RuntimeError(f"duplicate mutation site {site_id}")
        site = MutationSite(site_id, self.module, self.operation, self._ordinal, kind, original)
        self._ordinal += 1
        _SITES.append(site)
        _SITE_IDS.add(site_id)
        return site

    def arith(self, symbol: str) -> MutationSite:
        if symbol not in ARITH:
            raise ValueError(symbol)
        return self._register("arith", symbol)

    def compare(self, symbol: str) -> MutationSite:
        if symbol not in COMPARE:
            raise ValueError(symbol)
        return self._register("comparison", symbol)

    def increment(self, step: int = 1) -> MutationSite:
        if step not in (1, -1):
            raise ValueError(step)
        return self._register("increment", step)

    def returns(self) -> MutationSite:
        return self._register("returnValue", None)

    def constant(self, value: float) -> MutationSite:
        return self._register("constant", value)


def sites(module: str, operation: str) -> SiteGroup:
    return SiteGroup(module, operation)


def enumerate_sites() -> list[MutationSite]:
    """All instrumented sites, in build-stable registration order."""
    for name in SUT_MODULES:
        importlib.import_module(name)
    return list(_SITES)


def site_by_id(site_id: str) -> MutationSite:
    for site in enumerate_sites():
        if site.site_id == site_id:
            return site
    raise KeyError(site_id)


# --------------------------------------------------------------------------
# operators and mutants


@dataclass(frozen=True)
class MutationOperator:
    name: str
    replacement: str | None = None

    @property
    def label(self) -> str:
        return f"{self.name}({self.replacement})" if self.replacement else self.name


OPERATOR_NAMES = (
    "aor-replace",
    "ror-boundary",
    "negate-conditional",
    "increment-flip",
    "return-zero",
    "return-plus-one",
    "constant-plus-one",
)


def compatible_operators(site: MutationSite, catalog: Iterable[str] = OPERATOR_NAMES) -> list[MutationOperator]:
    allowed = set(catalog)
    ops: list[MutationOperator] = []
    if site.kind == "arith":
        if "aor-replace" in allowed:
            ops += [MutationOperator("aor-replace", f"{site.original}->{r}") for r in ARITH if r != site.original]
    elif site.kind == "comparison":
        if "ror-boundary" in allowed and site.original in ROR_BOUNDARY:
            ops.append(MutationOperator("ror-boundary", f"{site.original}->{ROR_BOUNDARY[site.original]}"))
        if "negate-conditional" in allowed:
            ops.append(MutationOperator("negate-conditional", f"{site.original}->{NEGATE[site.original]}"))
    elif site.kind == "increment":
        if "increment-flip" in allowed:
            ops.append(MutationOperator("increment-flip", f"{site.original:+d}->{-site.original:+d}"))
    elif site.kind == "returnValue":
        ops += [MutationOperator(n) for n in ("return-zero", "return-plus-one") if n in allowed]
    elif site.kind == "constant":
        if "constant-plus-one" in allowed:
            ops.append(MutationOperator("constant-plus-one"))
    return ops


MUTANT_STATUSES = ("active", "presumed-equivalent", "uncovered")


@dataclass(frozen=True)
class Mutant:
    mutant_id: int
    site: MutationSite
    operator: MutationOperator
    status: str = "active"

    @property
    def area(self) -> str:
        return self.site.module

    def with_status(self, status: str) -> "Mutant":
        if status not in MUTANT_STATUSES:
            raise ValueError(status)
        return replace(self, status=status)


def generate_mutants(site_list: Sequence[MutationSite], catalog: Iterable[str] = OPERATOR_NAMES) -> list[Mutant]:
    """Cross every site with its compatible operators; ids count from 1."""
    if not site_list:
        raise ValueError("no mutation sites given")
    catalog = tuple(catalog)
    mutants = []
    for site in site_list:
        for op in compatible_operators(site, catalog):
            mutants.append(Mutant(len(mutants) + 1, site, op))
    return mutants


# --------------------------------------------------------------------------
# execution context


def _plus_one(value):
    if isinstance(value, bool):
        raise TypeError("return mutation on a boolean site")
    if isinstance(value, (int, float)):
        return value + 1
    return value.elementwise(lambda x: x + 1.0)


def _zero(value):
    if isinstance(value, bool):
        raise TypeError("return mutation on a boolean site")
    if isinstance(value, int):
        return 0
    if isinstance(value, float):
        return 0.0
    return value.elementwise(lambda x: 0.0)


def _same(a, b) -> bool:
    if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
        return True
    return type(a) is type(b) and a == b


_NOT_COMPUTED = object()


class MutationContext:
    """Evaluates mutation sites for one execution.

    ``record_hits`` collects every site reached (coverage).  ``record_perturbed``
    recomputes the original expression at each site and collects the sites
    whose value differed from it (differential trace).
    """

    __slots__ = ("mutant", "_site", "_replacement", "hits", "perturbed", "budget", "steps")

    def __init__(
        self,
        mutant: Mutant | None = None,
        *,
        record_hits: bool = False,
        record_perturbed: bool = False,
        budget: int | None = None,
    ):
        self.mutant = mutant
        self._site = mutant.site if mutant is not None else None
        self._replacement = None
        if mutant is not None and mutant.operator.replacement and "->" in mutant.operator.replacement:
            self._replacement = mutant.operator.replacement.split("->")[1]
        self.hits: set[str] | None = set() if record_hits else None
        self.perturbed: set[str] | None = set() if record_perturbed else None
        self.budget = budget
        self.steps = 0

    @property
    def selected(self) -> int | None:
        return self.mutant.mutant_id if self.mutant is not None else None

    def _visit(self, site: MutationSite) -> bool:
        if self.hits is not None:
            self.hits.add(site.site_id)
        if self.budget is not None:
            self.steps += 1
            if self.steps > self.budget:
                raise ExecutionBudgetExceeded(f"more than {self.budget} site evaluations")
        return site is self._site

    def _note(self, site: MutationSite, value, original_fn: Callable[[], Any]):
        if self.perturbed is None:
            return value
        try:
            original = original_fn()
        except Exception:
            original = _NOT_COMPUTED
        if original is _NOT_COMPUTED or not _same(value, original):
            self.perturbed.add(site.site_id)
        return value

    def _mutated(self, site: MutationSite, table, a, b):
        try:
            return table[self._replacement](a, b)
        except Exception:
            # a fault raised by the replaced operator is itself a perturbation
            if self.perturbed is not None:
                try:
                    table[site.original](a, b)
                except Exception:
                    pass
                else:
                    self.perturbed.add(site.site_id)
            raise

    def arith(self, site: MutationSite, a, b):
        if not self._visit(site):
            value = ARITH[site.original](a, b)
        else:
            value = self._mutated(site, ARITH, a, b)
        return self._note(site, value, lambda: ARITH[site.original](a, b))

    def cmp(self, site: MutationSite, a, b) -> bool:
        if not self._visit(site):
            value = COMPARE[site.original](a, b)
        else:
            value = self._mutated(site, COMPARE, a, b)
        return self._note(site, value, lambda: COMPARE[site.original](a, b))

    def inc(self, site: MutationSite, x: int) -> int:
        if not self._visit(site):
            value = x + site.original
        else:
            value = x - site.original
        return self._note(site, value, lambda: x + site.original)

    def ret(self, site: MutationSite, value):
        original = value
        if self._visit(site):
            if self.mutant.operator.name == "return-zero":
                value = _zero(value)
            else:
                value = _plus_one(value)
        return self._note(site, value, lambda: original)

    def const(self, site: MutationSite):
        value = site.original + 1 if self._visit(site) else site.original
        return self._note(site, value, lambda: site.original)


PRISTINE = MutationContext()


@dataclass(frozen=True)
class Crashed:
    """Distinguished output of an execution that raised or ran out of budget."""

    reason: str

    @property
    def timeout(self) -> bool:
        return self.reason == "timeout"


def run_with_mutant(
    mutant: Mutant | int | None,
    call: Callable[[MutationContext], Any],
    corpus: Mapping[int, Mutant] | None = None,
    budget: int = DEFAULT_BUDGET,
):
    """Run ``call`` with exactly one site perturbed; faults become :class:`Crashed`."""
    if isinstance(mutant, int) and not isinstance(mutant, bool):
        if corpus is None or mutant not in corpus:
            raise ValueError(f"unknown mutant id {mutant}")
        mutant = corpus[mutant]
    ctx = MutationContext(mutant, budget=budget)
    try:
        return call(ctx)
    except ExecutionBudgetExceeded:
        return Crashed("timeout")
    except Exception as exc:  # noqa: BLE001 - every fault is an observable outcome
        return Crashed(type(exc).__name__)


def trace_hits(call: Callable[[MutationContext], Any]) -> tuple[Any, frozenset[str]]:
    """Pristine run recording the sites it reaches."""
    ctx = MutationContext(record_hits=True)
    try:
        out = call(ctx)
    except Exception as exc:  # noqa: BLE001
        out = Crashed(type(exc).__name__)
    return out, frozenset(ctx.hits)


def differential_trace(mutant: Mutant, call: Callable[[MutationContext], Any], budget: int = DEFAULT_BUDGET) -> set[str]:
    """Sites whose evaluated value differed from their original expression."""
    ctx = MutationContext(mutant, record_perturbed=True, budget=budget)
    try:
        call(ctx)
    except Exception:  # noqa: BLE001
        pass
    return set(ctx.perturbed)


# --------------------------------------------------------------------------
# output comparison


def outputs_close(a, b, tol: float = SCREEN_TOLERANCE) -> bool:
    """Structural equality up to ``tol`` scaled by ``max(1, |reference|)``.

    ``b`` is the reference.  Crashes compare equal only to crashes with the same
    reason.  Any type or shape difference is a mismatch.
    """
    if isinstance(a, Crashed) or isinstance(b, Crashed):
        return a == b
    if isinstance(a, bool) or isinstance(b, bool):
        return type(a) is type(b) and a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        if type(a) is not type(b):
            return False
        if math.isnan(a) or math.isnan(b):
            return math.isnan(a) and math.isnan(b)
        if a == b:
            return True
        return abs(a - b) <= tol * max(1.0, abs(b))
    if isinstance(a, (tuple, list)) and isinstance(b, (tuple, list)):
        return len(a) == len(b) and all(outputs_close(x, y, tol) for x, y in zip(a, b))
    if type(a) is not type(b):
        return False
    if hasattr(a, "comparable"):
        return outputs_close(a.comparable(), b.comparable(), tol)
    return a == b


# --------------------------------------------------------------------------
# equivalence screening


@dataclass(frozen=True)
class ScreenCase:
    operation: str
    call: Callable[[MutationContext], Any]
    expected: Any
    hits: frozenset[str]


def build_screening_corpus(seed: int, per_operation: int = 200) -> dict[str, list[ScreenCase]]:
    """Seeded random inputs for each instrumented operation, with pristine traces."""
    from .drivers import DRIVERS

    corpus: dict[str, list[ScreenCase]] = {}
    for name, driver in DRIVERS.items():
        cases = []
        for call in driver.calls(seed, per_operation):
            out, hits = trace_hits(call)
            cases.append(ScreenCase(name, call, out, hits))
        corpus[name] = cases
    return corpus


def screen_equivalent(mutant: Mutant, corpus: Mapping[str, Sequence[ScreenCase]] | Sequence[ScreenCase]) -> str:
    """``active`` if any covering case output changes, else presumed-equivalent.

    A mutant whose site no case reaches is ``uncovered``.
    """
    if isinstance(corpus, Mapping):
        cases = corpus.get(mutant.site.operation, ())
    else:
        cases = corpus
    covering = [c for c in cases if mutant.site.site_id in c.hits]
    if not covering:
        return "uncovered"
    for case in covering:
        out = run_with_mutant(mutant, case.call)
        if not outputs_close(out, case.expected, SCREEN_TOLERANCE):
            return "active"
    return "presumed-equivalent"


def screen_corpus(mutants: Sequence[Mutant], seed: int, per_operation: int = 200) -> list[Mutant]:
    corpus = build_screening_corpus(seed, per_operation)
    return [m.with_status(screen_equivalent(m, corpus)) for m in mutants]


# --------------------------------------------------------------------------
# manifest


def manifest_lines(mutants: Sequence[Mutant]) -> list[str]:
    return [
        json.dumps(
            {
                "mutant_id": m.mutant_id,
                "site_id": m.site.site_id,
                "operator": m.operator.label,
                "status": m.status,
            },
            sort_keys=True,
        )
        for m in mutants
    ]


def manifest_text(mutants: Sequence[Mutant]) -> str:
    return "".join(line + "\n" for line in manifest_lines(mutants))


def manifest_hash(mutants: Sequence[Mutant]) -> str:
    return hashlib.sha256(manifest_text(mutants).encode()).hexdigest()


def write_manifest(mutants: Sequence[Mutant], path: str | Path) -> str:
    text = manifest_text(mutants)
    Path(path).write_text(text)
    return hashlib.sha256(text.encode()).hexdigest()


def read_manifest(path: str | Path) -> list[Mutant]:
    """Rebuild mutants from a manifest; records must match the current build."""
    base = {m.mutant_id: m for m in generate_mutants(enumerate_sites())}
    mutants = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            m = base[rec["mutant_id"]]
            site_id, label, status = rec["site_id"], rec["operator"], rec["status"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad manifest record") from exc
        if m.site.site_id != site_id or m.operator.label != label:
            raise ValueError(f"{path}:{lineno}: record does not match this build")
        mutants.append(m.with_status(status))
    if len(mutants) != len(base):
        raise ValueError(f"{path}: expected {len(base)} records, found {len(mutants)}")
    return mutants
