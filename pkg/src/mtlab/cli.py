"""Command-line entry point: ``mtlab {mutants,screen,run,report}``.

Exit codes: 0 success, 2 configuration error or unwritable output, 3 missing
or corrupt input artifact.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiment as ex
from .mutation import AREAS, read_manifest, write_manifest
from .relations import DEFAULT_SCREEN_TRIALS, DEFAULT_TOLERANCE, applicability_tsv, screen_all

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ARTIFACT = 3
MANIFEST = "manifest.jsonl"


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _csv_list(text: str):
    if text == "all":
        return "all"
    return tuple(x.strip() for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--suite-size", type=int, default=4)
    common.add_argument("--methods", type=_csv_list, default="all", help="comma-separated method names or 'all'")
    common.add_argument("--mrs", type=_csv_list, default="all", help="comma-separated relation ids or 'all'")
    common.add_argument(
        "--oracles", type=_csv_list, default=ex.ORACLE_CHOICES, help="any of " + ",".join(ex.ORACLE_CHOICES)
    )
    common.add_argument("--out", default="mt-out", help="output directory")
    common.add_argument("--screen-trials", type=int, default=DEFAULT_SCREEN_TRIALS)
    common.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--dry-run", action="store_true", help="run the pristine build only")
    common.add_argument("--manifest", help="mutant manifest to use instead of <out>/manifest.jsonl")

    parser = argparse.ArgumentParser(prog="mtlab", description="Metamorphic testing campaigns on a mutated linear-algebra library.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("mutants", parents=[common], help="generate and screen the mutant corpus")
    sub.add_parser("screen", parents=[common], help="screen relation applicability")
    sub.add_parser("run", parents=[common], help="run the campaign and write reports")
    rep = sub.add_parser("report", help="render tables from a finished run")
    rep.add_argument("input_dir", nargs="?", default="mt-out")
    return parser


def config_from_args(args) -> ex.RunConfig:
    oracles = args.oracles if args.oracles != "all" else ex.ORACLE_CHOICES
    cfg = ex.RunConfig(
        seed=args.seed,
        suite_size=args.suite_size,
        methods=args.methods,
        mrs=args.mrs,
        oracles=tuple(oracles),
        out_dir=args.out,
        screen_trials=args.screen_trials,
        tolerance=args.tol,
        jobs=args.jobs,
        dry_run=args.dry_run,
    )
    try:
        return cfg.validate()
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None


def _out_dir(cfg: ex.RunConfig) -> Path:
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise CliError(EXIT_CONFIG, f"cannot write to {out}: {exc}") from None
    return out


def _load_or_build_corpus(cfg: ex.RunConfig, out: Path, explicit: str | None):
    path = Path(explicit) if explicit else out / MANIFEST
    if path.exists():
        try:
            return read_manifest(path), path
        except (OSError, ValueError) as exc:
            raise CliError(EXIT_ARTIFACT, f"corrupt manifest: {exc}") from None
    if explicit:
        raise CliError(EXIT_ARTIFACT, f"manifest not found: {path}")
    mutants = ex.build_corpus(cfg.seed)
    write_manifest(mutants, path)
    return mutants, path


def cmd_mutants(args) -> int:
    cfg = config_from_args(args)
    out = _out_dir(cfg)
    mutants = ex.build_corpus(cfg.seed)
    digest = write_manifest(mutants, Path(args.manifest) if args.manifest else out / MANIFEST)
    counts = ex.corpus_counts(mutants)
    print("module raw active")
    for area in AREAS:
        print(f"{area} {counts[area]['raw']} {counts[area]['active']}")
    print(f"total {sum(c['raw'] for c in counts.values())} {sum(c['active'] for c in counts.values())}")
    print(f"manifest sha256 {digest}")
    return EXIT_OK


def cmd_screen(args) -> int:
    cfg = config_from_args(args)
    out = _out_dir(cfg)
    records = screen_all(cfg.method_list, cfg.mr_list, cfg.screen_trials, cfg.seed, cfg.tolerance)
    (out / "applicability.tsv").write_text(applicability_tsv(records))
    applicable = sum(r.applicable for r in records)
    print(f"screened {len(records)} (method, relation) pairs: {applicable} applicable")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = config_from_args(args)
    out = _out_dir(cfg)
    mutants, _ = _load_or_build_corpus(cfg, out, args.manifest)
    result = ex.run_experiment(cfg, mutants)
    ex.write_outputs(result, out)
    kills = sum(v == "killed" for km in result.matrices.values() for v in km.entries.values())
    if cfg.dry_run:
        print(f"dry run: {kills} kills")
    print(result.verdict())
    return EXIT_OK


def cmd_report(args) -> int:
    path = Path(args.input_dir) / "report.json"
    try:
        doc = json.loads(path.read_text())
        text = ex.render_report(doc)
    except FileNotFoundError:
        raise CliError(EXIT_ARTIFACT, f"missing report: {path}") from None
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CliError(EXIT_ARTIFACT, f"corrupt report {path}: {exc}") from None
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"mutants": cmd_mutants, "screen": cmd_screen, "run": cmd_run, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"mtlab: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
