import json
import re
from pathlib import Path

import pytest

from mtlab.cli import EXIT_ARTIFACT, EXIT_CONFIG, main
from mtlab.experiment import RunConfig, render_fdr, write_outputs

GOLDEN = Path(__file__).parent / "golden"
SMALL = ["--methods", "determinant,least_squares", "--suite-size", "2", "--screen-trials", "40"]


@pytest.fixture(scope="module")
def small_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("small")
    assert main(["mutants", "--out", str(out)]) == 0
    return out


def run_small(out, *extra):
    return main(["run", "--out", str(out), *SMALL, *extra])


class TestMutants:
    def test_summary_and_manifest(self, tmp_path, capsys):
        assert main(["mutants", "--out", str(tmp_path)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "module raw active"
        assert lines[1:6] == [
            "matrix 171 162",
            "least_squares 72 72",
            "forward_back 30 30",
            "square_root 41 39",
            "total 314 303",
        ]
        digest = lines[6].split()[-1]
        assert (tmp_path / "manifest.jsonl").exists()
        assert main(["mutants", "--out", str(tmp_path)]) == 0
        assert capsys.readouterr().out.splitlines()[6].split()[-1] == digest

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert main(["mutants", "--out", str(blocker / "sub")]) == EXIT_CONFIG


class TestScreen:
    def test_matrix_of_methods_by_relations(self, tmp_path):
        args = ["screen", "--out", str(tmp_path), "--methods", "power,rank", "--screen-trials", "30"]
        assert main(args) == 0
        first = (tmp_path / "applicability.tsv").read_text()
        rows = [line.split("\t") for line in first.splitlines()[1:]]
        assert len(rows) == 2 * 16
        assert ["power", "MR4", "yes"] == rows[3][:3]
        assert main(args) == 0
        assert (tmp_path / "applicability.tsv").read_text() == first


class TestRun:
    def test_verdict_and_files(self, small_out, capsys):
        assert run_small(small_out) == 0
        out = capsys.readouterr().out.strip()
        assert re.fullmatch(r"MT=\d\.\d{4} trivial=\d\.\d{4} delta=[+-]\d\.\d{4}", out)
        for name in ("report.json", "comparison.json", "kill_matrix.csv", "applicability.tsv"):
            assert (small_out / name).exists()
        doc = json.loads((small_out / "report.json").read_text())
        assert doc["config"]["seed"] == 1 and doc["config"]["suite_size"] == 2
        assert (small_out / "kill_matrix.csv").read_text().startswith(
            "# manifest_sha256=" + doc["corpus"]["manifest_sha256"]
        )

    def test_rerun_is_byte_identical(self, small_out, tmp_path):
        assert run_small(small_out) == 0
        first = (small_out / "report.json").read_bytes()
        (tmp_path / "manifest.jsonl").write_bytes((small_out / "manifest.jsonl").read_bytes())
        assert run_small(tmp_path, "--jobs", "2") == 0
        assert (tmp_path / "report.json").read_bytes() == first

    def test_dry_run_has_no_kills(self, small_out, tmp_path, capsys):
        (tmp_path / "manifest.jsonl").write_bytes((small_out / "manifest.jsonl").read_bytes())
        assert run_small(tmp_path, "--dry-run") == 0
        assert capsys.readouterr().out.splitlines()[0] == "dry run: 0 kills"

    @pytest.mark.parametrize(
        "bad",
        [
            ["--seed", "-1"],
            ["--suite-size", "0"],
            ["--methods", "nope"],
            ["--mrs", "MR99"],
            ["--oracles", "psychic"],
            ["--jobs", "0"],
            ["--tol", "nan"],
            ["--seed", "abc"],
        ],
    )
    def test_invalid_config(self, tmp_path, bad):
        assert main(["run", "--out", str(tmp_path), *bad]) == EXIT_CONFIG

    def test_missing_manifest(self, tmp_path):
        assert run_small(tmp_path, "--manifest", str(tmp_path / "absent.jsonl")) == EXIT_ARTIFACT

    def test_corrupt_manifest(self, tmp_path):
        (tmp_path / "manifest.jsonl").write_text("{broken\n")
        assert run_small(tmp_path) == EXIT_ARTIFACT


class TestReport:
    def test_missing_and_corrupt(self, tmp_path):
        assert main(["report", str(tmp_path)]) == EXIT_ARTIFACT
        (tmp_path / "report.json").write_text("{}")
        assert main(["report", str(tmp_path)]) == EXIT_ARTIFACT
        (tmp_path / "report.json").write_text("not json")
        assert main(["report", str(tmp_path)]) == EXIT_ARTIFACT

    def test_micro_table_matches_golden(self):
        table = {"columns": ["trivial-assertion", "MR11", "MR12", "MR16"], "suite_size": 4,
                 "rows": [[7, [0.25, 1.0, 0.0, 0.5]], [9, [0.0, 0.0, 0.75, 0.0]]]}
        assert render_fdr("least_squares", table) == (GOLDEN / "micro_fdr.txt").read_text()

    def test_default_run_matches_golden(self, default_run, tmp_path, capsys):
        result, _ = default_run
        write_outputs(result, tmp_path)
        assert main(["report", str(tmp_path)]) == 0
        text = capsys.readouterr().out
        assert text == (GOLDEN / "default_report.txt").read_text()
        header = next(line for line in text.splitlines() if line.startswith("mutant  source"))
        assert header.split() == ["mutant", "source"] + [f"MR{i}" for i in range(1, 11)]


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == 0
    assert main([]) == EXIT_CONFIG


def test_config_round_trip():
    d = RunConfig(jobs=4, out_dir="x").to_dict()
    assert "jobs" not in d and "out_dir" not in d and d["methods"][0] == "add"
