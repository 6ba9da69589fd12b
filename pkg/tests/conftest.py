import time

import pytest

from mtlab.experiment import RunConfig, build_corpus, run_experiment

VERDICTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[VERDICTS] = {}


def pytest_terminal_summary(terminalreporter, config):
    verdicts = config.stash.get(VERDICTS, {})
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(verdicts):
        ok, line = verdicts[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {line}")


@pytest.fixture
def verdict(request, capsys):
    """Record and print one pass/fail line for an acceptance criterion."""

    def record(number: int, ok: bool, line: str) -> bool:
        request.config.stash[VERDICTS][number] = (ok, line)
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {line}")
        return ok

    return record


@pytest.fixture(scope="session")
def corpus():
    return build_corpus(1)


@pytest.fixture(scope="session")
def default_run(corpus):
    """The full default campaign: seed 1, suite size 4, every method and relation."""
    start = time.perf_counter()
    result = run_experiment(RunConfig(), corpus)
    return result, time.perf_counter() - start


@pytest.fixture(scope="session")
def repeat_run():
    # rebuilds the corpus too, so the whole pipeline is repeated
    return run_experiment(RunConfig())


@pytest.fixture(scope="session")
def parallel_run(corpus):
    return run_experiment(RunConfig(jobs=3), corpus)
