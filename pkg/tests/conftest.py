import os
import random

import pytest

from atomfix.benchmarks import corpus_dir, corpus_programs
from atomfix.lang import instrument, parse


@pytest.fixture
def rng():
    """Seeded RNG; ``ATOMFIX_SEED`` changes the seed for fuzz-style tests."""
    return random.Random(int(os.environ.get("ATOMFIX_SEED", "0")))


@pytest.fixture(scope="session")
def banking_source():
    return (corpus_dir() / "banking.mc").read_text()


@pytest.fixture(scope="session")
def banking_corpus_source():
    return (corpus_dir() / "banking_corpus.mc").read_text()


@pytest.fixture(scope="session")
def banking(banking_source):
    return instrument(parse(banking_source))


def corpus_ids():
    return [p.stem for p in corpus_programs()]


ACCEPTANCE = []


def record_criterion(number, ok, detail):
    """Store one acceptance result; the terminal summary prints them in order."""
    ACCEPTANCE.append((number, ok, detail))
    print(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'} - {detail}")
