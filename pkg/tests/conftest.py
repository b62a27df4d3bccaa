import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from ckbench.corpus import algebra_corpus, frames_up_to, random_frame  # noqa: E402


@pytest.fixture(scope="session")
def frames3():
    return frames_up_to(3)


@pytest.fixture(scope="session")
def corpus_algebras():
    return algebra_corpus()


@pytest.fixture(scope="session")
def frames4_sample():
    rng = random.Random(4)
    return [random_frame(rng, 4) for _ in range(60)]


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
