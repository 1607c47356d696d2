import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from natproof.fixtures import corpus, fixture_store  # noqa: E402


@pytest.fixture(scope="session")
def store():
    return fixture_store()


@pytest.fixture(scope="session")
def records():
    return corpus()


TRIAL_CLAIM = "The Trial is a short story by Franz Kafka ."
TRIAL_EVIDENCE = "The Trial is a novel by Franz Kafka ."
TRIAL_MARKUP = (
    "{ The Trial } [ The Trial ] ≡ { is a short story } [ is a novel ] | "
    "{ by Franz Kafka . } [ by Franz Kafka . ] ≡"
)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
