import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from primset import BinaryMatrix, MatrixSet  # noqa: E402


@pytest.fixture
def golden_pair():
    return MatrixSet([
        BinaryMatrix.from_strings(["010", "100", "001"]),
        BinaryMatrix.from_strings(["101", "001", "010"]),
    ])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[key])
