import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"

# lines printed by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def scenarios_dir() -> Path:
    return SCENARIOS


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
