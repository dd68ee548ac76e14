import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from slickpackets.topology import Topology  # noqa: E402

# source 0, destination 6
MESH_LINKS = [(0, 1), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (2, 5), (3, 4), (4, 5), (5, 6)]

# source 0, destination 5; two equal-cost middles 2 and 3, the tie-broken
# primary uses 2, so the alternate at 2 has to backtrack through 1
LADDER_LINKS = [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4), (4, 5)]


@pytest.fixture
def mesh():
    return Topology.from_links(7, MESH_LINKS)


@pytest.fixture
def ladder():
    return Topology.from_links(6, LADDER_LINKS)


@pytest.fixture
def triangle_file(tmp_path):
    p = tmp_path / "tri.txt"
    p.write_text("0 1\n1 2\n0 2\n")
    return p


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record a one-line acceptance verdict; printed in the session summary."""
    def emit(line):
        ACCEPTANCE_LINES.append(line)
        print(line)
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
