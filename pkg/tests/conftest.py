import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from netimportance.netio import NetworkKind, read_edge_list, read_incidence  # noqa: E402

# Optional empirical inputs; tests needing them skip with a notice when unset.
DATA_ENV = {
    "network_a": "NETIMPORTANCE_NETWORK_A",
    "gene": "NETIMPORTANCE_GENE_EDGES",
    "celegans": "NETIMPORTANCE_CELEGANS",
    "manifest": "NETIMPORTANCE_MUTUALISTIC_MANIFEST",
}


def data_path(key: str):
    value = os.environ.get(DATA_ENV[key], "")
    return Path(value) if value and Path(value).exists() else None


@pytest.fixture
def network_a():
    path = data_path("network_a")
    if path is None:
        pytest.skip(f"Network A incidence file not supplied (set {DATA_ENV['network_a']})")
    return read_incidence(path)


@pytest.fixture
def gene_network():
    path = data_path("gene")
    if path is None:
        pytest.skip(f"gene edge list not supplied (set {DATA_ENV['gene']})")
    return read_edge_list(path, NetworkKind.DIRECTED)


@pytest.fixture
def celegans():
    path = data_path("celegans")
    if path is None:
        pytest.skip(f"connectome edge list not supplied (set {DATA_ENV['celegans']})")
    return read_edge_list(path, NetworkKind.DIRECTED)


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, status: str, detail: str) -> str:
    line = f"criterion {number:>2}: {status:<4} {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
