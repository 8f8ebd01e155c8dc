import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from yoshida.lfunc import FormCoeffs
from yoshida.quaternion import hecke_series, select_pair
from yoshida.siegel import build_yoshida

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def shared_cache_dir() -> str:
    """Persistent cache for the slow end-to-end checks (coefficient series)."""
    return os.environ.get("CACHE_DIR") or os.path.join(REPO, ".cache")


@pytest.fixture(scope="session")
def pairs():
    return select_pair((6, 2), 50)


@pytest.fixture(scope="session")
def flagship(pairs):
    return pairs[0]


@pytest.fixture(scope="session")
def table(flagship):
    P = flagship
    return build_yoshida(P.order, P.f_space, P.f, P.g, 400)


@pytest.fixture(scope="session")
def lift(table):
    return table.source


@pytest.fixture(scope="session")
def series(flagship):
    """a(n) of f and g up to 12000, enough for every d < 40."""
    P = flagship
    af = hecke_series(P.f_space, P.f, 12000)
    ag = hecke_series(P.g_space, P.g, 12000)
    return (FormCoeffs("6.19.1", 6, 19, tuple(af)), FormCoeffs("2.19.1", 2, 19, tuple(ag)))


# one line per acceptance criterion, shown at the end of the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
