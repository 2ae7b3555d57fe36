import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
FIXTURES = TESTS / "fixtures"
sys.path.insert(0, str(TESTS))
sys.path.insert(0, str(FIXTURES))


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def manifest():
    from lrmt.manifest import load_manifest

    return load_manifest(FIXTURES / "manifest.yaml")


@pytest.fixture(scope="session")
def ilo(manifest):
    from lrmt.manifest import load_language

    return load_language(manifest.language("ilo"), manifest.seed)


@pytest.fixture(scope="session")
def english_prose():
    return (FIXTURES / "english_prose.txt").read_text(encoding="utf-8").splitlines()


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(capsys):
    """Print (and remember) one ``PASS/FAIL criterion N: ...`` line."""

    def emit(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
