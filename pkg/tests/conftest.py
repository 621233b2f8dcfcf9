import pytest

from sfrcov.analytic import Rules
from sfrcov.model import table1


@pytest.fixture(scope="session")
def rules():
    return Rules()


@pytest.fixture(scope="session")
def ref_config():
    """Reference two-tier network with delta=3, phi=4, eps=(0.1, 0.2), no noise."""
    return table1()


_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion; returns ``ok``."""
    def record(name, ok, detail):
        line = f"{name} {'PASS' if ok else 'FAIL'}: {detail}"
        request.config.stash[_VERDICTS].append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
