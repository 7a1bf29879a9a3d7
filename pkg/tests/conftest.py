import pytest

_LOG = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LOG] = []


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[_LOG]


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LOG, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[1])):
        terminalreporter.write_line(line)
