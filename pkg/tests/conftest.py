import pytest

_LINES = []


@pytest.fixture(scope="session")
def verdict(request):
    """Print and keep one ``PASS``/``FAIL`` line per acceptance criterion."""
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _LINES.append(line)
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
