import pytest

_verdicts = []


@pytest.fixture
def announce(request):
    """Print one acceptance line straight to the terminal and keep it for the summary."""
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def emit(line):
        _verdicts.append(line)
        with capman.global_and_fixture_disabled():
            print("\n" + line, flush=True)
    return emit


def pytest_terminal_summary(terminalreporter):
    if _verdicts:
        terminalreporter.section("acceptance criteria")
        for line in _verdicts:
            terminalreporter.write_line(line)
