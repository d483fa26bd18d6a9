import pytest

from onedft import Box, Delta, Oscillator

SYSTEMS = {"box": Box(), "oscillator": Oscillator(), "delta": Delta()}


@pytest.fixture(params=list(SYSTEMS))
def system(request):
    return SYSTEMS[request.param]


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import summary_lines

    lines = summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
