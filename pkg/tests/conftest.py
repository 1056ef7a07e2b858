import pytest
from hypothesis import settings

# numerical property tests build FFT tables and LPs; wall time per example varies
settings.register_profile("vplab", deadline=None, max_examples=50)
settings.load_profile("vplab")


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def verdict(request):
    """Record one acceptance line, then assert it."""
    lines = request.config._acceptance_lines

    def _verdict(n, name, ok, detail=""):
        line = f"criterion {n:2d}  {'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip()
        lines.append((n, line))
        assert ok, line
    return _verdict


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
