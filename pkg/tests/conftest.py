import numpy as np
import pytest

_VERDICTS: list[str] = []


class Verdict:
    """Records one PASS/FAIL line per acceptance criterion."""

    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title

    def __call__(self, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {self.number}: {self.title}"
        if detail:
            line += f" ({detail})"
        print(line)
        _VERDICTS.append(line)
        assert ok, line


@pytest.fixture
def verdict(request):
    marker = request.node.get_closest_marker("criterion")
    number, title = marker.args
    return Verdict(number, title)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_VERDICTS, key=lambda s: int(s.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)
