import pytest

_RESULTS = pytest.StashKey[dict]()


class AcceptanceLog:
    def __init__(self, store: dict):
        self.store = store

    def record(self, number: int, title: str, status: str, detail: str = "") -> None:
        self.store[number] = (title, status, detail)


@pytest.fixture
def acceptance(request):
    return AcceptanceLog(request.config.stash.setdefault(_RESULTS, {}))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, status, detail = results[number]
        line = f"[{status:<10}] {number:>2}. {title}"
        terminalreporter.write_line(f"{line}: {detail}" if detail else line)
