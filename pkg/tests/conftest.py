import pytest

from starshrink import scenes

_ACCEPTANCE_RESULTS: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str = "") -> None:
    verdict = "PASS" if passed else "FAIL"
    _ACCEPTANCE_RESULTS[number] = f"criterion {number}: {verdict}  {detail}".rstrip()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_RESULTS):
        terminalreporter.write_line(_ACCEPTANCE_RESULTS[number])


@pytest.fixture(scope="session")
def bundles():
    """Shipped scene bundles, built once per session."""
    cache: dict[str, object] = {}

    def get(name: str):
        if name not in cache:
            cache[name] = scenes.build(name)
        return cache[name]

    return get
