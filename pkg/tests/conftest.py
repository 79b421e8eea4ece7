import pytest
from hypothesis import settings

settings.register_profile("ellsum", max_examples=60, deadline=None, derandomize=True)
settings.load_profile("ellsum")

ACCEPTANCE = {}


@pytest.fixture
def verdict():
    """Record ``(criterion, description, value, tolerance)`` for the summary table."""

    def record(key, text, value, tol):
        ok = value <= tol
        ACCEPTANCE[key] = (text, value, tol, ok)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        text, value, tol, ok = ACCEPTANCE[key]
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {key:>4}  {text}: worst {value:.3e} (tolerance {tol:.0e})")
