from __future__ import annotations

import pytest

# criterion number -> (passed, detail); filled by the ``criterion`` fixture
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


class _Criterion:
    def __init__(self):
        self.number: int | None = None

    def __call__(self, number: int, ok: bool, detail: str) -> None:
        self.number = number
        ACCEPTANCE[number] = (bool(ok), detail)
        print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, f"criterion {number}: {detail}"


@pytest.fixture
def criterion(request):
    rec = _Criterion()
    yield rec
    number = getattr(request.node.function, "criterion_number", None)
    if number is not None and number not in ACCEPTANCE:
        ACCEPTANCE[number] = (False, "errored before a verdict")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
    n_pass = sum(ok for ok, _ in ACCEPTANCE.values())
    terminalreporter.write_line(f"{n_pass}/{len(ACCEPTANCE)} criteria pass")
