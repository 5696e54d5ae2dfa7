import pytest

from loopcert.exactcore import FieldSpec
from loopcert.models import builtin_s1, torus

Q = FieldSpec.rationals()
F2 = FieldSpec.prime(2)
F3 = FieldSpec.prime(3)

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def s1q():
    return builtin_s1(1, Q)


@pytest.fixture(scope="session")
def s1f2():
    return builtin_s1(1, F2)


@pytest.fixture(scope="session")
def t2q():
    return torus(2, 1, Q)


@pytest.fixture(scope="session")
def t3q():
    return torus(3, 1, Q)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
