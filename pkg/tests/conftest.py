from fractions import Fraction

import pytest

from cheapreal.parse import parse_cheap

# lines reported by the acceptance gate, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


INFINITESIMALS = ["1/(omega+1)", "2^-omega", "1/(omega^2+1)", "1/(2*omega+1)",
                  "1/(omega^2+omega+1)"]
INFINITELY_LARGE = ["omega", "2^omega", "omega^2 - omega", "2*omega + 1"]
# infinitesimal or infinitely large, but too slowly to be confirmed at budget 1000
SLOW = ["1/clog2(omega+2)", "3/(omega+1)", "isqrt(omega)", "ilog2(omega+1)"]
LIMITED = ["3", "-7/2", "(-1)^omega", "1 + 1/(omega+1)"]


@pytest.fixture
def half():
    return Fraction(1, 2)


@pytest.fixture(params=INFINITESIMALS)
def infinitesimal(request):
    return parse_cheap(request.param)
