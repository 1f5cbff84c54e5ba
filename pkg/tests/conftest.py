import numpy as np
import pytest

from levyfield.exponents import derive_exponents


def admissible_profile(gen: np.random.Generator, mode: str = "rectangent"):
    """Random profile with alpha/(1+alpha) < P < alpha, away from the excluded boundaries."""
    while True:
        alpha = gen.uniform(0.3, 2.0) if gen.uniform() < 0.8 else 2.0
        q1, q2 = gen.uniform(0.3, 4.0, 2)
        Q = 1 / q1 + 1 / q2
        P = gen.uniform(alpha / (1 + alpha), alpha)
        chi = Q * (1 - 1 / P)
        if abs(chi) < 1e-6:
            continue
        prof = derive_exponents(q1, q2, chi, alpha)
        if min(abs(prof.P - 1), abs(prof.P_minus - 1), abs(prof.P_plus - 1)) > 1e-6:
            return prof


@pytest.fixture
def gen():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    print(ACCEPTANCE_LINES[number])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
