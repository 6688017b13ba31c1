import numpy as np
import pytest

from qstab.model import build_plant


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_stable_plant(rng, m=1, detuning=1.0):
    """Single-mode plant with a Hurwitz F (damping dominates)."""
    while True:
        c = lambda s=1.0: s * complex(rng.normal(), rng.normal())  # noqa: E731
        N1 = [[c()] for _ in range(m)]
        N2 = [[c(0.3)] for _ in range(m)]
        plant = build_plant(detuning * rng.normal(), c(0.2), N1, N2, c(0.7), c(0.7))
        from qstab.model import build_F

        if np.linalg.eigvals(build_F(plant)).real.max() < -0.05:
            return plant


ACCEPTANCE_RESULTS = {}


def record_criterion(number, passed, detail):
    """Store one acceptance outcome; printed in the terminal summary."""
    ACCEPTANCE_RESULTS[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'} - {detail}")
