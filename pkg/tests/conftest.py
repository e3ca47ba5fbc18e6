import numpy as np
import pytest

from ehvi_quad.fronts import FrontSpec, Shape, generate_front
from ehvi_quad.hypervolume import ParetoFrontSet


@pytest.fixture
def staircase_front():
    """P = {(1,3), (2,2), (3,1)} with r = (4, 4); hv = 6."""
    return ParetoFrontSet([(1, 3), (2, 2), (3, 1)], (4, 4))


@pytest.fixture(scope="session")
def concave_front():
    return generate_front(FrontSpec(Shape.CONCAVE_SPHERE, 2, 50))


def random_spd(rs: np.random.Generator, m: int) -> np.ndarray:
    a = rs.normal(size=(m, m))
    return a @ a.T + 0.1 * np.eye(m)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one acceptance outcome: ``criterion(k, ok, detail)``."""

    def record(k: int, ok: bool, detail: str) -> None:
        ACCEPTANCE[k] = (bool(ok), detail)
        print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
