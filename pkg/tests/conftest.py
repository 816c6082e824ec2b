import numpy as np
import pytest

from hingefnn import FnnArchitecture, FnnModel

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def tiny_model():
    """K=2, H=1 net with W_1 = [[1], [-1]] and W_2 = [[0.5, 0.5]]."""
    return FnnModel(FnnArchitecture(2, 1), [np.array([[1.0], [-1.0]]), np.array([[0.5, 0.5]])])


@pytest.fixture
def identity_model():
    """Phi(x) = ReLU(x) - ReLU(-x) = x."""
    return FnnModel(FnnArchitecture(2, 1), [np.array([[1.0], [-1.0]]), np.array([[1.0, -1.0]])])
