import numpy as np
import pytest

from eigenbox.mesh import build_square_mesh, uniform_red_refine


@pytest.fixture
def unit_square_2():
    """Unit square split into two right-isosceles triangles."""
    return build_square_mesh(0.5, 1, center=(0.5, 0.5))


@pytest.fixture
def mesh32():
    """32-triangle mesh of the unit square."""
    return uniform_red_refine(build_square_mesh(0.5, 2, center=(0.5, 0.5)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
