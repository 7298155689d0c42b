import numpy as np
import pytest

from graph_dtn.graph import Graph, GraphWithBoundary, WeightSpec


def star(leaves: int = 4) -> Graph:
    return Graph.from_edges(range(leaves + 1), [(0, i) for i in range(1, leaves + 1)])


@pytest.fixture
def star_gb() -> GraphWithBoundary:
    g = star(4)
    return GraphWithBoundary.from_interior(g, [0], WeightSpec.unit_edges(g))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[num])
