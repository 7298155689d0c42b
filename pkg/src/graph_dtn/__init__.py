"""Discrete exterior calculus on clique complexes with boundary, DtN maps and lattice bounds."""

from .graph import (
    BoundaryStructure,
    Graph,
    GraphError,
    GraphWithBoundary,
    WeightedGraph,
    WeightSpec,
    enumerate_cliques,
)
from .forms import KForm, codifferential, exterior_d, inner_product, wedge
from .dtn import BoundaryKForm, DtNOperator, dtn_operator, solve_bvp, trace_D, trace_N

__all__ = [
    "BoundaryKForm",
    "BoundaryStructure",
    "DtNOperator",
    "Graph",
    "GraphError",
    "GraphWithBoundary",
    "KForm",
    "WeightSpec",
    "WeightedGraph",
    "codifferential",
    "dtn_operator",
    "enumerate_cliques",
    "exterior_d",
    "inner_product",
    "solve_bvp",
    "trace_D",
    "trace_N",
    "wedge",
]
__version__ = "0.1.0"
