import networkx as nx
import numpy as np
import pytest

from costkit import kagome_2d
from costkit.core import CostGraph, Triangulation


def nx_graph(g: CostGraph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


def isomorphic(a: CostGraph, b: CostGraph) -> bool:
    return nx.is_isomorphic(nx_graph(a), nx_graph(b))


def convex_polygon(k: int) -> Triangulation:
    """Fan triangulation of a regular k-gon."""
    ang = 2 * np.pi * np.arange(k) / k
    pts = np.column_stack([np.cos(ang), np.sin(ang)])
    return Triangulation([(0, i, i + 1) for i in range(1, k - 1)], pts)


@pytest.fixture
def bowtie():
    return kagome_2d(1, 1)


@pytest.fixture
def patch():
    return kagome_2d(3, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
