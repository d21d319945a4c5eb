"""Shared fixtures and graph-building helpers for the test suite."""

from __future__ import annotations

import random

import numpy as np
import pytest

from graphlens.classifier import ClassCatalog
from graphlens.graphs import Graph, graph_from_edges


@pytest.fixture
def catalog3() -> ClassCatalog:
    return ClassCatalog(("star", "wheel", "ladder"))


def build_graph(edges: list[tuple[int, int]], n: int) -> Graph:
    return graph_from_edges(edges, n)


def path_graph(n: int) -> Graph:
    return graph_from_edges([(i, i + 1) for i in range(n - 1)], n)


def random_connected_graph(rng: random.Random, n: int) -> Graph:
    """Random recursive tree over shuffled labels plus up to 2n extra edges."""
    perm = list(range(n))
    rng.shuffle(perm)
    edges = set()
    for i in range(1, n):
        a, b = perm[i], perm[rng.randrange(i)]
        edges.add((min(a, b), max(a, b)))
    for _ in range(rng.randrange(0, 2 * n)):
        a, b = rng.randrange(n), rng.randrange(n)
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return graph_from_edges(sorted(edges), n)


def relabel_graph(g: Graph, sigma: list[int]) -> Graph:
    """Copy of g with node v renamed sigma[v]."""
    edges = [(min(sigma[u], sigma[v]), max(sigma[u], sigma[v]))
             for u, v in g.edges()]
    return graph_from_edges(sorted(edges), g.node_count)


def edge_set(g: Graph) -> set[tuple[int, int]]:
    return set(g.edges())


def assert_same_graph(a: Graph, b: Graph) -> None:
    assert a.node_count == b.node_count
    assert edge_set(a) == edge_set(b)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)


@pytest.fixture
def np_rng() -> np.random.Generator:
    return np.random.default_rng(0xC0FFEE)
