import random

import pytest

from fastinsight import CorpusGraph, HashEmbedder, HashReranker, RankedList


def make_graph(node_keys, edges, contents=None):
    """Graph from key list and edge pairs; default content is the key itself."""
    contents = contents or {}
    nodes = {k: contents.get(k, f"text for node {k}") for k in node_keys}
    return CorpusGraph(nodes, edges)


def random_graph(rng: random.Random, n_max=10, p=0.35):
    """Seeded Erdos-Renyi style graph with keys n00..n<k>."""
    n = rng.randint(1, n_max)
    keys = [f"n{i:02d}" for i in range(n)]
    edges = [
        (keys[i], keys[j])
        for i in range(n)
        for j in range(n)
        if i != j and rng.random() < p
    ]
    return make_graph(keys, edges)


@pytest.fixture(scope="session")
def embedder():
    return HashEmbedder(256)


@pytest.fixture(scope="session")
def reranker():
    return HashReranker(256)


@pytest.fixture()
def path_graph():
    """a - b - c undirected path (stored as two directed edges)."""
    return make_graph(["a", "b", "c"], [("a", "b"), ("b", "c")])


def ranked(*keys, scores=None):
    if scores is None:
        scores = [float(len(keys) - i) for i in range(len(keys))]
    return RankedList(zip(keys, scores))
