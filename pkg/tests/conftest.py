"""Shared fixtures and independent reference implementations.

Reference code here is deliberately written in a different style from the
library (explicit loops, no shared helpers) so that agreement between
the two is meaningful evidence of correctness.
"""

from __future__ import annotations

import numpy as np
import pytest

from blackedge.graph import Graph


# -- independent GIN forward pass ----------------------------------------


def reference_gin_logits(weights, graph: Graph) -> np.ndarray:
    """Per-node loop implementation of the message-passing forward pass."""
    n = graph.n_nodes
    adj = graph.adjacency
    neighbors = [[u for u in range(n) if adj[v, u]] for v in range(n)]
    if graph.features is not None:
        h = [np.array(graph.features[v], dtype=float) for v in range(n)]
    else:
        h = [np.ones(weights.feature_dim) for _ in range(n)]

    pooled = np.zeros_like(h[0])
    for v in range(n):
        pooled = pooled + h[v]
    logits = weights.readout[0].weight @ pooled + weights.readout[0].bias

    for k, layer in enumerate(weights.layers):
        new_h = []
        for v in range(n):
            agg = (1.0 + layer.epsilon) * h[v]
            for u in neighbors[v]:
                agg = agg + h[u]
            out = layer.weight @ agg + layer.bias
            new_h.append(np.where(out > 0.0, out, 0.0))
        h = new_h
        pooled = np.zeros_like(h[0])
        for v in range(n):
            pooled = pooled + h[v]
        head = weights.readout[k + 1]
        logits = logits + head.weight @ pooled + head.bias
    return logits


# -- exhaustive set-partition enumeration --------------------------------


def set_partitions(n: int):
    """Every partition of {0..n-1} as an assignment array."""

    def rec(node, assignment, n_used):
        if node == n:
            yield np.array(assignment, dtype=np.int64)
            return
        for c in range(n_used):
            yield from rec(node + 1, assignment + [c], n_used)
        yield from rec(node + 1, assignment + [n_used], n_used + 1)

    yield from rec(0, [], 0)


def reference_modularity(graph: Graph, assignment) -> float:
    """Direct double sum over node pairs of the modularity definition."""
    a = graph.adjacency.astype(float)
    m2 = a.sum()
    if m2 == 0:
        return 0.0
    deg = a.sum(axis=1)
    q = 0.0
    for i in range(graph.n_nodes):
        for j in range(graph.n_nodes):
            if assignment[i] == assignment[j]:
                q += a[i, j] - deg[i] * deg[j] / m2
    return q / m2


# -- tiny TU-format fixture ----------------------------------------------


TU_FIXTURE = {
    # graph 1: triangle on nodes 1,2,3; graph 2: path 4-5-6
    "A.txt": "1, 2\n2, 1\n1, 3\n3, 1\n2, 3\n3, 2\n4, 5\n5, 4\n5, 6\n6, 5\n",
    "graph_indicator.txt": "1\n1\n1\n2\n2\n2\n",
    "graph_labels.txt": "1\n-1\n",
    "node_labels.txt": "0\n0\n1\n1\n2\n2\n",
}


@pytest.fixture
def tu_dir(tmp_path):
    """Directory holding the two-graph TU fixture under the name 'TINY'."""
    for suffix, text in TU_FIXTURE.items():
        (tmp_path / f"TINY_{suffix}").write_text(text)
    return tmp_path


# -- random graph sampling -----------------------------------------------


def random_graph(rng: np.random.Generator, n: int) -> Graph:
    bits = (rng.random(n * (n - 1) // 2) < rng.uniform(0.1, 0.9)).astype(np.uint8)
    return Graph(n, bits)
