"""Undirected simple graphs stored as upper-triangular bit vectors.

A graph on ``n`` nodes has ``S = n(n-1)/2`` candidate edge slots, indexed
row-major over the strict upper triangle of the adjacency matrix.  All
perturbation machinery operates on real vectors over those slots: an entry
at or above the flip threshold toggles the corresponding edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, ZeroVector

FLIP_THRESHOLD = 0.5


def n_slots(n_nodes: int) -> int:
    """Number of candidate edge slots of an ``n_nodes``-node simple graph."""
    return n_nodes * (n_nodes - 1) // 2


class EdgeIndexMap:
    """Bijection between node pairs ``(i, j)``, ``j > i``, and flat slots.

    Slots are ordered row-major over the strict upper triangle, matching
    ``np.triu_indices(n, k=1)``.
    """

    def __init__(self, n_nodes: int):
        self.n_nodes = n_nodes
        self.n_slots = n_slots(n_nodes)
        self.rows, self.cols = np.triu_indices(n_nodes, k=1)

    def flatten(self, i: int, j: int) -> int:
        if i == j:
            raise DimensionMismatch(f"no slot for self-pair ({i}, {j})")
        if i > j:
            i, j = j, i
        if not 0 <= i < j < self.n_nodes:
            raise DimensionMismatch(f"pair ({i}, {j}) outside graph of {self.n_nodes} nodes")
        n = self.n_nodes
        return i * n - i * (i + 1) // 2 + (j - i - 1)

    def unflatten(self, k: int) -> tuple[int, int]:
        if not 0 <= k < self.n_slots:
            raise DimensionMismatch(f"slot {k} outside 0..{self.n_slots - 1}")
        return int(self.rows[k]), int(self.cols[k])

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(self.rows, self.cols)]


@lru_cache(maxsize=256)
def edge_index_map(n_nodes: int) -> EdgeIndexMap:
    return EdgeIndexMap(n_nodes)


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph.

    ``bits`` holds the upper-triangular adjacency (uint8, one entry per
    slot); the full symmetric matrix is derived on demand.  ``features``
    is an optional ``n x l`` real matrix, never perturbed.
    """

    n_nodes: int
    bits: np.ndarray
    features: np.ndarray | None = None
    label: int | None = None

    def __post_init__(self):
        bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if bits.shape != (n_slots(self.n_nodes),):
            raise DimensionMismatch(
                f"expected {n_slots(self.n_nodes)} slots for {self.n_nodes} nodes, "
                f"got shape {bits.shape}"
            )
        if bits.size and bits.max() > 1:
            raise DimensionMismatch("adjacency bits must be 0/1")
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)
        if self.features is not None:
            feats = np.ascontiguousarray(self.features, dtype=float)
            if feats.ndim != 2 or feats.shape[0] != self.n_nodes:
                raise DimensionMismatch(
                    f"features must be ({self.n_nodes}, l), got {feats.shape}"
                )
            feats.flags.writeable = False
            object.__setattr__(self, "features", feats)

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_adjacency(cls, adjacency, features=None, label=None) -> "Graph":
        a = np.asarray(adjacency)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"adjacency must be square, got {a.shape}")
        if not np.array_equal(a, a.T):
            raise DimensionMismatch("adjacency must be symmetric")
        if np.any(np.diag(a) != 0):
            raise DimensionMismatch("adjacency must have a zero diagonal")
        n = a.shape[0]
        em = edge_index_map(n)
        return cls(n, a[em.rows, em.cols].astype(np.uint8), features, label)

    @classmethod
    def from_edges(cls, n_nodes, edges, features=None, label=None) -> "Graph":
        em = edge_index_map(n_nodes)
        bits = np.zeros(em.n_slots, dtype=np.uint8)
        for i, j in edges:
            bits[em.flatten(i, j)] = 1
        return cls(n_nodes, bits, features, label)

    @classmethod
    def empty(cls, n_nodes, **kw) -> "Graph":
        return cls(n_nodes, np.zeros(n_slots(n_nodes), dtype=np.uint8), **kw)

    @classmethod
    def complete(cls, n_nodes, **kw) -> "Graph":
        return cls(n_nodes, np.ones(n_slots(n_nodes), dtype=np.uint8), **kw)

    # -- views -----------------------------------------------------------

    @property
    def n_edge_slots(self) -> int:
        return self.bits.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.bits.sum())

    @property
    def adjacency(self) -> np.ndarray:
        em = edge_index_map(self.n_nodes)
        a = np.zeros((self.n_nodes, self.n_nodes), dtype=np.uint8)
        a[em.rows, em.cols] = self.bits
        a[em.cols, em.rows] = self.bits
        return a

    def edges(self) -> list[tuple[int, int]]:
        em = edge_index_map(self.n_nodes)
        on = np.flatnonzero(self.bits)
        return [(int(em.rows[k]), int(em.cols[k])) for k in on]

    def canonical_key(self) -> bytes:
        """Hashable encoding of the structure, shared by isostructural copies."""
        return self.n_nodes.to_bytes(4, "big") + np.packbits(self.bits).tobytes()

    def replace(self, bits=None, features=..., label=...) -> "Graph":
        return Graph(
            self.n_nodes,
            self.bits if bits is None else bits,
            self.features if features is ... else features,
            self.label if label is ... else label,
        )


# -- perturbation algebra ------------------------------------------------


def _check_dim(graph: Graph, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (graph.n_edge_slots,):
        raise DimensionMismatch(
            f"perturbation has {theta.shape} entries, graph has "
            f"{graph.n_edge_slots} slots"
        )
    return theta


def apply_perturbation(graph: Graph, theta, threshold: float = FLIP_THRESHOLD) -> Graph:
    """Flip every edge slot whose perturbation weight reaches ``threshold``."""
    theta = _check_dim(graph, theta)
    flips = (theta >= threshold).astype(np.uint8)
    return graph.replace(bits=graph.bits ^ flips)


def perturbation_rate(a: Graph, b: Graph) -> float:
    """Fraction of edge slots that differ between two graphs."""
    if a.n_nodes != b.n_nodes:
        raise DimensionMismatch(f"graphs differ in size: {a.n_nodes} vs {b.n_nodes}")
    return int(np.count_nonzero(a.bits ^ b.bits)) / a.n_edge_slots


def flip_ledger(a: Graph, b: Graph) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Edges added and removed when going from ``a`` to ``b``."""
    if a.n_nodes != b.n_nodes:
        raise DimensionMismatch(f"graphs differ in size: {a.n_nodes} vs {b.n_nodes}")
    em = edge_index_map(a.n_nodes)
    added = np.flatnonzero((a.bits == 0) & (b.bits == 1))
    removed = np.flatnonzero((a.bits == 1) & (b.bits == 0))
    pair = lambda k: (int(em.rows[k]), int(em.cols[k]))
    return [pair(k) for k in added], [pair(k) for k in removed]


def normalize(theta) -> np.ndarray:
    """Scale a direction to unit L2 norm."""
    theta = np.asarray(theta, dtype=float)
    norm = float(np.linalg.norm(theta))
    if norm == 0.0:
        raise ZeroVector("cannot normalize an all-zero direction")
    return theta / norm
