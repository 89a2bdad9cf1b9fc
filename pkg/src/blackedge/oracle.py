"""Hard-label classifier oracles with exact query accounting.

Every call to ``classify`` costs exactly one ledger query, attributed to
the currently active phase (coarse search, binary search, gradient
probes, ...).  Oracles return only an integer class label.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager

import numpy as np

from .errors import BudgetExhausted, UnknownGraph
from .graph import Graph

PHASES = ("cgs", "binary_search", "qegc", "other")


class QueryLedger:
    """Thread-safe per-phase query counter."""

    def __init__(self):
        self._lock = threading.Lock()
        self._counts = {phase: 0 for phase in PHASES}
        self._phase = "other"

    @property
    def total(self) -> int:
        with self._lock:
            return sum(self._counts.values())

    def count(self, phase: str) -> int:
        with self._lock:
            return self._counts.get(phase, 0)

    def record(self):
        with self._lock:
            self._counts[self._phase] = self._counts.get(self._phase, 0) + 1

    @contextmanager
    def phase(self, name: str):
        """Attribute queries made inside the block to ``name``."""
        previous = self._phase
        self._phase = name
        try:
            yield self
        finally:
            self._phase = previous

    def snapshot(self) -> dict:
        with self._lock:
            counts = dict(self._counts)
        counts["total"] = sum(counts.values())
        return counts

    def merge(self, other: "QueryLedger"):
        """Fold a worker's counts into this ledger."""
        theirs = other.snapshot()
        with self._lock:
            for phase, n in theirs.items():
                if phase == "total":
                    continue
                self._counts[phase] = self._counts.get(phase, 0) + n


class HardLabelOracle:
    """Base class: deterministic Graph -> label with a query ledger."""

    def __init__(self, ledger: QueryLedger | None = None):
        self.ledger = ledger if ledger is not None else QueryLedger()

    def classify(self, graph: Graph) -> int:
        self.ledger.record()
        return self._classify(graph)

    def _classify(self, graph: Graph) -> int:
        raise NotImplementedError

    def clone(self) -> "HardLabelOracle":
        """Same classifier behind a fresh ledger (for per-target accounting)."""
        import copy

        twin = copy.copy(self)
        twin.ledger = QueryLedger()
        return twin


class FunctionOracle(HardLabelOracle):
    """Wrap an arbitrary pure function Graph -> int."""

    def __init__(self, fn, ledger=None):
        super().__init__(ledger)
        self._fn = fn

    def _classify(self, graph: Graph) -> int:
        return int(self._fn(graph))


STRUCTURAL_FEATURES = ("edge_count", "triangle_count", "max_degree")


def _structural_statistic(graph: Graph, feature: str) -> int:
    if feature == "edge_count":
        return graph.n_edges
    if feature == "triangle_count":
        a = graph.adjacency.astype(np.int64)
        return int(np.trace(a @ a @ a)) // 6
    if feature == "max_degree":
        if graph.n_nodes == 0:
            return 0
        return int(graph.adjacency.sum(axis=1).max())
    raise ValueError(f"unknown structural feature {feature!r}")


class StructuralOracle(HardLabelOracle):
    """Label 1 iff a structural statistic reaches the threshold, else 0.

    Ground-truth target with an analytically known decision boundary,
    used for small-scale validation runs.
    """

    def __init__(self, feature: str, threshold: int, ledger=None):
        if feature not in STRUCTURAL_FEATURES:
            raise ValueError(f"feature must be one of {STRUCTURAL_FEATURES}")
        super().__init__(ledger)
        self.feature = feature
        self.threshold = int(threshold)

    def _classify(self, graph: Graph) -> int:
        return int(_structural_statistic(graph, self.feature) >= self.threshold)


def structural_oracle(feature: str, threshold: int) -> StructuralOracle:
    return StructuralOracle(feature, threshold)


class TableOracle(HardLabelOracle):
    """Pure lookup oracle over an explicit graph -> label table."""

    def __init__(self, labels: dict[bytes, int], ledger=None):
        super().__init__(ledger)
        self._table = dict(labels)

    @classmethod
    def exhaustive(cls, n_nodes: int, label_fn) -> "TableOracle":
        """Tabulate ``label_fn`` over every graph on ``n_nodes`` nodes."""
        from .graph import n_slots

        s = n_slots(n_nodes)
        table = {}
        for code in range(1 << s):
            bits = np.array([(code >> k) & 1 for k in range(s)], dtype=np.uint8)
            g = Graph(n_nodes, bits)
            table[g.canonical_key()] = int(label_fn(g))
        return cls(table)

    def _classify(self, graph: Graph) -> int:
        key = graph.canonical_key()
        if key not in self._table:
            raise UnknownGraph(f"graph on {graph.n_nodes} nodes not in the table")
        return self._table[key]


def table_oracle(labels: dict[bytes, int]) -> TableOracle:
    return TableOracle(labels)


class BudgetedOracle(HardLabelOracle):
    """Raise ``BudgetExhausted`` once the shared ledger reaches the cap."""

    def __init__(self, inner: HardLabelOracle, max_queries: int):
        if max_queries <= 0:
            raise ValueError("max_queries must be positive")
        self.inner = inner
        self.max_queries = int(max_queries)

    @property
    def ledger(self) -> QueryLedger:
        return self.inner.ledger

    @ledger.setter
    def ledger(self, value):
        self.inner.ledger = value

    def classify(self, graph: Graph) -> int:
        if self.ledger.total >= self.max_queries:
            raise BudgetExhausted(f"query budget of {self.max_queries} reached")
        return self.inner.classify(graph)

    def clone(self) -> "BudgetedOracle":
        return BudgetedOracle(self.inner.clone(), self.max_queries)


def with_budget(oracle: HardLabelOracle, max_queries: int) -> BudgetedOracle:
    return BudgetedOracle(oracle, max_queries)
