"""
Weighted directed graphs with dense integer node ids.

Nodes are the integers ``0 .. n-1``; every node also carries a string label
(a country name, an account number).  Labels only matter at input/output
boundaries, all algorithms work on the integer ids.

A :class:`WeightedDigraph` is immutable once built.  It has no self-loops,
no parallel edges and only strictly positive weights.  Isolated nodes are
allowed, which is what lets quarterly snapshots share one node universe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DuplicateEdge, NonPositiveWeight, SelfLoop, UnknownNode

__all__ = [
    "WeightedDigraph",
    "SnapshotSeries",
    "build_graph",
    "reverse",
    "induce_by_edges",
    "induce_by_nodes",
]


class WeightedDigraph:
    """Immutable weighted digraph.

    Parameters
    ----------
    labels : sequence of str
        Node labels; node ``i`` has label ``labels[i]``.  Must be unique.
    out_adj : list of dict, optional
        ``out_adj[u][v]`` is the weight of edge ``(u, v)``.  The graph takes
        ownership of the dicts.  Validation is the caller's job; use
        :func:`build_graph` for untrusted input.
    """

    __slots__ = ("_labels", "_index", "_out", "_in", "_m")

    def __init__(self, labels: Sequence[str], out_adj: list[dict[int, float]] | None = None):
        self._labels = tuple(labels)
        self._index = {lab: i for i, lab in enumerate(self._labels)}
        if len(self._index) != len(self._labels):
            raise ValueError("node labels must be unique")
        n = len(self._labels)
        if out_adj is None:
            out_adj = [{} for _ in range(n)]
        elif len(out_adj) != n:
            raise ValueError("out_adj length does not match label count")
        self._out = out_adj
        self._in: list[dict[int, float]] = [{} for _ in range(n)]
        m = 0
        for u, nbrs in enumerate(out_adj):
            for v, w in nbrs.items():
                self._in[v][u] = w
            m += len(nbrs)
        self._m = m

    # -- size and labels -------------------------------------------------
    @property
    def n(self) -> int:
        return len(self._labels)

    @property
    def edge_count(self) -> int:
        return self._m

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    def label(self, u: int) -> str:
        return self._labels[u]

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownNode(f"unknown node label {label!r}") from None

    def __contains__(self, label) -> bool:
        return label in self._index

    def __len__(self) -> int:
        return self.n

    # -- adjacency -------------------------------------------------------
    def out_neighbors(self, u: int) -> dict[int, float]:
        """Successors of ``u`` mapped to edge weights (read-only view by convention)."""
        return self._out[u]

    def in_neighbors(self, u: int) -> dict[int, float]:
        return self._in[u]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._out[u]

    def weight(self, u: int, v: int) -> float:
        return self._out[u][v]

    def out_degree(self, u: int) -> int:
        return len(self._out[u])

    def in_degree(self, u: int) -> int:
        return len(self._in[u])

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Yield ``(u, v, weight)`` ordered by source then target id."""
        for u, nbrs in enumerate(self._out):
            for v in sorted(nbrs):
                yield u, v, nbrs[v]

    def triples(self) -> list[tuple[str, str, float]]:
        """Edges as ``(source label, target label, weight)``."""
        lab = self._labels
        return [(lab[u], lab[v], w) for u, v, w in self.edges()]

    def out_weight(self) -> np.ndarray:
        """Sum of outgoing edge weights per node."""
        return np.array([sum(nbrs.values()) for nbrs in self._out], dtype=float)

    def in_weight(self) -> np.ndarray:
        return np.array([sum(nbrs.values()) for nbrs in self._in], dtype=float)

    def total_weight(self) -> float:
        return float(sum(sum(nbrs.values()) for nbrs in self._out))

    def to_csr(self) -> sp.csr_matrix:
        """Weighted adjacency matrix ``A[u, v] = weight(u, v)``."""
        n = self.n
        rows = np.fromiter((u for u, nbrs in enumerate(self._out) for _ in nbrs), dtype=np.int64, count=self._m)
        cols = np.fromiter((v for nbrs in self._out for v in nbrs), dtype=np.int64, count=self._m)
        vals = np.fromiter((w for nbrs in self._out for w in nbrs.values()), dtype=float, count=self._m)
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    # -- comparison ------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedDigraph):
            return NotImplemented
        return self._labels == other._labels and self._out == other._out

    def __hash__(self):
        raise TypeError("WeightedDigraph is not hashable")

    def __repr__(self) -> str:
        return f"WeightedDigraph(n={self.n}, edges={self._m})"

    def __getstate__(self):
        return self._labels, self._out

    def __setstate__(self, state):
        labels, out = state
        WeightedDigraph.__init__(self, labels, out)


def build_graph(
    triples: Iterable[tuple[str, str, float]],
    labels: Iterable[str] | None = None,
) -> WeightedDigraph:
    """Build a graph from ``(source, target, weight)`` label triples.

    Node ids follow ``labels`` when given (extra labels become isolated
    nodes); otherwise they follow first appearance in ``triples``.

    Raises
    ------
    SelfLoop, NonPositiveWeight, DuplicateEdge
        On the first offending triple.
    """
    index: dict[str, int] = {}
    order: list[str] = []
    if labels is not None:
        for lab in labels:
            if lab not in index:
                index[lab] = len(order)
                order.append(lab)
    fixed = labels is not None
    out: list[dict[int, float]] = [{} for _ in order]

    def node(lab):
        i = index.get(lab)
        if i is None:
            if fixed:
                raise UnknownNode(f"label {lab!r} not in the given node universe")
            i = index[lab] = len(order)
            order.append(lab)
            out.append({})
        return i

    for src, tgt, w in triples:
        if src == tgt:
            raise SelfLoop(f"self-loop on {src!r}")
        w = float(w)
        if not w > 0:
            raise NonPositiveWeight(f"edge ({src!r}, {tgt!r}) has weight {w}")
        u, v = node(src), node(tgt)
        if v in out[u]:
            raise DuplicateEdge(f"duplicate edge ({src!r}, {tgt!r})")
        out[u][v] = w
    return WeightedDigraph(order, out)


def reverse(g: WeightedDigraph) -> WeightedDigraph:
    """Flip every edge; node ids and weights are kept."""
    return WeightedDigraph(g.labels, [dict(g.in_neighbors(u)) for u in range(g.n)])


def _restrict(g: WeightedDigraph, keep_nodes: list[int], edges) -> WeightedDigraph:
    new_id = {u: i for i, u in enumerate(keep_nodes)}
    out: list[dict[int, float]] = [{} for _ in keep_nodes]
    for u, v, w in edges:
        out[new_id[u]][new_id[v]] = w
    return WeightedDigraph([g.label(u) for u in keep_nodes], out)


def induce_by_edges(g: WeightedDigraph, keep: Callable[[int, int, float], bool]) -> WeightedDigraph:
    """Subgraph made of the edges for which ``keep(u, v, weight)`` is true.

    The node set shrinks to the endpoints of the kept edges; relative id
    order is preserved so labels sort the same way as in ``g``.
    """
    kept = [(u, v, w) for u, v, w in g.edges() if keep(u, v, w)]
    nodes = sorted({u for u, _, _ in kept} | {v for _, v, _ in kept})
    return _restrict(g, nodes, kept)


def induce_by_nodes(g: WeightedDigraph, nodes: Iterable[int]) -> WeightedDigraph:
    """Subgraph on ``nodes`` containing every edge with both ends inside.

    All requested nodes are kept, isolated or not.  Ids are renumbered in
    increasing order of the original ids.
    """
    node_list = sorted(set(int(u) for u in nodes))
    for u in node_list:
        if not 0 <= u < g.n:
            raise UnknownNode(f"node id {u} not in graph of order {g.n}")
    inside = set(node_list)
    kept = [
        (u, v, w)
        for u in node_list
        for v, w in g.out_neighbors(u).items()
        if v in inside
    ]
    return _restrict(g, node_list, kept)


@dataclass(frozen=True)
class SnapshotSeries:
    """Time-ordered graphs over a shared node universe.

    ``periods[i]`` labels ``graphs[i]``.  Periods must increase strictly
    (plain string order, so ``YYYY-MM`` labels sort chronologically) and all
    graphs must carry identical label tuples.
    """

    periods: tuple[str, ...]
    graphs: tuple[WeightedDigraph, ...] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "periods", tuple(self.periods))
        object.__setattr__(self, "graphs", tuple(self.graphs))
        if len(self.periods) != len(self.graphs):
            raise ValueError("periods and graphs differ in length")
        for a, b in zip(self.periods, self.periods[1:]):
            if not a < b:
                raise ValueError(f"periods not strictly increasing: {a!r} then {b!r}")
        if self.graphs:
            universe = self.graphs[0].labels
            for p, g in zip(self.periods, self.graphs):
                if g.labels != universe:
                    raise ValueError(f"snapshot {p!r} does not share the series label universe")

    @property
    def labels(self) -> tuple[str, ...]:
        return self.graphs[0].labels if self.graphs else ()

    def __len__(self) -> int:
        return len(self.periods)

    def __iter__(self):
        return iter(zip(self.periods, self.graphs))

    def __getitem__(self, i):
        return self.periods[i], self.graphs[i]
