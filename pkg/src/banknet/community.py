"""
Louvain community detection on weighted graphs.

Directed transaction graphs are first folded into undirected ones by adding
opposite weights (:func:`symmetrize`).  Modularity uses the usual
Newman-Girvan definition with a resolution factor::

    Q = 1/(2m) * sum_ij [A_ij - resolution * k_i k_j / (2m)] * [c_i == c_j]

Self-loops only appear on aggregated graphs; a loop of weight ``w`` counts
as ``A_ii = 2w`` so that ``k_i = sum_j A_ij`` holds on every level.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyGraph
from .graph import WeightedDigraph

__all__ = [
    "UndirectedGraph",
    "Partition",
    "LouvainConfig",
    "symmetrize",
    "modularity",
    "louvain",
    "filter_min_order",
]


@dataclass(frozen=True)
class UndirectedGraph:
    """Symmetric weighted adjacency.

    ``adj[u][v] == adj[v][u]`` is the weight of edge ``{u, v}``; ``loops[u]``
    holds self-loop weight (zero on graphs built by :func:`symmetrize`).
    """

    labels: tuple[str, ...]
    adj: tuple[dict[int, float], ...] = field(repr=False)
    loops: tuple[float, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.adj)

    def degrees(self) -> np.ndarray:
        return np.array([sum(a.values()) + 2 * l for a, l in zip(self.adj, self.loops)], dtype=float)

    def total_weight(self) -> float:
        """``m``: every undirected edge and loop counted once."""
        return sum(sum(a.values()) for a in self.adj) / 2 + sum(self.loops)

    def edges(self):
        for u, nbrs in enumerate(self.adj):
            for v in sorted(nbrs):
                if u < v:
                    yield u, v, nbrs[v]


def symmetrize(g: WeightedDigraph) -> UndirectedGraph:
    """Undirected view with ``w(u, v) = w(u -> v) + w(v -> u)``."""
    adj: list[dict[int, float]] = [{} for _ in range(g.n)]
    for u, v, w in g.edges():
        adj[u][v] = adj[u].get(v, 0.0) + w
        adj[v][u] = adj[v].get(u, 0.0) + w
    return UndirectedGraph(g.labels, tuple(adj), (0.0,) * g.n)


@dataclass(frozen=True)
class Partition:
    """Assignment of nodes to communities ``0 .. k-1``.

    ``membership[u]`` is the community of node ``u`` or ``-1`` when the node
    was dropped (see :func:`filter_min_order`).
    """

    membership: np.ndarray = field(repr=False)

    def __post_init__(self):
        mem = np.asarray(self.membership, dtype=np.int64)
        object.__setattr__(self, "membership", mem)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        """Renumber arbitrary community labels by order of first appearance."""
        remap: dict[int, int] = {}
        out = np.empty(len(labels), dtype=np.int64)
        for u, c in enumerate(labels):
            if c < 0:
                out[u] = -1
                continue
            out[u] = remap.setdefault(int(c), len(remap))
        return cls(out)

    @classmethod
    def from_communities(cls, n: int, communities: Iterable[Iterable[int]]) -> "Partition":
        mem = np.full(n, -1, dtype=np.int64)
        for c, nodes in enumerate(communities):
            for u in nodes:
                mem[u] = c
        return cls.from_labels(mem.tolist())

    @property
    def n_communities(self) -> int:
        return int(self.membership.max()) + 1 if self.membership.size and self.membership.max() >= 0 else 0

    @property
    def communities(self) -> list[np.ndarray]:
        """Sorted node ids of each community, indexed by community id."""
        order = np.argsort(self.membership, kind="stable")
        mem = self.membership[order]
        keep = mem >= 0
        order, mem = order[keep], mem[keep]
        bounds = np.searchsorted(mem, np.arange(self.n_communities + 1))
        return [order[bounds[c]:bounds[c + 1]] for c in range(self.n_communities)]

    def sizes(self) -> np.ndarray:
        mem = self.membership[self.membership >= 0]
        return np.bincount(mem, minlength=self.n_communities)

    def to_csv(self, labels: Sequence[str]) -> str:
        """``account,community_id`` rows for assigned nodes, in node order."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["account", "community_id"])
        for u, c in enumerate(self.membership.tolist()):
            if c >= 0:
                writer.writerow([labels[u], c])
        return buf.getvalue()

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.membership, other.membership)


def modularity(g: UndirectedGraph | WeightedDigraph, p: Partition, resolution: float = 1.0) -> float:
    """Weighted modularity of partition ``p``.

    Nodes with membership ``-1`` are treated as singletons.

    Raises
    ------
    EmptyGraph
        The graph has no edge weight.
    """
    if isinstance(g, WeightedDigraph):
        g = symmetrize(g)
    m = g.total_weight()
    if m <= 0:
        raise EmptyGraph("modularity is undefined on a graph without edges")
    mem = p.membership.copy()
    lone = mem < 0
    mem[lone] = mem.max(initial=-1) + 1 + np.arange(lone.sum())
    k = mem.max(initial=-1) + 1
    inner = np.zeros(k)
    tot = np.zeros(k)
    deg = g.degrees()
    np.add.at(tot, mem, deg)
    for u, (nbrs, loop) in enumerate(zip(g.adj, g.loops)):
        cu = mem[u]
        s = 2 * loop
        for v, w in nbrs.items():
            if mem[v] == cu:
                s += w
        inner[cu] += s
    two_m = 2 * m
    return float(inner.sum() / two_m - resolution * np.sum((tot / two_m) ** 2))


@dataclass(frozen=True)
class LouvainConfig:
    resolution: float = 1.0
    seed: int = 0
    max_passes: int = 50
    min_modularity_gain: float = 1e-7

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        if self.max_passes < 1:
            raise ValueError("max_passes must be positive")
        if self.min_modularity_gain < 0:
            raise ValueError("min_modularity_gain must be >= 0")


_MAX_SWEEPS = 10_000


def _local_moving(adj, loops, m, resolution, rng, min_gain):
    """One Louvain phase-1 run.  Returns the community of each node and whether any moved."""
    n = len(adj)
    k = [sum(a.values()) + 2 * l for a, l in zip(adj, loops)]
    tot = list(k)
    comm = list(range(n))
    two_m = 2.0 * m
    threshold = min_gain * m
    moved_any = False
    for _ in range(_MAX_SWEEPS):
        moves = 0
        for i in rng.permutation(n).tolist():
            ci = comm[i]
            ki = k[i]
            links: dict[int, float] = {}
            for j, w in adj[i].items():
                cj = comm[j]
                links[cj] = links.get(cj, 0.0) + w
            tot[ci] -= ki
            scale = resolution * ki / two_m
            own = links.get(ci, 0.0) - tot[ci] * scale
            best_c, best = ci, own
            for c, w in links.items():
                if c == ci:
                    continue
                gain = w - tot[c] * scale
                if gain - own > threshold and (gain > best or (gain == best and c < best_c)):
                    best_c, best = c, gain
            tot[best_c] += ki
            if best_c != ci:
                comm[i] = best_c
                moves += 1
        if not moves:
            break
        moved_any = True
    return comm, moved_any


def _aggregate(adj, loops, comm):
    """Collapse communities into nodes; ``comm`` must be contiguous ``0..k-1``."""
    k = max(comm) + 1
    new_adj: list[dict[int, float]] = [{} for _ in range(k)]
    new_loops = [0.0] * k
    for i, nbrs in enumerate(adj):
        ci = comm[i]
        new_loops[ci] += loops[i]
        row = new_adj[ci]
        for j, w in nbrs.items():
            cj = comm[j]
            if cj == ci:
                new_loops[ci] += w / 2
            else:
                row[cj] = row.get(cj, 0.0) + w
    return new_adj, new_loops


def _level_modularity(adj, loops, m, resolution):
    two_m = 2.0 * m
    q = 0.0
    for a, l in zip(adj, loops):
        kc = sum(a.values()) + 2 * l
        q += 2 * l / two_m - resolution * (kc / two_m) ** 2
    return q


def _contiguous(labels):
    remap: dict[int, int] = {}
    return [remap.setdefault(c, len(remap)) for c in labels]


def louvain(g: WeightedDigraph | UndirectedGraph, cfg: LouvainConfig = LouvainConfig()) -> Partition:
    """Louvain partition of ``g`` (directed graphs are symmetrised first).

    Each pass moves single nodes to the neighbouring community with the
    largest modularity gain, visiting nodes in a seeded random order; a move
    happens only when it raises modularity by more than
    ``cfg.min_modularity_gain``, and equal gains go to the lowest community
    id.  Communities are then collapsed into nodes and the next pass starts.
    Passes stop when nothing moves, the pass gain drops below the minimum, or
    ``cfg.max_passes`` is reached.

    Community ids of the result are ordered by their smallest node id, so
    the output is reproducible for a given seed.
    """
    ug = symmetrize(g) if isinstance(g, WeightedDigraph) else g
    n = ug.n
    m = ug.total_weight()
    if n == 0:
        return Partition(np.zeros(0, dtype=np.int64))
    if m <= 0:
        return Partition(np.arange(n, dtype=np.int64))
    rng = np.random.default_rng(cfg.seed)
    adj = [dict(a) for a in ug.adj]
    loops = list(ug.loops)
    membership = np.arange(n, dtype=np.int64)
    q = _level_modularity(adj, loops, m, cfg.resolution)
    for _ in range(cfg.max_passes):
        comm, moved = _local_moving(adj, loops, m, cfg.resolution, rng, cfg.min_modularity_gain)
        if not moved:
            break
        comm = _contiguous(comm)
        candidate = np.asarray(comm, dtype=np.int64)[membership]
        new_adj, new_loops = _aggregate(adj, loops, comm)
        new_q = _level_modularity(new_adj, new_loops, m, cfg.resolution)
        if new_q - q < cfg.min_modularity_gain:
            break
        membership, adj, loops, q = candidate, new_adj, new_loops, new_q
    return Partition.from_labels(membership.tolist())


def filter_min_order(p: Partition, min_order: int = 3) -> tuple[Partition, np.ndarray]:
    """Drop communities with fewer than ``min_order`` nodes.

    Returns
    -------
    kept : Partition
        Remaining communities renumbered ``0..k-1`` in their original order;
        dropped nodes have membership ``-1``.
    dropped : ndarray
        Sorted ids of the dropped nodes.
    """
    if min_order < 1:
        raise ValueError("min_order must be >= 1")
    sizes = p.sizes()
    big = sizes >= min_order
    remap = np.full(len(sizes), -1, dtype=np.int64)
    remap[big] = np.arange(int(big.sum()))
    mem = p.membership
    new = np.where(mem >= 0, remap[np.maximum(mem, 0)], -1)
    dropped = np.flatnonzero((mem >= 0) & (new < 0))
    return Partition(new), dropped
