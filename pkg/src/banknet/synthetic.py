"""
Synthetic transaction networks with planted sub-threshold round trips.

Accounts are split into dense communities with a few edges between them.
Background edges get random year spans and amounts, so some of them pass the
screening filters and some do not.  Each planted cycle lives inside one
community, is active within a single year and has every average transaction
below the reporting threshold.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .ingest import TransactionEdge

__all__ = ["PlantedDataset", "make_planted_dataset", "write_transactions", "transactions_csv"]


@dataclass(frozen=True)
class PlantedDataset:
    edges: list[TransactionEdge]
    cycles: list[tuple[str, ...]]
    communities: list[list[str]]


def make_planted_dataset(
    n_nodes: int = 100_000,
    n_edges: int = 300_000,
    n_cycles: int = 20,
    community_size: int = 10,
    inter_fraction: float = 0.05,
    cycle_lengths: tuple[int, int] = (3, 6),
    threshold: float = 10_000.0,
    planted_average: float | None = None,
    host_density: float = 0.5,
    seed: int = 0,
) -> PlantedDataset:
    """Generate a dataset and the ground-truth planted cycles.

    Parameters
    ----------
    n_nodes, n_edges : int
        Size of the merged edge list (planted edges included).
    n_cycles : int
        Number of planted cycles, each in its own community.
    community_size : int
        Accounts per community.
    inter_fraction : float
        Share of background edges joining two different communities.
    cycle_lengths : (int, int)
        Inclusive range of planted cycle lengths.
    threshold : float
        Reporting threshold the planted averages stay below.
    planted_average : float, optional
        Force every planted edge to this exact average amount (for boundary
        tests).  By default averages are drawn below ``threshold``.
    host_density : float
        Share of ordered account pairs linked inside each community that
        hosts a planted cycle, so the cycle accounts sit firmly inside it.
    seed : int
    """
    rng = np.random.default_rng(seed)
    names = [f"A{i:07d}" for i in rng.permutation(n_nodes)]
    n_comm = max(1, n_nodes // community_size)
    comm_of = np.arange(n_nodes) // community_size
    comm_of[comm_of >= n_comm] = n_comm - 1
    members = [np.flatnonzero(comm_of == c) for c in range(n_comm)]
    if n_cycles > n_comm:
        raise ValueError("need at least one community per planted cycle")

    planted_pairs: dict[tuple[int, int], None] = {}
    cycles_idx = []
    lo, hi = cycle_lengths
    hosts = rng.choice(n_comm, size=n_cycles, replace=False)
    for c in hosts:
        length = int(rng.integers(lo, hi + 1))
        nodes = rng.choice(members[c], size=length, replace=False).tolist()
        cycles_idx.append(nodes)
        for a, b in zip(nodes, nodes[1:] + nodes[:1]):
            planted_pairs[(a, b)] = None

    n_background = n_edges - len(planted_pairs)
    n_inter = int(round(n_background * inter_fraction))
    pairs: dict[tuple[int, int], None] = {}
    for c in hosts:
        mem = members[c].tolist()
        for a in mem:
            for b in mem:
                if a != b and (a, b) not in planted_pairs and rng.random() < host_density:
                    pairs[(a, b)] = None
    while len(pairs) < n_background - n_inter:
        batch = n_background - n_inter - len(pairs)
        c = rng.integers(0, n_comm, size=batch)
        size = np.array([len(members[k]) for k in c])
        i = rng.integers(0, size)
        j = rng.integers(0, size)
        for ck, ik, jk in zip(c.tolist(), i.tolist(), j.tolist()):
            if ik == jk:
                continue
            key = (int(members[ck][ik]), int(members[ck][jk]))
            if key not in planted_pairs:
                pairs[key] = None
    while len(pairs) < n_background:
        batch = n_background - len(pairs)
        u = rng.integers(0, n_nodes, size=batch)
        v = rng.integers(0, n_nodes, size=batch)
        for a, b in zip(u.tolist(), v.tolist()):
            if comm_of[a] != comm_of[b] and (a, b) not in planted_pairs:
                pairs[(a, b)] = None

    edges = []
    bg = list(pairs)
    m = len(bg)
    counts = rng.integers(1, 6, size=m)
    averages = threshold * rng.lognormal(mean=0.0, sigma=0.8, size=m)
    start = rng.integers(2010, 2020, size=m)
    span = np.where(rng.random(m) < 0.5, 0, rng.integers(1, 4, size=m))
    for (a, b), n, avg, y1, dy in zip(bg, counts.tolist(), averages.tolist(), start.tolist(), span.tolist()):
        edges.append(TransactionEdge(names[a], names[b], n, round(n * avg, 2), y1, min(y1 + dy, 2020)))
    for nodes in cycles_idx:
        year = int(rng.integers(2010, 2021))
        for a, b in zip(nodes, nodes[1:] + nodes[:1]):
            n = int(rng.integers(1, 6))
            avg = planted_average if planted_average is not None else float(rng.uniform(0.3, 0.99)) * threshold
            k = n * avg if planted_average is not None else round(n * avg, 2)
            edges.append(TransactionEdge(names[a], names[b], n, k, year, year))
    order = rng.permutation(len(edges))
    edges = [edges[i] for i in order]
    return PlantedDataset(
        edges,
        [tuple(names[u] for u in nodes) for nodes in cycles_idx],
        [[names[u] for u in mem] for mem in members],
    )


def _rows(edges: Iterable[TransactionEdge]):
    for e in edges:
        yield [e.source, e.target, e.n, repr(float(e.k)), e.y1, e.y2]


def transactions_csv(edges: Iterable[TransactionEdge]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(_rows(edges))
    return buf.getvalue()


def write_transactions(edges: Iterable[TransactionEdge], path) -> None:
    """Write ``source,target,n,k,y1,y2`` lines without a header."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(_rows(edges))
