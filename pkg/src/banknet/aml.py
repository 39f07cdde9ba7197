"""
Screening of transaction networks for sub-threshold round trips.

Pipeline, for a merged transaction edge list:

1. Louvain communities on the amount-weighted graph; communities with fewer
   than ``min_community_order`` accounts are dropped.
2. Keep intra-community edges whose activity span ``y2 - y1`` is below
   ``t0`` years.
3. Of those, keep edges whose average transaction ``k / n`` is below the
   reporting threshold.
4. Enumerate simple directed cycles inside each filtered community.
5. Communities with at least one cycle are kept for path analysis.
6. In those, take one shortest directed path per ordered pair of accounts
   whose distance lies in ``[path_len_min, path_len_max]``.
7. R-value per community: share of path accounts that also sit on a cycle.

The accounts on cycles are the flagged set.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .community import LouvainConfig, Partition, filter_min_order, louvain
from .graph import WeightedDigraph, induce_by_nodes
from .ingest import TransactionEdge

__all__ = [
    "AmlConfig",
    "CycleRecord",
    "PathRecord",
    "CommunityResult",
    "AmlReport",
    "filter_period",
    "filter_amount",
    "enumerate_cycles",
    "cycle_communities",
    "enumerate_paths",
    "r_value",
    "scan_community",
    "run_aml_pipeline",
    "SUMMARY_FIELDS",
]


@dataclass(frozen=True)
class AmlConfig:
    t0: float = 1
    amount_threshold: float = 10_000.0
    min_cycle_len: int = 3
    max_cycle_len: int = 8
    path_len_min: int = 4
    path_len_max: int = 7
    min_community_order: int = 3

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if not self.amount_threshold > 0:
            raise ValueError("amount_threshold must be positive")
        if not 2 <= self.min_cycle_len <= self.max_cycle_len:
            raise ValueError("need 2 <= min_cycle_len <= max_cycle_len")
        if not 0 < self.path_len_min <= self.path_len_max:
            raise ValueError("need 0 < path_len_min <= path_len_max")
        if self.min_community_order < 1:
            raise ValueError("min_community_order must be >= 1")


@dataclass(frozen=True)
class CycleRecord:
    """Simple directed cycle, rotated so the smallest node id comes first.

    ``nodes`` are ids in the graph the cycle was found in, ``accounts`` the
    matching labels.  The closing edge ``nodes[-1] -> nodes[0]`` is implied.
    """

    community: int
    nodes: tuple[int, ...]
    accounts: tuple[str, ...]

    @property
    def length(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class PathRecord:
    community: int
    source: str
    target: str
    nodes: tuple[int, ...]
    accounts: tuple[str, ...]

    @property
    def length(self) -> int:
        return len(self.nodes) - 1


# ---------------------------------------------------------------------------
# edge filters


def filter_period(edges: Iterable[TransactionEdge], t0: float = 1) -> list[TransactionEdge]:
    """Edges active for fewer than ``t0`` years (``y2 - y1 < t0``)."""
    if not t0 > 0:
        raise ValueError("t0 must be positive")
    return [e for e in edges if e.y2 - e.y1 < t0]


def filter_amount(edges: Iterable[TransactionEdge], threshold: float = 10_000.0) -> list[TransactionEdge]:
    """Edges whose average transaction ``k / n`` is strictly below ``threshold``."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    return [e for e in edges if e.k / e.n < threshold]


# ---------------------------------------------------------------------------
# cycles


def _sorted_adjacency(g: WeightedDigraph):
    out = [sorted(g.out_neighbors(u)) for u in range(g.n)]
    inn = [sorted(g.in_neighbors(u)) for u in range(g.n)]
    return out, inn


def _bounded_cycles(out, inn, lo, hi):
    """All simple cycles with ``lo <= length <= hi`` edges.

    For each start ``s`` only nodes above ``s`` are visited, so every cycle is
    found once, from its smallest node.  A reverse BFS from ``s`` gives each
    node's distance back to ``s``; branches that cannot close within ``hi``
    edges are cut, and nodes with no way back are skipped.  Returns the cycles and whether any branch was cut by the
    length cap (longer cycles may then exist).
    """
    cycles = []
    cut = False
    for s in range(len(out)):
        dist = {s: 0}
        frontier = [s]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for x in frontier:
                for y in inn[x]:
                    if y > s and y not in dist:
                        dist[y] = d
                        nxt.append(y)
            frontier = nxt
        if len(dist) == 1:
            continue
        path = [s]
        on_path = {s}
        stack = [iter(out[s])]
        while stack:
            for y in stack[-1]:
                if y == s:
                    if len(path) >= lo:
                        cycles.append(tuple(path))
                    continue
                if y < s or y in on_path:
                    continue
                dy = dist.get(y)
                if dy is None:
                    continue
                if len(path) + dy > hi:
                    cut = True
                    continue
                path.append(y)
                on_path.add(y)
                stack.append(iter(out[y]))
                break
            else:
                stack.pop()
                on_path.discard(path.pop())
    return cycles, cut


def enumerate_cycles(
    g: WeightedDigraph,
    cfg: AmlConfig = AmlConfig(),
    community: int = -1,
    return_truncated: bool = False,
):
    """Simple directed cycles of ``g`` with length in ``[min_cycle_len, max_cycle_len]``.

    Each cycle is emitted once, starting at its smallest node id.  With
    ``return_truncated`` a second value tells whether the length cap pruned
    part of the search.
    """
    out, inn = _sorted_adjacency(g)
    raw, cut = _bounded_cycles(out, inn, cfg.min_cycle_len, cfg.max_cycle_len)
    lab = g.labels
    records = [CycleRecord(community, c, tuple(lab[u] for u in c)) for c in raw]
    return (records, cut) if return_truncated else records


def cycle_communities(results: Iterable["CommunityResult"]) -> list["CommunityResult"]:
    """Communities that contain at least one cycle."""
    return [r for r in results if r.cycles]


# ---------------------------------------------------------------------------
# shortest paths


def _bfs(out, s, max_depth):
    """Layered BFS from ``s`` up to ``max_depth``.

    Returns ``(dist, parent, sigma)``: the parent of a node is its smallest
    predecessor on the previous layer, ``sigma`` the number of shortest paths.
    """
    dist = {s: 0}
    parent = {s: -1}
    sigma = {s: 1}
    layer = [s]
    d = 0
    while layer and d < max_depth:
        d += 1
        nxt = []
        for u in layer:
            su = sigma[u]
            for v in out[u]:
                dv = dist.get(v)
                if dv is None:
                    dist[v] = d
                    parent[v] = u
                    sigma[v] = su
                    nxt.append(v)
                elif dv == d:
                    sigma[v] += su
                    if u < parent[v]:
                        parent[v] = u
        layer = nxt
    return dist, parent, sigma


def _trace(parent, t):
    path = [t]
    while parent[path[-1]] >= 0:
        path.append(parent[path[-1]])
    path.reverse()
    return tuple(path)


def enumerate_paths(g: WeightedDigraph, a: int = 4, b: int = 7, community: int = -1) -> list[PathRecord]:
    """One shortest directed path per ordered pair at distance ``a..b``.

    Pairs are visited by source id then target id.  Among equally short
    paths the one whose every hop comes from the smallest possible
    predecessor is chosen.
    """
    if not 0 < a <= b:
        raise ValueError("need 0 < a <= b")
    out = [sorted(g.out_neighbors(u)) for u in range(g.n)]
    lab = g.labels
    records = []
    for s in range(g.n):
        dist, parent, _ = _bfs(out, s, b)
        for t in sorted(dist):
            if a <= dist[t] <= b:
                nodes = _trace(parent, t)
                records.append(PathRecord(community, lab[s], lab[t], nodes, tuple(lab[u] for u in nodes)))
    return records


def _path_summary(out, a, b):
    count = 0
    multiplicity = 0
    nodes: set[int] = set()
    for s in range(len(out)):
        dist, parent, sigma = _bfs(out, s, b)
        for t, d in dist.items():
            if a <= d <= b:
                count += 1
                multiplicity += sigma[t]
                nodes.update(_trace(parent, t))
    return count, multiplicity, nodes


def r_value(path_nodes: Iterable, cycle_nodes: Iterable) -> float | None:
    """``|P & C| / |P|``, or ``None`` when there are no path nodes."""
    p = set(path_nodes)
    if not p:
        return None
    return len(p & set(cycle_nodes)) / len(p)


# ---------------------------------------------------------------------------
# per-community scan and full pipeline


@dataclass
class CommunityResult:
    """Cycle and path findings for one community.

    ``path_count`` counts ordered pairs (one representative path each);
    ``path_multiplicity`` counts every shortest path of those pairs.
    ``path_nodes`` and ``cycle_nodes`` hold account labels.
    """

    id: int
    size: int
    n_edges: int
    cycles: list[CycleRecord] = field(default_factory=list)
    cap_hit: bool = False
    path_count: int = 0
    path_multiplicity: int = 0
    path_nodes: frozenset = frozenset()
    cycle_nodes: frozenset = frozenset()

    @property
    def overlap_count(self) -> int:
        return len(self.path_nodes & self.cycle_nodes)

    @property
    def r_value(self) -> float | None:
        return r_value(self.path_nodes, self.cycle_nodes)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "size": self.size,
            "filtered_edges": self.n_edges,
            "cycles": [list(c.accounts) for c in self.cycles],
            "cycle_cap_hit": self.cap_hit,
            "path_count": self.path_count,
            "path_multiplicity": self.path_multiplicity,
            "path_node_count": len(self.path_nodes),
            "overlap_count": self.overlap_count,
            "r_value": self.r_value,
        }


def scan_community(g: WeightedDigraph, cfg: AmlConfig = AmlConfig(), community: int = -1) -> CommunityResult:
    """Cycles, and paths when a cycle exists, for one filtered community subgraph."""
    cycles, cut = enumerate_cycles(g, cfg, community, return_truncated=True)
    res = CommunityResult(community, g.n, g.edge_count, cycles, cut)
    if cycles:
        out = [sorted(g.out_neighbors(u)) for u in range(g.n)]
        count, mult, nodes = _path_summary(out, cfg.path_len_min, cfg.path_len_max)
        lab = g.labels
        res.path_count = count
        res.path_multiplicity = mult
        res.path_nodes = frozenset(lab[u] for u in nodes)
        res.cycle_nodes = frozenset(a for c in cycles for a in c.accounts)
    return res


def _scan_task(args):
    cid, g, cfg = args
    return scan_community(g, cfg, cid)


SUMMARY_FIELDS = (
    "n_nodes",
    "n_edges",
    "n_communities",
    "mean_community_size",
    "max_community_size",
    "n_intra_community_edges",
    "n_edges_within_period",
    "n_edges_below_threshold",
    "n_cycles",
    "n_cycle_communities",
    "n_cycle_nodes",
    "cycle_length_counts",
    "n_paths",
    "n_path_nodes",
    "n_path_cycle_nodes",
    "n_shortest_paths_all",
    "global_r_value",
    "n_cap_hit_communities",
)


@dataclass
class AmlReport:
    """Pipeline output: global counters, per-community results, flagged accounts."""

    summary: dict
    communities: list[CommunityResult]
    flagged_accounts: list[str]
    labels: tuple[str, ...] = field(default=(), repr=False)
    partition: Partition | None = field(default=None, repr=False)

    @property
    def cycles(self) -> list[CycleRecord]:
        return [c for r in self.communities for c in r.cycles]

    @property
    def cycle_communities(self) -> list[CommunityResult]:
        return cycle_communities(self.communities)

    def to_dict(self) -> dict:
        return {
            "summary": self.summary,
            "communities": [r.to_dict() for r in self.communities],
            "flagged_accounts": list(self.flagged_accounts),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def flagged_csv(self) -> str:
        owner = {}
        for r in self.communities:
            for a in r.cycle_nodes:
                owner[a] = r.id
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["account", "community_id"])
        for a in self.flagged_accounts:
            w.writerow([a, owner.get(a, "")])
        return buf.getvalue()

    def r_values_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["community_id", "r_value"])
        for r in self.cycle_communities:
            w.writerow([r.id, "" if r.r_value is None else repr(r.r_value)])
        return buf.getvalue()


def _account_index(edges: Sequence[TransactionEdge]) -> dict[str, int]:
    index: dict[str, int] = {}
    for e in edges:
        for a in (e.source, e.target):
            if a not in index:
                index[a] = len(index)
    return index


def run_aml_pipeline(
    edges: Sequence[TransactionEdge],
    louvain_cfg: LouvainConfig = LouvainConfig(),
    cfg: AmlConfig = AmlConfig(),
    workers: int = 1,
) -> AmlReport:
    """Run the full screening pipeline over merged transaction edges.

    Louvain runs on the graph weighted by total amount ``k`` (zero-amount
    pairs carry no modularity weight and are left out of that graph only).
    Filtered community subgraphs are weighted by transaction count; only
    their topology is used.  With ``workers > 1`` communities are scanned in
    a process pool and merged by community id, giving the same report as a
    serial run.
    """
    index = _account_index(edges)
    labels = tuple(index)
    n = len(labels)
    src = np.fromiter((index[e.source] for e in edges), dtype=np.int64, count=len(edges))
    tgt = np.fromiter((index[e.target] for e in edges), dtype=np.int64, count=len(edges))

    money: list[dict[int, float]] = [{} for _ in range(n)]
    for e, u, v in zip(edges, src.tolist(), tgt.tolist()):
        if e.k > 0:
            money[u][v] = float(e.k)
    partition = louvain(WeightedDigraph(labels, money), louvain_cfg)
    kept, _ = filter_min_order(partition, cfg.min_community_order)
    mem = kept.membership

    intra = [e for e, u, v in zip(edges, src.tolist(), tgt.tolist()) if mem[u] >= 0 and mem[u] == mem[v]]
    in_period = filter_period(intra, cfg.t0)
    below = filter_amount(in_period, cfg.amount_threshold)

    counts: list[dict[int, float]] = [{} for _ in range(n)]
    for e in below:
        counts[index[e.source]][index[e.target]] = float(e.n)
    filtered = WeightedDigraph(labels, counts)

    communities = kept.communities
    tasks = [(cid, induce_by_nodes(filtered, nodes.tolist()), cfg) for cid, nodes in enumerate(communities)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_task, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    else:
        results = [_scan_task(t) for t in tasks]

    cyc = cycle_communities(results)
    cycle_nodes = set().union(*(r.cycle_nodes for r in cyc))
    path_nodes = set().union(*(r.path_nodes for r in cyc))
    sizes = kept.sizes()
    lengths = Counter(c.length for r in cyc for c in r.cycles)
    summary = {
        "n_nodes": n,
        "n_edges": len(edges),
        "n_communities": len(communities),
        "mean_community_size": float(sizes.mean()) if len(sizes) else 0.0,
        "max_community_size": int(sizes.max()) if len(sizes) else 0,
        "n_intra_community_edges": len(intra),
        "n_edges_within_period": len(in_period),
        "n_edges_below_threshold": len(below),
        "n_cycles": sum(len(r.cycles) for r in cyc),
        "n_cycle_communities": len(cyc),
        "n_cycle_nodes": len(cycle_nodes),
        "cycle_length_counts": {str(k): lengths[k] for k in sorted(lengths)},
        "n_paths": sum(r.path_count for r in cyc),
        "n_path_nodes": len(path_nodes),
        "n_path_cycle_nodes": len(path_nodes & cycle_nodes),
        "n_shortest_paths_all": sum(r.path_multiplicity for r in cyc),
        "global_r_value": r_value(path_nodes, cycle_nodes),
        "n_cap_hit_communities": sum(1 for r in results if r.cap_hit),
    }
    flagged = sorted(cycle_nodes, key=index.__getitem__)
    return AmlReport(summary, results, flagged, labels, kept)
