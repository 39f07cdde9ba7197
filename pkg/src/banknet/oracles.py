"""
Slow reference implementations used to cross-check the fast ones.

Everything here is written for clarity on small inputs: dense matrices,
plain enumeration, no pruning.  :func:`run_oracle_suites` drives randomized
comparisons and is what ``banknet oracle-check`` runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aml import AmlConfig, enumerate_cycles
from .centrality import Combiner, ConConfig, PageRankConfig, con_scores, pagerank_reversed
from .community import Partition, modularity
from .graph import WeightedDigraph, build_graph, reverse

__all__ = [
    "random_digraph",
    "brute_con_node",
    "brute_con_scores",
    "dense_pagerank_reversed",
    "naive_cycles",
    "direct_modularity",
    "set_partitions",
    "exhaustive_max_modularity",
    "OracleFailure",
    "run_oracle_suites",
]


def random_digraph(rng: np.random.Generator, n: int, p: float, integer_weights: bool = False) -> WeightedDigraph:
    """Erdos-Renyi digraph without self-loops; weights uniform in (0, 10]."""
    triples = []
    for u in range(n):
        for v in range(n):
            if u != v and rng.random() < p:
                w = float(rng.integers(1, 11)) if integer_weights else float(10.0 - 10.0 * rng.random())
                triples.append((f"n{u}", f"n{v}", w))
    return build_graph(triples, labels=[f"n{i}" for i in range(n)])


def _dense(g: WeightedDigraph) -> np.ndarray:
    a = np.zeros((g.n, g.n))
    for u, v, w in g.edges():
        a[u, v] = w
    return a


_NUMPY_COMB = {
    Combiner.MIN: np.minimum,
    Combiner.PRODUCT: np.multiply,
    Combiner.SUM: np.add,
}


def brute_con_node(g: WeightedDigraph, u: int, combiner=Combiner.MIN) -> float:
    """Sum over every other node ``v`` and every ``w`` both point to."""
    comb = Combiner(combiner)
    a = _dense(g)
    terms = []
    for v in range(g.n):
        if v == u:
            continue
        for w in range(g.n):
            if a[u, w] > 0 and a[v, w] > 0:
                terms.append(comb(a[u, w], a[v, w]))
    return math.fsum(terms)


def brute_con_scores(g: WeightedDigraph, combiner=Combiner.MIN) -> np.ndarray:
    """All CON scores from the dense matrix, one row comparison per node."""
    comb = _NUMPY_COMB[Combiner(combiner)]
    a = _dense(g)
    present = a > 0
    out = np.zeros(g.n)
    for u in range(g.n):
        vals = comb(a[u][None, :], a)
        mask = present[u][None, :] & present
        mask[u, :] = False
        out[u] = math.fsum(vals[mask].tolist())
    return out


def dense_pagerank_reversed(g: WeightedDigraph, damping: float = 0.85, tol: float = 1e-15, max_iter: int = 100_000) -> np.ndarray:
    """Power iteration with the full Google matrix of the reversed graph."""
    n = g.n
    if n == 0:
        return np.zeros(0)
    r = _dense(reverse(g))
    trans = np.empty((n, n))
    for i in range(n):
        s = r[i].sum()
        trans[i] = r[i] / s if s > 0 else 1.0 / n
    google = damping * trans + (1.0 - damping) / n
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        y = x @ google
        y /= y.sum()
        if np.abs(y - x).sum() < tol:
            return y
        x = y
    return x


def naive_cycles(g: WeightedDigraph, min_len: int = 3, max_len: int | None = None) -> set[tuple[int, ...]]:
    """Every simple cycle by unpruned DFS, rotated to start at its smallest node."""
    found = set()
    n = g.n
    out = [list(g.out_neighbors(u)) for u in range(n)]

    def extend(path):
        last = path[-1]
        for y in out[last]:
            if y == path[0]:
                found.add(tuple(path))
            elif y > path[0] and y not in path:
                extend(path + [y])

    for s in range(n):
        extend([s])
    cap = max_len if max_len is not None else n
    return {c for c in found if min_len <= len(c) <= cap}


def direct_modularity(g: WeightedDigraph, membership, resolution: float = 1.0) -> float:
    """Modularity from the dense symmetric matrix, double sum over all pairs."""
    a = _dense(g)
    a = a + a.T
    two_m = a.sum()
    k = a.sum(axis=1)
    mem = np.asarray(membership)
    same = mem[:, None] == mem[None, :]
    return float(((a - resolution * np.outer(k, k) / two_m) * same).sum() / two_m)


def set_partitions(n: int):
    """All set partitions of ``range(n)`` as restricted-growth label lists."""
    if n == 0:
        yield []
        return
    labels = [0] * n
    maxes = [0] * n

    def rec(i):
        if i == n:
            yield list(labels)
            return
        for c in range(maxes[i - 1] + 2):
            labels[i] = c
            maxes[i] = max(maxes[i - 1], c)
            yield from rec(i + 1)

    yield from rec(1)


def exhaustive_max_modularity(g: WeightedDigraph, resolution: float = 1.0):
    """Best modularity over every partition of the node set.

    Returns ``(q_max, labels)``; practical up to about 10 nodes (Bell(10) =
    115975 partitions).
    """
    a = _dense(g)
    a = a + a.T
    two_m = a.sum()
    k = a.sum(axis=1)
    b = (a - resolution * np.outer(k, k) / two_m) / two_m
    best, arg = -math.inf, None
    for labels in set_partitions(g.n):
        lab = np.asarray(labels)
        q = b[lab[:, None] == lab[None, :]].sum()
        if q > best:
            best, arg = q, labels
    return float(best), arg


@dataclass(frozen=True)
class OracleFailure:
    suite: str
    seed: int
    detail: str


def _check_con(rng, fault):
    g = random_digraph(rng, int(rng.integers(2, 21)), float(rng.uniform(0.1, 0.4)))
    for comb in Combiner:
        fast = con_scores(g, ConConfig(comb))
        if fault:
            fast = fast + 1.0
        slow = brute_con_scores(g, comb)
        if not np.array_equal(fast, slow):
            return f"combiner {comb.value}: max diff {np.max(np.abs(fast - slow))}"
    return None


def _check_pagerank(rng, fault):
    g = random_digraph(rng, int(rng.integers(1, 21)), float(rng.uniform(0.05, 0.4)))
    fast = pagerank_reversed(g, PageRankConfig(tolerance=1e-13, max_iterations=10_000))
    if fault:
        fast = fast * 1.01
    slow = dense_pagerank_reversed(g)
    if not np.allclose(fast, slow, rtol=0, atol=1e-8):
        return f"max diff {np.max(np.abs(fast - slow))}"
    if abs(fast.sum() - 1.0) > 1e-9:
        return f"sum {fast.sum()}"
    return None


def _check_cycles(rng, fault):
    g = random_digraph(rng, int(rng.integers(1, 9)), float(rng.uniform(0.1, 0.5)))
    cfg = AmlConfig(min_cycle_len=2, max_cycle_len=8)
    fast = [c.nodes for c in enumerate_cycles(g, cfg)]
    if fault:
        fast = fast + [(0,)]
    slow = naive_cycles(g, 2, 8)
    if len(fast) != len(set(fast)) or set(fast) != slow:
        return f"{len(fast)} cycles vs {len(slow)} expected"
    return None


def _check_modularity(rng, fault):
    n = int(rng.integers(2, 16))
    g = random_digraph(rng, n, float(rng.uniform(0.1, 0.5)))
    if g.edge_count == 0:
        return None
    labels = rng.integers(0, max(1, n // 2), size=n)
    p = Partition.from_labels(labels.tolist())
    gamma = float(rng.uniform(0.5, 2.0))
    fast = modularity(g, p, gamma)
    if fault:
        fast += 1e-6
    slow = direct_modularity(g, p.membership, gamma)
    if abs(fast - slow) > 1e-12:
        return f"{fast} vs {slow}"
    return None


SUITES = {
    "con": _check_con,
    "pagerank": _check_pagerank,
    "cycles": _check_cycles,
    "modularity": _check_modularity,
}


def run_oracle_suites(iterations: int = 100, seed: int = 0, inject_fault: bool = False) -> list[OracleFailure]:
    """Compare fast and reference implementations on random small instances.

    Instance ``i`` of every suite is generated from seed ``seed + i`` so a
    failure can be replayed alone.  ``inject_fault`` corrupts the fast side
    of the first instance of each suite (used to test failure reporting).
    """
    failures = []
    for name, check in SUITES.items():
        for i in range(iterations):
            s = seed + i
            detail = check(np.random.default_rng(s), inject_fault and i == 0)
            if detail is not None:
                failures.append(OracleFailure(name, s, detail))
    return failures
