"""
Centralities for adversarial (debtor -> lender) networks.

An edge ``u -> v`` of weight ``k`` means ``u`` owes ``k`` to ``v``.  Two
scores are compared per node:

* the common out-neighbour (CON) score, which is large for nodes that owe
  the same lenders as many other nodes;
* PageRank on the edge-reversed graph, which is large for nodes that many
  (heavily indebted) nodes owe money to.

Both are min-max rescaled to ``[0, 1]`` and subtracted to give the low-key
leader strength ``epsilon = con_norm - pr_norm``.  Nodes with epsilon above
``c`` are low-key leaders, nodes below ``C`` are highly-exposed leaders.

Weighted CON: for a common out-neighbour ``w`` of ``u`` and ``v`` the
contribution is ``combiner(weight(u, w), weight(v, w))``.  With unit weights
and the ``min`` combiner this is the plain count of common out-neighbours.
Every CON sum is computed with :func:`math.fsum`, so the result is the
correctly rounded sum of its terms and does not depend on summation order.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConvergenceWarning, EmptyInput, KeyMismatch, SameNode, SetTooSmall
from .graph import SnapshotSeries, WeightedDigraph

__all__ = [
    "Combiner",
    "ConConfig",
    "PageRankConfig",
    "LeaderThresholds",
    "LeaderClass",
    "CentralityReport",
    "con_pair",
    "con_node",
    "con_scores",
    "con_set",
    "pagerank_reversed",
    "unity_normalize",
    "lkl_strength",
    "classify_leaders",
    "analyze_snapshot",
    "analyze_series",
    "epsilon_timeseries",
    "leader_events",
    "REPORT_FIELDS",
]


class Combiner(str, enum.Enum):
    MIN = "min"
    PRODUCT = "product"
    SUM = "sum"

    def __call__(self, a, b):
        if self is Combiner.MIN:
            return min(a, b)
        if self is Combiner.PRODUCT:
            return a * b
        return a + b

    def outer(self, a: np.ndarray) -> np.ndarray:
        """Pairwise combination matrix of a weight vector."""
        if self is Combiner.MIN:
            return np.minimum.outer(a, a)
        if self is Combiner.PRODUCT:
            return np.multiply.outer(a, a)
        return np.add.outer(a, a)


@dataclass(frozen=True)
class ConConfig:
    combiner: Combiner = Combiner.MIN

    def __post_init__(self):
        object.__setattr__(self, "combiner", Combiner(self.combiner))


@dataclass(frozen=True)
class PageRankConfig:
    damping: float = 0.85
    tolerance: float = 1e-10
    max_iterations: int = 200

    def __post_init__(self):
        if not 0 < self.damping < 1:
            raise ValueError(f"damping must lie in (0, 1), got {self.damping}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


@dataclass(frozen=True)
class LeaderThresholds:
    c: float = 0.1
    C: float = -0.4

    def __post_init__(self):
        if not self.C < 0 < self.c:
            raise ValueError(f"thresholds need C < 0 < c, got C={self.C}, c={self.c}")


class LeaderClass(str, enum.Enum):
    LOW_KEY = "LOW_KEY"
    HIGHLY_EXPOSED = "HIGHLY_EXPOSED"
    NEITHER = "NEITHER"


# ---------------------------------------------------------------------------
# CON scores


def _con_terms(g: WeightedDigraph, u: int, comb: Combiner) -> Iterable[float]:
    for w, a in g.out_neighbors(u).items():
        for v, b in g.in_neighbors(w).items():
            if v != u:
                yield comb(a, b)


def con_pair(g: WeightedDigraph, u: int, v: int, cfg: ConConfig = ConConfig()) -> float:
    """Weighted number of common out-neighbours of ``u`` and ``v``."""
    if u == v:
        raise SameNode(f"con_pair needs two distinct nodes, got {u} twice")
    comb = cfg.combiner
    out_u, out_v = g.out_neighbors(u), g.out_neighbors(v)
    small = out_u if len(out_u) <= len(out_v) else out_v
    return math.fsum(comb(out_u[w], out_v[w]) for w in small if w in out_u and w in out_v)


def con_node(g: WeightedDigraph, u: int, cfg: ConConfig = ConConfig()) -> float:
    """CON score of one node: ``con_pair(u, v)`` summed over all ``v != u``."""
    return math.fsum(_con_terms(g, u, cfg.combiner))


def con_scores(g: WeightedDigraph, cfg: ConConfig = ConConfig()) -> np.ndarray:
    """CON score of every node, grouped by common out-neighbour.

    For each lender ``w`` the combiner is applied to all pairs of its
    in-edges at once; cost is the sum of squared in-degrees.
    """
    comb = cfg.combiner
    parts: list[list[np.ndarray]] = [[] for _ in range(g.n)]
    for w in range(g.n):
        nbrs = g.in_neighbors(w)
        if len(nbrs) < 2:
            continue
        ids = np.fromiter(nbrs.keys(), dtype=np.int64, count=len(nbrs))
        wts = np.fromiter(nbrs.values(), dtype=float, count=len(nbrs))
        mat = comb.outer(wts)
        off_diag = ~np.eye(len(ids), dtype=bool)
        for row, u in enumerate(ids):
            parts[u].append(mat[row][off_diag[row]])
    return np.array([math.fsum(itertools.chain.from_iterable(p)) for p in parts], dtype=float)


def con_set(g: WeightedDigraph, s: Iterable[int], cfg: ConConfig = ConConfig()) -> float:
    """CON score of a node set: ``con_pair`` over its unordered distinct pairs."""
    nodes = sorted(set(s))
    if len(nodes) < 2:
        raise SetTooSmall("con_set needs at least two distinct nodes")
    comb = cfg.combiner
    terms = []
    for i, u in enumerate(nodes):
        out_u = g.out_neighbors(u)
        for v in nodes[i + 1:]:
            out_v = g.out_neighbors(v)
            terms.extend(comb(a, out_v[w]) for w, a in out_u.items() if w in out_v)
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# PageRank


def pagerank_reversed(
    g: WeightedDigraph,
    cfg: PageRankConfig = PageRankConfig(),
    return_converged: bool = False,
):
    """Weighted PageRank of the edge-reversed graph.

    In the reversed graph a walker at ``a`` moves to ``b`` with probability
    proportional to the original weight of ``b -> a``, i.e. lenders pass rank
    to their debtors and rank accumulates at nodes that are owed money.  Nodes
    with no incoming original edges are dangling and spread their rank
    uniformly.

    Parameters
    ----------
    g : WeightedDigraph
    cfg : PageRankConfig
    return_converged : bool, optional
        Also return whether the L1 change dropped below the tolerance.

    Returns
    -------
    rank : ndarray
        Probability vector indexed by node id.
    converged : bool
        Only when ``return_converged`` is true.

    Warns
    -----
    ConvergenceWarning
        The iteration cap was reached first; the last iterate is returned.
    """
    n = g.n
    if n == 0:
        rank = np.zeros(0)
        return (rank, True) if return_converged else rank
    a = g.to_csr()
    # out-weight of each node in the reversed graph = original in-weight
    s = np.asarray(a.sum(axis=0)).ravel()
    dangling = s == 0
    inv_s = np.zeros(n)
    inv_s[~dangling] = 1.0 / s[~dangling]
    d = cfg.damping
    rank = np.full(n, 1.0 / n)
    converged = False
    for _ in range(cfg.max_iterations):
        new = d * (a @ (rank * inv_s))
        new += (d * rank[dangling].sum() + (1.0 - d)) / n
        new /= new.sum()
        change = np.abs(new - rank).sum()
        rank = new
        if change < cfg.tolerance:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"PageRank did not converge in {cfg.max_iterations} iterations",
            ConvergenceWarning,
            stacklevel=2,
        )
    return (rank, converged) if return_converged else rank


# ---------------------------------------------------------------------------
# normalisation, LKL strength, classification


def unity_normalize(scores):
    """Min-max rescale scores to ``[0, 1]``.

    Accepts a mapping (returns a dict with the same keys) or an array-like
    (returns an ndarray).  A constant score vector maps to all zeros.
    """
    if isinstance(scores, Mapping):
        if not scores:
            raise EmptyInput("cannot normalise an empty score map")
        keys = list(scores)
        return dict(zip(keys, unity_normalize(np.array([scores[k] for k in keys], dtype=float)).tolist()))
    x = np.asarray(scores, dtype=float)
    if x.size == 0:
        raise EmptyInput("cannot normalise an empty score vector")
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros_like(x)
    out = (x - lo) / (hi - lo)
    return np.clip(out, 0.0, 1.0)


def lkl_strength(con_norm, pr_norm):
    """Low-key leader strength ``con_norm - pr_norm`` per node."""
    if isinstance(con_norm, Mapping) or isinstance(pr_norm, Mapping):
        if not (isinstance(con_norm, Mapping) and isinstance(pr_norm, Mapping)):
            raise KeyMismatch("both arguments must be mappings or both arrays")
        if con_norm.keys() != pr_norm.keys():
            raise KeyMismatch("normalised score maps have different keys")
        return {k: con_norm[k] - pr_norm[k] for k in con_norm}
    a = np.asarray(con_norm, dtype=float)
    b = np.asarray(pr_norm, dtype=float)
    if a.shape != b.shape:
        raise KeyMismatch(f"score vectors differ in shape: {a.shape} vs {b.shape}")
    return a - b


def _classify(e: float, th: LeaderThresholds) -> LeaderClass:
    if e > th.c:
        return LeaderClass.LOW_KEY
    if e < th.C:
        return LeaderClass.HIGHLY_EXPOSED
    return LeaderClass.NEITHER


def classify_leaders(eps, th: LeaderThresholds = LeaderThresholds()):
    """Leader class per node.

    Every node above ``c`` is a low-key leader and every node below ``C`` is
    highly exposed; there is no restriction to the single extreme node.
    """
    if isinstance(eps, Mapping):
        return {k: _classify(v, th) for k, v in eps.items()}
    return [_classify(float(e), th) for e in np.asarray(eps, dtype=float)]


# ---------------------------------------------------------------------------
# reports

REPORT_FIELDS = ("period", "country", "con", "pagerank", "con_norm", "pr_norm", "epsilon", "class")


@dataclass(frozen=True)
class CentralityReport:
    """Per-node centralities of one snapshot.  Arrays are indexed by node id."""

    period: str
    labels: tuple[str, ...]
    con: np.ndarray = field(repr=False)
    pagerank: np.ndarray = field(repr=False)
    con_norm: np.ndarray = field(repr=False)
    pr_norm: np.ndarray = field(repr=False)
    epsilon: np.ndarray = field(repr=False)
    leader_class: tuple[LeaderClass, ...] = field(repr=False)
    converged: bool = True

    def __len__(self):
        return len(self.labels)

    def rows(self) -> list[dict]:
        return [
            {
                "period": self.period,
                "country": lab,
                "con": float(self.con[i]),
                "pagerank": float(self.pagerank[i]),
                "con_norm": float(self.con_norm[i]),
                "pr_norm": float(self.pr_norm[i]),
                "epsilon": float(self.epsilon[i]),
                "class": self.leader_class[i].value,
            }
            for i, lab in enumerate(self.labels)
        ]

    def leaders(self) -> list[tuple[str, LeaderClass, float]]:
        return [
            (lab, cls, float(self.epsilon[i]))
            for i, (lab, cls) in enumerate(zip(self.labels, self.leader_class))
            if cls is not LeaderClass.NEITHER
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_FIELDS)
        for r in self.rows():
            writer.writerow([_fmt(r[f]) for f in REPORT_FIELDS])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"period": self.period, "converged": self.converged, "nodes": self.rows()},
            indent=2,
        )

    def __eq__(self, other):
        if not isinstance(other, CentralityReport):
            return NotImplemented
        return (
            self.period == other.period
            and self.labels == other.labels
            and self.leader_class == other.leader_class
            and self.converged == other.converged
            and all(
                np.array_equal(getattr(self, f), getattr(other, f))
                for f in ("con", "pagerank", "con_norm", "pr_norm", "epsilon")
            )
        )


def _fmt(x):
    return repr(x) if isinstance(x, float) else x


def analyze_snapshot(
    g: WeightedDigraph,
    con_cfg: ConConfig = ConConfig(),
    pr_cfg: PageRankConfig = PageRankConfig(),
    th: LeaderThresholds = LeaderThresholds(),
    period: str = "",
) -> CentralityReport:
    """CON, reversed PageRank, normalised scores, epsilon and classes for ``g``."""
    if g.n == 0:
        empty = np.zeros(0)
        return CentralityReport(period, (), empty, empty, empty, empty, empty, ())
    con = con_scores(g, con_cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        pr, converged = pagerank_reversed(g, pr_cfg, return_converged=True)
    if not converged:
        warnings.warn(f"PageRank did not converge for snapshot {period!r}", ConvergenceWarning, stacklevel=2)
    con_norm = unity_normalize(con)
    pr_norm = unity_normalize(pr)
    eps = lkl_strength(con_norm, pr_norm)
    classes = tuple(classify_leaders(eps, th))
    return CentralityReport(period, g.labels, con, pr, con_norm, pr_norm, eps, classes, converged)


def _analyze_item(args):
    period, g, con_cfg, pr_cfg, th = args
    return analyze_snapshot(g, con_cfg, pr_cfg, th, period=period)


def analyze_series(
    series: SnapshotSeries,
    con_cfg: ConConfig = ConConfig(),
    pr_cfg: PageRankConfig = PageRankConfig(),
    th: LeaderThresholds = LeaderThresholds(),
    workers: int = 1,
) -> list[CentralityReport]:
    """One report per snapshot, in period order.

    With ``workers > 1`` snapshots are analysed in a process pool; results
    are identical to the serial run.
    """
    items = [(p, g, con_cfg, pr_cfg, th) for p, g in series]
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_analyze_item, items))
    return [_analyze_item(it) for it in items]


def epsilon_timeseries(reports: Sequence[CentralityReport]) -> dict[str, list[dict]]:
    """Per-country rows across all periods, ready for plotting."""
    out: dict[str, list[dict]] = {}
    for rep in reports:
        for row in rep.rows():
            out.setdefault(row["country"], []).append(row)
    return out


def leader_events(reports: Sequence[CentralityReport]) -> list[tuple[str, str, LeaderClass, float]]:
    """``(period, country, class, epsilon)`` for every classified leader."""
    return [(rep.period, lab, cls, eps) for rep in reports for lab, cls, eps in rep.leaders()]
