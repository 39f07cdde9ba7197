import json
import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banknet import (
    AmlConfig,
    LouvainConfig,
    TransactionEdge,
    build_graph,
    cycle_communities,
    enumerate_cycles,
    enumerate_paths,
    filter_amount,
    filter_period,
    r_value,
    run_aml_pipeline,
)
from banknet.aml import SUMMARY_FIELDS, CommunityResult, scan_community
from banknet.oracles import naive_cycles, random_digraph

E = TransactionEdge


def chain(n):
    return build_graph([(f"p{i}", f"p{i + 1}", 1) for i in range(n - 1)], labels=[f"p{i}" for i in range(n)])


def ring(n):
    return build_graph([(f"r{i}", f"r{(i + 1) % n}", 1) for i in range(n)], labels=[f"r{i}" for i in range(n)])


# -- filters -----------------------------------------------------------------


def test_filter_amount_boundaries():
    edges = [E("a", "b", 1, 9999, 2010, 2010), E("b", "c", 1, 10000, 2010, 2010), E("c", "a", 3, 25000, 2010, 2010)]
    kept = filter_amount(edges, 10_000)
    assert [(e.source, e.target) for e in kept] == [("a", "b"), ("c", "a")]


def test_filter_period_boundaries():
    edges = [E("a", "b", 1, 1, 2010, 2010), E("b", "c", 1, 1, 2010, 2011), E("c", "d", 1, 1, 2010, 2013)]
    assert [e.target for e in filter_period(edges, 1)] == ["b"]
    assert [e.target for e in filter_period(edges, 2)] == ["b", "c"]
    with pytest.raises(ValueError):
        filter_period(edges, 0)


edge_lists = st.lists(
    st.builds(
        E,
        st.sampled_from("abcdef"),
        st.sampled_from("ghijk"),
        st.integers(1, 9),
        st.floats(0, 1e5, allow_nan=False),
        st.integers(2000, 2005),
        st.integers(2005, 2010),
    ),
    max_size=30,
)


@settings(max_examples=100)
@given(edge_lists, st.floats(0.5, 6), st.floats(1, 2e4))
def test_filters_commute_and_shrink(edges, t0, thr):
    a = filter_amount(filter_period(edges, t0), thr)
    b = filter_period(filter_amount(edges, thr), t0)
    assert a == b
    assert all(e.y2 - e.y1 < t0 and e.k / e.n < thr for e in a)
    assert len(a) <= len(edges)


# -- cycles ------------------------------------------------------------------


def test_cycles_dag_and_triangle():
    assert enumerate_cycles(chain(6)) == []
    g = ring(3)
    (c,) = enumerate_cycles(g)
    assert c.nodes == (0, 1, 2) and c.accounts == ("r0", "r1", "r2") and c.length == 3


def test_cycles_complete_k4():
    g = build_graph([(a, b, 1) for a, b in itertools.permutations("abcd", 2)])
    cycles = enumerate_cycles(g)
    # 8 directed triangles plus 6 Hamiltonian cycles
    assert len(cycles) == 14
    assert sorted(c.length for c in cycles) == [3] * 8 + [4] * 6


def test_cycles_length_cap_reported():
    g = ring(9)
    cycles, cut = enumerate_cycles(g, AmlConfig(max_cycle_len=8), return_truncated=True)
    assert cycles == [] and cut
    cycles, cut = enumerate_cycles(g, AmlConfig(max_cycle_len=9), return_truncated=True)
    assert len(cycles) == 1 and not cut


@pytest.mark.parametrize("seed", range(20))
def test_cycles_match_naive_and_networkx(seed):
    g = random_digraph(np.random.default_rng(seed), 8, 0.3)
    cfg = AmlConfig(min_cycle_len=2, max_cycle_len=8)
    got = [c.nodes for c in enumerate_cycles(g, cfg)]
    assert len(got) == len(set(got))
    assert set(got) == naive_cycles(g, 2, 8)
    ref = nx.DiGraph()
    ref.add_nodes_from(range(g.n))
    ref.add_edges_from((u, v) for u, v, _ in g.edges())
    assert len(got) == sum(1 for c in nx.simple_cycles(ref) if len(c) >= 2)
    for c in got:
        assert c[0] == min(c)
        for u, v in zip(c, c[1:] + c[:1]):
            assert g.has_edge(u, v)


# -- paths and R -------------------------------------------------------------


def test_paths_examples():
    (p,) = enumerate_paths(chain(5))
    assert (p.source, p.target, p.length) == ("p0", "p4", 4)
    assert enumerate_paths(chain(4)) == []
    # on a directed 6-ring every node reaches two others at distance 4 or 5
    assert len(enumerate_paths(ring(6))) == 12


@pytest.mark.parametrize("seed", range(5))
def test_paths_are_shortest(seed):
    g = random_digraph(np.random.default_rng(seed), 25, 0.07)
    ref = nx.DiGraph()
    ref.add_nodes_from(range(g.n))
    ref.add_edges_from((u, v) for u, v, _ in g.edges())
    dist = dict(nx.all_pairs_shortest_path_length(ref))
    got = enumerate_paths(g, 2, 5)
    expected = {(s, t) for s in dist for t, d in dist[s].items() if 2 <= d <= 5}
    assert {(g.index(p.source), g.index(p.target)) for p in got} == expected
    for p in got:
        assert p.length == dist[p.nodes[0]][p.nodes[-1]]
        assert all(g.has_edge(u, v) for u, v in zip(p.nodes, p.nodes[1:]))


def test_r_value_examples():
    assert r_value([], [1]) is None
    assert r_value([1, 2], [1, 2, 3]) == 1.0
    assert r_value([1, 2, 3, 4], [4, 9]) == 0.25
    assert r_value(range(7527), range(146)) == pytest.approx(0.0194, abs=5e-5)


def test_cycle_communities_selects_cyclic():
    res = [CommunityResult(i, 3, 0) for i in range(5)]
    for i in (1, 3):
        res[i] = scan_community(ring(4), community=i)
    assert [r.id for r in cycle_communities(res)] == [1, 3]


def test_scan_community_with_paths():
    g = build_graph([("a", "b", 1), ("b", "c", 1), ("c", "a", 1), ("c", "d", 1), ("d", "e", 1), ("e", "f", 1), ("f", "g", 1)])
    r = scan_community(g, AmlConfig(path_len_min=4, path_len_max=7), community=2)
    assert len(r.cycles) == 1 and r.cycle_nodes == {"a", "b", "c"}
    assert r.path_nodes == set("abcdefg")
    assert r.r_value == pytest.approx(3 / 7)


# -- pipeline ----------------------------------------------------------------


def planted_network(cycle_average=5000.0, n_comm=3, size=10, seed=0):
    """Dense above-threshold communities, plus a same-year 4-cycle in the first."""
    rng = np.random.default_rng(seed)
    edges = []
    for c in range(n_comm):
        nodes = [f"c{c}n{i}" for i in range(size)]
        for a, b in itertools.permutations(nodes, 2):
            if rng.random() < 0.5:
                edges.append(E(a, b, 2, 200_000.0, 2012, 2012))
    for c in range(n_comm - 1):
        edges.append(E(f"c{c}n0", f"c{c + 1}n0", 1, 100.0, 2012, 2012))
    cyc = ["c0n1", "c0n3", "c0n5", "c0n7"]
    existing = {(e.source, e.target) for e in edges}
    edges = [e for e in edges if (e.source, e.target) not in {(a, b) for a, b in zip(cyc, cyc[1:] + cyc[:1])}]
    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
        edges.append(E(a, b, 3, 3 * cycle_average, 2015, 2015))
    assert existing  # background present
    return edges, cyc


def test_pipeline_empty():
    rep = run_aml_pipeline([])
    assert rep.summary["n_nodes"] == 0 and rep.summary["n_cycles"] == 0
    assert rep.flagged_accounts == [] and rep.summary["global_r_value"] is None


def test_pipeline_planted_cycle():
    edges, cyc = planted_network()
    rep = run_aml_pipeline(edges)
    assert set(rep.flagged_accounts) == set(cyc) and len(rep.flagged_accounts) == 4
    assert rep.summary["n_cycles"] == 1 and rep.summary["cycle_length_counts"] == {"4": 1}
    assert rep.summary["n_communities"] == 3


def test_pipeline_threshold_is_strict():
    edges, _ = planted_network(cycle_average=10_000.0)
    assert run_aml_pipeline(edges).summary["n_cycles"] == 0
    edges, _ = planted_network(cycle_average=9_999.99)
    assert run_aml_pipeline(edges).summary["n_cycles"] == 1


def test_pipeline_deterministic_and_parallel_equal():
    edges, _ = planted_network(n_comm=6, seed=3)
    a = run_aml_pipeline(edges, LouvainConfig(seed=1))
    b = run_aml_pipeline(edges, LouvainConfig(seed=1))
    c = run_aml_pipeline(edges, LouvainConfig(seed=1), workers=3)
    assert a.to_json() == b.to_json() == c.to_json()
    assert a.flagged_csv() == c.flagged_csv() and a.r_values_csv() == c.r_values_csv()


def test_pipeline_report_schema():
    edges, cyc = planted_network()
    rep = run_aml_pipeline(edges)
    doc = json.loads(rep.to_json())
    assert list(doc) == ["summary", "communities", "flagged_accounts"]
    assert tuple(doc["summary"]) == SUMMARY_FIELDS
    assert set(doc["communities"][0]) == {
        "id", "size", "filtered_edges", "cycles", "cycle_cap_hit", "path_count",
        "path_multiplicity", "path_node_count", "overlap_count", "r_value",
    }
    lines = rep.flagged_csv().splitlines()
    assert lines[0] == "account,community_id" and len(lines) == 5
    assert rep.r_values_csv().splitlines()[0] == "community_id,r_value"


def test_aml_config_validation():
    with pytest.raises(ValueError):
        AmlConfig(min_cycle_len=5, max_cycle_len=4)
    with pytest.raises(ValueError):
        AmlConfig(amount_threshold=0)
