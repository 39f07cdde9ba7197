"""Network analytics for banking data: adversarial centralities and AML screening."""

from .errors import *  # noqa: F401,F403
from .graph import SnapshotSeries, WeightedDigraph, build_graph, induce_by_edges, induce_by_nodes, reverse
from .ingest import (
    BisTable,
    TransactionEdge,
    bis_to_graph,
    load_snapshot_series,
    parse_bis_csv,
    parse_transactions,
)
from .centrality import (
    CentralityReport,
    Combiner,
    ConConfig,
    LeaderClass,
    LeaderThresholds,
    PageRankConfig,
    analyze_series,
    analyze_snapshot,
    classify_leaders,
    con_node,
    con_pair,
    con_scores,
    con_set,
    lkl_strength,
    pagerank_reversed,
    unity_normalize,
)
from .community import LouvainConfig, Partition, filter_min_order, louvain, modularity, symmetrize
from .aml import (
    AmlConfig,
    AmlReport,
    CycleRecord,
    PathRecord,
    cycle_communities,
    enumerate_cycles,
    enumerate_paths,
    filter_amount,
    filter_period,
    r_value,
    run_aml_pipeline,
)

__version__ = "0.1.0"
