"""
Walk through the centrality side on a small cross-border lending table.

Each row is a debtor country, each column a lending country, amounts in
millions of USD.  The script builds the exposure graph, computes the
common-out-neighbour score (CON) and PageRank on the reversed graph, and
classifies leaders by the difference of the normalised scores.

Run with ``python3 demos/bis_centrality.py``.
"""

from banknet import ConConfig, analyze_snapshot, bis_to_graph, parse_bis_csv

TABLE = """Country,Austria,Belgium,Canada,Denmark
Austria,-,"3,179","1,467",179
Belgium,152,-,"2,080","1,291"
Canada,300,"1,845",-,123
Denmark,349,"3,194",733,-
France,"1,665","43,141","4,742",827
USA,"3,355","54,947","186,122","3,364"
UK,"4,191","62,365","34,328","9,781"
"""

table = parse_bis_csv(TABLE, source="extract")
g = bis_to_graph(table)
print(f"{g.n} countries, {g.edge_count} exposures, total {g.total_weight():,.0f}")

# An edge u -> v means u owes v; the debtor sending the most money out:
out = g.out_weight()
print("largest debtor:", g.labels[int(out.argmax())], f"{out.max():,.0f}")

# CON rewards debtors who share creditors with many others.  The combiner
# decides how two parallel exposures to the same creditor are merged.
for comb in ("min", "product", "sum"):
    rep = analyze_snapshot(g, ConConfig(comb), period="extract")
    print(f"\ncombiner={comb}")
    print(f"{'country':8s} {'con_norm':>9s} {'pr_norm':>8s} {'epsilon':>8s}  class")
    for row in rep.rows():
        print(f"{row['country']:8s} {row['con_norm']:9.4f} {row['pr_norm']:8.4f} {row['epsilon']:8.4f}  {row['class']}")
