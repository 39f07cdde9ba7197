"""
Cross-check the fast routines against slow reference versions.

Every suite draws small random graphs and compares results: CON against a
dense pairwise sum, PageRank against the full Google matrix, cycle search
against unpruned DFS and modularity against the dense double sum.  The
same check is available as ``banknet oracle-check``.

Run with ``python3 demos/oracle_checks.py``.
"""

import numpy as np

from banknet import louvain, modularity
from banknet.oracles import exhaustive_max_modularity, random_digraph, run_oracle_suites

failures = run_oracle_suites(iterations=50, seed=0)
print("oracle suites:", "all passed" if not failures else failures)

# Louvain is a heuristic; on tiny graphs the optimum can be found by brute force.
for seed in range(5):
    g = random_digraph(np.random.default_rng(seed), 9, 0.25)
    if g.edge_count == 0:
        continue
    best, _ = exhaustive_max_modularity(g)
    q = modularity(g, louvain(g))
    print(f"seed {seed}: louvain Q = {q:.6f}, optimum = {best:.6f}, gap = {best - q:.2e}")
