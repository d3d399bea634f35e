"""SYN-K: an instance on which the classic splitting greedy for decision
trees pays linearly in K while the adaptive submodular policy stays flat.

Also runs the clustering baseline (10 clusters) averaged over a few seeds.
"""

import argparse

import numpy as np

from adsubrank import gen_syn, build_policy, expected_cost, odt_greedy_select
from adsubrank.baselines import MLPolicy, kmeans_cluster

ap = argparse.ArgumentParser()
ap.add_argument("--ks", type=int, nargs="+", default=[50, 100, 150, 200, 250])
ap.add_argument("--ml-runs", type=int, default=5)
args = ap.parse_args()

print(f"{'K':>5} {'adsub':>8} {'greedy':>8} {'ml':>8}")
for k in args.ks:
    inst = gen_syn(k)
    ad = build_policy(inst).expected_cost()
    gr = expected_cost(odt_greedy_select, inst)
    ml = np.mean([expected_cost(MLPolicy(kmeans_cluster(inst, 10, s), s), inst)
                  for s in range(args.ml_runs)])
    print(f"{k:5d} {ad:8.2f} {gr:8.2f} {ml:8.2f}")
