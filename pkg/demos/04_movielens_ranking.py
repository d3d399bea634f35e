"""Rank movies for a user of unknown taste.

Each user wants K_i of the movies they liked; feedback on a shown movie
tells us whether the user liked it.  We compare the adaptive policy with a
fixed ranking (static), the fixed ranking that skips movies no remaining
user likes (adstatic) and the clustering baseline.

Needs data/ml-100k/u.data (see scripts/fetch_ml100k.py).  The ml column
takes a few seconds per seed and row.
"""

import argparse

from adsubrank.bench import ExperimentConfig, cmd_run

ap = argparse.ArgumentParser()
ap.add_argument("--ml-runs", type=int, default=3)
ap.add_argument("--rules", nargs="+", default=["full", "[S/2,S)", "[S/4,S)", "[1,S/2)", "[1,S/4)"])
args = ap.parse_args()
algs = ["adsub", "static", "adstatic", "ml:10"]

print(f"{'K_i':10s}" + "".join(f"{a:>10s}" for a in algs))
for rule in args.rules:
    rep = cmd_run(ExperimentConfig(source="ml100k", app="mir", threshold_rule=rule,
                                   distribution="uniform", algorithms=algs, ml_runs=args.ml_runs))
    print(f"{rule:10s}" + "".join(f"{rep.cost(a):10.2f}" for a in algs))
