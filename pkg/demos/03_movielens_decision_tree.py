"""Identify a MovieLens user by asking "did you like this movie?".

Users are hypotheses, movies are yes/no tests.  With t=1 the user must be
pinned down exactly; with larger t the search may stop once at most t
candidates remain.  Then the same with power-law user probabilities.

Needs data/ml-100k/u.data (see scripts/fetch_ml100k.py).
"""

import argparse

from adsubrank.bench import ExperimentConfig, cmd_run

ap = argparse.ArgumentParser()
ap.add_argument("--ml-runs", type=int, default=5)
args = ap.parse_args()
algs = ["adsub", "odt-greedy", "ml:10"]

for rule in ["1", "[1,5)", "[5,10)"]:
    rep = cmd_run(ExperimentConfig(source="ml100k", app="odt", threshold_rule=rule,
                                   distribution="uniform", algorithms=algs, ml_runs=args.ml_runs))
    print(f"t={rule:7s}", "  ".join(f"{a}={rep.cost(a):.3f}" for a in algs))

for alpha in (2, 3):
    rep = cmd_run(ExperimentConfig(source="ml100k", app="odt", distribution=f"powerlaw:{alpha}",
                                   seeds=[1, 2, 3], algorithms=algs, ml_runs=args.ml_runs))
    print()
    print(rep.table())
