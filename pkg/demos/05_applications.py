"""The same greedy policy on every supported problem type.

For each application we build a small random instance, check that its
scenario functions are monotone submodular, and compare the greedy
policy's expected cost with the exact optimum.
"""

import numpy as np

from adsubrank import build_policy, check_submodular, epsilon_of, exact_opt_oracle, random_instance
from adsubrank.functions import ranking_function

rng = np.random.default_rng(0)
print(f"{'app':8s}{'eps':>8s}{'submod':>8s}{'greedy':>9s}{'opt':>9s}")
for app in ["mir", "odt", "godt", "ecd", "drd"]:
    inst = random_instance(rng, 6, 5, app)
    ok = all(check_submodular(inst.oracle(i), exhaustive=True, ground=range(6)).ok
             for i in range(inst.m_scenarios))
    greedy = build_policy(inst).expected_cost()
    opt = float(exact_opt_oracle(inst).cost)
    print(f"{app:8s}{str(epsilon_of(inst)):>8s}{str(ok):>8s}{greedy:9.3f}{opt:9.3f}")

# deterministic ranking: every scenario sees every element, feedback is silent
cover = [{0, 1}, {1, 2}, {3}, {0, 3}]
fns = [lambda S, t=t: len(t & set().union(*[cover[e] for e in S])) / len(t)
       for t in ({0, 1, 2}, {3}, {0, 3})]
inst = ranking_function((3, 1, 1), fns, 4)
trie = build_policy(inst)
print("\nranking order:", trie.traces[0].path, " expected cost:", round(trie.expected_cost(), 3))
