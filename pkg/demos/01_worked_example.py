"""A two-user ranking problem worked by hand, then by the library.

User 0 wants both results a and b; user 1 is happy with b alone.  Both
are equally likely.  We print each candidate's score at the root, the
element the greedy policy shows first, and the full decision tree.
"""

from adsubrank import Instance, build_policy, root_state, score_candidates
from adsubrank.baselines import exact_opt_oracle

names = "ab"
inst = Instance.binary([{0, 1}, {1}], 2, [0.5, 0.5], app="mir", payload={"K": [2, 1]})

print("root scores")
for c in score_candidates(root_state(inst), inst):
    print(f"  {names[c.element]}: split mass {c.split_mass:.2f} + gain {c.gain_mass:.2f}"
          f" = {c.score:.2f}")

trie = build_policy(inst)
print("\ndecision tree (history -> element shown)")
for node in sorted(trie, key=lambda nd: nd.depth):
    if node.element is None:
        continue
    hist = " ".join(f"{names[e]}={inst.symbols[g]}" for e, g in node.history) or "(start)"
    print(f"  {hist:12s} -> show {names[node.element]}")

print("\ncover times:", {i: t.cover_time for i, t in trie.traces.items()})
print("expected cost:", trie.expected_cost())
print("optimal cost: ", float(exact_opt_oracle(inst).cost))
