"""Lazily built policy tries and expected-cost evaluation."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import PolicyIncompleteError
from .model import AlgoState, Instance, advance_state, root_state

Selector = Callable[[AlgoState, Instance], int]


@dataclass
class TraceResult:
    scenario: int
    path: tuple
    cover_time: float | None
    covered: bool


@dataclass(eq=False)
class TrieNode:
    history: tuple
    alive: np.ndarray
    cost: float
    element: int | None = None
    children: dict = field(default_factory=dict)
    state: AlgoState | None = None

    @property
    def is_leaf(self):
        return self.element is None

    @property
    def depth(self):
        return len(self.history)


class PolicyTrie:
    """Decision tree keyed by feedback history.

    Only nodes reached by some scenario are built.  ``get_or_select`` makes
    the per-node element choice happen once even if several threads
    expand the same node.
    """

    def __init__(self, inst: Instance):
        self.inst = inst
        self.nodes = {}
        self.traces = {}
        self._lock = threading.Lock()

    @property
    def root(self):
        return self.nodes[()]

    def node(self, history):
        return self.nodes[tuple(history)]

    def get_or_select(self, node: TrieNode, choose: Callable[[], int]) -> int:
        with self._lock:
            if node.element is None:
                node.element = int(choose())
            return node.element

    def __iter__(self):
        return iter(self.nodes.values())

    def __len__(self):
        return len(self.nodes)

    def trace(self, i):
        return self.traces[i]

    def expected_cost(self) -> float:
        p = self.inst.probs
        return float(sum(p[i] * t.cover_time for i, t in self.traces.items() if t.covered))

    def uncovered(self):
        return [i for i, t in self.traces.items() if not t.covered]


def simulate(inst: Instance, selector: Selector, keep_states: bool = False) -> PolicyTrie:
    """Run ``selector`` on every scenario at once, sharing common prefixes.

    Scenarios are pushed down the trie together; a node's element is
    chosen once for all scenarios that reach it.  Nodes whose alive set
    carries zero probability are left unexpanded.
    """
    trie = PolicyTrie(inst)
    root = root_state(inst)
    for i in root.newly_covered:
        trie.traces[int(i)] = TraceResult(int(i), (), 0.0, True)
    stack = [root]
    probs = inst.probs
    n = inst.n_elements
    chain = getattr(selector, "chain", None)
    while stack:
        state = stack.pop()
        if chain is not None and len(state.alive) == 1 and probs[state.alive].sum() > 0:
            seq = chain(state, inst)
            if seq is not None:
                _follow_chain(trie, state, seq, inst)
                continue
        node = TrieNode(state.history, state.alive, state.cost,
                        state=state if keep_states else None)
        trie.nodes[state.history] = node
        if probs[state.alive].sum() <= 0:
            for i in state.alive:
                trie.traces[int(i)] = TraceResult(int(i), state.displayed, None, False)
            continue
        if len(state.displayed) == n:
            raise PolicyIncompleteError(
                f"all elements displayed but scenarios {state.alive.tolist()} are uncovered")
        e = trie.get_or_select(node, lambda: selector(state, inst))
        if not 0 <= e < n or state.displayed_mask[e]:
            raise PolicyIncompleteError(f"selector returned invalid or repeated element {e}")
        children = advance_state(state, e, inst)
        for g, child in sorted(children.items(), reverse=True):
            node.children[g] = child.history
            for i in child.newly_covered:
                trie.traces[int(i)] = TraceResult(int(i), child.displayed, child.cost, True)
            if len(child.alive):
                stack.append(child)
            else:
                trie.nodes[child.history] = TrieNode(child.history, child.alive, child.cost,
                                                     state=child if keep_states else None)
    return trie


def _follow_chain(trie, state, seq, inst):
    """Record the straight path of a single alive scenario without re-scoring.

    Selectors may offer ``chain(state, inst)`` returning the elements they
    would pick one by one until the lone alive scenario is covered.
    """
    i = int(state.alive[0])
    history, cost = state.history, state.cost
    shown = state.displayed_mask.copy()
    path = list(state.displayed)
    for e in seq:
        e = int(e)
        if not 0 <= e < inst.n_elements or shown[e]:
            raise PolicyIncompleteError(f"chain returned invalid or repeated element {e}")
        trie.nodes[history] = TrieNode(history, state.alive, cost, element=e,
                                       children={int(inst.feedback[i, e]): None})
        shown[e] = True
        path.append(e)
        child = history + ((e, int(inst.feedback[i, e])),)
        trie.nodes[history].children = {child[-1][1]: child}
        history, cost = child, cost + float(inst.costs[e])
    trie.nodes[history] = TrieNode(history, state.alive[:0], cost)
    fam = inst.family
    if fam.residual_all(path)[i] > fam.cover_tol:
        raise PolicyIncompleteError(f"chain for scenario {i} stops before coverage")
    trie.traces[i] = TraceResult(i, tuple(path), cost, True)


def ranking_cover_times(order, inst: Instance) -> np.ndarray:
    """Cover time of each scenario when ``order`` is displayed ignoring feedback.

    Scenarios never covered by the full order get ``inf``.
    """
    order = [int(e) for e in order]
    cum = np.concatenate([[0.0], np.cumsum(inst.costs[order])])
    fam = inst.family
    if hasattr(fam, "cover_positions") and len(order) == inst.n_elements:
        return cum[fam.cover_positions(order) + 1]
    out = np.full(inst.m_scenarios, np.inf)
    res = fam.residual_all(())
    out[res <= fam.cover_tol] = 0.0
    for k in range(len(order)):
        res = fam.residual_all(order[: k + 1])
        newly = (res <= fam.cover_tol) & np.isinf(out)
        out[newly] = cum[k + 1]
    return out


def expected_cost(policy, inst: Instance) -> float:
    """Expected cover time of a policy.

    ``policy`` may be a :class:`PolicyTrie`, a selector callable
    ``(state, inst) -> element``, or a fixed element ordering (evaluated
    without feedback).
    """
    if isinstance(policy, PolicyTrie):
        trie = policy
    elif callable(policy):
        trie = simulate(inst, policy)
    else:
        times = ranking_cover_times(policy, inst)
        pos = inst.probs > 0
        if np.isinf(times[pos]).any():
            raise PolicyIncompleteError("ranking leaves positive-probability scenarios uncovered")
        return float(inst.probs[pos] @ times[pos])
    missing = [i for i in trie.uncovered() if inst.probs[i] > 0]
    if missing:
        raise PolicyIncompleteError(f"scenarios {missing} are never covered")
    return trie.expected_cost()
