"""Comparison policies and the exact optimum for small instances."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exceptions import ConstructionError, PolicyIncompleteError, SizeError
from .families import YES
from .model import AlgoState, Instance
from .policy import argmax_lowest, split_stats, useful_elements

MAX_OPT_ELEMENTS = 12
MAX_OPT_SCENARIOS = 8


_M64 = 0xFFFFFFFFFFFFFFFF


def history_uniforms(seed, history, k=2):
    """``k`` uniforms in [0, 1) determined by ``(seed, history)`` (splitmix64)."""
    # int/tuple hashing is not salted, so the key is stable across runs
    h = hash((int(seed), history)) & _M64
    out = []
    for _ in range(k):
        h = (h + 0x9E3779B97F4A7C15) & _M64
        z = ((h ^ (h >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        z ^= z >> 31
        out.append((z >> 11) * 2.0 ** -53)
    return out


# -- splitting greedy -------------------------------------------------------

def odt_greedy_select(state: AlgoState, inst: Instance) -> int:
    """Classic splitting greedy: maximize the lighter side's mass per unit cost.

    The split is measured on the alive set.  When no test splits it (a
    generalized-ODT node whose only alive hypothesis still has too many
    compatible companions) the compatible set is split instead, and as a
    last resort the lowest-id element that raises an alive function is used.
    """
    cands = np.flatnonzero(~state.displayed_mask)
    if len(cands) == 0:
        raise PolicyIncompleteError("no elements left")
    _, mass = split_stats(state, inst, cands)
    score = mass / inst.costs[cands]
    if score.max() > 0:
        return argmax_lowest(cands, score)
    C = np.flatnonzero(state.compatible)
    if len(C) > len(state.alive):
        wide = AlgoState(state.displayed, state.displayed_mask, state.compatible, C,
                         np.ones(len(C)))
        _, mass = split_stats(wide, inst, cands)
        score = mass / inst.costs[cands]
        if score.max() > 0:
            return argmax_lowest(cands, score)
    useful = useful_elements(state, inst)
    if len(useful) == 0:
        raise PolicyIncompleteError("no element makes progress")
    return int(useful[0])


# -- clustering baseline ----------------------------------------------------

@dataclass
class ClusterModel:
    K: int
    assignment: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        self.assignment = np.asarray(self.assignment, dtype=np.int64)
        if self.weights is None:
            self.weights = np.ones(self.K)
        self.weights = np.asarray(self.weights, dtype=float)


def kmeans_cluster(inst: Instance, K: int, seed=0) -> ClusterModel:
    """k-means++ / Lloyd over the elements' scenario-incidence columns."""
    from sklearn.cluster import KMeans

    n = inst.n_elements
    if not 1 <= K <= n:
        raise ConstructionError(f"K={K} outside [1, {n}]")
    X = inst.membership.T.astype(float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        km = KMeans(n_clusters=K, init="k-means++", n_init=1, max_iter=100,
                    random_state=int(seed) & 0xFFFFFFFF)
        labels = km.fit_predict(X)
    return ClusterModel(K, labels)


def ml_select(state: AlgoState, model: ClusterModel, u, candidates=None) -> int:
    """Sample a cluster by weight, then an element uniformly inside it.

    Only clusters holding an undisplayed (and, if given, candidate)
    element take part in the draw.  ``u`` is a pair of uniforms driving
    the two draws.
    """
    ok = ~state.displayed_mask
    if candidates is not None:
        allowed = np.zeros_like(ok)
        allowed[np.asarray(candidates, dtype=np.int64)] = True
        ok &= allowed
    if not ok.any():
        raise PolicyIncompleteError("every element has been displayed")
    return _draw(ok, model.assignment, model.weights, u)


def _draw(ok, assignment, weights, u):
    live = np.bincount(assignment[ok], minlength=len(weights)) > 0
    cum = np.cumsum(np.where(live, weights, 0.0))
    c = min(int(np.searchsorted(cum, u[0] * cum[-1], side="right")), len(cum) - 1)
    pool = np.flatnonzero(ok & (assignment == c))
    return int(pool[int(u[1] * len(pool))])


def ml_update(model: ClusterModel, e: int, outcome: bool) -> ClusterModel:
    w = model.weights.copy()
    c = model.assignment[e]
    w[c] *= 2.0 if outcome else 0.5
    return ClusterModel(model.K, model.assignment, w)


class MLPolicy:
    """Multiplicative-weights cluster sampler as a deterministic selector.

    Weights are replayed from the feedback history and the sampling
    uniforms are keyed by ``(seed, history)``, so for a fixed seed the
    policy is a decision tree and shares trie nodes across scenarios.
    Sampling is restricted to useful elements (those that split the alive
    set or raise an alive scenario's function).
    """

    def __init__(self, model: ClusterModel, seed=0):
        self.model = model
        self.seed = seed

    def weights_after(self, history):
        """Cluster weights after replaying ``history`` through :func:`ml_update`."""
        if not history:
            return self.model.weights
        hist = np.asarray(history, dtype=np.int64)
        step = np.where(hist[:, 1] == YES, 1.0, -1.0)
        exp = np.bincount(self.model.assignment[hist[:, 0]], weights=step, minlength=self.model.K)
        return self.model.weights * np.exp2(exp)

    def __call__(self, state, inst):
        model = ClusterModel(self.model.K, self.model.assignment, self.weights_after(state.history))
        u = history_uniforms(self.seed, state.history)
        return ml_select(state, model, u, candidates=useful_elements(state, inst))

    def chain(self, state, inst):
        """Remaining picks for a lone alive MIR scenario (same draws as ``__call__``)."""
        if inst.app != "mir":
            return None
        i = int(state.alive[0])
        liked = inst.membership[i]
        need = int(inst.family.K[i]) - int(liked[list(state.displayed)].sum())
        w = self.weights_after(state.history).copy()
        shown = state.displayed_mask.copy()
        hist = list(state.history)
        assign = self.model.assignment
        seq = []
        for _ in range(need):
            e = _draw(liked & ~shown, assign, w, history_uniforms(self.seed, tuple(hist)))
            seq.append(e)
            shown[e] = True
            w[assign[e]] *= 2.0
            hist.append((e, YES))
        return seq


class RandomPolicy:
    """Uniform choice among useful elements, keyed by ``(seed, history)``."""

    def __init__(self, seed=0):
        self.seed = seed

    def __call__(self, state, inst):
        useful = useful_elements(state, inst)
        if len(useful) == 0:
            raise PolicyIncompleteError("no element makes progress")
        u = history_uniforms(self.seed, state.history, 1)[0]
        return int(useful[int(u * len(useful))])


# -- static ranking ---------------------------------------------------------

def static_rank(inst: Instance) -> np.ndarray:
    """Feedback-free greedy permutation.

    Each step adds the element maximizing
    ``sum_i p_i (f_i(E+e) - f_i(E)) / (1 - f_i(E))`` over still-uncovered
    scenarios, per unit cost.  Once everything is covered the remaining
    elements follow in id order.
    """
    n, m = inst.n_elements, inst.m_scenarios
    fam = inst.family
    p = inst.probs
    order = []
    avail = np.ones(n, dtype=bool)
    if inst.app == "mir":
        memb = inst.membership.astype(float)
        K = fam.K
        cnt = np.zeros(m)
        for _ in range(n):
            need = K - cnt
            w = np.where(need > 0, p / np.maximum(need, 1), 0.0)
            if not w.any():
                break
            score = (w @ memb) / inst.costs
            score[~avail] = -np.inf
            e = argmax_lowest(np.arange(n), score)
            if score[e] <= 0:
                break
            order.append(e)
            avail[e] = False
            cnt += memb[:, e]
    else:
        res = fam.residual_all(())
        for _ in range(n):
            alive = res > fam.cover_tol
            if not alive.any():
                break
            cands = np.flatnonzero(avail)
            after = np.stack([fam.residual_all(order + [int(e)]) for e in cands], axis=1)
            gain = (p[alive] / res[alive]) @ (res[alive][:, None] - after[alive])
            score = gain / inst.costs[cands]
            if score.max() <= 0:
                break
            e = argmax_lowest(cands, score)
            order.append(e)
            avail[e] = False
            res = fam.residual_all(order)
    order += [int(e) for e in np.flatnonzero(avail)]
    return np.asarray(order, dtype=np.int64)


def adstatic_select(state: AlgoState, rank, inst: Instance) -> int:
    """First ranked element still relevant to some alive scenario."""
    rank = np.asarray(rank)
    pos = np.empty(inst.n_elements, dtype=np.int64)
    pos[rank] = np.arange(len(rank))
    return _adstatic(state, pos, inst)


def _adstatic(state, pos, inst):
    open_ = ~state.displayed_mask
    if not open_.any():
        raise PolicyIncompleteError("every element has been displayed")
    relevant = open_ & inst.membership[state.alive].any(axis=0)
    pool = relevant if relevant.any() else open_
    idx = np.flatnonzero(pool)
    return int(idx[np.argmin(pos[idx])])


class AdStaticPolicy:
    def __init__(self, rank, inst):
        self.rank = np.asarray(rank)
        self.pos = np.empty(inst.n_elements, dtype=np.int64)
        self.pos[self.rank] = np.arange(len(self.rank))

    def __call__(self, state, inst):
        return _adstatic(state, self.pos, inst)


class StaticPolicy:
    """Ranked order ignoring feedback (as a selector)."""

    def __init__(self, rank):
        self.rank = [int(e) for e in rank]

    def __call__(self, state, inst):
        return self.rank[len(state.displayed)]


# -- exact optimum ----------------------------------------------------------

@dataclass
class OptResult:
    cost: Fraction
    choice: dict

    def selector(self, state, inst):
        key = (_mask(state.displayed), _mask(np.flatnonzero(state.compatible)))
        return self.choice[key]


def _mask(ids):
    out = 0
    for j in ids:
        out |= 1 << int(j)
    return out


def exact_opt_oracle(inst: Instance) -> OptResult:
    """Optimal expected cost by dynamic programming over ``(E, compatible set)``.

    Arithmetic is exact.  Elements that neither split the alive set nor
    raise any alive scenario's function are skipped: displaying them only
    adds cost.
    """
    n, m = inst.n_elements, inst.m_scenarios
    if n > MAX_OPT_ELEMENTS or m > MAX_OPT_SCENARIOS:
        raise SizeError(f"exact optimum limited to n <= {MAX_OPT_ELEMENTS}, m <= {MAX_OPT_SCENARIOS}")
    p = inst.exact_probabilities()
    c = [Fraction(float(x)) for x in inst.costs]
    oracles = inst.oracles
    table = inst.feedback
    fvals = {}

    def f(i, E):
        key = (i, E)
        if key not in fvals:
            v = oracles[i]([e for e in range(n) if E >> e & 1])
            fvals[key] = v
        return fvals[key]

    def covered(i, E):
        v = f(i, E)
        return v == 1 if isinstance(v, Fraction) else v >= 1 - 1e-9

    memo = {}
    choice = {}

    def value(E, C):
        key = (E, C)
        if key in memo:
            return memo[key]
        H = [i for i in range(m) if C >> i & 1 and not covered(i, E)]
        mass = sum((p[i] for i in H), Fraction(0))
        if mass == 0:
            memo[key] = Fraction(0)
            return memo[key]
        best, arg = None, None
        for e in range(n):
            if E >> e & 1:
                continue
            E2 = E | 1 << e
            groups = {}
            for j in range(m):
                if C >> j & 1:
                    groups.setdefault(int(table[j, e]), []).append(j)
            splits = len({int(table[i, e]) for i in H}) > 1
            if not splits and all(f(i, E2) == f(i, E) for i in H):
                continue
            total = c[e] * mass
            for members in groups.values():
                if best is not None and total >= best:
                    break
                if any(i in H for i in members):
                    total += value(E2, _mask(members))
            if best is None or total < best:
                best, arg = total, e
        if best is None:
            raise PolicyIncompleteError("uncoverable scenarios in exact search")
        memo[key] = best
        choice[key] = arg
        return best

    full = (1 << m) - 1
    return OptResult(value(0, full), choice)
