"""The adaptive greedy ranking policy.

At a node ``(E, H)`` each undisplayed element ``e`` is scored by

    (Pr(L_e(H)) + sum_{i in H} p_i * (f_i(E+e) - f_i(E)) / (1 - f_i(E))) / c_e

where ``L_e(H)`` is ``H`` minus the largest group of scenarios sharing a
feedback symbol on ``e``.  For yes/no feedback that is the smaller of the
yes and no groups (the no-group on a tie).  The element with the highest
score is displayed; ties go to the lowest element id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvariantError, UsageError
from .families import YES
from .model import AlgoState, Instance
from .trie import PolicyTrie, simulate

#: relative gap under which two scores are treated as tied
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class ScoredCandidate:
    element: int
    split_mass: float
    gain_mass: float
    score: float


def le_split(state: AlgoState, e: int, inst: Instance) -> np.ndarray:
    """Smaller side of the yes/no partition of the alive set (no-group on ties)."""
    if not inst.is_binary:
        raise UsageError("le_split needs a yes/no instance; use multiway_split")
    H = state.alive
    if state.displayed_mask[e]:
        return H[:0]
    yes = inst.membership[H, e]
    if yes.sum() < (~yes).sum():
        return H[yes]
    return H[~yes]


def multiway_split(state: AlgoState, e: int, inst: Instance) -> np.ndarray:
    """Alive scenarios outside the largest feedback group on ``e``.

    Among equally large groups the one with the smallest symbol id is
    the largest.
    """
    H = state.alive
    if len(H) == 0:
        return H
    sym = inst.feedback[H, e]
    counts = np.bincount(sym, minlength=inst.n_symbols)
    biggest = int(np.argmax(counts))
    return H[sym != biggest]


def split_stats(state: AlgoState, inst: Instance, cands: np.ndarray):
    """Per candidate: size of ``L_e(H)`` and its probability mass."""
    H = state.alive
    p = inst.probs[H]
    sub = inst.feedback[H][:, cands]
    if inst.n_symbols == 2:
        yes = sub == YES
        n_yes = yes.sum(axis=0)
        n_no = len(H) - n_yes
        yes_mass = p @ yes
        no_mass = p @ ~yes
        # yes is the symbol with the smaller id, so it is B_e on a tie
        small_is_no = n_yes >= n_no
        size = np.where(small_is_no, n_no, n_yes)
        mass = np.where(small_is_no, no_mass, yes_mass)
        return size, mass
    counts = np.stack([(sub == g).sum(axis=0) for g in range(inst.n_symbols)])
    masses = np.stack([p @ (sub == g) for g in range(inst.n_symbols)])
    biggest = counts.argmax(axis=0)
    idx = np.arange(len(cands))
    size = len(H) - counts[biggest, idx]
    mass = masses.sum(axis=0) - masses[biggest, idx]
    mass = np.where(size == 0, 0.0, mass)
    return size, mass


def _score_arrays(state: AlgoState, inst: Instance):
    if len(state.alive) == 0:
        raise UsageError("no alive scenarios to score")
    fam = inst.family
    if (state.residual <= fam.cover_tol).any():
        raise InvariantError("alive set contains a covered scenario")
    cands = np.flatnonzero(~state.displayed_mask)
    _, split_mass = split_stats(state, inst, cands)
    after = fam.residual_after(state, state.alive, cands)
    ratio = 1.0 - after / state.residual[:, None]
    gain_mass = inst.probs[state.alive] @ ratio
    score = (split_mass + gain_mass) / inst.costs[cands]
    return cands, split_mass, gain_mass, score


def score_candidates(state: AlgoState, inst: Instance) -> list:
    cands, split, gain, score = _score_arrays(state, inst)
    return [ScoredCandidate(int(e), float(s), float(g), float(v))
            for e, s, g, v in zip(cands, split, gain, score)]


def argmax_lowest(cands, score):
    """Highest score, lowest id among (near-)ties."""
    best = score.max()
    winners = score >= best - TIE_RTOL * abs(best)
    return int(cands[np.argmax(winners)])


def select_next(state: AlgoState, inst: Instance) -> int:
    cands, _, _, score = _score_arrays(state, inst)
    if len(cands) == 0 or score.max() <= 0:
        raise InvariantError(
            f"no element makes progress on alive scenarios {state.alive.tolist()}")
    return argmax_lowest(cands, score)


def useful_elements(state: AlgoState, inst: Instance) -> np.ndarray:
    """Undisplayed elements that split the alive set or raise some alive function."""
    cands = np.flatnonzero(~state.displayed_mask)
    if len(cands) == 0:
        return cands
    after = inst.family.residual_after(state, state.alive, cands)
    gains = (after < state.residual[:, None]).any(axis=0)
    if len(state.alive) < 2:
        return cands[gains]
    size, _ = split_stats(state, inst, cands)
    return cands[(size > 0) | gains]


def build_policy(inst: Instance, keep_states: bool = False) -> PolicyTrie:
    """Trie of the greedy policy over every scenario; traces are in ``trie.traces``."""
    return simulate(inst, select_next, keep_states=keep_states)
