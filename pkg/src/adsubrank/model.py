"""Instances, algorithm state and state transitions.

An instance holds element costs, scenario probabilities, the feedback
table ``d[i, e]`` (symbol ids) and an application tag that determines the
scenario functions.  Binary instances use the symbols ``("yes", "no")``
with ``yes`` encoded as 0, so that ``d[i, e] == 0`` iff ``e`` is in the
interest set of scenario ``i``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property

import numpy as np

from .exceptions import SizeError, UnsupportedError, UsageError
from .families import COVER_TOL, NO, YES, build_family

BINARY_SYMBOLS = ("yes", "no")
APPS = ("mir", "odt", "godt", "ecd", "drd", "ranking", "custom")


@dataclass(eq=False)
class Instance:
    costs: np.ndarray
    probs: np.ndarray
    feedback: np.ndarray
    app: str = "custom"
    payload: dict = field(default_factory=dict)
    symbols: tuple = BINARY_SYMBOLS
    oracle_list: list | None = None
    exact_probs: tuple | None = None

    def __post_init__(self):
        self.costs = np.asarray(self.costs, dtype=float)
        self.probs = np.asarray(self.probs, dtype=float)
        self.feedback = np.asarray(self.feedback, dtype=np.int8)
        self.symbols = tuple(self.symbols)
        if self.app not in APPS:
            raise UsageError(f"unknown application tag {self.app!r}")
        if self.feedback.shape != (len(self.probs), len(self.costs)):
            raise UsageError(
                f"feedback table has shape {self.feedback.shape}, "
                f"expected {(len(self.probs), len(self.costs))}")

    @classmethod
    def binary(cls, sets, n_elements, probs, costs=None, app="custom", **kwargs):
        """Build a yes/no instance from interest sets."""
        table = np.full((len(sets), n_elements), NO, dtype=np.int8)
        for i, S in enumerate(sets):
            for e in S:
                table[i, int(e)] = YES
        if costs is None:
            costs = np.ones(n_elements)
        return cls(costs=costs, probs=probs, feedback=table, app=app, **kwargs)

    @property
    def n_elements(self):
        return len(self.costs)

    @property
    def m_scenarios(self):
        return len(self.probs)

    @property
    def n_symbols(self):
        return len(self.symbols)

    @property
    def is_binary(self):
        return self.symbols == BINARY_SYMBOLS

    @cached_property
    def membership(self):
        """Boolean (m, n) matrix: ``e`` in ``S_i``."""
        return self.feedback == YES

    def interest_set(self, i):
        return frozenset(int(e) for e in np.flatnonzero(self.membership[i]))

    @cached_property
    def family(self):
        return build_family(self)

    def oracle(self, i):
        return self.family.oracle(i)

    @cached_property
    def oracles(self):
        return [self.oracle(i) for i in range(self.m_scenarios)]

    def exact_probabilities(self):
        if self.exact_probs is not None:
            return tuple(Fraction(p) for p in self.exact_probs)
        return tuple(Fraction(float(p)) for p in self.probs)

    def with_probs(self, probs, exact=None):
        return replace(self, probs=np.asarray(probs, dtype=float), exact_probs=exact)

    def with_costs(self, costs):
        return replace(self, costs=np.asarray(costs, dtype=float))


@dataclass(eq=False)
class AlgoState:
    """Node state ``(E, H)`` plus bookkeeping.

    ``compatible`` holds every scenario consistent with the feedback so
    far, covered or not; ``alive`` is the uncovered part of it (``H``).
    ``residual[k]`` caches ``1 - f_i(E)`` for ``i = alive[k]``.
    """

    displayed: tuple
    displayed_mask: np.ndarray
    compatible: np.ndarray
    alive: np.ndarray
    residual: np.ndarray
    history: tuple = ()
    cost: float = 0.0
    newly_covered: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    @property
    def values(self):
        """Cached ``f_i(E)`` for the alive scenarios."""
        return 1.0 - self.residual

    @property
    def displayed_set(self):
        return frozenset(self.displayed)

    def mass(self, inst):
        return float(inst.probs[self.alive].sum())


def root_state(inst: Instance) -> AlgoState:
    fam = inst.family
    res = fam.residual_all(())
    alive = np.flatnonzero(res > fam.cover_tol)
    return AlgoState(
        displayed=(),
        displayed_mask=np.zeros(inst.n_elements, dtype=bool),
        compatible=np.ones(inst.m_scenarios, dtype=bool),
        alive=alive,
        residual=res[alive],
        newly_covered=np.flatnonzero(res <= fam.cover_tol),
    )


def advance_state(state: AlgoState, e: int, inst: Instance) -> dict:
    """Display ``e`` and split the alive set by the feedback symbol.

    Returns ``{symbol: child_state}`` with one child per symbol observed
    among the alive scenarios.  Each child's ``newly_covered`` lists the
    scenarios of that branch covered by ``e``.
    """
    e = int(e)
    if state.displayed_mask[e]:
        raise UsageError(f"element {e} already displayed")
    fam = inst.family
    col = inst.feedback[:, e]
    H = state.alive
    after = fam.residual_after(state, H, np.array([e]))[:, 0]
    mask = state.displayed_mask.copy()
    mask[e] = True
    displayed = state.displayed + (e,)
    cost = state.cost + float(inst.costs[e])
    children = {}
    sym_h = col[H]
    for g in np.unique(sym_h):
        g = int(g)
        sel = sym_h == g
        rows, res = H[sel], after[sel]
        covered = res <= fam.cover_tol
        children[g] = AlgoState(
            displayed=displayed,
            displayed_mask=mask,
            compatible=state.compatible & (col == g),
            alive=rows[~covered],
            residual=res[~covered],
            history=state.history + ((e, g),),
            cost=cost,
            newly_covered=rows[covered],
        )
    return children


def validate_instance(inst: Instance) -> list:
    """List of human-readable problems; empty iff the instance is valid."""
    problems = []
    total = float(inst.probs.sum())
    if abs(total - 1.0) > 1e-9:
        problems.append(f"probabilities sum to {total:g}")
    if (inst.probs < 0).any():
        problems.append(f"negative probability for scenarios {np.flatnonzero(inst.probs < 0).tolist()}")
    bad = np.flatnonzero(~(inst.costs > 0))
    if len(bad):
        problems.append(f"nonpositive cost for elements {bad.tolist()}")
    if inst.feedback.size and (inst.feedback.min() < 0 or inst.feedback.max() >= inst.n_symbols):
        problems.append("feedback symbol outside the alphabet")
    try:
        fam = inst.family
        empty = fam.residual_all(())
        full = fam.residual_all(range(inst.n_elements))
    except Exception as exc:  # construction errors surface as a report entry
        problems.append(f"scenario functions invalid: {exc}")
        return problems
    pre = _precovered(inst)
    bad = np.flatnonzero((np.abs(empty - 1.0) > 1e-9) & ~pre)
    if len(bad):
        problems.append(f"f_i(empty) != 0 for scenarios {bad.tolist()}")
    bad = np.flatnonzero(full > fam.cover_tol)
    if len(bad):
        problems.append(f"f_i(U) < 1 for scenarios {bad.tolist()} (cannot be covered)")
    return problems


def _precovered(inst):
    fam = inst.family
    if inst.app == "ecd":
        return fam.outside == 0
    if inst.app == "drd":
        return np.array([any((~fam.region_masks[k]).sum() == 0 for k in regs)
                         for regs in fam.member_of])
    if inst.oracle_list is not None:
        return np.array([getattr(o, "precovered", False) for o in inst.oracle_list])
    return np.zeros(inst.m_scenarios, dtype=bool)


def epsilon_of(inst: Instance, mode: str = "analytic") -> Fraction:
    """Minimum positive increment of any scenario function.

    ``analytic`` uses the closed form for the instance's application;
    ``brute-force`` scans all subsets (n <= 20).
    """
    if mode == "analytic":
        fam = inst.family
        m = inst.m_scenarios
        if inst.app == "mir":
            return Fraction(1, int(fam.K.max()))
        if inst.app == "odt":
            return Fraction(1, m - 1)
        if inst.app == "godt":
            return Fraction(1, int(m - fam.t.min()))
        if inst.app == "ecd":
            sizes = [int(s) for s in fam.outside if s > 0]
            return Fraction(1, max(sizes))
        if inst.app == "drd":
            best = None
            for regs in fam.member_of:
                denoms = [int((~fam.region_masks[k]).sum()) for k in regs]
                if 0 in denoms:
                    continue
                val = Fraction(1, math.prod(denoms))
                best = val if best is None else min(best, val)
            return best
        raise UnsupportedError(f"no closed form for application {inst.app!r}")
    if mode != "brute-force":
        raise UsageError(f"unknown mode {mode!r}")
    n = inst.n_elements
    if n > 20:
        raise SizeError("brute-force epsilon needs n <= 20")
    best = None
    for i in range(inst.m_scenarios):
        f = inst.oracle(i)
        vals = {}
        for r in range(n + 1):
            for S in itertools.combinations(range(n), r):
                vals[frozenset(S)] = f(S)
        for S, v in vals.items():
            for e in range(n):
                if e in S:
                    continue
                d = vals[S | {e}] - v
                if d > 0 and (best is None or d < best):
                    best = d
    return best
