"""Batched evaluation of all scenario functions of one instance.

The policy needs ``1 - f_i(E + e)`` for every alive scenario ``i`` and
every candidate ``e`` at each node.  Calling the per-scenario oracles for
that is far too slow on real data, so each application gets a family that
computes the whole residual matrix with numpy.  Families work with
*residuals* ``1 - f`` rather than values: the decision-region product is
then evaluated without cancellation and coverage is an exact zero.

All coverage-type functions (ODT, generalized ODT, equivalence classes,
decision regions) reduce to counting, for scenario ``i``, the hypotheses
that still agree with ``i`` inside some target set.  For ``i`` alive at a
node the agreeing set is the node's compatible set, which is what makes
the batched form cheap.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ConstructionError
from .functions import (
    CoverageUniverse,
    _partition_classes,
    drd_function,
    eqclass_function,
    generalized_odt_function,
    mir_function,
    odt_function,
)

YES, NO = 0, 1
COVER_TOL = 1e-9


class Family:
    #: residual at or below this counts as covered
    cover_tol = COVER_TOL

    def __init__(self, inst):
        self.inst = inst

    def residual_all(self, S) -> np.ndarray:
        """``1 - f_i(S)`` for every scenario."""
        raise NotImplementedError

    def residual_after(self, state, rows, cands) -> np.ndarray:
        """``1 - f_i(E + e)`` for ``i`` in ``rows`` (alive at ``state``), ``e`` in ``cands``."""
        raise NotImplementedError

    def oracle(self, i):
        raise NotImplementedError


class OracleFamily(Family):
    """Slow path over arbitrary per-scenario oracles."""

    def __init__(self, inst, oracles):
        super().__init__(inst)
        self.oracles = list(oracles)

    def oracle(self, i):
        return self.oracles[i]

    def residual_all(self, S):
        S = frozenset(int(e) for e in S)
        return np.array([1.0 - float(o(S)) for o in self.oracles])

    def residual_after(self, state, rows, cands):
        E = frozenset(state.displayed)
        out = np.empty((len(rows), len(cands)))
        for a, i in enumerate(rows):
            o = self.oracles[i]
            for b, e in enumerate(cands):
                out[a, b] = 1.0 - float(o(E | {int(e)}))
        return out


class MIRFamily(Family):
    """``f_i(S) = min(|S & S_i|, K_i) / K_i``."""

    def __init__(self, inst, K):
        super().__init__(inst)
        self.K = np.asarray(K, dtype=np.int64)
        if self.K.shape != (inst.m_scenarios,):
            raise ConstructionError("one K per scenario is required")
        sizes = inst.membership.sum(axis=1)
        if ((self.K < 1) | (self.K > sizes)).any():
            bad = int(np.flatnonzero((self.K < 1) | (self.K > sizes))[0])
            raise ConstructionError(f"K={self.K[bad]} outside [1, {sizes[bad]}] for scenario {bad}")
        self.Kf = self.K.astype(float)

    def oracle(self, i):
        memb = self.inst.membership
        return mir_function(np.flatnonzero(memb[i]), int(self.K[i]), self.inst.n_elements)

    def residual_all(self, S):
        S = np.asarray(sorted(int(e) for e in S), dtype=np.int64)
        cnt = self.inst.membership[:, S].sum(axis=1)
        return (self.K - np.minimum(cnt, self.K)) / self.Kf

    def residual_after(self, state, rows, cands):
        memb = self.inst.membership[rows]
        shown = np.asarray(state.displayed, dtype=np.int64)
        cnt = memb[:, shown].sum(axis=1)
        K = self.K[rows]
        after = np.minimum(cnt[:, None] + memb[:, cands], K[:, None])
        return (K[:, None] - after) / self.Kf[rows][:, None]

    def cover_positions(self, order):
        """Index in ``order`` at which each scenario first reaches ``K_i`` (no feedback)."""
        pos = np.empty(self.inst.n_elements, dtype=np.int64)
        pos[np.asarray(order)] = np.arange(len(order))
        memb = self.inst.membership
        out = np.empty(self.inst.m_scenarios, dtype=np.int64)
        for i in range(self.inst.m_scenarios):
            p = np.sort(pos[memb[i]])
            out[i] = p[self.K[i] - 1]
        return out


def _agree(table, mask, rows, cands, n_symbols):
    """``#{j in mask : table[j, e] == table[i, e]}`` for i in rows, e in cands."""
    sub = table[mask][:, cands]
    mine = table[rows][:, cands]
    if n_symbols == 2:
        yes = (sub == YES).sum(axis=0)
        total = sub.shape[0]
        return np.where(mine == YES, yes, total - yes)
    counts = np.stack([(sub == g).sum(axis=0) for g in range(n_symbols)])
    return np.take_along_axis(counts, mine.astype(np.int64), axis=0)


def _group_sizes(table, S, within=None):
    """For every scenario, how many scenarios (inside ``within``) share its row on ``S``."""
    m = table.shape[0]
    if len(S) == 0:
        keys = np.zeros(m, dtype=np.int64)
    else:
        _, keys = np.unique(table[:, S], axis=0, return_inverse=True)
        keys = keys.reshape(-1)
    w = np.ones(m) if within is None else within.astype(float)
    counts = np.bincount(keys, weights=w, minlength=keys.max() + 1)
    return np.rint(counts[keys]).astype(np.int64)


class CoverageFamily(Family):
    """ODT, generalized ODT, equivalence classes and decision regions."""

    def __init__(self, inst, kind, t=None, classes=None, regions=None):
        super().__init__(inst)
        self.kind = kind
        self.table = inst.feedback
        m = inst.m_scenarios
        self.m = m
        self._universe = None
        if kind == "odt":
            if m < 2:
                raise ConstructionError("decision tree instances need at least two hypotheses")
        elif kind == "godt":
            self.t = np.asarray(t, dtype=np.int64)
            if self.t.shape != (m,) or ((self.t < 1) | (self.t > m - 1)).any():
                raise ConstructionError(f"thresholds must lie in [1, {m - 1}]")
        elif kind == "ecd":
            self.classes = _partition_classes(classes, m)
            self.outside = np.array([(self.classes != self.classes[i]).sum() for i in range(m)])
        elif kind == "drd":
            self.regions = [np.asarray(sorted(set(int(j) for j in r)), dtype=np.int64) for r in regions]
            self.region_masks = []
            for r in self.regions:
                mask = np.zeros(m, dtype=bool)
                mask[r] = True
                self.region_masks.append(mask)
            self.member_of = [[k for k, mask in enumerate(self.region_masks) if mask[i]] for i in range(m)]
            for i, regs in enumerate(self.member_of):
                if not regs:
                    raise ConstructionError(f"no region contains hypothesis {i}")
            # DRD residuals can be legitimately tiny; only an exact zero covers
            self.cover_tol = 0.0
        else:
            raise ConstructionError(f"unknown coverage kind {kind!r}")

    @property
    def universe(self):
        if self._universe is None:
            self._universe = CoverageUniverse(self.table)
        return self._universe

    def oracle(self, i):
        if self.kind == "odt":
            return odt_function(self.universe, i)
        if self.kind == "godt":
            return generalized_odt_function(self.universe, i, int(self.t[i]))
        if self.kind == "ecd":
            return eqclass_function(self.universe, self.classes, i)
        return drd_function(self.universe, self.regions, i)

    def _residual(self, agree_fn, rows):
        """Combine agreement counts into residuals; ``agree_fn(mask)`` counts inside ``mask``."""
        m = self.m
        if self.kind == "odt":
            return (agree_fn(None) - 1) / (m - 1)
        if self.kind == "godt":
            t = self.t[rows]
            t = t[:, None] if agree_fn.two_d else t
            return np.maximum(agree_fn(None) - t, 0) / (m - t)
        if self.kind == "ecd":
            total = agree_fn(None)
            out = np.zeros(total.shape)
            cls = self.classes[rows]
            for q in np.unique(cls):
                sel = cls == q
                inside = agree_fn(self.classes == q)
                denom = (self.classes != q).sum()
                if denom:
                    out[sel] = ((total - inside) / denom)[sel]
            return out
        total = agree_fn(None)
        out = np.ones(total.shape)
        for k, mask in enumerate(self.region_masks):
            sel = np.array([k in self.member_of[i] for i in rows])
            if not sel.any():
                continue
            denom = (~mask).sum()
            if denom == 0:
                out[sel] = 0.0
                continue
            inside = agree_fn(mask)
            out[sel] *= ((total - inside) / denom)[sel]
        return out

    def residual_all(self, S):
        S = np.asarray(sorted(int(e) for e in S), dtype=np.int64)
        rows = np.arange(self.m)

        def agree(mask):
            return _group_sizes(self.table, S, mask)
        agree.two_d = False
        return self._residual(agree, rows)

    def residual_after(self, state, rows, cands):
        rows = np.asarray(rows, dtype=np.int64)
        cands = np.asarray(cands, dtype=np.int64)
        C = state.compatible
        G = self.inst.n_symbols

        def agree(mask):
            m = C if mask is None else C & mask
            return _agree(self.table, m, rows, cands, G)
        agree.two_d = True
        return self._residual(agree, rows).astype(float)


def build_family(inst):
    p = inst.payload
    if inst.app == "mir":
        return MIRFamily(inst, p["K"])
    if inst.app == "odt":
        return CoverageFamily(inst, "odt")
    if inst.app == "godt":
        return CoverageFamily(inst, "godt", t=p["t"])
    if inst.app == "ecd":
        return CoverageFamily(inst, "ecd", classes=p["class"])
    if inst.app == "drd":
        return CoverageFamily(inst, "drd", regions=p["regions"])
    if inst.oracle_list is None:
        raise ConstructionError(f"app {inst.app!r} needs explicit oracles")
    return OracleFamily(inst, inst.oracle_list)
