"""Instance generators and the MovieLens-100K ingester."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .exceptions import DataError, FormatError, ParameterError
from .families import NO, YES
from .model import Instance

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynParams:
    k: int
    eps: Fraction | None = None

    def resolved_eps(self) -> Fraction:
        return Fraction(1, 2 ** (self.k + 3)) if self.eps is None else Fraction(self.eps)


def gen_syn(params: SynParams | int) -> Instance:
    """SYN-K: the hard instance for the classic splitting greedy.

    ``m = 2k + 3`` scenarios, ``n = k + 2`` unit-cost elements.  Element
    ``i <= k`` belongs to scenarios ``2i-1, 2i``; element ``k+1`` to all odd
    scenarios; element ``k+2`` to all even scenarios and ``2k+3`` (1-based).
    """
    if isinstance(params, int):
        params = SynParams(params)
    k = params.k
    if k < 1:
        raise ParameterError("k must be at least 1")
    eps = params.resolved_eps()
    bound = Fraction(1, 2 ** (k + 2))
    if not 0 < eps < bound:
        raise ParameterError(f"eps must lie in (0, 2^-{k + 2})")
    m, n = 2 * k + 3, k + 2
    table = np.full((m, n), NO, dtype=np.int8)
    for i in range(1, k + 1):
        table[2 * i - 2, i - 1] = YES
        table[2 * i - 1, i - 1] = YES
    table[0::2, k] = YES          # odd scenarios (1-based), including 2k+3
    table[1::2, k + 1] = YES      # even scenarios
    table[m - 1, k + 1] = YES
    probs = []
    for i in range(1, k + 1):
        probs += [Fraction(1, 2 ** (i + 2))] * 2
    probs += [bound - eps, bound - eps, Fraction(1, 2) + 2 * eps]
    return Instance(costs=np.ones(n), probs=[float(p) for p in probs], feedback=table,
                    app="odt", exact_probs=tuple(probs))


@dataclass
class RatingsMatrix:
    user_ids: np.ndarray
    item_ids: np.ndarray
    membership: np.ndarray   # (users, items) bool, rating >= threshold
    n_ratings: int = 0

    @property
    def users(self):
        return len(self.user_ids)

    @property
    def items(self):
        return len(self.item_ids)

    @property
    def degrees(self):
        return self.membership.sum(axis=1)

    @property
    def n_memberships(self):
        return int(self.membership.sum())

    def degree_stats(self):
        d = self.degrees
        if len(d) == 0:
            return 0.0, 0.0
        return float(d.mean()), float(d.std())


def ingest_movielens(path, threshold: int = 3) -> RatingsMatrix:
    """Read an ML-100K ``u.data`` file; ratings below ``threshold`` become 0.

    Every user and item present in the file is kept, liked or not.
    """
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4:
                if not rows:
                    raise FormatError(f"expected 4 tab-separated columns, got {len(parts)}", lineno)
                raise DataError(f"expected 4 tab-separated columns, got {len(parts)}", lineno)
            try:
                rows.append(tuple(int(x) for x in parts))
            except ValueError:
                raise DataError(f"non-integer field in {line.strip()!r}", lineno) from None
    if not rows:
        return RatingsMatrix(np.empty(0, int), np.empty(0, int), np.zeros((0, 0), bool))
    data = np.array(rows, dtype=np.int64)
    user_ids, u = np.unique(data[:, 0], return_inverse=True)
    item_ids, it = np.unique(data[:, 1], return_inverse=True)
    memb = np.zeros((len(user_ids), len(item_ids)), dtype=bool)
    keep = data[:, 2] >= threshold
    memb[u[keep], it[keep]] = True
    return RatingsMatrix(user_ids, item_ids, memb, len(rows))


def powerlaw_draws(m: int, alpha: float, seed=None) -> np.ndarray:
    """``m`` draws from the density ``alpha * x**(alpha-1)`` on (0, 1] (inverse CDF)."""
    if alpha < 1:
        raise ParameterError("alpha must be >= 1")
    if m < 1:
        raise ParameterError("m must be >= 1")
    u = 1.0 - np.random.default_rng(seed).random(m)
    return u ** (1.0 / alpha)


def powerlaw_probs(m: int, alpha: float, seed=None) -> np.ndarray:
    """Power-law draws normalized into a distribution; alpha=1 is uniform noise."""
    x = powerlaw_draws(m, alpha, seed)
    return x / x.sum()


def permute_probs(probs, seed=None) -> np.ndarray:
    """Seeded shuffle of a probability vector; ``seed=None`` is the identity."""
    probs = np.array(probs, dtype=float)
    if seed is None:
        return probs
    return np.random.default_rng(seed).permutation(probs)


_BOUND = re.compile(r"^\s*(?:(\d+)|S(?:\s*/\s*(\d+))?)\s*$")


def _bound(text, size):
    mt = _BOUND.match(text)
    if not mt:
        raise ParameterError(f"bad threshold bound {text!r}")
    if mt.group(1) is not None:
        return Fraction(int(mt.group(1)))
    return Fraction(size, int(mt.group(2) or 1))


def draw_threshold(rule: str, size: int, rng) -> int:
    """Draw ``K_i`` for an interest set of ``size`` elements.

    ``rule`` is ``"full"`` (``K_i = |S_i|``) or ``"[a,b)"`` with bounds an
    integer, ``S`` or ``S/d``.  Draws are uniform over the integers from
    ``max(1, ceil(a))`` to ``floor(b)``, clipped to ``[1, size]``.
    """
    if rule in ("full", "S"):
        return size
    mt = re.match(r"^\[(.+),(.+)\)$", rule.replace(" ", ""))
    if not mt:
        raise ParameterError(f"bad threshold rule {rule!r}")
    lo = max(1, math.ceil(_bound(mt.group(1), size)))
    hi = min(size, math.floor(_bound(mt.group(2), size)))
    lo = min(lo, size)
    hi = max(hi, lo)
    return int(rng.integers(lo, hi + 1))


def draw_t(rule, m: int, rng) -> int:
    """Draw a generalized-ODT threshold: ``"1"`` or half-open ``"[a,b)"``."""
    rule = str(rule).replace(" ", "")
    if re.fullmatch(r"\d+", rule):
        t = int(rule)
    else:
        mt = re.fullmatch(r"\[(\d+),(\d+)\)", rule)
        if not mt:
            raise ParameterError(f"bad t rule {rule!r}")
        a, b = int(mt.group(1)), int(mt.group(2))
        if b <= a:
            raise ParameterError(f"empty t range {rule!r}")
        t = int(rng.integers(a, b))
    return max(1, min(t, m - 1))


def _binary_table(memb):
    return np.where(memb, YES, NO).astype(np.int8)


def mir_instance_from_ratings(matrix: RatingsMatrix, probs=None, K_rule="full", seed=None) -> Instance:
    """Multiple-intent ranking: users are scenarios, liked movies their interest sets.

    Users without liked movies cannot be satisfied; they are dropped and
    the remaining probabilities renormalized.
    """
    memb = matrix.membership
    probs = np.full(matrix.users, 1.0 / max(matrix.users, 1)) if probs is None else np.asarray(probs, float)
    sizes = memb.sum(axis=1)
    keep = sizes > 0
    if not keep.all():
        log.warning("dropping %d users with no liked items", int((~keep).sum()))
    rng = np.random.default_rng(seed)
    K = np.array([draw_threshold(K_rule, int(s), rng) for s in sizes[keep]], dtype=np.int64)
    p = probs[keep]
    return Instance(costs=np.ones(matrix.items), probs=p / p.sum(),
                    feedback=_binary_table(memb[keep]), app="mir", payload={"K": K})


def odt_instance_from_ratings(matrix: RatingsMatrix, probs=None, t_rule="1", seed=None) -> Instance:
    """(Generalized) decision tree over users, with movies as yes/no tests."""
    memb = matrix.membership
    m = matrix.users
    probs = np.full(m, 1.0 / max(m, 1)) if probs is None else np.asarray(probs, float)
    table = _binary_table(memb)
    if str(t_rule) == "1":
        return Instance(costs=np.ones(matrix.items), probs=probs / probs.sum(),
                        feedback=table, app="odt")
    rng = np.random.default_rng(seed)
    t = np.array([draw_t(t_rule, m, rng) for _ in range(m)], dtype=np.int64)
    return Instance(costs=np.ones(matrix.items), probs=probs / probs.sum(),
                    feedback=table, app="godt", payload={"t": t})


def random_instance(rng, n: int, m: int, app: str = "odt", unit_costs: bool = False,
                    n_symbols: int = 2) -> Instance:
    """Small random instance for oracle comparisons and property tests.

    Decision-tree style apps get pairwise-distinct feedback rows so every
    hypothesis is identifiable.
    """
    rng = np.random.default_rng(rng)
    costs = np.ones(n) if unit_costs else rng.integers(1, 4, size=n).astype(float)
    probs = rng.dirichlet(np.ones(m))
    if app == "mir":
        memb = rng.random((m, n)) < 0.5
        for i in range(m):
            if not memb[i].any():
                memb[i, rng.integers(n)] = True
        K = np.array([rng.integers(1, s + 1) for s in memb.sum(axis=1)])
        return Instance(costs=costs, probs=probs, feedback=_binary_table(memb), app="mir",
                        payload={"K": K})
    if m > n_symbols ** n:
        raise ParameterError("too few elements for distinct feedback rows")
    while True:
        table = rng.integers(0, n_symbols, size=(m, n)).astype(np.int8)
        if len(np.unique(table, axis=0)) == m:
            break
    symbols = ("yes", "no") if n_symbols == 2 else tuple(f"s{g}" for g in range(n_symbols))
    kw = dict(costs=costs, probs=probs, feedback=table, symbols=symbols)
    if app == "odt":
        return Instance(app="odt", **kw)
    if app == "godt":
        return Instance(app="godt", payload={"t": rng.integers(1, max(2, m - 1), size=m)}, **kw)
    if app == "ecd":
        if m < 2:
            cls = np.zeros(m, dtype=np.int64)
        else:
            # at least two classes, otherwise every scenario starts covered
            n_cls = int(rng.integers(2, m + 1))
            cls = rng.permutation(np.concatenate([[0, 1], rng.integers(0, n_cls, size=m - 2)]))
        return Instance(app="ecd", payload={"class": cls}, **kw)
    if app == "drd":
        regions = []
        for i in range(m):
            size = int(rng.integers(1, m))
            others = rng.choice([j for j in range(m) if j != i], size=size - 1, replace=False)
            regions.append(sorted({i, *map(int, others)}))
        return Instance(app="drd", payload={"regions": regions}, **kw)
    raise ParameterError(f"unknown app {app!r}")


def default_ml100k_path():
    """``$ADSUBRANK_ML100K`` or ``data/ml-100k/u.data`` next to the repository root."""
    import os
    env = os.environ.get("ADSUBRANK_ML100K")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "data" / "ml-100k" / "u.data"
