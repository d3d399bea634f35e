"""Per-scenario submodular coverage functions and property checks.

Every oracle maps a set of element ids to a value in [0, 1] and is
normalized so that the empty set scores 0 and the scenario's full ground
set scores 1.  Values are exact :class:`fractions.Fraction` objects
except for the decision-region product with many regions, which falls
back to floating point.

Scenario and element ids are 0-based throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .exceptions import ConstructionError

#: maximum number of regions for which the decision-region product is exact
EXACT_DRD_REGIONS = 8


def _popcount(x: int) -> int:
    return bin(x).count("1")


class CoverageUniverse:
    """Distinguishing sets ``T_e(i)`` for a feedback table, stored as bitsets.

    ``T_e(i)`` is the set of scenarios whose feedback on element ``e``
    differs from scenario ``i``'s.  For a binary table this is the
    symmetric-difference definition ``{j : e in S_i xor S_j}``.  Bitsets are
    python ints over the m scenarios; one bitset per (element, symbol) is
    precomputed so ``T_e(i)`` costs a single xor.
    """

    def __init__(self, table):
        table = np.asarray(table)
        if table.ndim != 2:
            raise ConstructionError("feedback table must be two-dimensional")
        self.table = table
        self.m, self.n = table.shape
        self.full = (1 << self.m) - 1
        self._by_symbol = []
        for e in range(self.n):
            col = table[:, e]
            bits = {}
            for g in np.unique(col):
                bits[int(g)] = _bits(np.flatnonzero(col == g))
            self._by_symbol.append(bits)

    def distinguishing(self, e: int, i: int) -> int:
        """Bitset of ``T_e(i)``."""
        return self.full ^ self._by_symbol[e][int(self.table[i, e])]

    def distinguishing_set(self, e: int, i: int) -> frozenset:
        return frozenset(_members(self.distinguishing(e, i)))

    def eliminated(self, S: Iterable[int], i: int) -> int:
        """Bitset of scenarios told apart from ``i`` by some element of ``S``."""
        out = 0
        for e in S:
            out |= self.distinguishing(e, i)
        return out

    def identifiable(self, i: int) -> bool:
        return self.eliminated(range(self.n), i) == self.full ^ (1 << i)


def _bits(ids) -> int:
    out = 0
    for j in ids:
        out |= 1 << int(j)
    return out


def _members(bits: int):
    j = 0
    while bits:
        if bits & 1:
            yield j
        bits >>= 1
        j += 1


class SubmodularOracle:
    """Value oracle for one scenario.

    ``ground`` is the set of elements the function is defined on; any
    query is first intersected with it, so subclasses only see subsets of
    their ground set.  ``tag`` and ``params`` describe the construction.
    """

    tag = "custom"

    def __init__(self, ground: Iterable[int], n_elements: int, params=None):
        self.ground = frozenset(int(e) for e in ground)
        self.n_elements = int(n_elements)
        self.params = dict(params or {})

    def __call__(self, S: Iterable[int]):
        return self.evaluate(frozenset(int(e) for e in S) & self.ground)

    def evaluate(self, S: frozenset):
        raise NotImplementedError

    @property
    def precovered(self) -> bool:
        """True for degenerate oracles that are identically 1."""
        return False

    def __repr__(self):
        return f"{type(self).__name__}({self.params})"


class FunctionOracle(SubmodularOracle):
    """Wraps a user callable; the caller is responsible for submodularity."""

    def __init__(self, fn: Callable, ground, n_elements, tag="custom"):
        super().__init__(ground, n_elements)
        self.fn = fn
        self.tag = tag

    def evaluate(self, S):
        return self.fn(S)


class MIROracle(SubmodularOracle):
    tag = "mir"

    def __init__(self, interest, K, n_elements):
        super().__init__(interest, n_elements, {"K": int(K)})
        self.K = int(K)

    def evaluate(self, S):
        return Fraction(min(len(S), self.K), self.K)


class CoverageOracle(SubmodularOracle):
    """Counts hypotheses eliminated inside target sets.

    With ``targets = [A_1, ..., A_r]`` (bitsets) the value is
    ``1 - prod_j (1 - |elim & A_j| / |A_j|)``.  A single target gives the
    plain normalized coverage; ``cap`` replaces the single-target
    denominator by a smaller threshold count (generalized ODT).
    """

    def __init__(self, universe: CoverageUniverse, i: int, targets: Sequence[int],
                 tag: str, params=None, cap: int | None = None):
        super().__init__(range(universe.n), universe.n, params)
        self.tag = tag
        self.universe = universe
        self.i = int(i)
        self.targets = list(targets)
        self.cap = cap
        self.exact = len(self.targets) <= EXACT_DRD_REGIONS

    @property
    def precovered(self):
        return any(t == 0 for t in self.targets)

    def evaluate(self, S):
        if self.precovered:
            return Fraction(1)
        elim = self.universe.eliminated(S, self.i)
        if self.cap is not None:
            return min(Fraction(_popcount(elim & self.targets[0]), self.cap), Fraction(1))
        if self.exact:
            residual = Fraction(1)
            for t in self.targets:
                residual *= 1 - Fraction(_popcount(elim & t), _popcount(t))
            return 1 - residual
        residual = 1.0
        for t in self.targets:
            residual *= 1.0 - _popcount(elim & t) / _popcount(t)
        return 1.0 - residual


def mir_function(interest: Iterable[int], K: int, n_elements: int | None = None) -> MIROracle:
    """Truncated count ``min(|S & S_i|, K) / K`` for a multiple-intent user."""
    interest = frozenset(int(e) for e in interest)
    if not 1 <= K <= len(interest):
        raise ConstructionError(f"K={K} outside [1, {len(interest)}]")
    if n_elements is None:
        n_elements = max(interest) + 1
    return MIROracle(interest, K, n_elements)


def odt_function(universe: CoverageUniverse, i: int) -> CoverageOracle:
    m = universe.m
    if m < 2:
        raise ConstructionError("decision tree functions need at least two hypotheses")
    if not universe.identifiable(i):
        raise ConstructionError(f"hypothesis {i} is not identified by the full test set")
    others = universe.full ^ (1 << i)
    return CoverageOracle(universe, i, [others], "odt")


def generalized_odt_function(universe: CoverageUniverse, i: int, t: int) -> CoverageOracle:
    m = universe.m
    if not 1 <= t <= m - 1:
        raise ConstructionError(f"t={t} outside [1, {m - 1}]")
    others = universe.full ^ (1 << i)
    if _popcount(universe.eliminated(range(universe.n), i)) < m - t:
        raise ConstructionError(f"hypothesis {i} cannot reach {t} candidates")
    return CoverageOracle(universe, i, [others], "godt", {"t": int(t)}, cap=m - t)


def _partition_classes(partition, m):
    """Accept per-scenario class ids or a list of parts; return class id array."""
    partition = list(partition)
    if len(partition) == m and all(np.isscalar(q) for q in partition):
        return np.asarray(partition, dtype=int)
    cls = np.full(m, -1)
    for q, part in enumerate(partition):
        for j in part:
            j = int(j)
            if not 0 <= j < m or cls[j] != -1:
                raise ConstructionError("classes do not form a partition")
            cls[j] = q
    if (cls < 0).any():
        raise ConstructionError("classes do not cover every hypothesis")
    return cls


def eqclass_function(universe: CoverageUniverse, partition, i: int) -> CoverageOracle:
    """Equivalence-class determination: eliminate everything outside i's class."""
    cls = _partition_classes(partition, universe.m)
    outside = _bits(np.flatnonzero(cls != cls[i]))
    elim = universe.eliminated(range(universe.n), i)
    if elim & outside != outside:
        raise ConstructionError(f"class of hypothesis {i} is not identified by the full test set")
    return CoverageOracle(universe, i, [outside], "ecd", {"class": int(cls[i])})


def drd_function(universe: CoverageUniverse, regions, i: int) -> CoverageOracle:
    """Decision-region determination as an OR over the regions holding ``i``."""
    mine = [r for r in regions if i in set(int(j) for j in r)]
    if not mine:
        raise ConstructionError(f"no region contains hypothesis {i}")
    targets = [universe.full ^ _bits(r) for r in mine]
    elim = universe.eliminated(range(universe.n), i)
    if not any(elim & t == t for t in targets):
        raise ConstructionError(f"hypothesis {i} cannot be placed inside a region")
    return CoverageOracle(universe, i, targets, "drd", {"regions": len(mine)})


def ranking_function(weights, functions, n_elements, costs=None):
    """Deterministic submodular ranking as an instance with ``S_i = U``.

    ``functions`` are callables or oracles over subsets of ``range(n)``.
    Every scenario answers "yes" to every element, so feedback never splits
    the alive set.
    """
    from .model import Instance

    w = np.asarray(weights, dtype=float)
    if (w < 0).any() or w.sum() <= 0:
        raise ConstructionError("weights must be nonnegative and not all zero")
    if len(functions) != len(w):
        raise ConstructionError("one function per weight is required")
    U = range(n_elements)
    oracles = [f if isinstance(f, SubmodularOracle) else FunctionOracle(f, U, n_elements, "ranking")
               for f in functions]
    exact = tuple(Fraction(x) / Fraction(sum(Fraction(y) for y in weights)) for x in weights)
    return Instance(
        costs=np.ones(n_elements) if costs is None else costs,
        probs=w / w.sum(),
        feedback=np.zeros((len(w), n_elements), dtype=np.int8),
        app="ranking",
        oracle_list=oracles,
        exact_probs=exact,
    )


@dataclass
class SubmodularityReport:
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok


def check_submodular(oracle, trials: int = 200, seed: int = 0, exhaustive: bool = False,
                     tol: float = 1e-12, ground=None) -> SubmodularityReport:
    """Look for violations of normalization, monotonicity and submodularity.

    In sampling mode ``trials`` random (A, B) pairs and random
    ``(A subset B, e)`` triples are drawn.  In exhaustive mode every set A
    and every pair of outside elements is checked through the local
    condition ``f(A+e) + f(A+e') >= f(A) + f(A+e+e')`` which is equivalent
    to submodularity.
    """
    if ground is None:
        ground = sorted(getattr(oracle, "ground", ()))
    ground = [int(e) for e in ground]
    report = SubmodularityReport()
    cache = {}

    def f(S):
        S = frozenset(S)
        if S not in cache:
            cache[S] = oracle(S)
        return cache[S]

    def flag(msg):
        report.violations.append(msg)

    if not getattr(oracle, "precovered", False):
        if abs(float(f(()))) > tol:
            flag(f"f(empty) = {f(())}")
        if abs(float(f(ground)) - 1) > tol:
            flag(f"f(ground) = {f(ground)}")

    if exhaustive:
        for r in range(len(ground) + 1):
            for A in itertools.combinations(ground, r):
                A = frozenset(A)
                fa = f(A)
                report.checked += 1
                if not -tol <= float(fa) <= 1 + tol:
                    flag(f"f({sorted(A)}) = {fa} outside [0, 1]")
                rest = [e for e in ground if e not in A]
                for e in rest:
                    if float(f(A | {e}) - fa) < -tol:
                        flag(f"not monotone at A={sorted(A)}, e={e}")
                for e, e2 in itertools.combinations(rest, 2):
                    lhs = f(A | {e}) + f(A | {e2})
                    rhs = fa + f(A | {e, e2})
                    if float(lhs - rhs) < -tol:
                        flag(f"not submodular at A={sorted(A)}, e={e}, e'={e2}")
        return report

    rng = np.random.default_rng(seed)
    for _ in range(trials):
        A = frozenset(e for e in ground if rng.random() < 0.5)
        B = frozenset(e for e in ground if rng.random() < 0.5)
        report.checked += 1
        if float(f(A) + f(B) - f(A | B) - f(A & B)) < -tol:
            flag(f"not submodular at A={sorted(A)}, B={sorted(B)}")
        big = A | B
        small = A & B
        if float(f(big) - f(small)) < -tol:
            flag(f"not monotone at A={sorted(small)}, B={sorted(big)}")
        rest = [e for e in ground if e not in big]
        if rest:
            e = rest[rng.integers(len(rest))]
            if float((f(small | {e}) - f(small)) - (f(big | {e}) - f(big))) < -tol:
                flag(f"diminishing returns fails at A={sorted(small)}, B={sorted(big)}, e={e}")
    return report
