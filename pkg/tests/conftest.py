import itertools
from fractions import Fraction

import numpy as np
import pytest

from adsubrank.datasets import default_ml100k_path, ingest_movielens


@pytest.fixture(scope="session")
def ml100k_path():
    path = default_ml100k_path()
    if not path.exists():
        pytest.skip(f"ML-100K ratings not found at {path} (run scripts/fetch_ml100k.py)")
    return path


@pytest.fixture(scope="session")
def ratings(ml100k_path):
    return ingest_movielens(ml100k_path)


def brute_scores(inst, displayed, compatible):
    """Selection scores straight from the definition, in exact arithmetic.

    Independent of the package's vectorized families: it calls each
    scenario's oracle on explicit subsets and splits the alive set by
    grouping feedback rows by hand.
    """
    p = inst.exact_probabilities()
    E = list(displayed)
    alive = [i for i in compatible if Fraction(inst.oracle(i)(E)) < 1]
    out = {}
    for e in range(inst.n_elements):
        if e in E:
            continue
        groups = {}
        for i in alive:
            groups.setdefault(int(inst.feedback[i, e]), []).append(i)
        if groups:
            biggest = max(sorted(groups), key=lambda g: len(groups[g]))
            split = sum((p[i] for g, grp in groups.items() if g != biggest for i in grp), Fraction(0))
        else:
            split = Fraction(0)
        gain = Fraction(0)
        for i in alive:
            f = inst.oracle(i)
            before, after = Fraction(f(E)), Fraction(f(E + [e]))
            gain += p[i] * (after - before) / (1 - before)
        out[e] = (split + gain) / Fraction(float(inst.costs[e]))
    return out


def all_subsets(n):
    for r in range(n + 1):
        yield from itertools.combinations(range(n), r)


def rng_from(seed):
    return np.random.default_rng(seed)


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one pass/fail line per acceptance criterion and assert on it."""
    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        _VERDICTS.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
