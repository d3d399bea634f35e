from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adsubrank.datasets import random_instance
from adsubrank.exceptions import ConstructionError
from adsubrank.functions import (CoverageUniverse, FunctionOracle, check_submodular, drd_function,
                                 eqclass_function, generalized_odt_function, mir_function,
                                 odt_function, ranking_function)
from adsubrank.model import root_state

from conftest import all_subsets

YES, NO = 0, 1


class TestMIR:
    def test_half(self):
        f = mir_function({0, 1, 2}, 2)
        assert f({0}) == Fraction(1, 2)

    def test_truncates_at_K(self):
        assert mir_function({0, 1, 2}, 2)({0, 1, 2}) == 1

    def test_outside_elements_ignored(self):
        f = mir_function({0, 1, 2}, 2, n_elements=5)
        assert f({4}) == 0
        assert f({0, 4}) == f({0})

    @pytest.mark.parametrize("K", [0, 4])
    def test_K_range(self, K):
        with pytest.raises(ConstructionError):
            mir_function({0, 1, 2}, K)


def _odt3():
    # three hypotheses, two tests: test 0 separates h0 from {h1, h2},
    # test 1 separates h1 from {h0, h2}
    return CoverageUniverse(np.array([[YES, NO], [NO, YES], [NO, NO]]))


class TestODT:
    def test_one_of_two_eliminated(self):
        f = odt_function(_odt3(), 2)
        assert f({0}) == Fraction(1, 2)

    def test_identified(self):
        f = odt_function(_odt3(), 2)
        assert f({0, 1}) == 1
        assert f(()) == 0

    def test_unidentifiable_rejected(self):
        U = CoverageUniverse(np.array([[YES], [YES], [NO]]))
        with pytest.raises(ConstructionError):
            odt_function(U, 0)

    def test_distinguishing_set(self):
        U = _odt3()
        assert U.distinguishing_set(0, 0) == {1, 2}
        assert U.distinguishing_set(0, 1) == {0}


class TestGeneralizedODT:
    def setup_method(self):
        # five hypotheses; test 0 eliminates {1, 2} for h0, test 1 eliminates {3}
        table = np.array([[YES, YES, YES], [NO, YES, YES], [NO, YES, NO],
                          [YES, NO, NO], [YES, YES, NO]])
        self.U = CoverageUniverse(table)

    def test_two_eliminated_reaches_one(self):
        f = generalized_odt_function(self.U, 0, 3)
        assert self.U.distinguishing_set(0, 0) == {1, 2}
        assert f({0}) == 1

    def test_one_eliminated_is_half(self):
        f = generalized_odt_function(self.U, 0, 3)
        assert self.U.distinguishing_set(1, 0) == {3}
        assert f({1}) == Fraction(1, 2)

    def test_t1_matches_odt(self):
        f, g = generalized_odt_function(self.U, 0, 1), odt_function(self.U, 0)
        for S in all_subsets(3):
            assert f(S) == g(S)

    @pytest.mark.parametrize("t", [0, 5])
    def test_t_range(self, t):
        with pytest.raises(ConstructionError):
            generalized_odt_function(self.U, 0, t)


class TestEquivalenceClasses:
    def setup_method(self):
        # h0 answers like h3 on test 0, unlike h1 and h2; test 1 separates h3
        self.U = CoverageUniverse(np.array([[YES, YES], [NO, YES], [NO, YES], [YES, NO]]))

    def test_example(self):
        f = eqclass_function(self.U, [[0, 1], [2], [3]], 0)
        assert self.U.distinguishing_set(0, 0) == {1, 2}
        assert f({0}) == Fraction(1, 2)

    def test_singletons_equal_odt(self):
        U = CoverageUniverse(np.array([[YES, YES], [NO, YES], [NO, NO], [YES, NO]]))
        for i in range(4):
            f = eqclass_function(U, [[0], [1], [2], [3]], i)
            g = odt_function(U, i)
            assert all(f(S) == g(S) for S in all_subsets(2))

    def test_single_class_precovered(self):
        f = eqclass_function(self.U, [[0, 1, 2, 3]], 2)
        assert f.precovered
        assert f(()) == 1

    def test_not_a_partition(self):
        with pytest.raises(ConstructionError):
            eqclass_function(self.U, [[0, 1], [1, 2, 3]], 0)

    def test_class_labels_accepted(self):
        f = eqclass_function(self.U, [0, 0, 1, 2], 0)
        assert f({0}) == Fraction(1, 2)


class TestDecisionRegions:
    def setup_method(self):
        # test 0 singles out h3; test 1 separates {h1, h2} from {h0, h3}
        self.table = np.array([[YES, YES], [YES, NO], [YES, NO], [NO, YES]])
        self.U = CoverageUniverse(self.table)

    def test_single_region_is_the_cover_function(self):
        f = drd_function(self.U, [[0, 1]], 0)
        # outside {0, 1} are {2, 3}; test 0 eliminates h3 only
        assert f({0}) == Fraction(1, 2)
        assert f({0, 1}) == 1

    def test_product_of_halves(self):
        # regions {0,1} and {0,2}: test 0 removes one of {2,3} and one of {1,3}
        f = drd_function(self.U, [[0, 1], [0, 2]], 0)
        assert f({0}) == Fraction(3, 4)
        assert f({1}) == Fraction(3, 4)

    def test_one_region_done_means_done(self):
        f = drd_function(self.U, [[0, 1], [0, 1, 2]], 0)
        assert f({0}) == 1

    def test_no_region(self):
        with pytest.raises(ConstructionError):
            drd_function(self.U, [[1, 2]], 0)


class TestRanking:
    @pytest.mark.parametrize("w,expected", [((1, 1), (0.5, 0.5)), ((3, 1), (0.75, 0.25))])
    def test_weights_normalized(self, w, expected):
        fs = [lambda S: min(len(S), 1), lambda S: len(S) / 2]
        inst = ranking_function(w, fs, 2)
        assert np.allclose(inst.probs, expected)
        assert inst.exact_probabilities() == tuple(Fraction(x) for x in expected)

    def test_zero_weights(self):
        with pytest.raises(ConstructionError):
            ranking_function((0, 0), [lambda S: 0, lambda S: 0], 2)

    def test_never_splits(self):
        inst = ranking_function((1, 2), [lambda S: min(len(S), 1), lambda S: len(S) / 3], 3)
        assert (inst.feedback == YES).all()


class TestCheckSubmodular:
    def test_mir_clean(self):
        assert check_submodular(mir_function({0, 2, 3}, 2, 5), exhaustive=True, ground=range(5)).ok

    def test_odt_random_5x6(self):
        inst = random_instance(3, 6, 5, "odt")
        for i in range(5):
            assert check_submodular(inst.oracle(i), exhaustive=True, ground=range(6)).ok

    def test_xor_count_flagged(self):
        # counts pairs (0,1) both present: supermodular
        f = FunctionOracle(lambda S: Fraction(int(0 in S and 1 in S)), range(2), 2)
        report = check_submodular(f, exhaustive=True, ground=range(2))
        assert not report.ok
        assert any("submodular" in v for v in report.violations)

    def test_sampling_mode_finds_broken(self):
        f = FunctionOracle(lambda S: Fraction(len(S) ** 2, 16), range(4), 4)
        assert not check_submodular(f, trials=300, seed=1, ground=range(4)).ok


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), app=st.sampled_from(["odt", "godt", "ecd", "drd", "mir"]),
       n=st.integers(2, 5), m=st.integers(2, 5))
def test_family_matches_oracles(seed, app, n, m):
    m = min(m, 2 ** n)
    inst = random_instance(seed, n, m, app)
    fam = inst.family
    rng = np.random.default_rng(seed)
    S = [e for e in range(n) if rng.random() < 0.5]
    res = fam.residual_all(S)
    for i in range(m):
        assert res[i] == pytest.approx(1 - float(inst.oracle(i)(S)), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), app=st.sampled_from(["odt", "godt", "ecd", "drd", "mir"]))
def test_residual_after_matches_residual_all(seed, app):
    inst = random_instance(seed, 4, 4, app)
    state = root_state(inst)
    cands = np.arange(inst.n_elements)
    after = inst.family.residual_after(state, state.alive, cands)
    for k, e in enumerate(cands):
        assert np.allclose(after[:, k], inst.family.residual_all([e])[state.alive])
