import json
from fractions import Fraction

import numpy as np
import pytest

from adsubrank.datasets import gen_syn, random_instance
from adsubrank.exceptions import FormatError, UnsupportedError
from adsubrank.formats import dump_instance, instance_from_dict, instance_to_dict, load_instance
from adsubrank.functions import ranking_function
from adsubrank.policy import build_policy


@pytest.mark.parametrize("app,symbols", [(a, g) for a in ("odt", "godt", "ecd", "drd") for g in (2, 3)]
                         + [("mir", 2)])
def test_round_trip(app, symbols, tmp_path):
    inst = random_instance(3, 5, 4, app, n_symbols=symbols)
    path = tmp_path / "inst.json"
    dump_instance(inst, path)
    back = load_instance(path)
    assert back.app == inst.app
    assert (back.feedback == inst.feedback).all()
    assert np.allclose(back.costs, inst.costs) and np.allclose(back.probs, inst.probs)
    assert build_policy(back).expected_cost() == pytest.approx(build_policy(inst).expected_cost())


def test_exact_probabilities_survive(tmp_path):
    inst = gen_syn(4)
    path = tmp_path / "syn.json"
    dump_instance(inst, path)
    assert load_instance(path).exact_probabilities() == inst.exact_probabilities()


def test_documented_example():
    doc = {"app": "mir", "costs": [1, 1, 2],
           "scenarios": [{"p": 0.5, "set": [0, 2], "K": 1}, {"p": "1/2", "set": [1], "K": 1}]}
    inst = instance_from_dict(doc)
    assert inst.payload["K"].tolist() == [1, 1]
    assert inst.interest_set(0) == {0, 2}


def test_unknown_app_rejected():
    with pytest.raises(FormatError, match="unknown app"):
        instance_from_dict({"app": "tsp", "costs": [1], "scenarios": [{"p": 1, "set": [0]}]})


@pytest.mark.parametrize("doc", [
    {"app": "mir", "costs": [1], "scenarios": [{"p": 1, "set": [0]}]},
    {"app": "odt", "costs": [1], "scenarios": [{"set": [0]}]},
    {"app": "odt", "costs": [1], "scenarios": [{"p": 1}]},
    {"app": "drd", "costs": [1], "scenarios": [{"p": 1, "set": [0]}]},
    {"app": "odt", "scenarios": []},
])
def test_malformed(doc):
    with pytest.raises(FormatError):
        instance_from_dict(doc)


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(FormatError):
        load_instance(path)


def test_code_only_apps_not_serializable():
    inst = ranking_function((1,), [lambda S: min(len(S), 1)], 2)
    with pytest.raises(UnsupportedError):
        instance_to_dict(inst)
