import io
import json
import subprocess
import sys

import pytest

from adsubrank.cli import main
from adsubrank.datasets import random_instance
from adsubrank.formats import dump_instance, load_instance


def test_gen_syn(tmp_path):
    out = tmp_path / "syn.json"
    assert main(["gen", "syn", "--k", "3", "--eps", "1/64", "-o", str(out)]) == 0
    inst = load_instance(out)
    assert (inst.m_scenarios, inst.n_elements) == (9, 5)


def test_gen_bad_eps(tmp_path):
    assert main(["gen", "syn", "--k", "3", "--eps", "1/2", "-o", str(tmp_path / "x.json")]) == 2


def test_ingest(tmp_path):
    data = tmp_path / "u.data"
    data.write_text("1\t1\t4\t0\n1\t2\t5\t0\n2\t2\t3\t0\n2\t3\t1\t0\n")
    out = tmp_path / "mir.json"
    assert main(["ingest", "ml100k", "--data", str(data), "--app", "mir", "-o", str(out)]) == 0
    assert load_instance(out).payload["K"].tolist() == [2, 1]


def test_ingest_bad_data(tmp_path):
    data = tmp_path / "u.data"
    data.write_text("1\t1\t4\t0\n1\t2\n")
    assert main(["ingest", "ml100k", "--data", str(data), "--app", "odt",
                 "-o", str(tmp_path / "o.json")]) == 3


def test_run_inline(tmp_path, capsys):
    inst = tmp_path / "i.json"
    dump_instance(random_instance(0, 5, 4, "odt"), inst)
    out = tmp_path / "r.csv"
    code = main(["run", "--instance", str(inst), "--alg", "adsub,exact-opt", "--seeds", "0",
                 "--out", str(out), "--no-timing"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3 and lines[1].split(",")[5] == "adsub"
    assert "exact-opt" in capsys.readouterr().out


def test_run_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"source": "syn:10", "algorithms": ["adsub"],
                               "output": str(tmp_path / "r.csv")}))
    assert main(["run", "--config", str(cfg)]) == 0
    assert (tmp_path / "r.csv").exists()


@pytest.mark.parametrize("doc", [{"source": "syn:10"}, {"source": "syn:10", "algorithms": ["x"]},
                                 {"source": "syn:10", "algorithms": ["adsub"], "extra": 1}])
def test_run_config_errors(tmp_path, doc):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(doc))
    assert main(["run", "--config", str(cfg)]) == 2


def test_run_missing_instance():
    assert main(["run", "--instance", "/nonexistent.json", "--alg", "adsub"]) == 3


def test_run_unknown_app(tmp_path):
    inst = tmp_path / "i.json"
    inst.write_text('{"app": "tsp", "costs": [1], "scenarios": [{"p": 1, "set": [0]}]}')
    assert main(["run", "--instance", str(inst), "--alg", "adsub"]) == 3


def test_oracle(capsys):
    assert main(["oracle", "--n", "5", "--m", "4", "--trials", "12", "--seed", "3"]) == 0
    assert "violations=0" in capsys.readouterr().out


def test_oracle_oversized():
    assert main(["oracle", "--n", "20", "--m", "4", "--trials", "1"]) == 2


def test_interactive(tmp_path, monkeypatch, capsys):
    inst = tmp_path / "i.json"
    inst.write_text('{"app": "odt", "costs": [1], "scenarios": '
                    '[{"p": 0.5, "set": [0]}, {"p": 0.5, "set": []}]}')
    monkeypatch.setattr(sys, "stdin", io.StringIO("yes\n"))
    assert main(["interactive", "--instance", str(inst)]) == 0
    assert "covered: scenarios [0]" in capsys.readouterr().out


def test_bad_arguments():
    assert main(["frobnicate"]) == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "s.json"
    proc = subprocess.run([sys.executable, "-m", "adsubrank", "gen", "syn", "--k", "2", "-o", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and out.exists()
