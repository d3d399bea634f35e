import io

import numpy as np
import pytest

from adsubrank.bench import (CSV_COLUMNS, ExperimentConfig, cmd_interactive, cmd_oracle_compare,
                             cmd_run, fingerprint, load_config, replay_transcript)
from adsubrank.datasets import gen_syn, random_instance
from adsubrank.exceptions import ConfigError, SizeError
from adsubrank.formats import dump_instance
from adsubrank.model import Instance
from adsubrank.policy import build_policy


def syn_cfg(**kw):
    kw.setdefault("source", "syn:6")
    kw.setdefault("algorithms", ["adsub", "odt-greedy"])
    return ExperimentConfig(**kw)


class TestConfig:
    @pytest.mark.parametrize("kw,field", [
        ({"algorithms": ["adsub", "bogus"]}, "algorithms[1]"),
        ({"algorithms": []}, "algorithms"),
        ({"distribution": "zipf"}, "distribution"),
        ({"seeds": []}, "seeds"),
        ({"seeds": [1.5]}, "seeds"),
        ({"source": "syn:x"}, "source"),
        ({"source": "ml100k"}, "app"),
        ({"ml_runs": 0}, "ml_runs"),
        ({"algorithms": ["adsub:3"]}, "algorithms[0]"),
    ])
    def test_field_paths(self, kw, field):
        with pytest.raises(ConfigError) as err:
            syn_cfg(**kw)
        assert err.value.field == field

    def test_unknown_field(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{"source": "syn:3", "algorithms": ["adsub"], "colour": 1}')
        with pytest.raises(ConfigError) as err:
            load_config(path)
        assert err.value.field == "colour"

    def test_hash_ignores_output(self):
        assert syn_cfg(output="a.csv").config_hash == syn_cfg(output="b.csv").config_hash
        assert syn_cfg().config_hash != syn_cfg(seeds=[1]).config_hash


class TestRun:
    def test_syn50(self):
        report = cmd_run(syn_cfg(source="syn:50"))
        assert report.cost("adsub") == pytest.approx(2.75, abs=1e-9)
        assert report.cost("odt-greedy") == pytest.approx(27.5, abs=1e-9)

    def test_matches_direct_policy(self, tmp_path):
        inst = random_instance(5, 6, 5, "ecd")
        path = tmp_path / "i.json"
        dump_instance(inst, path)
        report = cmd_run(ExperimentConfig(source=f"file:{path}", algorithms=["adsub"]))
        assert abs(report.cost("adsub") - build_policy(inst).expected_cost()) <= 1e-12

    def test_csv_byte_identical(self):
        a = cmd_run(syn_cfg(algorithms=["adsub", "ml:3", "random:2"], ml_runs=3, timing=False))
        b = cmd_run(syn_cfg(algorithms=["adsub", "ml:3", "random:2"], ml_runs=3, timing=False))
        assert a.csv_text() == b.csv_text()
        assert a.csv_text().splitlines()[0].split(",") == CSV_COLUMNS

    def test_rows_sorted(self):
        report = cmd_run(syn_cfg(seeds=[2, 1], distribution="powerlaw:2"))
        assert [(r["seed"], r["algorithm"]) for r in report.rows] == [
            (2, "adsub"), (2, "odt-greedy"), (1, "adsub"), (1, "odt-greedy")]

    def test_permutation_seeds_differ(self):
        report = cmd_run(syn_cfg(seeds=[0, 1], distribution="powerlaw:3", algorithms=["adsub"]))
        fps = {r["fingerprint"] for r in report.rows}
        assert len(fps) == 2

    def test_parallel_matches_serial(self):
        cfg = dict(seeds=[0, 1], distribution="powerlaw:2", timing=False)
        assert cmd_run(syn_cfg(workers=2, **cfg)).csv_text() == cmd_run(syn_cfg(**cfg)).csv_text()

    def test_exact_opt_size(self):
        with pytest.raises(SizeError):
            cmd_run(syn_cfg(source="syn:20", algorithms=["exact-opt"]))

    def test_outputs_written(self, tmp_path):
        cfg = syn_cfg(output=str(tmp_path / "r.csv"), json_output=str(tmp_path / "r.json"))
        cmd_run(cfg).write()
        assert (tmp_path / "r.csv").read_text().startswith("config_hash,")
        assert '"rows"' in (tmp_path / "r.json").read_text()

    def test_fingerprint_stable(self):
        assert fingerprint(gen_syn(5)) == fingerprint(gen_syn(5))
        assert fingerprint(gen_syn(5)) != fingerprint(gen_syn(6))


class TestOracle:
    def test_odt_dominance(self):
        summary = cmd_oracle_compare(5, 4, 200, seed=0, apps=("odt",), vary=False)
        assert summary.ok and min(t.ratio for t in summary.trials) >= 1 - 1e-12

    def test_single_mandatory_element(self):
        summary = cmd_oracle_compare(1, 1, 5, seed=0, apps=("mir",), vary=False)
        assert all(t.ratio == 1 for t in summary.trials)

    def test_mixed_mir(self):
        out = io.StringIO()
        summary = cmd_oracle_compare(6, 4, 30, seed=2, apps=("mir",), out=out)
        assert summary.ok
        assert "max_ratio=" in out.getvalue()

    def test_size_bounds(self):
        with pytest.raises(SizeError):
            cmd_oracle_compare(13, 4, 1)


def two_hypotheses():
    return Instance.binary([{0}, set()], 1, [0.5, 0.5], app="odt")


class TestInteractive:
    def test_identifies_in_one_step(self):
        out = io.StringIO()
        res = cmd_interactive(two_hypotheses(), "adsub", ["no"], out)
        assert res.outcome == "covered" and res.scenarios == [1]
        assert res.elements == [0]

    def test_matches_simulation(self):
        inst = random_instance(4, 6, 6, "odt")
        trie = build_policy(inst)
        for i, tr in trie.traces.items():
            answers = [inst.symbols[inst.feedback[i, e]] for e in tr.path]
            res = cmd_interactive(inst, "adsub", answers, io.StringIO())
            assert tuple(res.elements) == tr.path
            assert res.scenarios == [i]

    def test_no_compatible(self):
        inst = Instance(costs=np.ones(1), probs=[0.5, 0.5], feedback=[[0], [1]], app="odt",
                        symbols=("a", "b", "c"))
        out = io.StringIO()
        res = cmd_interactive(inst, "adsub", ["c"], out)
        assert res.outcome == "no-compatible"
        assert "no compatible scenario" in out.getvalue()

    def test_reprompt_and_undo(self):
        inst = random_instance(4, 6, 6, "odt")
        out = io.StringIO()
        first = cmd_interactive(inst, "adsub", ["maybe", "yes", "undo", "no"] + ["no"] * 6, out)
        assert "unknown answer 'maybe'" in out.getvalue()
        direct = cmd_interactive(inst, "adsub", ["no"] * 7, io.StringIO())
        assert first.elements == direct.elements

    def test_quit(self):
        res = cmd_interactive(random_instance(1, 5, 5, "odt"), "adsub", ["quit"], io.StringIO())
        assert res.outcome == "quit"

    @pytest.mark.parametrize("alg", ["adsub", "odt-greedy", "static", "adstatic", "random:1"])
    def test_transcript_replay(self, alg):
        inst = random_instance(6, 6, 5, "mir")
        answers = ["yes", "no", "yes", "yes", "no", "yes"] * 2
        first = cmd_interactive(inst, alg, answers, io.StringIO())
        assert replay_transcript(inst, alg, first.answers) == first.elements
