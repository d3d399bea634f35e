"""Experiment harness: configs, the algorithm registry, reports, oracle runs and
interactive sessions.

Randomness flows from ``master_seed`` through named substreams so that the
distribution, the threshold draws, the clustering and the ml sampler can
each be varied on their own.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from .baselines import (AdStaticPolicy, MLPolicy, RandomPolicy, exact_opt_oracle, kmeans_cluster,
                        odt_greedy_select, static_rank)
from .datasets import (SynParams, default_ml100k_path, gen_syn, ingest_movielens,
                       mir_instance_from_ratings, odt_instance_from_ratings, permute_probs,
                       powerlaw_probs, random_instance)
from .exceptions import ConfigError, SizeError
from .formats import load_instance
from .model import Instance, advance_state, root_state
from .policy import build_policy, select_next
from .trie import expected_cost

STREAMS = {"distribution": 1, "thresholds": 2, "ml": 3, "kmeans": 4}
CSV_COLUMNS = ["config_hash", "dataset", "app", "distribution", "seed", "algorithm",
               "expected_cost", "wall_ms"]
ALGORITHMS = ("adsub", "odt-greedy", "ml", "static", "adstatic", "exact-opt", "random")


def substream_seed(master, name, count=1):
    """``count`` 32-bit seeds from the named substream of ``master``."""
    ss = np.random.SeedSequence([int(master), STREAMS[name]])
    return [int(x) for x in ss.generate_state(count)]


# -- configuration ----------------------------------------------------------

@dataclass
class ExperimentConfig:
    source: str
    algorithms: list
    app: str | None = None
    data: str | None = None
    threshold_rule: str | None = None
    eps: str | None = None
    distribution: str = "native"
    seeds: list = field(default_factory=lambda: [0])
    master_seed: int = 0
    ml_runs: int = 25
    ml_clusters: int = 10
    output: str | None = None
    json_output: str | None = None
    workers: int = 1
    timing: bool = True

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        for key in doc:
            if key not in known:
                raise ConfigError(key, "unknown field")
        for key in ("source", "algorithms"):
            if key not in doc:
                raise ConfigError(key, "required field missing")
        return cls(**doc)

    def validate(self):
        src = self.source
        if not isinstance(src, str):
            raise ConfigError("source", "must be a string")
        if src.startswith("syn:"):
            try:
                if int(src[4:]) < 1:
                    raise ValueError
            except ValueError:
                raise ConfigError("source", f"bad SYN size in {src!r}") from None
        elif src == "ml100k":
            if self.app not in ("mir", "odt"):
                raise ConfigError("app", "ml100k needs app 'mir' or 'odt'")
        elif not src.startswith("file:"):
            raise ConfigError("source", f"expected syn:<k>, ml100k or file:<path>, got {src!r}")
        if not isinstance(self.algorithms, list) or not self.algorithms:
            raise ConfigError("algorithms", "must be a non-empty list")
        for k, alg in enumerate(self.algorithms):
            try:
                parse_algorithm(alg)
            except ValueError as exc:
                raise ConfigError(f"algorithms[{k}]", str(exc)) from None
        try:
            parse_distribution(self.distribution)
        except ValueError as exc:
            raise ConfigError("distribution", str(exc)) from None
        if not isinstance(self.seeds, list) or not self.seeds or \
                not all(isinstance(s, int) and not isinstance(s, bool) for s in self.seeds):
            raise ConfigError("seeds", "must be a non-empty list of integers")
        for name in ("ml_runs", "ml_clusters", "workers"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(name, "must be a positive integer")
        if not isinstance(self.master_seed, int):
            raise ConfigError("master_seed", "must be an integer")
        if self.eps is not None:
            try:
                Fraction(self.eps)
            except (ValueError, ZeroDivisionError):
                raise ConfigError("eps", f"not a rational number: {self.eps!r}") from None

    def canonical(self):
        doc = asdict(self)
        for key in ("output", "json_output", "workers", "timing"):
            doc.pop(key)
        return json.dumps(doc, sort_keys=True)

    @property
    def config_hash(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:12]

    @property
    def dataset(self):
        if self.source.startswith("syn:"):
            return "syn-" + self.source[4:]
        if self.source.startswith("file:"):
            return Path(self.source[5:]).stem
        return self.source


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return ExperimentConfig.from_dict(doc)


def parse_algorithm(alg_id):
    """Split ``"ml:10"`` into ``("ml", 10)``; bare ids get ``None``."""
    if not isinstance(alg_id, str):
        raise ValueError(f"algorithm id must be a string, got {alg_id!r}")
    name, _, arg = alg_id.partition(":")
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {alg_id!r}")
    if not arg:
        return name, None
    if name not in ("ml", "random"):
        raise ValueError(f"algorithm {name!r} takes no argument")
    try:
        return name, int(arg)
    except ValueError:
        raise ValueError(f"bad argument in {alg_id!r}") from None


def parse_distribution(spec):
    if spec in ("native", "uniform"):
        return spec, None
    if isinstance(spec, str) and spec.startswith("powerlaw:"):
        try:
            alpha = float(spec[9:])
        except ValueError:
            raise ValueError(f"bad exponent in {spec!r}") from None
        if alpha < 1:
            raise ValueError("power-law exponent must be >= 1")
        return "powerlaw", alpha
    raise ValueError(f"expected native, uniform or powerlaw:<alpha>, got {spec!r}")


# -- instances --------------------------------------------------------------

@lru_cache(maxsize=4)
def _ratings(path):
    return ingest_movielens(path)


def base_instance(cfg: ExperimentConfig) -> Instance:
    """Instance with its native probabilities (before any redistribution)."""
    if cfg.source.startswith("syn:"):
        eps = Fraction(cfg.eps) if cfg.eps is not None else None
        return gen_syn(SynParams(int(cfg.source[4:]), eps))
    if cfg.source.startswith("file:"):
        return load_instance(cfg.source[5:])
    matrix = _ratings(str(cfg.data or default_ml100k_path()))
    seed = substream_seed(cfg.master_seed, "thresholds")[0]
    if cfg.app == "mir":
        return mir_instance_from_ratings(matrix, K_rule=cfg.threshold_rule or "full", seed=seed)
    return odt_instance_from_ratings(matrix, t_rule=cfg.threshold_rule or "1", seed=seed)


def instance_for_seed(cfg: ExperimentConfig, base: Instance, seed: int) -> Instance:
    kind, alpha = parse_distribution(cfg.distribution)
    if kind == "native":
        return base
    m = base.m_scenarios
    if kind == "uniform":
        return base.with_probs(np.full(m, 1.0 / m), exact=(Fraction(1, m),) * m)
    draw = substream_seed(cfg.master_seed, "distribution")[0]
    return base.with_probs(permute_probs(powerlaw_probs(m, alpha, draw), seed))


def fingerprint(inst: Instance) -> str:
    h = hashlib.sha256()
    h.update(inst.app.encode())
    for arr in (inst.costs, inst.probs, inst.feedback):
        h.update(np.ascontiguousarray(arr).tobytes())
    h.update(json.dumps({k: np.asarray(v).tolist() if not isinstance(v, list) else v
                         for k, v in sorted(inst.payload.items())}).encode())
    return h.hexdigest()[:16]


# -- algorithms -------------------------------------------------------------

def make_selector(alg_id, inst: Instance, seed=0, kmeans_seed=0, clusters=10):
    """Selector ``(state, inst) -> element`` for a registry id.

    ``static`` returns a fixed ranking instead (a sequence of elements).
    """
    name, arg = parse_algorithm(alg_id)
    if name == "adsub":
        return select_next
    if name == "odt-greedy":
        return odt_greedy_select
    if name == "ml":
        model = kmeans_cluster(inst, min(arg or clusters, inst.n_elements), kmeans_seed)
        return MLPolicy(model, seed)
    if name == "static":
        return static_rank(inst)
    if name == "adstatic":
        return AdStaticPolicy(static_rank(inst), inst)
    if name == "random":
        return RandomPolicy(seed if arg is None else arg)
    return exact_opt_oracle(inst).selector


def run_algorithm(alg_id, inst: Instance, seed=0, kmeans_seed=0, clusters=10) -> float:
    name, _ = parse_algorithm(alg_id)
    if name == "adsub":
        return build_policy(inst).expected_cost()
    if name == "exact-opt":
        return float(exact_opt_oracle(inst).cost)
    return expected_cost(make_selector(alg_id, inst, seed, kmeans_seed, clusters), inst)


def _run_task(cfg_doc, seed, alg_id):
    cfg = ExperimentConfig(**cfg_doc)
    inst = instance_for_seed(cfg, _cached_base(json.dumps(cfg_doc, sort_keys=True)), seed)
    name, _ = parse_algorithm(alg_id)
    t0 = time.perf_counter()
    if name == "ml":
        ml_seeds = substream_seed(cfg.master_seed, "ml", cfg.ml_runs)
        km_seeds = substream_seed(cfg.master_seed, "kmeans", cfg.ml_runs)
        runs = [run_algorithm(alg_id, inst, s, k, cfg.ml_clusters) for s, k in zip(ml_seeds, km_seeds)]
    else:
        runs = [run_algorithm(alg_id, inst, seed, 0, cfg.ml_clusters)]
    wall = (time.perf_counter() - t0) * 1000.0
    return {"seed": seed, "algorithm": alg_id, "expected_cost": float(np.mean(runs)),
            "runs": runs, "wall_ms": wall, "fingerprint": fingerprint(inst)}


@lru_cache(maxsize=2)
def _cached_base(cfg_json):
    return base_instance(ExperimentConfig(**json.loads(cfg_json)))


# -- reports ----------------------------------------------------------------

@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            wall = f"{r['wall_ms']:.0f}" if self.config.timing else "0"
            w.writerow([self.config.config_hash, self.config.dataset, r["app"],
                        self.config.distribution, r["seed"], r["algorithm"],
                        repr(r["expected_cost"]), wall])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [dict(r) for r in self.rows]
        if not self.config.timing:
            for r in rows:
                r["wall_ms"] = 0
        return json.dumps({"config": json.loads(self.config.canonical()),
                           "config_hash": self.config.config_hash, "rows": rows}, indent=2)

    def table(self) -> str:
        algs = list(dict.fromkeys(r["algorithm"] for r in self.rows))
        seeds = list(dict.fromkeys(r["seed"] for r in self.rows))
        cost = {(r["seed"], r["algorithm"]): r["expected_cost"] for r in self.rows}
        width = max(10, *(len(a) + 2 for a in algs))
        lines = [f"{self.config.dataset}  {self.config.distribution}",
                 "seed".ljust(8) + "".join(a.rjust(width) for a in algs)]
        for s in seeds:
            lines.append(str(s).ljust(8) + "".join(f"{cost[s, a]:.3f}".rjust(width) for a in algs))
        return "\n".join(lines)

    def cost(self, alg_id, seed=None):
        for r in self.rows:
            if r["algorithm"] == alg_id and (seed is None or r["seed"] == seed):
                return r["expected_cost"]
        raise KeyError(alg_id)

    def write(self):
        if self.config.output:
            Path(self.config.output).write_text(self.csv_text())
        if self.config.json_output:
            Path(self.config.json_output).write_text(self.to_json() + "\n")


def cmd_run(cfg: ExperimentConfig) -> ExperimentReport:
    """Run every (seed, algorithm) pair of ``cfg`` and collect a report."""
    base = base_instance(cfg)
    if any(parse_algorithm(a)[0] == "exact-opt" for a in cfg.algorithms):
        exact_opt_size_check(base)
    doc = asdict(cfg)
    tasks = [(s, a) for s in cfg.seeds for a in cfg.algorithms]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_run_task, [doc] * len(tasks), *zip(*tasks)))
    else:
        _cached_base.cache_clear()
        results = [_run_task(doc, s, a) for s, a in tasks]
    order = {a: k for k, a in enumerate(cfg.algorithms)}
    for r in results:
        r["app"] = base.app
    results.sort(key=lambda r: (cfg.seeds.index(r["seed"]), order[r["algorithm"]]))
    return ExperimentReport(cfg, results)


def exact_opt_size_check(inst):
    from .baselines import MAX_OPT_ELEMENTS, MAX_OPT_SCENARIOS
    if inst.n_elements > MAX_OPT_ELEMENTS or inst.m_scenarios > MAX_OPT_SCENARIOS:
        raise SizeError(f"exact-opt needs n <= {MAX_OPT_ELEMENTS} and m <= {MAX_OPT_SCENARIOS}, "
                        f"instance has n={inst.n_elements}, m={inst.m_scenarios}")


# -- oracle comparison ------------------------------------------------------

@dataclass
class OracleTrial:
    app: str
    n: int
    m: int
    opt: float
    alg: float

    @property
    def ratio(self):
        return self.alg / self.opt if self.opt > 0 else 1.0


@dataclass
class OracleSummary:
    trials: list
    violations: list

    @property
    def max_ratio(self):
        return max(t.ratio for t in self.trials)

    @property
    def mean_ratio(self):
        return float(np.mean([t.ratio for t in self.trials]))

    @property
    def ok(self):
        return not self.violations


def cmd_oracle_compare(n, m, trials, seed=0, apps=("odt", "mir", "ecd"), vary=True,
                       tol=1e-9, out=None) -> OracleSummary:
    """Compare the greedy policy with the exact optimum on random instances.

    Trials cycle through ``apps``; with ``vary`` the sizes are drawn from
    ``[2, n]`` and ``[2, m]`` (ODT-style apps need ``m <= 2**n``).
    """
    from .baselines import MAX_OPT_ELEMENTS, MAX_OPT_SCENARIOS
    if not (1 <= n <= MAX_OPT_ELEMENTS and 1 <= m <= MAX_OPT_SCENARIOS):
        raise SizeError(f"oracle sizes limited to n <= {MAX_OPT_ELEMENTS}, m <= {MAX_OPT_SCENARIOS}")
    rng = np.random.default_rng(seed)
    done, bad = [], []
    for k in range(trials):
        app = apps[k % len(apps)]
        nn = int(rng.integers(min(2, n), n + 1)) if vary else n
        mm = int(rng.integers(min(2, m), m + 1)) if vary else m
        if app in ("odt", "godt", "ecd", "drd"):
            mm = max(2, min(mm, 2 ** nn)) if app != "ecd" else min(mm, 2 ** nn)
        inst = random_instance(rng, nn, mm, app)
        opt = float(exact_opt_oracle(inst).cost)
        alg = build_policy(inst).expected_cost()
        trial = OracleTrial(app, nn, mm, opt, alg)
        done.append(trial)
        if alg < opt - tol:
            bad.append(trial)
        if out is not None:
            print(f"trial {k:4d} {app:4s} n={nn} m={mm} opt={opt:.6f} adsub={alg:.6f} "
                  f"ratio={trial.ratio:.4f}", file=out)
    summary = OracleSummary(done, bad)
    if out is not None:
        print(f"trials={len(done)} max_ratio={summary.max_ratio:.4f} "
              f"mean_ratio={summary.mean_ratio:.4f} violations={len(bad)}", file=out)
    return summary


# -- interactive sessions ---------------------------------------------------

@dataclass
class SessionResult:
    elements: list
    answers: list
    outcome: str            # "covered", "no-compatible", "quit", "eof"
    scenarios: list = field(default_factory=list)


def cmd_interactive(inst: Instance, alg_id="adsub", lines=None, out=None) -> SessionResult:
    """Ask for feedback on one element at a time until the respondent is covered.

    ``lines`` is an iterator of answer lines (default stdin): a symbol name
    or id, ``undo`` to take back the last answer, or ``quit``.  Anything
    else is re-asked.
    """
    name, _ = parse_algorithm(alg_id)
    if name == "static":
        rank = static_rank(inst)
        selector = lambda state, _inst: int(rank[len(state.displayed)])  # noqa: E731
    else:
        selector = make_selector(alg_id, inst)
    lines = iter(sys.stdin if lines is None else lines)
    out = sys.stdout if out is None else out
    lookup = {s: g for g, s in enumerate(inst.symbols)}
    lookup.update({str(g): g for g in range(inst.n_symbols)})
    stack = [root_state(inst)]
    picks, answers = [], []

    def finish(outcome, scen):
        if outcome == "covered":
            print(f"covered: scenarios {scen}", file=out)
        elif outcome == "no-compatible":
            print("no compatible scenario", file=out)
        return SessionResult(list(picks), list(answers), outcome, scen)

    while True:
        state = stack[-1]
        if len(state.alive) == 0:
            return finish("covered", np.flatnonzero(state.compatible).tolist())
        e = int(selector(state, inst))
        print(f"element {e} (cost {inst.costs[e]:g})? [{'/'.join(inst.symbols)}]", file=out)
        while True:
            try:
                reply = next(lines).strip()
            except StopIteration:
                return finish("eof", [])
            if reply == "quit":
                return finish("quit", [])
            if reply == "undo":
                if len(stack) > 1:
                    stack.pop()
                    picks.pop()
                    answers.pop()
                else:
                    print("nothing to undo", file=out)
                break
            if reply not in lookup:
                print(f"unknown answer {reply!r}; expected one of {', '.join(inst.symbols)}", file=out)
                continue
            g = lookup[reply]
            picks.append(e)
            answers.append(inst.symbols[g])
            compat = state.compatible & (inst.feedback[:, e] == g)
            children = advance_state(state, e, inst)
            if g in children:
                stack.append(children[g])
                break
            if compat.any():
                return finish("covered", np.flatnonzero(compat).tolist())
            return finish("no-compatible", [])


def replay_transcript(inst: Instance, alg_id, transcript) -> list:
    """Element sequence produced by feeding the recorded answers back in."""
    return cmd_interactive(inst, alg_id, list(transcript), out=io.StringIO()).elements
