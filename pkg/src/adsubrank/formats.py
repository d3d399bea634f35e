"""JSON interchange format for instances.

::

    {"app": "mir",
     "costs": [1, 1, 2],
     "scenarios": [{"p": 0.5, "set": [0, 2], "K": 1},
                   {"p": 0.5, "set": [1], "K": 1}]}

Scenarios give either ``set`` (yes/no instances: the elements answering
yes) or ``feedback`` (one symbol id per element).  Application payload
rides on each scenario (``K`` for mir, ``t`` for godt, ``class`` for ecd);
decision regions are a top-level ``regions`` list.  Probabilities may be
numbers or rational strings such as ``"3/8"``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .exceptions import DataError, FormatError, UnsupportedError
from .families import NO, YES
from .model import BINARY_SYMBOLS, Instance

FILE_APPS = ("mir", "odt", "godt", "ecd", "drd")
_PER_SCENARIO = {"mir": "K", "godt": "t", "ecd": "class"}


def _prob(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise FormatError(f"{where}.p must be a number or a rational string")
    try:
        return Fraction(x) if isinstance(x, str) else x
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"{where}.p: cannot parse {x!r}") from None


def instance_from_dict(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise FormatError("instance document must be a JSON object")
    app = doc.get("app")
    if app not in FILE_APPS:
        raise FormatError(f"unknown app tag {app!r}; expected one of {', '.join(FILE_APPS)}")
    try:
        costs = np.asarray(doc["costs"], dtype=float)
        scenarios = doc["scenarios"]
    except KeyError as exc:
        raise FormatError(f"missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError):
        raise FormatError("costs must be an array of numbers") from None
    if costs.ndim != 1:
        raise FormatError("costs must be a flat array")
    n = len(costs)
    symbols = tuple(doc.get("symbols", BINARY_SYMBOLS))
    table = np.full((len(scenarios), n), NO, dtype=np.int8)
    probs, extra = [], []
    key = _PER_SCENARIO.get(app)
    for i, sc in enumerate(scenarios):
        where = f"scenarios[{i}]"
        if not isinstance(sc, dict) or "p" not in sc:
            raise FormatError(f"{where} needs a 'p' field")
        probs.append(_prob(sc["p"], where))
        if "set" in sc:
            if symbols != BINARY_SYMBOLS:
                raise FormatError(f"{where}: 'set' needs yes/no symbols")
            ids = [int(e) for e in sc["set"]]
            if any(not 0 <= e < n for e in ids):
                raise DataError(f"{where}.set has an element outside [0, {n})")
            table[i, ids] = YES
        elif "feedback" in sc:
            row = [int(g) for g in sc["feedback"]]
            if len(row) != n or any(not 0 <= g < len(symbols) for g in row):
                raise DataError(f"{where}.feedback must hold {n} symbol ids below {len(symbols)}")
            table[i] = row
        else:
            raise FormatError(f"{where} needs 'set' or 'feedback'")
        if key is not None:
            if key not in sc:
                raise FormatError(f"{where} needs {key!r} for app {app!r}")
            extra.append(int(sc[key]))
    payload = {}
    if key is not None:
        payload[key] = np.asarray(extra, dtype=np.int64)
    if app == "drd":
        if "regions" not in doc:
            raise FormatError("app 'drd' needs a top-level 'regions' array")
        payload["regions"] = [sorted(int(j) for j in r) for r in doc["regions"]]
    exact = None
    if all(isinstance(p, Fraction) for p in probs):
        exact = tuple(probs)
    return Instance(costs=costs, probs=[float(p) for p in probs], feedback=table, app=app,
                    payload=payload, symbols=symbols, exact_probs=exact)


def instance_to_dict(inst: Instance) -> dict:
    if inst.app not in FILE_APPS:
        raise UnsupportedError(f"app {inst.app!r} has no file representation")
    key = _PER_SCENARIO.get(inst.app)
    exact = inst.exact_probs
    scenarios = []
    for i in range(inst.m_scenarios):
        sc = {"p": str(Fraction(exact[i])) if exact is not None else float(inst.probs[i])}
        if inst.is_binary:
            sc["set"] = np.flatnonzero(inst.membership[i]).tolist()
        else:
            sc["feedback"] = inst.feedback[i].tolist()
        if key is not None:
            sc[key] = int(inst.payload[key][i])
        scenarios.append(sc)
    doc = {"app": inst.app, "costs": inst.costs.tolist(), "scenarios": scenarios}
    if not inst.is_binary:
        doc["symbols"] = list(inst.symbols)
    if inst.app == "drd":
        doc["regions"] = [sorted(int(j) for j in r) for r in inst.payload["regions"]]
    return doc


def load_instance(path) -> Instance:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc.msg})", exc.lineno) from None
    return instance_from_dict(doc)


def dump_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst)) + "\n")
