"""JSON instance and result files. Rationals are written as ``"p/q"`` strings."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .audit import EfficiencyCertificate, EnvyReport
from .lottery import Lottery
from .mechanism import MechanismResult, RoundTrace
from .model import (
    Assignment,
    Constraint,
    ConstraintSystem,
    DomainError,
    Instance,
    Promise,
    Sense,
    WeakOrder,
    as_fraction,
)

__all__ = [
    "FileFormatError",
    "parse_instance",
    "load_instance",
    "instance_to_json",
    "dump_json",
    "result_to_json",
    "parse_result",
    "load_result",
    "lottery_to_json",
    "assignment_to_json",
]


class FileFormatError(DomainError):
    pass


def fmt(q: Fraction) -> str:
    return str(Fraction(q))


def _need(doc: dict, key: str, kind: type) -> Any:
    if key not in doc:
        raise FileFormatError(f"missing key {key!r}")
    if not isinstance(doc[key], kind):
        raise FileFormatError(f"key {key!r} must be a {kind.__name__}")
    return doc[key]


def _rational(value: Any, where: str) -> Fraction:
    try:
        return as_fraction(value)
    except DomainError as exc:
        raise FileFormatError(f"{where}: {exc}") from exc


def parse_instance(doc: Any) -> Instance:
    if not isinstance(doc, dict):
        raise FileFormatError("instance must be a JSON object")
    agents = [str(a) for a in _need(doc, "agents", list)]
    objects, quotas = [], {}
    for k, entry in enumerate(_need(doc, "objects", list)):
        if not isinstance(entry, dict) or "id" not in entry:
            raise FileFormatError(f"objects[{k}] must be an object with an 'id'")
        oid = str(entry["id"])
        objects.append(oid)
        quotas[oid] = entry.get("quota", 1)
    prefs = {}
    for a, classes in _need(doc, "preferences", dict).items():
        if not isinstance(classes, list) or not all(isinstance(c, list) for c in classes):
            raise FileFormatError(f"preferences[{a!r}] must be a list of lists")
        prefs[str(a)] = WeakOrder.from_lists([[str(o) for o in c] for c in classes])
    rows = []
    for k, row in enumerate(doc.get("constraints", [])):
        if not isinstance(row, dict):
            raise FileFormatError(f"constraints[{k}] must be an object")
        terms: dict[tuple[str, str], Fraction] = {}
        for t in _need(row, "terms", list):
            if not isinstance(t, list) or len(t) != 3:
                raise FileFormatError(f"constraints[{k}]: each term is [agent, object, coeff]")
            key = (str(t[0]), str(t[1]))
            terms[key] = terms.get(key, Fraction(0)) + _rational(t[2], f"constraints[{k}]")
        try:
            sense = Sense.parse(str(_need(row, "sense", str)))
        except ValueError as exc:
            raise FileFormatError(f"constraints[{k}]: {exc}") from exc
        rows.append(Constraint(terms, sense, _rational(row.get("rhs"), f"constraints[{k}] rhs")))
    return Instance(tuple(agents), tuple(objects), quotas, prefs, ConstraintSystem(tuple(rows)))


def load_instance(path: str | Path) -> Instance:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    return parse_instance(doc)


def instance_to_json(inst: Instance) -> dict:
    def ordered(cls):
        return [o for o in inst.objects if o in cls] + sorted(o for o in cls if o not in inst.object_index)

    return {
        "agents": list(inst.agents),
        "objects": [{"id": o, "quota": inst.quotas[o]} for o in inst.objects],
        "preferences": {a: [ordered(c) for c in inst.preferences[a].classes] for a in inst.agents},
        "constraints": [
            {"terms": [[i, o, fmt(c)] for (i, o), c in row.terms.items()],
             "sense": row.sense.value, "rhs": fmt(row.rhs)}
            for row in inst.constraints.rows
        ],
    }


def assignment_to_json(x: Assignment) -> dict:
    return {a: {o: fmt(v) for o, v in x.row(a).items()} for a in x.agents}


def _promise_json(p: Promise) -> dict:
    return {"agent": p.agent, "level": p.level, "share": fmt(p.share)}


def _round_json(r: RoundTrace, agents, trace: bool) -> dict:
    doc = {
        "round": r.round,
        "lambda": fmt(r.lambda_),
        "bottleneck": [a for a in agents if a in r.bottleneck],
        "promises": [_promise_json(p) for p in r.promises_added],
        "lp_solves": r.lp_solves,
    }
    if trace:
        doc["thresholds"] = {a: r.thresholds[a] for a in agents}
        if r.lp_point is not None:
            doc["lp_point"] = assignment_to_json(r.lp_point)
    return doc


def result_to_json(result: MechanismResult, *, trace: bool = False,
                   efficiency: EfficiencyCertificate | None = None,
                   envy: EnvyReport | None = None,
                   lottery: Lottery | None = None) -> dict:
    agents = result.instance.agents
    doc: dict[str, Any] = {
        "assignment": assignment_to_json(result.assignment),
        "rounds": [_round_json(r, agents, trace) for r in result.rounds],
    }
    if efficiency is not None or envy is not None:
        audit: dict[str, Any] = {}
        if efficiency is not None:
            audit["efficient"] = efficiency.efficient
            audit["slack"] = fmt(efficiency.slack)
        if envy is not None:
            audit["envy"] = [
                {"envious": v.envious, "envied": v.envied, "level": v.level, "deficit": fmt(v.deficit)}
                for v in envy.violations
            ]
        doc["audit"] = audit
    if lottery is not None:
        doc["lottery"] = lottery_to_json(lottery)
    return doc


def lottery_to_json(lottery: Lottery) -> list[dict]:
    out = []
    for e in lottery.entries:
        picks = {a: next(o for o, v in e.deterministic.row(a).items() if v == 1)
                 for a in e.deterministic.agents}
        out.append({"weight": fmt(e.weight), "assignment": picks})
    return out


def parse_result(doc: Any, inst: Instance) -> tuple[Assignment, list[Promise]]:
    """Assignment and the promises recorded across all rounds."""
    if not isinstance(doc, dict):
        raise FileFormatError("result must be a JSON object")
    shares = _need(doc, "assignment", dict)
    unknown = set(shares) - set(inst.agents)
    if unknown:
        raise FileFormatError(f"assignment names unknown agents {sorted(unknown)}")
    for a, row in shares.items():
        if not isinstance(row, dict):
            raise FileFormatError(f"assignment[{a!r}] must be an object")
        bad = set(row) - set(inst.objects)
        if bad:
            raise FileFormatError(f"assignment[{a!r}] names unknown objects {sorted(bad)}")
    x = Assignment(inst.agents, inst.objects,
                   [[_rational(shares.get(a, {}).get(o, 0), f"assignment[{a}][{o}]")
                     for o in inst.objects] for a in inst.agents])
    promises = []
    for r in doc.get("rounds", []):
        for p in r.get("promises", []):
            promises.append(Promise(str(p["agent"]), int(p["level"]), _rational(p["share"], "promise share")))
    return x, promises


def load_result(path: str | Path, inst: Instance) -> tuple[Assignment, list[Promise]]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    return parse_result(doc, inst)


def dump_json(doc: Any) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
