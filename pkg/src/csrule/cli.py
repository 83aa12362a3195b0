"""Command-line driver.

Exit codes: 0 success, 1 parse/validation error or failed check,
2 infeasible polytope or assignment, 3 no exact lottery exists,
4 enumeration guard exceeded.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .audit import (
    check_promises,
    envy_report,
    is_constrained_ordinally_efficient,
)
from .fileio import (
    FileFormatError,
    assignment_to_json,
    dump_json,
    load_instance,
    load_result,
    lottery_to_json,
    result_to_json,
)
from .lottery import bvn_decompose, constrained_decompose
from .mechanism import MechanismConfig, MechanismResult, TraceLevel, run
from .model import (
    DomainError,
    EmptyPolytopeError,
    GuardExceededError,
    Instance,
    InfeasibleAssignmentError,
    assignment_violations,
    cumulative,
    validate_instance,
)
from .oracles import EPS_AGENT_LIMIT, eps_reference, ps_eating

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_NOT_DECOMPOSABLE = 3
EXIT_GUARD = 4


def _err(msg: str) -> None:
    print(f"csrule: {msg}", file=sys.stderr)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_valid(path: str) -> Instance:
    inst = load_instance(path)
    problems = validate_instance(inst)
    if problems:
        raise FileFormatError("invalid instance:\n  " + "\n  ".join(map(str, problems)))
    return inst


def cmd_solve(args: argparse.Namespace) -> int:
    inst = _load_valid(args.instance)
    order = tuple(a.strip() for a in args.order.split(",")) if args.order else None
    cfg = MechanismConfig(order, TraceLevel.FULL if args.trace else TraceLevel.FINAL)
    try:
        result = run(inst, cfg)
    except EmptyPolytopeError:
        _err("empty constraint polytope")
        return EXIT_INFEASIBLE
    doc = result_to_json(result, trace=args.trace,
                         efficiency=is_constrained_ordinally_efficient(inst, result.assignment),
                         envy=envy_report(inst, result.assignment))
    _emit(dump_json(doc), args.out)
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    inst = _load_valid(args.instance)
    x, promises = load_result(args.result, inst)
    problems = assignment_violations(inst, x)
    if problems:
        _err("infeasible assignment:\n  " + "\n  ".join(problems))
        return EXIT_INFEASIBLE
    eff = is_constrained_ordinally_efficient(inst, x)
    envy = envy_report(inst, x)
    promised = check_promises(MechanismResult(inst, x, (), tuple(promises)))
    doc = {
        "efficient": eff.efficient,
        "slack": str(eff.slack),
        "envy": [{"envious": v.envious, "envied": v.envied, "level": v.level, "deficit": str(v.deficit)}
                 for v in envy.violations],
        "promises_hold": promised,
    }
    if eff.witness is not None:
        doc["witness"] = assignment_to_json(eff.witness)
    sys.stdout.write(dump_json({"audit": doc}))
    if eff.efficient and envy.envy_free and promised:
        return EXIT_OK
    _err("audit failed")
    return EXIT_INPUT


def cmd_decompose(args: argparse.Namespace) -> int:
    inst = _load_valid(args.instance)
    x, _ = load_result(args.result, inst)
    try:
        if args.mode == "bvn":
            lottery = bvn_decompose(x, inst.quotas)
        else:
            lottery = constrained_decompose(x, inst.constraints, inst.quotas)
    except GuardExceededError as exc:
        _err(str(exc))
        return EXIT_GUARD
    if lottery is None:
        _err("no lottery over feasible deterministic assignments has this expectation")
        return EXIT_NOT_DECOMPOSABLE
    _emit(dump_json({"lottery": lottery_to_json(lottery)}), args.out)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    inst = _load_valid(args.instance)
    if len(inst.constraints):
        _err("oracle comparison requires unconstrained instance")
        return EXIT_INPUT
    strict = all(inst.preferences[a].is_strict for a in inst.agents)
    if strict:
        oracle_name, oracle = "ps_eating", ps_eating
    else:
        if any(q != 1 for q in inst.quotas.values()):
            _err("weak-preference comparison requires unit quotas")
            return EXIT_INPUT
        if inst.n > EPS_AGENT_LIMIT:
            _err(f"weak-preference comparison supports at most {EPS_AGENT_LIMIT} agents")
            return EXIT_INPUT
        oracle_name, oracle = "eps_reference", eps_reference
    mech = run(inst).assignment
    ref = oracle(inst)
    diffs = []
    for a in inst.agents:
        for lvl in range(1, inst.depth(a) + 1):
            s = inst.top(a, lvl)
            u, v = cumulative(mech, a, s), cumulative(ref, a, s)
            if u != v:
                diffs.append({"agent": a, "level": lvl, "mechanism": str(u), "oracle": str(v)})
    sys.stdout.write(dump_json({"oracle": oracle_name, "match": not diffs, "differences": diffs}))
    return EXIT_OK if not diffs else EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="csrule", description="Constrained serial rule in exact arithmetic.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run the mechanism on an instance file")
    s.add_argument("instance")
    s.add_argument("--order", help="comma-separated agent ids: bottleneck removal order")
    s.add_argument("--trace", action="store_true", help="include thresholds and per-round LP points")
    s.add_argument("--out", help="write the result here instead of stdout")
    s.set_defaults(func=cmd_solve)

    a = sub.add_parser("audit", help="certify efficiency, same-type envy-freeness and promises")
    a.add_argument("instance")
    a.add_argument("result")
    a.set_defaults(func=cmd_audit)

    d = sub.add_parser("decompose", help="write a result's assignment as a lottery")
    d.add_argument("instance")
    d.add_argument("result")
    d.add_argument("--mode", choices=("bvn", "exact"), default="bvn")
    d.add_argument("--out")
    d.set_defaults(func=cmd_decompose)

    c = sub.add_parser("compare", help="compare with the PS / EPS reference on an unconstrained instance")
    c.add_argument("instance")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleAssignmentError as exc:
        _err(str(exc))
        return EXIT_INFEASIBLE
    except (DomainError, OSError) as exc:
        _err(str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
