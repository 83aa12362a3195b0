"""The constrained serial rule.

Each round maximizes the smallest cumulative share any agent gets from its
current top indifference classes, subject to feasibility and to all earlier
promises. A minimal bottleneck set of agents that pins that optimum is then
promised its share, and those agents move one indifference class down. The
run stops once every agent can be given share 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Collection, Iterable, Mapping, Sequence

from .model import (
    Assignment,
    DomainError,
    EmptyPolytopeError,
    Instance,
    Promise,
    validate_instance,
)
from .polytope import add_promise_rows, assignment_lp, read_assignment, top_coeffs
from .ratlp import LinearProgram, Sense, Status, solve

__all__ = [
    "TraceLevel",
    "MechanismConfig",
    "RoundTrace",
    "MechanismResult",
    "build_round_lp",
    "round_value",
    "find_bottleneck",
    "run",
]

LAMBDA = ("lambda",)


def hvar(agent: str) -> tuple[str, str]:
    return ("h", agent)


class TraceLevel(enum.Enum):
    FULL = "full"    # keep every round's LP point
    FINAL = "final"  # keep only the final round's LP point


@dataclass(frozen=True)
class MechanismConfig:
    removal_order: tuple[str, ...] | None = None
    trace_level: TraceLevel = TraceLevel.FULL

    def order_for(self, inst: Instance) -> tuple[str, ...]:
        if self.removal_order is None:
            return inst.agents
        order = tuple(self.removal_order)
        if sorted(order) != sorted(inst.agents):
            raise DomainError(f"removal order {order} is not a permutation of the agents")
        return order


@dataclass(frozen=True)
class RoundTrace:
    round: int
    thresholds: Mapping[str, int]
    lambda_: Fraction
    bottleneck: frozenset[str]
    promises_before: tuple[Promise, ...]
    promises_added: tuple[Promise, ...]
    lp_solves: int
    lp_point: Assignment | None = None

    @property
    def terminal(self) -> bool:
        return self.lambda_ == 1


@dataclass(frozen=True)
class MechanismResult:
    instance: Instance
    assignment: Assignment
    rounds: tuple[RoundTrace, ...]
    final_promises: tuple[Promise, ...] = field(default=())

    @property
    def lambdas(self) -> list[Fraction]:
        return [r.lambda_ for r in self.rounds]

    @property
    def bottlenecks(self) -> list[frozenset[str]]:
        return [r.bottleneck for r in self.rounds if not r.terminal]


def _check_round_inputs(inst: Instance, s: Collection[str], f: Iterable[Promise],
                        thresholds: Mapping[str, int]) -> None:
    for i in inst.agents:
        lvl = thresholds.get(i)
        if lvl is None or not 1 <= lvl <= inst.depth(i):
            raise DomainError(f"threshold for agent {i!r} is {lvl!r}, needs 1..{inst.depth(i)}")
    unknown = set(s) - set(inst.agents)
    if unknown:
        raise DomainError(f"unknown agents {sorted(unknown)}")
    for p in f:
        if p.agent not in inst.agent_index or not 1 <= p.level <= inst.depth(p.agent):
            raise DomainError(f"invalid promise {p}")


def build_round_lp(inst: Instance, s: Collection[str], f: Iterable[Promise],
                   thresholds: Mapping[str, int]) -> LinearProgram:
    """LP(s, f, thresholds): maximize lambda with h_i >= lambda for i in s.

    When ``s`` is empty lambda is capped at 1, the value it would take if
    any agent were still listed.
    """
    f = tuple(f)
    _check_round_inputs(inst, s, f, thresholds)
    lp = assignment_lp(inst, [hvar(i) for i in inst.agents] + [LAMBDA])
    lp.objective[LAMBDA] = Fraction(1)
    for i in inst.agents:
        if i in s:
            lp.add_row({hvar(i): Fraction(1), LAMBDA: Fraction(-1)}, Sense.GE, 0)
    for i in inst.agents:
        coeffs = top_coeffs(inst, i, thresholds[i])
        coeffs[hvar(i)] = Fraction(-1)
        lp.add_row(coeffs, Sense.GE, 0)
    add_promise_rows(lp, inst, f)
    if not s:
        lp.add_row({LAMBDA: Fraction(1)}, Sense.LE, 1)
    return lp


def round_value(inst: Instance, s: Collection[str], f: Iterable[Promise],
                thresholds: Mapping[str, int]) -> Fraction:
    out = solve(build_round_lp(inst, s, f, thresholds))
    if out.status is not Status.OPTIMAL:
        raise EmptyPolytopeError(f"round LP is {out.status.value}")
    return out.value


def _bottleneck(inst: Instance, f: Sequence[Promise], thresholds: Mapping[str, int],
                lambda_t: Fraction, order: Sequence[str]) -> tuple[frozenset[str], int]:
    members = set(inst.agents)
    solves = 0
    for i in order:
        rest = members - {i}
        if thresholds[i] == inst.depth(i) and rest:
            # h_i can always reach 1 >= lambda, so dropping i leaves the LP's
            # optimum unchanged; no solve needed.
            members = rest
            continue
        solves += 1
        if round_value(inst, rest, f, thresholds) == lambda_t:
            members = rest
    return frozenset(members), solves


def find_bottleneck(inst: Instance, f: Sequence[Promise], thresholds: Mapping[str, int],
                    lambda_t: Fraction, cfg: MechanismConfig = MechanismConfig()) -> frozenset[str]:
    """Minimal agent set whose LP optimum is still ``lambda_t``.

    Agents are tried for removal in ``cfg.removal_order``.
    """
    if lambda_t >= 1:
        raise DomainError("bottleneck search needs lambda_t < 1")
    members, _ = _bottleneck(inst, tuple(f), thresholds, lambda_t, cfg.order_for(inst))
    if not members:
        raise DomainError("empty bottleneck set; lambda_t is not the round optimum")
    return members


def run(inst: Instance, cfg: MechanismConfig = MechanismConfig()) -> MechanismResult:
    problems = validate_instance(inst)
    if problems:
        raise DomainError("invalid instance: " + "; ".join(map(str, problems)))
    order = cfg.order_for(inst)
    thresholds = {i: 1 for i in inst.agents}
    promises: list[Promise] = []
    rounds: list[RoundTrace] = []
    limit = inst.n * inst.rho
    for t in range(1, limit + 1):
        out = solve(build_round_lp(inst, inst.agents, promises, thresholds))
        if out.status is not Status.OPTIMAL:
            # Later rounds stay feasible because the previous optimum remains
            # feasible; only the first LP can fail.
            raise EmptyPolytopeError("empty constraint polytope")
        lam = out.value
        x_t = read_assignment(inst, out.point)
        keep_point = cfg.trace_level is TraceLevel.FULL
        if lam == 1:
            rounds.append(RoundTrace(t, dict(thresholds), lam, frozenset(), tuple(promises),
                                     (), 1, x_t))
            return MechanismResult(inst, x_t, tuple(rounds), tuple(promises))
        b_set, solves = _bottleneck(inst, promises, thresholds, lam, order)
        added = tuple(Promise(i, thresholds[i], lam) for i in inst.agents if i in b_set)
        rounds.append(RoundTrace(t, dict(thresholds), lam, b_set, tuple(promises), added,
                                 1 + solves, x_t if keep_point else None))
        promises.extend(added)
        for i in b_set:
            thresholds[i] += 1
    raise RuntimeError(f"no termination within {limit} rounds")
