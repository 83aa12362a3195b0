"""Certificates for efficiency, same-type envy-freeness and round-level optimality."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Collection, Iterable, Mapping

from .mechanism import MechanismResult
from .model import (
    Assignment,
    DomainError,
    Instance,
    InfeasibleAssignmentError,
    Promise,
    assignment_violations,
    cumulative,
)
from .polytope import add_promise_rows, assignment_lp, read_assignment, top_coeffs
from .ratlp import Sense, Status, solve

__all__ = [
    "EfficiencyCertificate",
    "EnvyViolation",
    "EnvyReport",
    "is_constrained_ordinally_efficient",
    "same_type",
    "type_classes",
    "envy_report",
    "check_promises",
    "check_no_improvement",
    "SnapshotContradiction",
]


class SnapshotContradiction(DomainError):
    """A round snapshot whose promise set is itself infeasible."""


@dataclass(frozen=True)
class EfficiencyCertificate:
    efficient: bool
    slack: Fraction
    witness: Assignment | None = None


def _require_feasible(inst: Instance, x: Assignment) -> None:
    problems = assignment_violations(inst, x)
    if problems:
        raise InfeasibleAssignmentError("; ".join(problems))


def is_constrained_ordinally_efficient(inst: Instance, x: Assignment) -> EfficiencyCertificate:
    """Look for a feasible x' that weakly sd-dominates x for every agent.

    The LP maximizes the total gain in cumulative shares over all agents and
    levels while forbidding any loss, so a positive optimum is exactly a
    dominating assignment.
    """
    _require_feasible(inst, x)
    lp = assignment_lp(inst)
    base = Fraction(0)
    for i in inst.agents:
        for lvl in range(1, inst.depth(i) + 1):
            coeffs = top_coeffs(inst, i, lvl)
            current = cumulative(x, i, inst.top(i, lvl))
            base += current
            lp.add_row(coeffs, Sense.GE, current)
            for v, c in coeffs.items():
                lp.objective[v] = lp.objective.get(v, Fraction(0)) + c
    out = solve(lp)
    if out.status is not Status.OPTIMAL:
        raise InfeasibleAssignmentError(f"dominance LP is {out.status.value}")
    slack = out.value - base
    if slack == 0:
        return EfficiencyCertificate(True, slack)
    return EfficiencyCertificate(False, slack, read_assignment(inst, out.point))


def same_type(inst: Instance, i: str, j: str) -> bool:
    """True iff i and j carry identical coefficients on every object in every
    user-supplied row (EQ rows are compared before any splitting)."""
    for a in (i, j):
        if a not in inst.agent_index:
            raise DomainError(f"unknown agent {a!r}")
    zero = Fraction(0)
    for row in inst.constraints.rows:
        for o in inst.objects:
            if row.terms.get((i, o), zero) != row.terms.get((j, o), zero):
                return False
    return True


def type_classes(inst: Instance) -> list[list[str]]:
    """Partition of the agents into same-type classes, in agent order."""
    classes: list[list[str]] = []
    for a in inst.agents:
        for c in classes:
            if same_type(inst, c[0], a):
                c.append(a)
                break
        else:
            classes.append([a])
    return classes


@dataclass(frozen=True)
class EnvyViolation:
    envious: str
    envied: str
    level: int
    deficit: Fraction


@dataclass(frozen=True)
class EnvyReport:
    violations: tuple[EnvyViolation, ...] = field(default=())

    @property
    def envy_free(self) -> bool:
        return not self.violations


def envy_report(inst: Instance, x: Assignment) -> EnvyReport:
    out = []
    for cls in type_classes(inst):
        for i in cls:
            for j in cls:
                if i == j:
                    continue
                for lvl in range(1, inst.depth(i) + 1):
                    s = inst.top(i, lvl)
                    own, other = cumulative(x, i, s), cumulative(x, j, s)
                    if own < other:
                        out.append(EnvyViolation(i, j, lvl, other - own))
    return EnvyReport(tuple(out))


def check_promises(result: MechanismResult, x: Assignment | None = None) -> bool:
    """Every final promise holds with equality in the result's assignment
    (or in ``x`` when given)."""
    inst = result.instance
    x = result.assignment if x is None else x
    return all(cumulative(x, p.agent, inst.top(p.agent, p.level)) == p.share
               for p in result.final_promises)


def check_no_improvement(inst: Instance, f: Iterable[Promise], thresholds: Mapping[str, int],
                         b_set: Collection[str], lambda_t: Fraction) -> bool:
    """No feasible y honours the promises in ``f``, gives every bottleneck agent
    at least ``lambda_t`` at its threshold, and gives one of them strictly more."""
    slack = {i: ("s", i) for i in inst.agents if i in b_set}
    lp = assignment_lp(inst, list(slack.values()))
    add_promise_rows(lp, inst, f)
    for i, s in slack.items():
        coeffs = top_coeffs(inst, i, thresholds[i])
        coeffs[s] = Fraction(-1)
        lp.add_row(coeffs, Sense.GE, lambda_t)
        lp.objective[s] = Fraction(1)
    out = solve(lp)
    if out.status is Status.INFEASIBLE:
        raise SnapshotContradiction("round snapshot admits no feasible assignment")
    if out.status is Status.UNBOUNDED:
        raise SnapshotContradiction("slack LP unbounded")
    return out.value == 0
