"""LP encoding of the feasible random-assignment polytope, shared by every LP builder."""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Iterable

from .model import Assignment, Instance, Promise
from .ratlp import LinearProgram, Sense

ONE = Fraction(1)


def xvar(agent: str, obj: str) -> tuple[str, str, str]:
    return ("x", agent, obj)


def assignment_lp(inst: Instance, extra_vars: Iterable[Hashable] = ()) -> LinearProgram:
    """LP with one variable per (agent, object), unit row sums, quota-capped
    columns and the instance's side constraints. Objective left empty."""
    xs = [xvar(i, o) for i in inst.agents for o in inst.objects]
    lp = LinearProgram(xs + list(extra_vars))
    for i in inst.agents:
        lp.add_row({xvar(i, o): ONE for o in inst.objects}, Sense.EQ, 1)
    for o in inst.objects:
        lp.add_row({xvar(i, o): ONE for i in inst.agents}, Sense.LE, inst.quotas[o])
    for row in inst.constraints.rows:
        coeffs: dict = {}
        for (i, o), c in row.terms.items():
            coeffs[xvar(i, o)] = coeffs.get(xvar(i, o), 0) + c
        lp.add_row(coeffs, row.sense, row.rhs)
    return lp


def top_coeffs(inst: Instance, agent: str, level: int) -> dict:
    return {xvar(agent, o): ONE for o in inst.top(agent, level)}


def add_promise_rows(lp: LinearProgram, inst: Instance, promises: Iterable[Promise]) -> None:
    for p in promises:
        lp.add_row(top_coeffs(inst, p.agent, p.level), Sense.GE, p.share)


def read_assignment(inst: Instance, point: dict) -> Assignment:
    return Assignment(inst.agents, inst.objects,
                      [[point[xvar(i, o)] for o in inst.objects] for i in inst.agents])
