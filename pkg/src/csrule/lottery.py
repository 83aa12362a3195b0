"""Writing random assignments as lotteries over deterministic assignments."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

from .model import (
    Assignment,
    ConstraintSystem,
    DomainError,
    GuardExceededError,
    Instance,
    WeakOrder,
    assignment_violations,
)
from .ratlp import LinearProgram, Sense, Status, solve

__all__ = [
    "LotteryEntry",
    "Lottery",
    "bvn_decompose",
    "constrained_decompose",
    "ENUMERATION_LIMIT",
]

# Bound on the raw number of agent -> object maps examined by constrained_decompose.
ENUMERATION_LIMIT = 200_000


@dataclass(frozen=True)
class LotteryEntry:
    weight: Fraction
    deterministic: Assignment


@dataclass(frozen=True)
class Lottery:
    entries: tuple[LotteryEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def total_weight(self) -> Fraction:
        return sum((e.weight for e in self.entries), Fraction(0))

    def expectation(self) -> Assignment:
        first = self.entries[0].deterministic
        rows = [[Fraction(0)] * len(first.objects) for _ in first.agents]
        for e in self.entries:
            for r, drow in enumerate(e.deterministic.values):
                for c, v in enumerate(drow):
                    if v:
                        rows[r][c] += e.weight * v
        return Assignment(first.agents, first.objects, rows)


def _shell(x: Assignment, quotas: Mapping[str, int]) -> Instance:
    prefs = {a: WeakOrder.from_lists([x.objects]) for a in x.agents}
    return Instance(x.agents, x.objects, {o: quotas[o] for o in x.objects}, prefs)


def _deterministic(x: Assignment, picks: Sequence[int]) -> Assignment:
    rows = [[0] * len(x.objects) for _ in x.agents]
    for r, c in enumerate(picks):
        rows[r][c] = 1
    return Assignment(x.agents, x.objects, rows)


def _perfect_matching_exists(support: list[list[int]], rows: list[int], banned_cols: set[int]) -> bool:
    match: dict[int, int] = {}

    def augment(r: int, seen: set[int]) -> bool:
        for c in support[r]:
            if c in banned_cols or c in seen:
                continue
            seen.add(c)
            if c not in match or augment(match[c], seen):
                match[c] = r
                return True
        return False

    return all(augment(r, set()) for r in rows)


def _lex_smallest_matching(support: list[list[int]]) -> list[int]:
    size = len(support)
    chosen: list[int] = []
    used: set[int] = set()
    for r in range(size):
        for c in support[r]:
            if c in used:
                continue
            if _perfect_matching_exists(support, list(range(r + 1, size)), used | {c}):
                chosen.append(c)
                used.add(c)
                break
        else:
            raise AssertionError("support has no perfect matching")
    return chosen


def bvn_decompose(x: Assignment, quotas: Mapping[str, int]) -> Lottery:
    """Birkhoff-von Neumann decomposition with object quotas.

    Each object is split into unit-capacity copies, filled in order; dummy
    agents absorb the capacity nobody uses, giving a square doubly stochastic
    matrix. Side constraints are ignored.
    """
    problems = assignment_violations(_shell(x, quotas), x, extra_rows=False)
    if problems:
        raise DomainError("; ".join(problems))

    copies: list[int] = []  # copy column -> object index
    for k, o in enumerate(x.objects):
        copies.extend([k] * quotas[o])
    size = len(copies)
    matrix = [[Fraction(0)] * size for _ in range(size)]
    col = 0
    for k, o in enumerate(x.objects):
        cols = list(range(col, col + quotas[o]))
        col += quotas[o]
        c, room = 0, Fraction(1)
        for r, a in enumerate(x.agents):
            need = x.values[r][k]
            while need:
                take = min(need, room)
                matrix[r][cols[c]] += take
                need -= take
                room -= take
                if room == 0 and c + 1 < len(cols):
                    c, room = c + 1, Fraction(1)
    # dummy rows fill the remaining room in each copy column
    r, room = len(x.agents), Fraction(1)
    for c in range(size):
        need = 1 - sum((matrix[i][c] for i in range(len(x.agents))), Fraction(0))
        while need:
            take = min(need, room)
            matrix[r][c] += take
            need -= take
            room -= take
            if room == 0:
                r, room = r + 1, Fraction(1)

    weights: dict[tuple[int, ...], Fraction] = {}
    order: list[tuple[int, ...]] = []
    while True:
        support = [[c for c in range(size) if matrix[r][c]] for r in range(size)]
        if not any(support):
            break
        perm = _lex_smallest_matching(support)
        w = min(matrix[r][c] for r, c in enumerate(perm))
        for r, c in enumerate(perm):
            matrix[r][c] -= w
        picks = tuple(copies[perm[r]] for r in range(len(x.agents)))
        if picks not in weights:
            order.append(picks)
            weights[picks] = Fraction(0)
        weights[picks] += w
    return Lottery(tuple(LotteryEntry(weights[p], _deterministic(x, p)) for p in order))


def constrained_decompose(x: Assignment, cs: ConstraintSystem,
                          quotas: Mapping[str, int]) -> Lottery | None:
    """Exact lottery over deterministic assignments that satisfy ``cs``.

    Enumerates every deterministic assignment within the quotas and the side
    rows, then looks for weights whose expectation is ``x``. Returns ``None``
    when no such weights exist.
    """
    inst = _shell(x, quotas).with_constraints(cs)
    problems = assignment_violations(inst, x)
    if problems:
        raise DomainError("; ".join(problems))
    n, rho = len(x.agents), len(x.objects)
    if rho ** n > ENUMERATION_LIMIT:
        raise GuardExceededError(
            f"{rho}^{n} deterministic candidates exceed {ENUMERATION_LIMIT}; "
            "use bvn_decompose when only quota rows are present")
    feasible: list[tuple[int, ...]] = []
    for picks in product(range(rho), repeat=n):
        load = [0] * rho
        for c in picks:
            load[c] += 1
        if any(load[c] > quotas[o] for c, o in enumerate(x.objects)):
            continue
        # only objects the agent can receive with positive probability are useful
        if any(x.values[r][c] == 0 for r, c in enumerate(picks)):
            continue
        d = _deterministic(x, picks)
        if all(row.holds(d) for row in cs.rows):
            feasible.append(picks)
    if not feasible:
        return None

    lp = LinearProgram([("w", k) for k in range(len(feasible))])
    lp.add_row({("w", k): Fraction(1) for k in range(len(feasible))}, Sense.EQ, 1)
    for r in range(n):
        for c in range(rho):
            coeffs = {("w", k): Fraction(1) for k, p in enumerate(feasible) if p[r] == c}
            if coeffs:
                lp.add_row(coeffs, Sense.EQ, x.values[r][c])
            elif x.values[r][c]:
                return None
    out = solve(lp)
    if out.status is not Status.OPTIMAL:
        return None
    entries = tuple(LotteryEntry(out.point[("w", k)], _deterministic(x, p))
                    for k, p in enumerate(feasible) if out.point[("w", k)])
    return Lottery(entries)
