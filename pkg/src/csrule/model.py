"""Instances, weak preferences, random assignments and constraint systems."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .ratlp import Sense

__all__ = [
    "Fraction",
    "Sense",
    "DomainError",
    "EmptyPolytopeError",
    "InfeasibleAssignmentError",
    "GuardExceededError",
    "WeakOrder",
    "Constraint",
    "ConstraintSystem",
    "Instance",
    "Assignment",
    "Promise",
    "SDRelation",
    "Violation",
    "top_classes",
    "cumulative",
    "sd_compare",
    "validate_instance",
    "assignment_violations",
    "as_fraction",
]


class DomainError(ValueError):
    """Input outside an operation's domain (bad ids, levels, shapes)."""


class EmptyPolytopeError(DomainError):
    """The constraint system admits no random assignment."""


class InfeasibleAssignmentError(DomainError):
    """An assignment violates the instance it is checked against."""


class GuardExceededError(DomainError):
    """An enumeration would exceed its size guard."""


def as_fraction(value) -> Fraction:
    """Parse an int, Fraction or ``"p/q"`` string. Floats are rejected."""
    if isinstance(value, bool):
        raise DomainError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a rational: {value!r}") from exc
    raise DomainError(f"not a rational (floats are not accepted): {value!r}")


@dataclass(frozen=True)
class WeakOrder:
    """Indifference classes, best first."""

    classes: tuple[frozenset[str], ...]

    def __post_init__(self) -> None:
        classes = tuple(frozenset(c) for c in self.classes)
        object.__setattr__(self, "classes", classes)
        seen: set[str] = set()
        for c in classes:
            if not c:
                raise DomainError("indifference classes must be non-empty")
            if seen & c:
                raise DomainError(f"object(s) {sorted(seen & c)} appear in two classes")
            seen |= c

    @classmethod
    def from_lists(cls, classes: Iterable[Iterable[str]]) -> "WeakOrder":
        return cls(tuple(frozenset(c) for c in classes))

    @classmethod
    def strict(cls, objects: Iterable[str]) -> "WeakOrder":
        return cls(tuple(frozenset([o]) for o in objects))

    def __len__(self) -> int:
        return len(self.classes)

    @property
    def objects(self) -> frozenset[str]:
        return frozenset().union(*self.classes)

    @property
    def is_strict(self) -> bool:
        return all(len(c) == 1 for c in self.classes)

    def level_of(self, obj: str) -> int:
        for k, c in enumerate(self.classes, start=1):
            if obj in c:
                return k
        raise DomainError(f"object {obj!r} not ranked")


def top_classes(order: WeakOrder, level: int) -> frozenset[str]:
    """Union of the first ``level`` indifference classes."""
    if not 1 <= level <= len(order):
        raise DomainError(f"level {level} outside 1..{len(order)}")
    return frozenset().union(*order.classes[:level])


@dataclass(frozen=True)
class Constraint:
    """``sum coeff * x[agent, object]  <sense>  rhs``."""

    terms: Mapping[tuple[str, str], Fraction]
    sense: Sense
    rhs: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", {k: as_fraction(v) for k, v in self.terms.items()})
        object.__setattr__(self, "rhs", as_fraction(self.rhs))
        if not isinstance(self.sense, Sense):
            object.__setattr__(self, "sense", Sense.parse(self.sense))

    def lhs(self, x: "Assignment") -> Fraction:
        return sum((c * x[i, o] for (i, o), c in self.terms.items()), Fraction(0))

    def holds(self, x: "Assignment") -> bool:
        v = self.lhs(x)
        if self.sense is Sense.LE:
            return v <= self.rhs
        if self.sense is Sense.GE:
            return v >= self.rhs
        return v == self.rhs


@dataclass(frozen=True)
class ConstraintSystem:
    rows: tuple[Constraint, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __add__(self, other: "ConstraintSystem") -> "ConstraintSystem":
        return ConstraintSystem(self.rows + tuple(other.rows))

    def normalized(self) -> list[tuple[dict[tuple[str, str], Fraction], Fraction]]:
        """The same polytope as ``A x <= b`` rows: GE rows negate, EQ rows split."""
        out = []
        for row in self.rows:
            neg = {k: -v for k, v in row.terms.items()}
            if row.sense in (Sense.LE, Sense.EQ):
                out.append((dict(row.terms), row.rhs))
            if row.sense in (Sense.GE, Sense.EQ):
                out.append((neg, -row.rhs))
        return out


@dataclass(frozen=True)
class Instance:
    agents: tuple[str, ...]
    objects: tuple[str, ...]
    quotas: Mapping[str, int]
    preferences: Mapping[str, WeakOrder]
    constraints: ConstraintSystem = field(default_factory=ConstraintSystem)

    def __post_init__(self) -> None:
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "quotas", dict(self.quotas))
        object.__setattr__(self, "preferences", dict(self.preferences))

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def rho(self) -> int:
        return len(self.objects)

    @cached_property
    def agent_index(self) -> dict[str, int]:
        return {a: k for k, a in enumerate(self.agents)}

    @cached_property
    def object_index(self) -> dict[str, int]:
        return {o: k for k, o in enumerate(self.objects)}

    def top(self, agent: str, level: int) -> frozenset[str]:
        return top_classes(self.preferences[agent], level)

    def depth(self, agent: str) -> int:
        return len(self.preferences[agent])

    def with_constraints(self, constraints: ConstraintSystem) -> "Instance":
        return Instance(self.agents, self.objects, self.quotas, self.preferences, constraints)


class Assignment:
    """Agent-by-object matrix of exact shares."""

    __slots__ = ("agents", "objects", "_rows", "_ai", "_oi")

    def __init__(self, agents: Sequence[str], objects: Sequence[str], values: Sequence[Sequence]):
        self.agents = tuple(agents)
        self.objects = tuple(objects)
        rows = tuple(tuple(as_fraction(v) for v in row) for row in values)
        if len(rows) != len(self.agents) or any(len(r) != len(self.objects) for r in rows):
            raise DomainError("assignment shape does not match agents x objects")
        self._rows = rows
        self._ai = {a: k for k, a in enumerate(self.agents)}
        self._oi = {o: k for k, o in enumerate(self.objects)}

    @classmethod
    def from_mapping(cls, agents: Sequence[str], objects: Sequence[str],
                     shares: Mapping[str, Mapping[str, object]]) -> "Assignment":
        return cls(agents, objects,
                   [[shares.get(a, {}).get(o, 0) for o in objects] for a in agents])

    @classmethod
    def zeros(cls, agents: Sequence[str], objects: Sequence[str]) -> "Assignment":
        return cls(agents, objects, [[0] * len(objects) for _ in agents])

    @property
    def values(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._rows

    def __getitem__(self, key: tuple[str, str]) -> Fraction:
        i, o = key
        try:
            return self._rows[self._ai[i]][self._oi[o]]
        except KeyError as exc:
            raise DomainError(f"unknown agent/object {key!r}") from exc

    def row(self, agent: str) -> dict[str, Fraction]:
        try:
            r = self._rows[self._ai[agent]]
        except KeyError as exc:
            raise DomainError(f"unknown agent {agent!r}") from exc
        return dict(zip(self.objects, r))

    def column_load(self, obj: str) -> Fraction:
        k = self._oi[obj]
        return sum((r[k] for r in self._rows), Fraction(0))

    def replace(self, changes: Mapping[tuple[str, str], object]) -> "Assignment":
        rows = [list(r) for r in self._rows]
        for (i, o), v in changes.items():
            rows[self._ai[i]][self._oi[o]] = as_fraction(v)
        return Assignment(self.agents, self.objects, rows)

    def as_dict(self) -> dict[str, dict[str, Fraction]]:
        return {a: self.row(a) for a in self.agents}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Assignment):
            return NotImplemented
        return (self.agents, self.objects, self._rows) == (other.agents, other.objects, other._rows)

    def __hash__(self) -> int:
        return hash((self.agents, self.objects, self._rows))

    def __repr__(self) -> str:
        body = "; ".join(
            f"{a}: " + ", ".join(f"{o}={v}" for o, v in zip(self.objects, r) if v)
            for a, r in zip(self.agents, self._rows)
        )
        return f"Assignment({body})"


@dataclass(frozen=True)
class Promise:
    """Agent must keep at least ``share`` from its top ``level`` classes."""

    agent: str
    level: int
    share: Fraction


def cumulative(x: Assignment, agent: str, s: Iterable[str]) -> Fraction:
    row = x.row(agent)
    total = Fraction(0)
    for o in s:
        if o not in row:
            raise DomainError(f"unknown object {o!r}")
        total += row[o]
    return total


class SDRelation(enum.Enum):
    A_DOMINATES_STRICTLY = "a_strict"
    B_DOMINATES_STRICTLY = "b_strict"
    EQUAL_CUMULATIVES = "equal"
    INCOMPARABLE = "incomparable"


def _cumulatives(order: WeakOrder, row: Mapping[str, Fraction]) -> list[Fraction]:
    out, acc = [], Fraction(0)
    for c in order.classes:
        acc += sum((row.get(o, Fraction(0)) for o in c), Fraction(0))
        out.append(acc)
    return out


def sd_compare(order: WeakOrder, a: Mapping[str, Fraction], b: Mapping[str, Fraction]) -> SDRelation:
    """Stochastic-dominance comparison of two allocation rows under ``order``."""
    ca, cb = _cumulatives(order, a), _cumulatives(order, b)
    a_ahead = any(u > v for u, v in zip(ca, cb))
    b_ahead = any(u < v for u, v in zip(ca, cb))
    if a_ahead and b_ahead:
        return SDRelation.INCOMPARABLE
    if a_ahead:
        return SDRelation.A_DOMINATES_STRICTLY
    if b_ahead:
        return SDRelation.B_DOMINATES_STRICTLY
    return SDRelation.EQUAL_CUMULATIVES


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}"


def validate_instance(inst: Instance) -> list[Violation]:
    """Model-invariant violations; empty means valid.

    Does not test whether the constraint polytope is non-empty.
    """
    out: list[Violation] = []
    agents, objects = inst.agents, inst.objects
    if not agents:
        out.append(Violation("no-agents", "instance has no agents"))
    if len(set(agents)) != len(agents):
        out.append(Violation("duplicate-id", "agent ids are not unique"))
    if len(set(objects)) != len(objects):
        out.append(Violation("duplicate-id", "object ids are not unique"))
    oset = set(objects)
    for o in objects:
        q = inst.quotas.get(o)
        if not isinstance(q, int) or isinstance(q, bool) or q < 1:
            out.append(Violation("bad-quota", f"object {o!r} needs a positive integer quota, got {q!r}"))
    extra_q = set(inst.quotas) - oset
    if extra_q:
        out.append(Violation("unknown-object", f"quotas for unknown objects {sorted(extra_q)}"))
    total = sum(q for q in inst.quotas.values() if isinstance(q, int))
    if total < len(agents):
        out.append(Violation("quota-shortfall", f"total quota {total} < {len(agents)} agents"))
    for a in agents:
        order = inst.preferences.get(a)
        if order is None:
            out.append(Violation("missing-preference", f"agent {a!r} has no preference"))
            continue
        ranked = order.objects
        if ranked - oset:
            out.append(Violation("unknown-object", f"agent {a!r} ranks unknown {sorted(ranked - oset)}"))
        if oset - ranked:
            out.append(Violation("incomplete-preference", f"agent {a!r} omits {sorted(oset - ranked)}"))
    extra_p = set(inst.preferences) - set(agents)
    if extra_p:
        out.append(Violation("unknown-agent", f"preferences for unknown agents {sorted(extra_p)}"))
    aset = set(agents)
    for k, row in enumerate(inst.constraints.rows):
        for (i, o) in row.terms:
            if i not in aset or o not in oset:
                out.append(Violation("bad-constraint", f"row {k} references unknown pair ({i!r}, {o!r})"))
    return out


def assignment_violations(inst: Instance, x: Assignment, *, extra_rows: bool = True) -> list[str]:
    """Ways ``x`` fails to be a feasible random assignment for ``inst``."""
    out = []
    if x.agents != inst.agents or x.objects != inst.objects:
        return ["assignment agents/objects do not match the instance"]
    for a in inst.agents:
        row = x.row(a)
        for o, v in row.items():
            if not 0 <= v <= 1:
                out.append(f"x[{a},{o}] = {v} outside [0, 1]")
        s = sum(row.values(), Fraction(0))
        if s != 1:
            out.append(f"row {a} sums to {s}")
    for o in inst.objects:
        load = x.column_load(o)
        if load > inst.quotas[o]:
            out.append(f"object {o} load {load} exceeds quota {inst.quotas[o]}")
    if extra_rows:
        for k, row in enumerate(inst.constraints.rows):
            if not row.holds(x):
                out.append(f"constraint {k} violated: lhs {row.lhs(x)} {row.sense.value} {row.rhs} fails")
    return out
