"""Constraint-system builders for common constrained-allocation settings."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb
from typing import Iterable, Mapping, Sequence

from .model import (
    Constraint,
    ConstraintSystem,
    DomainError,
    GuardExceededError,
    Instance,
    Sense,
    WeakOrder,
    as_fraction,
)

__all__ = [
    "QuotaSet",
    "TypeQuota",
    "BihierarchyReport",
    "encode_bihierarchy",
    "validate_bihierarchy",
    "encode_type_quotas",
    "encode_combinatorial",
    "encode_expost",
    "bundle_id",
    "BUNDLE_LIMIT",
]

BUNDLE_LIMIT = 500

Pair = tuple[str, str]


@dataclass(frozen=True)
class QuotaSet:
    """Integer floor and ceiling on the total of a set of (agent, object) cells."""

    members: frozenset[Pair]
    floor: int
    ceiling: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", frozenset(self.members))
        if not 0 <= self.floor <= self.ceiling:
            raise DomainError(f"quota set needs 0 <= floor <= ceiling, got {self.floor}, {self.ceiling}")


@dataclass(frozen=True)
class TypeQuota:
    """Floor and ceiling on the share of ``object`` going to agents whose type is in ``type_set``."""

    type_set: frozenset[str]
    object: str
    floor: Fraction
    ceiling: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "type_set", frozenset(self.type_set))
        object.__setattr__(self, "floor", as_fraction(self.floor))
        object.__setattr__(self, "ceiling", as_fraction(self.ceiling))
        if self.floor > self.ceiling:
            raise DomainError(f"type quota floor {self.floor} exceeds ceiling {self.ceiling}")


def _pair_rows(terms: Mapping[Pair, Fraction], floor: Fraction, ceiling: Fraction) -> list[Constraint]:
    return [Constraint(dict(terms), Sense.GE, floor), Constraint(dict(terms), Sense.LE, ceiling)]


def encode_bihierarchy(quota_sets: Iterable[QuotaSet]) -> ConstraintSystem:
    rows: list[Constraint] = []
    for qs in quota_sets:
        terms = {p: Fraction(1) for p in sorted(qs.members)}
        rows.extend(_pair_rows(terms, Fraction(qs.floor), Fraction(qs.ceiling)))
    return ConstraintSystem(tuple(rows))


@dataclass(frozen=True)
class BihierarchyReport:
    is_bihierarchy: bool
    partition: tuple[tuple[QuotaSet, ...], tuple[QuotaSet, ...]] | None = None


def _crossing(a: frozenset, b: frozenset) -> bool:
    return bool(a & b) and not (a <= b or b <= a)


def _laminar(family: Sequence[QuotaSet]) -> bool:
    return not any(_crossing(s.members, t.members)
                   for k, s in enumerate(family) for t in family[k + 1:])


def validate_bihierarchy(quota_sets: Sequence[QuotaSet]) -> BihierarchyReport:
    """Split the sets into two laminar families if possible.

    Two crossing sets (overlapping, neither containing the other) must go to
    different families, so this is a 2-colouring of the crossing graph.
    """
    sets = list(quota_sets)
    adj = [[j for j in range(len(sets)) if j != i and _crossing(sets[i].members, sets[j].members)]
           for i in range(len(sets))]
    colour: list[int | None] = [None] * len(sets)
    for start in range(len(sets)):
        if colour[start] is not None:
            continue
        colour[start] = 0
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if colour[v] is None:
                    colour[v] = 1 - colour[u]
                    stack.append(v)
                elif colour[v] == colour[u]:
                    return BihierarchyReport(False)
    h1 = tuple(s for s, c in zip(sets, colour) if c == 0)
    h2 = tuple(s for s, c in zip(sets, colour) if c == 1)
    assert _laminar(h1) and _laminar(h2)
    return BihierarchyReport(True, (h1, h2))


def encode_type_quotas(agent_types: Mapping[str, str], quotas: Iterable[TypeQuota]) -> ConstraintSystem:
    known = set(agent_types.values())
    rows: list[Constraint] = []
    for q in quotas:
        unknown = q.type_set - known
        if unknown:
            raise DomainError(f"unknown type labels {sorted(unknown)}")
        terms = {(a, q.object): Fraction(1) for a, t in agent_types.items() if t in q.type_set}
        rows.extend(_pair_rows(terms, q.floor, q.ceiling))
    return ConstraintSystem(tuple(rows))


def bundle_id(bundle: Sequence[int], goods: Sequence[str]) -> str:
    """``"{}"`` for the empty bundle, otherwise e.g. ``"a+a+b"``."""
    parts = [g for g, k in zip(goods, bundle) for _ in range(k)]
    return "+".join(parts) if parts else "{}"


def encode_combinatorial(base_objects: Mapping[str, int], k: int,
                         preferences: Mapping[str, Sequence[Sequence[Sequence[int]]]]) -> Instance:
    """Instance whose objects are all bundles of at most ``k`` base goods.

    ``preferences`` maps agent -> indifference classes of bundles, each bundle
    a count vector aligned with ``base_objects``. Bundles an agent leaves out
    form one final indifference class. Each bundle may go to any number of
    agents; scarcity is enforced only by one supply row per base good.
    """
    if k < 1:
        raise DomainError("bundle size bound k must be >= 1")
    goods = list(base_objects)
    count = comb(len(goods) + k, k)
    if count > BUNDLE_LIMIT:
        raise GuardExceededError(f"{count} bundles exceed the limit of {BUNDLE_LIMIT}")
    bundles = []
    for size in range(k + 1):
        for picks in combinations_with_replacement(range(len(goods)), size):
            bundles.append(tuple(picks.count(g) for g in range(len(goods))))
    bundles.sort(key=lambda b: (sum(b), tuple(-c for c in b)))
    ids = [bundle_id(b, goods) for b in bundles]
    by_vector = dict(zip(bundles, ids))
    agents = tuple(preferences)
    prefs = {}
    for a, classes in preferences.items():
        listed: list[list[str]] = []
        for cls in classes:
            try:
                listed.append([by_vector[tuple(b)] for b in cls])
            except KeyError as exc:
                raise DomainError(f"agent {a!r} ranks an unknown bundle {exc.args[0]}") from exc
        rest = [i for i in ids if not any(i in c for c in listed)]
        if rest:
            listed.append(rest)
        prefs[a] = WeakOrder.from_lists(listed)
    rows = []
    for g_idx, g in enumerate(goods):
        terms = {(a, bid): Fraction(b[g_idx]) for a in agents for b, bid in zip(bundles, ids) if b[g_idx]}
        rows.append(Constraint(terms, Sense.LE, Fraction(base_objects[g])))
    quotas = {bid: len(agents) for bid in ids}
    return Instance(agents, tuple(ids), quotas, prefs, ConstraintSystem(tuple(rows)))


def encode_expost(rows: ConstraintSystem, agents: Iterable[str] | None = None,
                  objects: Iterable[str] | None = None) -> ConstraintSystem:
    """Accept an explicit ``A x <= b`` system unchanged after validating it."""
    aset = set(agents) if agents is not None else None
    oset = set(objects) if objects is not None else None
    for k, row in enumerate(rows.rows):
        if not isinstance(row, Constraint):
            raise DomainError(f"row {k} is not a Constraint")
        for (i, o), c in row.terms.items():
            if not isinstance(c, Fraction):
                raise DomainError(f"row {k}: coefficient {c!r} is not rational")
            if (aset is not None and i not in aset) or (oset is not None and o not in oset):
                raise DomainError(f"row {k} references unknown pair ({i!r}, {o!r})")
    return rows
