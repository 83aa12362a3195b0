"""Seeded random instance generators for the property and acceptance suites."""

from __future__ import annotations

import random
from fractions import Fraction

from csrule.model import Constraint, ConstraintSystem, Instance, Sense, WeakOrder


def _names(prefix: str, k: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{j}" for j in range(1, k + 1))


def _quotas(rng: random.Random, objects, n: int, max_quota: int) -> dict[str, int]:
    while True:
        q = {o: rng.randint(1, max_quota) for o in objects}
        if sum(q.values()) >= n:
            return q


def _weak_order(rng: random.Random, objects) -> WeakOrder:
    objs = list(objects)
    rng.shuffle(objs)
    classes, cur = [], [objs[0]]
    for o in objs[1:]:
        if rng.random() < 0.4:
            cur.append(o)
        else:
            classes.append(cur)
            cur = [o]
    classes.append(cur)
    return WeakOrder.from_lists(classes)


def strict_unconstrained(rng: random.Random, max_n: int = 6, max_rho: int = 6,
                         max_quota: int = 2) -> Instance:
    n = rng.randint(1, max_n)
    while True:
        rho = rng.randint(1, max_rho)
        if rho * max_quota >= n:
            break
    agents, objects = _names("i", n), _names("o", rho)
    prefs = {}
    for a in agents:
        objs = list(objects)
        rng.shuffle(objs)
        prefs[a] = WeakOrder.strict(objs)
    return Instance(agents, objects, _quotas(rng, objects, n, max_quota), prefs)


def weak_unconstrained(rng: random.Random, max_n: int = 5, max_rho: int = 5) -> Instance:
    n = rng.randint(1, max_n)
    rho = rng.randint(n, max_rho) if n <= max_rho else max_rho
    agents, objects = _names("i", n), _names("o", rho)
    prefs = {a: _weak_order(rng, objects) for a in agents}
    return Instance(agents, objects, {o: 1 for o in objects}, prefs)


def random_point(rng: random.Random, agents, objects, quotas) -> dict[tuple[str, str], Fraction]:
    """Average of two random deterministic assignments within the quotas."""
    point = {(a, o): Fraction(0) for a in agents for o in objects}
    for _ in range(2):
        left = dict(quotas)
        for a in agents:
            o = rng.choice([o for o in objects if left[o] > 0])
            left[o] -= 1
            point[a, o] += Fraction(1, 2)
    return point


def constrained(rng: random.Random, max_n: int = 5, max_rho: int = 5, max_rows: int = 6,
                max_quota: int = 2) -> Instance:
    """Weak preferences plus random side rows that keep a random point feasible.

    About half the rows treat all agents alike, so same-type pairs survive.
    """
    n = rng.randint(2, max_n)
    while True:
        rho = rng.randint(2, max_rho)
        if rho * max_quota >= n:
            break
    agents, objects = _names("i", n), _names("o", rho)
    quotas = _quotas(rng, objects, n, max_quota)
    prefs = {a: _weak_order(rng, objects) for a in agents}
    x0 = random_point(rng, agents, objects, quotas)
    cells = [(a, o) for a in agents for o in objects]
    rows = []
    for _ in range(rng.randint(0, max_rows)):
        if rng.random() < 0.5:
            objs = rng.sample(objects, rng.randint(1, min(rho, 3)))
            coef = {o: Fraction(rng.choice([-1, 1, 1, 2])) for o in objs}
            terms = {(a, o): coef[o] for a in agents for o in objs}
        else:
            cells_used = rng.sample(cells, rng.randint(1, min(len(cells), 4)))
            terms = {c: Fraction(rng.choice([-1, 1, 1, 1, 2])) for c in cells_used}
        support = list(terms)
        lhs = sum(terms[c] * x0[c] for c in support)
        slack = Fraction(rng.choice([0, 0, 1, 1, 2]), 4)
        kind = rng.random()
        if kind < 0.45:
            rows.append(Constraint(terms, Sense.LE, lhs + slack))
        elif kind < 0.9:
            rows.append(Constraint(terms, Sense.GE, lhs - slack))
        else:
            rows.append(Constraint(terms, Sense.EQ, lhs))
    return Instance(agents, objects, quotas, prefs, ConstraintSystem(tuple(rows)))
