"""Reference allocations for unconstrained instances.

These do not touch the LP code: ``ps_eating`` simulates simultaneous eating
with an exact clock, ``eps_reference`` finds bottlenecks by enumerating agent
subsets and realizes them with an augmenting-path flow.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from itertools import combinations

from .model import Assignment, DomainError, GuardExceededError, Instance

__all__ = ["ps_eating", "eps_reference", "EPS_AGENT_LIMIT"]

EPS_AGENT_LIMIT = 15


def _require_unconstrained(inst: Instance) -> None:
    if len(inst.constraints):
        raise DomainError("oracle needs an instance without side constraints")


def ps_eating(inst: Instance) -> Assignment:
    _require_unconstrained(inst)
    for a in inst.agents:
        if not inst.preferences[a].is_strict:
            raise DomainError(f"agent {a!r} has indifferences; ps_eating needs strict preferences")
    ranking = {a: [next(iter(c)) for c in inst.preferences[a].classes] for a in inst.agents}
    left = {o: Fraction(inst.quotas[o]) for o in inst.objects}
    eaten = {a: {o: Fraction(0) for o in inst.objects} for a in inst.agents}
    clock = Fraction(0)
    while clock < 1:
        target = {}
        for a in inst.agents:
            o = next((o for o in ranking[a] if left[o] > 0), None)
            if o is None:
                raise DomainError("objects ran out before agents were served (total quota < n)")
            target[a] = o
        eaters: dict[str, int] = {}
        for o in target.values():
            eaters[o] = eaters.get(o, 0) + 1
        step = min([1 - clock] + [left[o] / k for o, k in eaters.items()])
        for a, o in target.items():
            eaten[a][o] += step
        for o, k in eaters.items():
            left[o] -= step * k
        clock += step
    return Assignment(inst.agents, inst.objects,
                      [[eaten[a][o] for o in inst.objects] for a in inst.agents])


def _max_flow(cap: dict[int, dict[int, Fraction]], source: int, sink: int) -> dict[int, dict[int, Fraction]]:
    """Edmonds-Karp on exact capacities; returns the flow on original arcs."""
    residual: dict[int, dict[int, Fraction]] = {}
    for u, arcs in cap.items():
        for v, c in arcs.items():
            residual.setdefault(u, {})[v] = residual.get(u, {}).get(v, Fraction(0)) + c
            residual.setdefault(v, {}).setdefault(u, Fraction(0))
    while True:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for v, c in residual.get(u, {}).items():
                if c > 0 and v not in parent:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            break
        path, v = [], sink
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        push = min(residual[u][v] for u, v in path)
        for u, v in path:
            residual[u][v] -= push
            residual[v][u] += push
    return {u: {v: c - residual[u][v] for v, c in arcs.items()} for u, arcs in cap.items()}


def eps_reference(inst: Instance) -> Assignment:
    """Extended probabilistic serial by brute-force bottleneck search.

    At each stage every active agent points at the best indifference class
    that still has capacity. The bottleneck is the agent subset Y minimizing
    (capacity of the objects Y points at + shares Y already holds) / |Y|,
    preferring larger Y on ties; its agents are raised to that level using
    only those objects, which are then exhausted.
    """
    _require_unconstrained(inst)
    if inst.n > EPS_AGENT_LIMIT:
        raise GuardExceededError(f"eps_reference enumerates subsets; n={inst.n} > {EPS_AGENT_LIMIT}")
    agents = inst.agents
    left = {o: Fraction(inst.quotas[o]) for o in inst.objects}
    held = {a: Fraction(0) for a in agents}
    share = {a: {o: Fraction(0) for o in inst.objects} for a in agents}
    active = set(agents)

    while active:
        gamma = {}
        for a in agents:
            if a not in active:
                continue
            cls = next((c for c in inst.preferences[a].classes if any(left[o] > 0 for o in c)), None)
            if cls is None:
                raise DomainError("objects ran out before agents were served (total quota < n)")
            gamma[a] = frozenset(o for o in cls if left[o] > 0)

        best = None  # (ratio, -size, members)
        pool = [a for a in agents if a in active]
        for size in range(len(pool), 0, -1):
            for ys in combinations(pool, size):
                objs = frozenset().union(*(gamma[a] for a in ys))
                ratio = (sum((left[o] for o in objs), Fraction(0)) + sum((held[a] for a in ys), Fraction(0))) / size
                key = (ratio, -size, ys)
                if best is None or key < best:
                    best = key
        level, _, ys = best
        if level > 1:
            level = Fraction(1)
            ys = tuple(pool)
        objs = sorted(frozenset().union(*(gamma[a] for a in ys)), key=inst.object_index.get)

        # source 0, agents 1..k, objects k+1.., sink -1
        node = {a: k + 1 for k, a in enumerate(ys)}
        onode = {o: len(ys) + 1 + k for k, o in enumerate(objs)}
        cap: dict[int, dict[int, Fraction]] = {0: {}}
        for a in ys:
            cap[0][node[a]] = level - held[a]
            cap[node[a]] = {onode[o]: Fraction(1) for o in gamma[a]}
        for o in objs:
            cap[onode[o]] = {-1: left[o]}
        flow = _max_flow(cap, 0, -1)
        for a in ys:
            for o in gamma[a]:
                f = flow[node[a]][onode[o]]
                share[a][o] += f
                left[o] -= f
            if sum(flow[node[a]].values(), Fraction(0)) != level - held[a]:
                raise AssertionError("bottleneck flow did not saturate")
            held[a] = level
        for a in ys:
            if held[a] == 1:
                active.discard(a)
    return Assignment(agents, inst.objects, [[share[a][o] for o in inst.objects] for a in agents])
