from __future__ import annotations

import random
from fractions import Fraction as F
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csrule.audit import (
    SnapshotContradiction,
    check_no_improvement,
    check_promises,
    envy_report,
    is_constrained_ordinally_efficient,
    same_type,
    type_classes,
)
from csrule.mechanism import MechanismConfig, MechanismResult, run
from csrule.model import (
    Assignment,
    Constraint,
    ConstraintSystem,
    InfeasibleAssignmentError,
    Instance,
    Promise,
    SDRelation,
    Sense,
    WeakOrder,
    sd_compare,
)
from csrule.oracles import ps_eating

HALF, THREE_Q = F(1, 2), F(3, 4)


def two_cycle():
    inst = Instance(("1", "2"), ("a", "b"), {"a": 1, "b": 1},
                    {"1": WeakOrder.strict("ab"), "2": WeakOrder.strict("ba")})
    return inst, Assignment(inst.agents, inst.objects, [[0, 1], [1, 0]])


def test_reference_table_is_efficient(ex1, ex1_table):
    cert = is_constrained_ordinally_efficient(ex1, ex1_table)
    assert cert.efficient and cert.slack == 0 and cert.witness is None


def test_two_cycle_is_inefficient():
    inst, x = two_cycle()
    # brute force over the 2x2 bistochastic segment [[t, 1-t], [1-t, t]]
    dominating = []
    for k in range(21):
        t = F(k, 20)
        y = Assignment(inst.agents, inst.objects, [[t, 1 - t], [1 - t, t]])
        rel = [sd_compare(inst.preferences[a], y.row(a), x.row(a)) for a in inst.agents]
        if all(r in (SDRelation.A_DOMINATES_STRICTLY, SDRelation.EQUAL_CUMULATIVES) for r in rel) \
                and SDRelation.A_DOMINATES_STRICTLY in rel:
            dominating.append(t)
    assert dominating == [F(k, 20) for k in range(1, 21)]
    cert = is_constrained_ordinally_efficient(inst, x)
    assert not cert.efficient and cert.slack == 2
    assert cert.witness == Assignment(inst.agents, inst.objects, [[1, 0], [0, 1]])


def test_fully_pinned_assignment_is_efficient():
    inst, x = two_cycle()
    pinned = ConstraintSystem(tuple(Constraint({(a, o): 1}, Sense.EQ, x[a, o])
                                    for a in inst.agents for o in inst.objects))
    assert is_constrained_ordinally_efficient(inst.with_constraints(pinned), x).efficient


def test_efficiency_rejects_infeasible(ex1, ex1_table):
    with pytest.raises(InfeasibleAssignmentError):
        is_constrained_ordinally_efficient(ex1, ex1_table.replace({("1", "a"): 1}))


def test_same_type(ex1):
    assert same_type(ex1, "1", "2")
    assert not same_type(ex1, "1", "3")
    bare = ex1.with_constraints(ConstraintSystem())
    assert all(same_type(bare, i, j) for i in bare.agents for j in bare.agents)
    assert type_classes(ex1) == [["1", "2"], ["3"]]


def test_same_type_reads_unsplit_rows(ex1):
    row = Constraint({("1", "a"): 1, ("2", "a"): 1}, Sense.EQ, HALF)
    assert same_type(ex1.with_constraints(ConstraintSystem((row,))), "1", "2")


def test_envy_report(ex1, ex1_table):
    assert envy_report(ex1, ex1_table).envy_free
    inst = Instance(("1", "2"), ("a", "b"), {"a": 1, "b": 1},
                    {"1": WeakOrder.strict("ab"), "2": WeakOrder.strict("ab")})
    same = Assignment(inst.agents, inst.objects, [[HALF, HALF], [HALF, HALF]])
    assert envy_report(inst, same).envy_free
    skewed = Assignment(inst.agents, inst.objects, [[0, 1], [1, 0]])
    (v,) = envy_report(inst, skewed).violations
    assert (v.envious, v.envied, v.level, v.deficit) == ("1", "2", 1, 1)


def test_check_promises(ex1):
    result = run(ex1, MechanismConfig(("3", "2", "1")))
    assert check_promises(result)
    lowered = result.assignment.replace({("1", "a"): F(3, 8)})
    assert not check_promises(result, lowered)
    one = Instance(("1",), ("a",), {"a": 1}, {"1": WeakOrder.strict("a")})
    assert check_promises(run(one))


def test_check_no_improvement_reference_rounds(ex1):
    first = {a: 1 for a in ex1.agents}
    assert check_no_improvement(ex1, [], first, {"1"}, HALF)
    f4 = [Promise("1", 1, HALF), Promise("3", 1, HALF), Promise("3", 2, HALF)]
    assert check_no_improvement(ex1, f4, {"1": 2, "2": 1, "3": 3}, {"1", "2"}, THREE_Q)
    # agent 2 alone is not a bottleneck in round 1: it can exceed 1/2
    assert not check_no_improvement(ex1, [], first, {"2"}, HALF)


def test_check_no_improvement_full_threshold(ex1):
    full = {a: ex1.depth(a) for a in ex1.agents}
    assert check_no_improvement(ex1, [], full, set(ex1.agents), F(1))


def test_check_no_improvement_contradiction(ex1):
    with pytest.raises(SnapshotContradiction):
        check_no_improvement(ex1, [Promise("1", 1, 1)], {a: 1 for a in ex1.agents}, {"1"}, HALF)


# ---- brute-force efficiency oracle on bistochastic instances -------------

def has_trading_cycle(inst: Instance, x: Assignment) -> bool:
    """Acyclicity test of the relation o > o' iff some agent prefers o to o'
    yet holds o' with positive probability (square, unit-quota case)."""
    edges = {o: set() for o in inst.objects}
    for a in inst.agents:
        ranking = [next(iter(c)) for c in inst.preferences[a].classes]
        for k, o in enumerate(ranking):
            for worse in ranking[k + 1:]:
                if x[a, worse] > 0:
                    edges[o].add(worse)
    colour = {}

    def dfs(u):
        colour[u] = 1
        for v in edges[u]:
            if colour.get(v) == 1 or (v not in colour and dfs(v)):
                return True
        colour[u] = 2
        return False

    return any(o not in colour and dfs(o) for o in inst.objects)


def random_bistochastic(rng: random.Random, n: int, agents, objects) -> Assignment:
    perms = list(permutations(range(n)))
    picks = rng.sample(perms, min(len(perms), rng.randint(1, 3)))
    weights = [rng.randint(1, 4) for _ in picks]
    total = sum(weights)
    rows = [[F(0)] * n for _ in range(n)]
    for p, w in zip(picks, weights):
        for r, c in enumerate(p):
            rows[r][c] += F(w, total)
    return Assignment(agents, objects, rows)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4), st.booleans())
def test_efficiency_matches_cycle_oracle(seed, n, use_ps):
    rng = random.Random(seed)
    agents = tuple(str(k) for k in range(n))
    objects = tuple(f"o{k}" for k in range(n))
    prefs = {}
    for a in agents:
        objs = list(objects)
        rng.shuffle(objs)
        prefs[a] = WeakOrder.strict(objs)
    inst = Instance(agents, objects, {o: 1 for o in objects}, prefs)
    x = ps_eating(inst) if use_ps else random_bistochastic(rng, n, agents, objects)
    cert = is_constrained_ordinally_efficient(inst, x)
    assert cert.efficient == (not has_trading_cycle(inst, x))
    if not cert.efficient:
        w = cert.witness
        rels = [sd_compare(prefs[a], w.row(a), x.row(a)) for a in agents]
        assert SDRelation.A_DOMINATES_STRICTLY in rels
        assert all(r in (SDRelation.A_DOMINATES_STRICTLY, SDRelation.EQUAL_CUMULATIVES) for r in rels)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_same_type_is_an_equivalence(seed):
    import generators
    inst = generators.constrained(random.Random(seed), max_n=5, max_rho=3)
    ag = inst.agents
    for i in ag:
        assert same_type(inst, i, i)
        for j in ag:
            assert same_type(inst, i, j) == same_type(inst, j, i)
            for k in ag:
                if same_type(inst, i, j) and same_type(inst, j, k):
                    assert same_type(inst, i, k)


def test_audit_handles_hand_result(ex1, ex1_table):
    result = MechanismResult(ex1, ex1_table, (), (Promise("2", 1, THREE_Q),))
    assert check_promises(result)
