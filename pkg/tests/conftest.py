from __future__ import annotations

import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from csrule.model import Assignment, Constraint, ConstraintSystem, Instance, Sense, WeakOrder  # noqa: E402

DATA = Path(__file__).resolve().parent.parent / "data"


def three_agent_instance() -> Instance:
    prefs = {
        "1": WeakOrder.strict("abc"),
        "2": WeakOrder.from_lists([["a", "b"], ["c"]]),
        "3": WeakOrder.strict("cba"),
    }
    cs = ConstraintSystem((
        Constraint({("1", "a"): 1, ("2", "a"): 1}, Sense.LE, F(1, 2)),
        Constraint({("1", "c"): 1, ("2", "c"): 1}, Sense.GE, F(1, 2)),
    ))
    return Instance(("1", "2", "3"), tuple("abc"), {o: 1 for o in "abc"}, prefs, cs)


def three_agent_table() -> Assignment:
    return Assignment(("1", "2", "3"), tuple("abc"), [
        [F(1, 2), F(1, 4), F(1, 4)],
        [0, F(3, 4), F(1, 4)],
        [F(1, 2), 0, F(1, 2)],
    ])


def one_agent_pairwise_caps() -> tuple[Instance, Assignment]:
    cs = ConstraintSystem(tuple(
        Constraint({("1", p): 1, ("1", q): 1}, Sense.LE, F(2, 3)) for p, q in ("ab", "bc", "ac")))
    inst = Instance(("1",), tuple("abc"), {o: 1 for o in "abc"}, {"1": WeakOrder.strict("abc")}, cs)
    return inst, Assignment(("1",), tuple("abc"), [[F(1, 3)] * 3])


@pytest.fixture
def ex1() -> Instance:
    return three_agent_instance()


@pytest.fixture
def ex1_table() -> Assignment:
    return three_agent_table()


@pytest.fixture
def data_dir() -> Path:
    return DATA


ACCEPTANCE: dict[int, str] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
