"""Exact rational linear programming.

A dense two-phase primal simplex over ``gmpy2.mpq``. Every LP in the package
(round LPs, bottleneck probes, audit certificates, lottery weights) goes
through :func:`solve`. Inputs and outputs use :class:`fractions.Fraction`;
``mpq`` is only used inside the tableau because it is an order of magnitude
faster.

Variables are non-negative. The objective is maximized.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from gmpy2 import mpq

__all__ = [
    "Sense",
    "Row",
    "LinearProgram",
    "Status",
    "LPOutcome",
    "MalformedLPError",
    "solve",
]

# Number of consecutive degenerate pivots tolerated under the largest-coefficient
# rule before switching to Bland's rule until the objective moves again.
_DEGENERATE_STREAK = 8


class Sense(enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "="

    @classmethod
    def parse(cls, text: str) -> "Sense":
        for member in cls:
            if text == member.value or text == member.name:
                return member
        raise ValueError(f"unknown constraint sense {text!r}")


@dataclass(frozen=True)
class Row:
    coeffs: Mapping[Hashable, Fraction]
    sense: Sense
    rhs: Fraction


@dataclass
class LinearProgram:
    """``maximize objective . v  s.t.  rows,  v >= 0``."""

    variables: list[Hashable]
    objective: dict[Hashable, Fraction] = field(default_factory=dict)
    rows: list[Row] = field(default_factory=list)

    def add_row(self, coeffs: Mapping[Hashable, Fraction], sense: Sense, rhs) -> None:
        self.rows.append(Row(dict(coeffs), sense, Fraction(rhs)))


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPOutcome:
    status: Status
    value: Fraction | None = None
    point: dict[Hashable, Fraction] | None = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class MalformedLPError(ValueError):
    pass


def _check(lp: LinearProgram) -> dict[Hashable, int]:
    index: dict[Hashable, int] = {}
    for v in lp.variables:
        if v in index:
            raise MalformedLPError(f"duplicate variable {v!r}")
        index[v] = len(index)
    for v in lp.objective:
        if v not in index:
            raise MalformedLPError(f"objective references undeclared variable {v!r}")
    for k, row in enumerate(lp.rows):
        if not isinstance(row.sense, Sense):
            raise MalformedLPError(f"row {k}: sense must be a Sense, got {row.sense!r}")
        for v in row.coeffs:
            if v not in index:
                raise MalformedLPError(f"row {k} references undeclared variable {v!r}")
    return index


class _Tableau:
    """Row-major simplex tableau; the last entry of each row is the rhs."""

    def __init__(self, rows: list[list], basis: list[int], ncols: int):
        self.rows = rows
        self.basis = basis
        self.ncols = ncols

    def pivot(self, r: int, j: int, zrows: Sequence[list]) -> None:
        prow = self.rows[r]
        piv = prow[j]
        nz = [k for k, v in enumerate(prow) if v]
        if piv != 1:
            inv = 1 / piv
            for k in nz:
                prow[k] *= inv
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[j]
            if f:
                for k in nz:
                    row[k] -= f * prow[k]
        for z in zrows:
            f = z[j]
            if f:
                for k in nz:
                    z[k] -= f * prow[k]
        self.basis[r] = j

    def run(self, z: list, allowed: int, extra_z: Sequence[list] = ()) -> bool:
        """Maximize with reduced-cost row ``z`` (entering iff z[j] < 0).

        Only columns ``< allowed`` may enter. Returns False when unbounded.
        """
        rows = self.rows
        basis = self.basis
        streak = 0
        while True:
            if streak < _DEGENERATE_STREAK:
                j, best = -1, 0
                for k in range(allowed):
                    if z[k] < best:
                        j, best = k, z[k]
            else:
                j = next((k for k in range(allowed) if z[k] < 0), -1)
            if j < 0:
                return True
            r, ratio = -1, None
            for i, row in enumerate(rows):
                a = row[j]
                if a > 0:
                    q = row[-1] / a
                    if ratio is None or q < ratio or (q == ratio and basis[i] < basis[r]):
                        r, ratio = i, q
            if r < 0:
                return False
            streak = streak + 1 if ratio == 0 else 0
            self.pivot(r, j, (z, *extra_z))


def solve(lp: LinearProgram) -> LPOutcome:
    """Solve ``lp`` exactly.

    Uses the largest-coefficient entering rule, falling back to Bland's rule
    after a run of degenerate pivots, which keeps termination guaranteed.
    Ties in the ratio test go to the smallest basic column index.
    """
    index = _check(lp)
    nvar = len(index)

    # Normalize every row to a non-negative rhs. A GE row with rhs 0 is turned
    # into an LE row so its slack can start in the basis.
    norm: list[tuple[dict[int, mpq], Sense, mpq]] = []
    for row in lp.rows:
        coeffs = {index[v]: mpq(c.numerator, c.denominator) for v, c in row.coeffs.items() if c}
        rhs = mpq(Fraction(row.rhs).numerator, Fraction(row.rhs).denominator)
        sense = row.sense
        if rhs < 0 or (rhs == 0 and sense is Sense.GE):
            coeffs = {k: -c for k, c in coeffs.items()}
            rhs = -rhs
            sense = {Sense.LE: Sense.GE, Sense.GE: Sense.LE, Sense.EQ: Sense.EQ}[sense]
        norm.append((coeffs, sense, rhs))

    nslack = sum(1 for _, s, _ in norm if s is not Sense.EQ)
    nart = sum(1 for _, s, _ in norm if s is not Sense.LE)
    ncols = nvar + nslack + nart
    zero = mpq(0)

    rows: list[list] = []
    basis: list[int] = []
    slack_at = nvar
    art_at = nvar + nslack
    for coeffs, sense, rhs in norm:
        row = [zero] * (ncols + 1)
        for k, c in coeffs.items():
            row[k] = c
        row[-1] = rhs
        if sense is Sense.LE:
            row[slack_at] = mpq(1)
            basis.append(slack_at)
            slack_at += 1
        else:
            if sense is Sense.GE:
                row[slack_at] = mpq(-1)
                slack_at += 1
            row[art_at] = mpq(1)
            basis.append(art_at)
            art_at += 1
        rows.append(row)

    tab = _Tableau(rows, basis, ncols)
    first_art = nvar + nslack

    # Phase 2 reduced costs are carried along through phase 1 pivots.
    z2 = [zero] * (ncols + 1)
    for v, c in lp.objective.items():
        if c:
            z2[index[v]] = -mpq(c.numerator, c.denominator)

    if nart:
        # maximize -sum(artificials): z_j = -sum over artificial-basic rows of a_ij
        z1 = [zero] * (ncols + 1)
        for row, b in zip(rows, basis):
            if b >= first_art:
                for k, v in enumerate(row):
                    if v:
                        z1[k] -= v
        for k in range(first_art, ncols):
            z1[k] = zero
        # z2 must also be expressed in the current basis; artificial basics have
        # zero phase-2 cost and structural columns are non-basic, so it already is.
        tab.run(z1, ncols, extra_z=(z2,))
        if z1[-1] != 0:
            return LPOutcome(Status.INFEASIBLE)
        # Drive remaining zero-level artificials out of the basis.
        keep: list[int] = []
        for r in range(len(rows)):
            if tab.basis[r] < first_art:
                keep.append(r)
                continue
            j = next((k for k in range(first_art) if rows[r][k]), -1)
            if j >= 0:
                tab.pivot(r, j, (z2,))
                keep.append(r)
        if len(keep) != len(rows):
            tab.rows = [rows[r] for r in keep]
            tab.basis = [tab.basis[r] for r in keep]
        for row in tab.rows:
            for k in range(first_art, ncols):
                row[k] = zero
        for k in range(first_art, ncols):
            z2[k] = zero

    if not tab.run(z2, first_art):
        return LPOutcome(Status.UNBOUNDED)

    values = [zero] * nvar
    for row, b in zip(tab.rows, tab.basis):
        if b < nvar:
            values[b] = row[-1]
    point = {v: Fraction(int(values[k].numerator), int(values[k].denominator)) for v, k in index.items()}
    value = sum((c * point[v] for v, c in lp.objective.items()), Fraction(0))
    return LPOutcome(Status.OPTIMAL, value, point)
