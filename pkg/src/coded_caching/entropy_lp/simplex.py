"""Exact rational primal simplex on a sparse tableau.

Solves ``max b.y  s.t.  G y <= h, y >= 0`` with ``h >= 0``, so the all-slack
basis is feasible and no phase one is needed.  The optimal dual multipliers
``pi`` (``min h.pi  s.t.  G^T pi >= b, pi >= 0``) are read off the objective
row under the slack columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

from ..problem import CodedCachingError

PivotRule = Literal["bland", "dantzig"]

# consecutive degenerate Dantzig pivots tolerated before falling back to Bland
STALL_LIMIT = 5


class LpError(CodedCachingError):
    """The LP is unbounded or infeasible, which a well-posed model never is."""


@dataclass
class SimplexResult:
    value: Fraction
    y: dict[int, Fraction]
    duals: list[Fraction]
    pivots: int


def maximize(
    b: Sequence[Fraction],
    G: Sequence[dict[int, Fraction]],
    h: Sequence[Fraction],
    rule: PivotRule = "bland",
    max_pivots: int = 1_000_000,
) -> SimplexResult:
    """Maximise ``b.y`` subject to ``G y <= h`` and ``y >= 0``.

    Parameters
    ----------
    b : objective over the ``n`` columns.
    G : one sparse row per constraint, ``{column: coefficient}``.
    h : non-negative right-hand sides.
    rule : ``"bland"`` (smallest index, never cycles) or ``"dantzig"``
        (most negative reduced cost, falling back to Bland while stalled).
    """
    if rule not in ("bland", "dantzig"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    n, m = len(b), len(G)
    if any(x < 0 for x in h):
        raise LpError("right-hand side must be non-negative for the slack start")
    rows = [{j: Fraction(v) for j, v in row.items() if v} for row in G]
    for i, row in enumerate(rows):
        row[n + i] = Fraction(1)
    rhs = [Fraction(x) for x in h]
    basis = [n + i for i in range(m)]
    obj = {j: -Fraction(v) for j, v in enumerate(b) if v}
    z = Fraction(0)
    pivots = 0
    stalled = 0

    while True:
        negative = [j for j, r in obj.items() if r < 0]
        if not negative:
            break
        if rule == "dantzig" and stalled < STALL_LIMIT:
            e = min(negative, key=lambda j: (obj[j], j))
        else:
            e = min(negative)
        leave, best = -1, None
        for i, row in enumerate(rows):
            a = row.get(e)
            if a is not None and a > 0:
                ratio = rhs[i] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave < 0:
            raise LpError("objective unbounded")
        pivots += 1
        if pivots > max_pivots:
            raise LpError("pivot limit reached")
        stalled = stalled + 1 if best == 0 else 0

        prow = rows[leave]
        a = prow[e]
        if a != 1:
            for j in prow:
                prow[j] /= a
            rhs[leave] /= a
        prow_items = list(prow.items())
        prhs = rhs[leave]
        for i, row in enumerate(rows):
            if i == leave:
                continue
            f = row.get(e)
            if f is None:
                continue
            for j, v in prow_items:
                nv = row.get(j, 0) - f * v
                if nv:
                    row[j] = nv
                else:
                    del row[j]
            rhs[i] -= f * prhs
        f = obj.get(e)
        for j, v in prow_items:
            nv = obj.get(j, 0) - f * v
            if nv:
                obj[j] = nv
            else:
                obj.pop(j, None)
        z -= f * prhs
        basis[leave] = e

    y = {basis[i]: rhs[i] for i in range(m) if basis[i] < n and rhs[i]}
    duals = [obj.get(n + i, Fraction(0)) for i in range(m)]
    return SimplexResult(z, y, duals, pivots)


def minimize(
    c: Sequence[Fraction],
    A: Sequence[dict[int, Fraction]],
    b: Sequence[Fraction],
    rule: PivotRule = "bland",
) -> tuple[Fraction, list[Fraction], dict[int, Fraction], int]:
    """Minimise ``c.x`` subject to ``A x >= b`` and ``x >= 0``, with ``c >= 0``.

    Solved through its dual so the slack start is feasible.

    Returns
    -------
    value, x, y, pivots
        ``y`` holds the non-zero row multipliers certifying ``value``.
    """
    G: list[dict[int, Fraction]] = [{} for _ in c]
    for i, row in enumerate(A):
        for j, v in row.items():
            G[j][i] = Fraction(v)
    res = maximize(b, G, c, rule)
    return res.value, res.duals, res.y, res.pivots
