"""Presolve, exact solve and re-substitution check for the outer-bound LP.

Presolve identifies every subset ``S`` with its closure under the functional
dependencies in the model (``h[S] = h[cl(S)]`` follows from the equalities
``h[A u B] = h[A]`` together with submodularity), then fixes variables pinned by
equalities and drops duplicate rows.  With ``symmetry=True`` variables are
further merged along orbits of file and user relabellings; averaging any
optimum over the group gives a symmetric optimum, so the value is unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Callable

from ..problem import DemandVector
from .model import Constraint, EntropyLpModel, Var, rate_name
from .simplex import LpError, PivotRule, minimize


@dataclass
class LpSolution:
    """Exact optimum of an :class:`EntropyLpModel`.

    Attributes
    ----------
    optimal_rate : minimum of the objective.
    dual_certificate : ``(row id, multiplier)`` pairs of the presolved LP
        whose combination proves ``optimal_rate`` is a lower bound.
    primal : non-zero entries of an optimal entropy vector and rates, keyed by
        printable name.
    """

    optimal_rate: Fraction
    dual_certificate: list[tuple[str, Fraction]]
    primal: dict[str, Fraction]
    pivots: int
    rule: str
    rows: int
    columns: int
    symmetry: bool = False


def _functional_dependencies(model: EntropyLpModel) -> list[tuple[int, int]]:
    fds = []
    for con in model.constraints:
        if con.relop != "=" or con.rhs != 0 or len(con.coeffs) != 2:
            continue
        (a, ca), (b, cb) = con.coeffs
        if not (isinstance(a, int) and isinstance(b, int)) or ca != -cb:
            continue
        big, small = (a, b) if ca > 0 else (b, a)
        if small & big == small and small != big:
            fds.append((small, big & ~small))
    return fds


def _closure_table(n: int, fds: list[tuple[int, int]]) -> list[int]:
    table = [0] * (1 << n)
    for s in range(1, 1 << n):
        cur = s
        changed = True
        while changed:
            changed = False
            for a, b in fds:
                if cur & a == a and cur & b != b:
                    cur |= b
                    changed = True
        table[s] = cur
    return table


def _group(model: EntropyLpModel) -> list[tuple[list[int], dict[str, str]]]:
    """Bit permutations and rate renamings induced by file/user relabelling."""
    N, K = model.ps.N, model.ps.K
    D = model.demands
    pos = {d: j for j, d in enumerate(D)}
    out = []
    for pf in permutations(range(N)):
        for pu in permutations(range(K)):
            bits = list(pf) + [N + pu[k] for k in range(K)]
            rates: dict[str, str] = {}
            for d in D:
                image = [0] * K
                for k in range(K):
                    image[pu[k]] = pf[d[k] - 1] + 1
                e = DemandVector(tuple(image))
                if e not in pos:
                    raise ValueError("symmetry reduction needs a demand set closed under relabelling")
                bits.append(N + K + pos[e])
                rates[rate_name(d)] = rate_name(e)
            out.append((bits, rates))
    return out


def _permute_mask(mask: int, perm: list[int]) -> int:
    out = 0
    i = 0
    while mask:
        if mask & 1:
            out |= 1 << perm[i]
        mask >>= 1
        i += 1
    return out


def _representative(model: EntropyLpModel, symmetry: bool) -> Callable[[Var], Var]:
    closure = _closure_table(model.n, _functional_dependencies(model))
    if not symmetry:
        return lambda v: v if isinstance(v, str) else closure[v]
    group = _group(model)
    masks = [0] + [min(_permute_mask(closure[s], p) for p, _ in group) for s in range(1, 1 << model.n)]
    rates = {r: min(g.get(r, r) for _, g in group) for r in model.rate_variables}
    return lambda v: rates[v] if isinstance(v, str) else masks[v]


def _substitute(
    con: Constraint, rep: Callable[[Var], Var], fixed: dict[Var, Fraction]
) -> tuple[dict[Var, Fraction], Fraction]:
    coeffs: dict[Var, Fraction] = {}
    rhs = con.rhs
    for v, c in con.coeffs:
        r = rep(v)
        if r in fixed:
            rhs -= c * fixed[r]
        else:
            coeffs[r] = coeffs.get(r, 0) + c
    return {v: c for v, c in coeffs.items() if c}, rhs


def presolve(model: EntropyLpModel, symmetry: bool = False):
    """Reduce ``model`` to ``min c.x, A x >= b, x >= 0`` over representatives.

    Returns
    -------
    rep, fixed, columns, A, b, labels
    """
    rep = _representative(model, symmetry)
    fixed: dict[Var, Fraction] = {}
    equalities = [c for c in model.constraints if c.relop == "="]
    changed = True
    while changed:
        changed = False
        for con in equalities:
            coeffs, rhs = _substitute(con, rep, fixed)
            if len(coeffs) == 1:
                (v, c), = coeffs.items()
                fixed[v] = rhs / c
                changed = True
    seen: dict[tuple, int] = {}
    rows: list[tuple[dict[Var, Fraction], Fraction]] = []
    labels: list[str] = []
    for con in model.constraints:
        coeffs, rhs = _substitute(con, rep, fixed)
        signs = {">=": [(1, "")], "<=": [(-1, "")], "=": [(1, ":ge"), (-1, ":le")]}[con.relop]
        for sign, suffix in signs:
            row = {v: sign * c for v, c in coeffs.items()}
            r = sign * rhs
            if not row:
                if r > 0:
                    raise LpError(f"constraint {con.cid} infeasible after presolve")
                continue
            key = (tuple(sorted(row.items(), key=lambda t: (isinstance(t[0], str), t[0]))), r)
            if key in seen:
                continue
            seen[key] = len(rows)
            rows.append((row, r))
            labels.append(con.cid + suffix)
    for v in fixed:
        if fixed[v] < 0:
            raise LpError(f"variable {v} fixed to a negative value")
    obj: dict[Var, Fraction] = {}
    for r, c in model.objective.items():
        obj[rep(r)] = obj.get(rep(r), 0) + c
    columns: list[Var] = sorted(
        {v for row, _ in rows for v in row} | set(obj),
        key=lambda v: (isinstance(v, str), v),
    )
    index = {v: i for i, v in enumerate(columns)}
    A = [{index[v]: c for v, c in row.items()} for row, _ in rows]
    b = [r for _, r in rows]
    c = [obj.get(v, Fraction(0)) for v in columns]
    return rep, fixed, columns, c, A, b, labels


def solve(model: EntropyLpModel, pivot: PivotRule = "bland", symmetry: bool = False) -> LpSolution:
    """Solve ``model`` exactly and verify the optimum against every original row.

    Raises
    ------
    LpError
        If the LP has no finite optimum or the recovered point violates the
        unreduced model.  Either signals a modelling bug.
    """
    rep, fixed, columns, c, A, b, labels = presolve(model, symmetry)
    value, x, y, pivots = minimize(c, A, b, pivot)

    reduced = dict(zip(columns, x))
    values: dict[Var, Fraction] = {}
    for v in list(range(1, 1 << model.n)) + list(model.rate_variables):
        r = rep(v)
        values[v] = fixed[r] if r in fixed else reduced.get(r, Fraction(0))
    for con in model.constraints:
        if not con.holds(values):
            raise LpError(f"re-substitution violates {con.cid}")
    primal_value = sum((w * values[r] for r, w in model.objective.items()), Fraction(0))
    if primal_value != value:
        raise LpError(f"duality gap: primal {primal_value} vs dual {value}")
    return LpSolution(
        optimal_rate=value,
        dual_certificate=[(labels[i], y[i]) for i in sorted(y)],
        primal={model.var_name(v): q for v, q in values.items() if q},
        pivots=pivots,
        rule=pivot,
        rows=len(A),
        columns=len(columns),
        symmetry=symmetry,
    )
