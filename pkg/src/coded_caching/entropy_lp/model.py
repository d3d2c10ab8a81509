"""Shannon outer-bound LP for tiny caching instances.

Random variables are indexed by bit position; an LP variable ``h[S]`` stands
for the joint entropy of the variables in bitmask ``S``.  Rates are extra
named variables (``R`` or ``R_1_2``).  Entropy is measured in file units.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Literal, Sequence, Union

from ..problem import (
    CapExceededError,
    DemandVector,
    DomainError,
    ProblemSize,
    all_demands,
    as_demand,
)

MAX_VARIABLES = 10

Objective = Literal["worst", "avg"]
# int: subset bitmask, str: rate variable name
Var = Union[int, str]


@dataclass(frozen=True)
class Constraint:
    """``sum(coef * var) relop rhs`` with ``relop`` in ``>=``, ``<=``, ``=``."""

    cid: str
    coeffs: tuple[tuple[Var, Fraction], ...]
    relop: str
    rhs: Fraction = Fraction(0)

    def lhs(self, values: dict[Var, Fraction]) -> Fraction:
        return sum((c * values.get(v, Fraction(0)) for v, c in self.coeffs), Fraction(0))

    def holds(self, values: dict[Var, Fraction]) -> bool:
        lhs = self.lhs(values)
        if self.relop == ">=":
            return lhs >= self.rhs
        if self.relop == "<=":
            return lhs <= self.rhs
        return lhs == self.rhs


@dataclass
class EntropyLpModel:
    """LP over the entropy vector of ``W_1..W_N, V_1..V_K, X_d (d in D)``.

    Attributes
    ----------
    random_variables : names in bit order.
    rate_variables : ``("R",)`` for the worst case, one ``R_d`` per demand
        for the average case.
    constraints : elemental inequalities followed by problem constraints.
    objective : coefficients of the rate variables (minimised).
    """

    ps: ProblemSize
    memory: Fraction
    demands: tuple[DemandVector, ...]
    kind: Objective
    random_variables: tuple[str, ...]
    rate_variables: tuple[str, ...]
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[str, Fraction] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.random_variables)

    @property
    def n_subset_variables(self) -> int:
        return (1 << self.n) - 1

    def mask(self, names: Iterable[str]) -> int:
        index = {v: i for i, v in enumerate(self.random_variables)}
        out = 0
        for name in names:
            out |= 1 << index[name]
        return out

    def subset_names(self, mask: int) -> list[str]:
        return sorted(v for i, v in enumerate(self.random_variables) if mask >> i & 1)

    def var_name(self, var: Var) -> str:
        if isinstance(var, str):
            return var
        return "H(" + ",".join(self.subset_names(var)) + ")"

    def export(self) -> str:
        """Line-oriented text: objective first, then one constraint per line."""
        lines = ["minimize " + " ".join(f"{c}*{v}" for v, c in self.objective.items())]
        for con in self.constraints:
            terms = " ".join(f"{c}*{self.var_name(v)}" for v, c in con.coeffs)
            lines.append(f"{terms} {con.relop} {con.rhs}")
        return "\n".join(lines) + "\n"


def x_name(d: DemandVector) -> str:
    return "X_" + "_".join(str(x) for x in d)


def rate_name(d: DemandVector) -> str:
    return "R_" + "_".join(str(x) for x in d)


def elemental_inequalities(n: int) -> list[Constraint]:
    """Monotonicity of the full set plus ``I(i;j|S) >= 0``.

    There are ``n + C(n,2) * 2**(n-2)`` of them.
    """
    full = (1 << n) - 1
    out = []
    one = Fraction(1)
    for i in range(n):
        rest = full & ~(1 << i)
        coeffs = ((full, one),) + (((rest, -one),) if rest else ())
        out.append(Constraint(f"mono{i}", coeffs, ">="))
    for i, j in combinations(range(n), 2):
        others = [k for k in range(n) if k != i and k != j]
        for r in range(len(others) + 1):
            for S in combinations(others, r):
                s = sum(1 << k for k in S)
                coeffs = [(s | 1 << i, one), (s | 1 << j, one), (s | 1 << i | 1 << j, -one)]
                if s:
                    coeffs.append((s, -one))
                out.append(Constraint(f"sub{i},{j}|{s}", tuple(coeffs), ">="))
    return out


def build_model(
    ps: ProblemSize,
    M: Fraction | int | str,
    demand_set: Sequence[DemandVector | Sequence[int]] | None = None,
    objective: Objective = "worst",
) -> EntropyLpModel:
    """Build the outer-bound LP for ``ps`` at cache size ``M``.

    Parameters
    ----------
    ps : instance size.
    M : cache size in files, converted to an exact ``Fraction``.
    demand_set : demand vectors to include; defaults to all ``N**K``.
    objective : ``"worst"`` bounds every ``H(X_d)`` by one ``R``; ``"avg"``
        gives each demand its own rate and minimises their mean.

    Raises
    ------
    CapExceededError
        If ``N + K + |D|`` exceeds ten.
    """
    M = Fraction(M)
    if not 0 <= M <= ps.N:
        raise DomainError(f"M must lie in [0, N], got {M}")
    if objective not in ("worst", "avg"):
        raise ValueError(f"unknown objective {objective!r}")
    if demand_set is None:
        demand_set = list(all_demands(ps.N, ps.K))
    demands = tuple(dict.fromkeys(as_demand(d) for d in demand_set))
    if not demands:
        raise DomainError("demand set is empty")
    for d in demands:
        d.validate(ps)
    n = ps.N + ps.K + len(demands)
    if n > MAX_VARIABLES:
        raise CapExceededError(f"{n} random variables exceeds the cap of {MAX_VARIABLES}")

    names = (
        tuple(f"W{i}" for i in range(1, ps.N + 1))
        + tuple(f"V{k}" for k in range(1, ps.K + 1))
        + tuple(x_name(d) for d in demands)
    )
    if objective == "worst":
        rates = ("R",)
        obj = {"R": Fraction(1)}
    else:
        rates = tuple(rate_name(d) for d in demands)
        obj = {r: Fraction(1, len(demands)) for r in rates}
    model = EntropyLpModel(ps, M, demands, objective, names, rates, objective=obj)
    cons = elemental_inequalities(n)

    one = Fraction(1)
    W = [1 << i for i in range(ps.N)]
    V = [1 << (ps.N + k) for k in range(ps.K)]
    X = [1 << (ps.N + ps.K + j) for j in range(len(demands))]
    all_files = sum(W)

    for r in range(1, ps.N + 1):
        for S in combinations(range(ps.N), r):
            s = sum(W[i] for i in S)
            label = ",".join(str(i + 1) for i in S)
            cons.append(Constraint(f"files{{{label}}}", ((s, one),), "=", Fraction(r)))
    for k, v in enumerate(V, 1):
        cons.append(Constraint(f"cache{k}", ((v, one),), "<=", M))
        cons.append(Constraint(f"place{k}", ((all_files | v, one), (all_files, -one)), "="))
    for j, d in enumerate(demands):
        dn = ",".join(str(x) for x in d)
        cons.append(Constraint(f"encode({dn})", ((all_files | X[j], one), (all_files, -one)), "="))
        rate = "R" if objective == "worst" else rates[j]
        cons.append(Constraint(f"rate({dn})", ((rate, one), (X[j], -one)), ">="))
        for k in range(ps.K):
            side = X[j] | V[k]
            want = W[d[k] - 1]
            cons.append(
                Constraint(f"decode({dn};{k + 1})", ((side | want, one), (side, -one)), "=")
            )
    model.constraints = cons
    return model
