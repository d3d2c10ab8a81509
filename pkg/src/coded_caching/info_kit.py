"""Exact entropy computations and finite-instance checks of the converse lemmas.

Two substrates are supported:

* :class:`JointPmf`, a dense probability table, for generic checks such as
  the generalized Han inequality on random distributions;
* :class:`SchemeEntropyContext`, the joint law of messages, caches and
  delivery symbols induced by a concrete scheme with uniform messages.
  Every variable there is a deterministic function of the messages, so
  entropies come from counting preimage sizes.

The converse lemmas hold for every ``epsilon > 0`` and large ``F``; the
schemes checked here are zero-error at finite ``F``, where the inequalities
must hold with ``epsilon = 0``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .problem import (
    CapExceededError,
    DecodeError,
    DemandVector,
    DomainError,
    IndependenceError,
    OverlapError,
    all_demands,
    as_demand,
    distinct_demands,
)
from .schemes import CacheScheme, cache_contents, decode, encode

MAX_VARIABLES = 16
MAX_OUTCOMES = 1 << 20
CMI_TOLERANCE = 1e-10


# ------------------------------------------------------------- JointPmf

@dataclass(frozen=True)
class JointPmf:
    """Dense joint distribution; axis ``i`` is random variable ``i``."""

    probabilities: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "probabilities", p)
        if p.ndim < 1 or p.ndim > MAX_VARIABLES:
            raise DomainError(f"between 1 and {MAX_VARIABLES} variables supported, got {p.ndim}")
        if p.size > MAX_OUTCOMES:
            raise CapExceededError(f"{p.size} joint outcomes exceed {MAX_OUTCOMES}")
        if np.any(p < 0):
            raise DomainError("probabilities must be non-negative")
        if abs(math.fsum(p.ravel().tolist()) - 1.0) > 1e-12:
            raise DomainError("probabilities must sum to 1")

    @property
    def n(self) -> int:
        return self.probabilities.ndim

    @property
    def alphabet_sizes(self) -> tuple[int, ...]:
        return self.probabilities.shape

    def marginal(self, subset: Iterable[int]) -> np.ndarray:
        keep = sorted(set(subset))
        drop = tuple(i for i in range(self.n) if i not in keep)
        return self.probabilities.sum(axis=drop) if drop else self.probabilities


def _check_indices(pmf: JointPmf, subset: Iterable[int]) -> frozenset[int]:
    s = frozenset(int(i) for i in subset)
    if any(i < 0 or i >= pmf.n for i in s):
        raise DomainError(f"variable index out of range in {sorted(s)}")
    return s


def entropy_of(p: np.ndarray) -> float:
    """Shannon entropy in bits of a probability array, ``0 log 0 = 0``."""
    q = p[p > 0]
    return -math.fsum((q * np.log2(q)).tolist())


def entropy(pmf: JointPmf, subset: Iterable[int]) -> float:
    """Entropy (bits) of the marginal on ``subset``."""
    s = _check_indices(pmf, subset)
    if not s:
        raise DomainError("entropy of an empty variable set")
    return entropy_of(pmf.marginal(s))


def _h(pmf: JointPmf, s: frozenset[int]) -> float:
    return entropy_of(pmf.marginal(s)) if s else 0.0


def conditional_mi(pmf: JointPmf, A: Iterable[int], B: Iterable[int], C: Iterable[int] = ()) -> float:
    """``I(A; B | C)`` in bits for pairwise disjoint index sets.

    Results within ``1e-10`` below zero are clamped to zero.
    """
    a, b, c = (_check_indices(pmf, x) for x in (A, B, C))
    if not a or not b:
        raise DomainError("A and B must be non-empty")
    if a & b or a & c or b & c:
        raise OverlapError("A, B and C must be pairwise disjoint")
    value = _h(pmf, a | c) + _h(pmf, b | c) - _h(pmf, a | b | c) - _h(pmf, c)
    if value < 0:
        if value < -CMI_TOLERANCE:
            raise DomainError(f"negative conditional mutual information {value}")
        value = 0.0
    return value


def han_check(
    pmf: JointPmf, parts: Sequence[Iterable[int]], v_vars: Iterable[int], l: int, tol: float = 1e-9
) -> tuple[float, float]:
    """Both sides of the averaged-subset (generalized Han) bound.

    ``lhs = mean over |S| = l of I(A_S; V)`` and ``rhs = (l/L) I(A_1..A_L; V)``.
    The parts must be mutually independent; the caller compares the sides.
    """
    parts = [frozenset(_check_indices(pmf, p)) for p in parts]
    L = len(parts)
    if not 1 <= l <= L:
        raise DomainError(f"l must lie in 1..{L}")
    everything = frozenset().union(*parts)
    joint = _h(pmf, everything)
    separate = math.fsum(_h(pmf, p) for p in parts)
    if abs(joint - separate) > tol:
        raise IndependenceError(f"H(A_1..A_L) = {joint} but sum of H(A_i) = {separate}")
    v = _check_indices(pmf, v_vars)
    subsets = list(itertools.combinations(parts, l))
    lhs = math.fsum(conditional_mi(pmf, frozenset().union(*s), v) for s in subsets) / len(subsets)
    rhs = l / L * conditional_mi(pmf, everything, v)
    return lhs, rhs


def random_pmf(rng: np.random.Generator, alphabet_sizes: Sequence[int]) -> JointPmf:
    p = rng.dirichlet(np.ones(int(np.prod(alphabet_sizes))))
    return JointPmf(p.reshape(tuple(alphabet_sizes)))


def random_han_instance(rng: np.random.Generator) -> tuple[JointPmf, list[tuple[int]], tuple[int]]:
    """Independent ``A_1..A_L`` (alphabets <= 3) and a random channel to ``V`` (alphabet <= 4).

    Returns the pmf with axes ``(A_1, ..., A_L, V)``, the parts and the V axis.
    """
    L = int(rng.integers(2, 4))
    sizes = [int(s) for s in rng.integers(2, 4, size=L)]
    v_size = int(rng.integers(2, 5))
    joint = np.ones(())
    for s in sizes:
        joint = np.multiply.outer(joint, rng.dirichlet(np.ones(s)))
    channel = rng.dirichlet(np.ones(v_size), size=tuple(sizes))
    pmf = joint[..., None] * channel
    pmf = pmf / pmf.sum()
    return JointPmf(pmf), [(i,) for i in range(L)], (L,)


# ------------------------------------------------------- distinct demands

def expected_distinct(N: int, ell: int, method: str = "closed", exact: bool = False):
    """Mean number of distinct files among ``ell`` uniform independent demands.

    ``method="closed"`` evaluates ``N (1 - (1 - 1/N)**ell)`` (a ``Fraction``
    when ``exact``); ``method="enumerate"`` averages the distinct count over
    all ``N**ell`` demand vectors and always returns a ``Fraction``.
    """
    if N < 1 or ell < 1:
        raise DomainError("N and ell must be positive")
    if method == "closed":
        if exact:
            return Fraction(N**ell - (N - 1) ** ell, N ** (ell - 1))
        return N * -math.expm1(ell * math.log1p(-1.0 / N)) if N > 1 else 1.0
    if method != "enumerate":
        raise DomainError(f"unknown method {method!r}")
    total = N**ell
    if total > 10**6:
        raise CapExceededError(f"N**ell = {total} exceeds the enumeration cap 10**6")
    idx = np.arange(total, dtype=np.int64)
    digits = np.stack([(idx // N**j) % N for j in range(ell)], axis=1)
    digits.sort(axis=1)
    counts = 1 + np.count_nonzero(np.diff(digits, axis=1), axis=1)
    return Fraction(int(counts.sum()), total)


# ------------------------------------------------- scheme-induced entropies

class SchemeEntropyContext:
    """Joint law of ``(W_1..W_N, V_1..V_K, X_d)`` under uniform messages.

    Variables are addressed by name: ``"W1"``, ``"V2"``, and
    :meth:`x_name` for delivery symbols.  All ``2**(N F)`` message tuples are
    enumerated, so ``N F <= 20``.
    """

    def __init__(self, scheme: CacheScheme, suppress: bool = False) -> None:
        ps = scheme.ps
        if ps.N * scheme.F > 20:
            raise CapExceededError(f"N*F = {ps.N * scheme.F} exceeds 20 message bits")
        self.scheme = scheme
        self.suppress = suppress
        self.outcomes = 1 << (ps.N * scheme.F)
        idx = np.arange(self.outcomes, dtype=np.int64)
        mask = (1 << scheme.F) - 1
        self.files = [(idx >> (n * scheme.F)) & mask for n in range(ps.N)]
        self.columns: dict[str, np.ndarray] = {f"W{n + 1}": w for n, w in enumerate(self.files)}
        for k, v in enumerate(cache_contents(scheme, self.files), start=1):
            self.columns[f"V{k}"] = np.broadcast_to(np.asarray(v, dtype=np.int64), idx.shape)
        self._transcripts: dict[DemandVector, object] = {}
        self._cache: dict[frozenset[str], float] = {}

    @property
    def F(self) -> int:
        return self.scheme.F

    @staticmethod
    def x_name(d) -> str:
        return f"X({as_demand(d)})"

    def add_delivery(self, d) -> str:
        d = as_demand(d)
        name = self.x_name(d)
        if name not in self.columns:
            transcript = encode(self.scheme, d, self.files, self.suppress)
            if transcript.total_bits > 62:
                raise CapExceededError("delivery symbol wider than 62 bits")
            x = np.broadcast_to(np.asarray(transcript.payload(), dtype=np.int64), (self.outcomes,))
            self.columns[name] = x
            self._transcripts[d] = transcript
        return name

    def decodes(self, d) -> bool:
        """Whether every receiver recovers its file on every realisation."""
        d = as_demand(d)
        self.add_delivery(d)
        transcript = self._transcripts[d]
        for k in range(1, self.scheme.ps.K + 1):
            est = decode(self.scheme, transcript, k, self.columns[f"V{k}"])
            if not np.array_equal(np.broadcast_to(est, (self.outcomes,)), self.files[d[k - 1] - 1]):
                return False
        return True

    def entropy(self, names: Iterable[str]) -> float:
        """Joint entropy in bits of the named variables (empty set -> 0)."""
        key = frozenset(names)
        if not key:
            return 0.0
        if key not in self._cache:
            rows = np.stack([self.columns[n] for n in sorted(key)], axis=1)
            counts = np.unique(rows, axis=0, return_counts=True)[1]
            self._cache[key] = math.log2(self.outcomes) - math.fsum(
                (counts * np.log2(counts)).tolist()
            ) / self.outcomes
        return self._cache[key]

    def mutual_info(self, A: Iterable[str], B: Iterable[str], C: Iterable[str] = ()) -> float:
        """``I(A; B | C)`` with set semantics (overlapping sets allowed)."""
        a, b, c = frozenset(A), frozenset(B), frozenset(C)
        value = self.entropy(a | c) + self.entropy(b | c) - self.entropy(a | b | c) - self.entropy(c)
        return 0.0 if abs(value) < CMI_TOLERANCE else value

    @property
    def memory(self) -> float:
        """Largest cache entropy in files, the tightest valid ``M``."""
        return max(self.entropy([f"V{k}"]) for k in range(1, self.scheme.ps.K + 1)) / self.F

    def range_size(self, d) -> int:
        return int(np.unique(self.columns[self.add_delivery(d)]).size)

    def achieved_rate(self, d) -> float:
        """``log2 |range(X_d)| / F``."""
        return math.log2(self.range_size(d)) / self.F

    def prefix_information(self, d: Sequence[int], k: int) -> float:
        """``I(W_{d_k}; V_1..V_k | W_{d_1}..W_{d_{k-1}})`` in bits."""
        return self.mutual_info(
            [f"W{d[k - 1]}"], [f"V{j}" for j in range(1, k + 1)], [f"W{x}" for x in d[: k - 1]]
        )


class LemmaCheck(NamedTuple):
    values: list[float]
    bound_a: float
    bound_b: float


def _check_ell(ctx: SchemeEntropyContext, ell: int, upper: int) -> None:
    if not 1 <= ell <= upper:
        raise DomainError(f"ell must lie in 1..{upper}, got {ell}")


def lemma1_check(ctx: SchemeEntropyContext, d, ell: int) -> tuple[float, float]:
    """Per-demand converse: ``(rate_bound, achieved_rate)`` for prefix length ``ell``.

    ``rate_bound = kappa_d(ell) - (1/F) sum_{k<=ell} I(W_{d_k}; V_1..V_k | W_{d_1}..W_{d_{k-1}})``.
    """
    d = as_demand(d)
    d.validate(ctx.scheme.ps)
    _check_ell(ctx, ell, ctx.scheme.ps.nbar)
    if not ctx.decodes(d):
        raise DecodeError(f"scheme does not decode demand {d}")
    info = math.fsum(ctx.prefix_information(d.entries, k) for k in range(1, ell + 1))
    return d.distinct_count(ell) - info / ctx.F, ctx.achieved_rate(d)


def lemma3_alphas(ctx: SchemeEntropyContext, ell: int, max_files: int = 5, max_ell: int = 4) -> LemmaCheck:
    """Averages ``alpha_k`` over ordered distinct demand prefixes of length ``ell``.

    Bounds: ``ell**2 M / N`` and ``sum_k k M/(N-k+1)`` with ``M = ctx.memory``.
    """
    ps = ctx.scheme.ps
    _check_ell(ctx, ell, ps.nbar)
    if ps.N > max_files or ell > max_ell:
        raise CapExceededError(f"distinct-prefix enumeration capped at N <= {max_files}, ell <= {max_ell}")
    prefixes = [d.entries for d in distinct_demands(ps.N, ell)]
    alphas = [
        math.fsum(ctx.prefix_information(d, k) for d in prefixes) / (len(prefixes) * ctx.F)
        for k in range(1, ell + 1)
    ]
    M = ctx.memory
    return LemmaCheck(alphas, ell * ell * M / ps.N, math.fsum(k * M / (ps.N - k + 1) for k in range(1, ell + 1)))


def lemma4_betas(ctx: SchemeEntropyContext, ell: int, cap: int = 10**4) -> LemmaCheck:
    """Averages ``beta_k`` over all ``N**ell`` demand prefixes (repetitions allowed).

    Bounds: ``E[kappa(ell)] ell M / N`` and ``sum_k k M / N``.
    """
    ps = ctx.scheme.ps
    _check_ell(ctx, ell, ps.K)
    if ps.N**ell > cap:
        raise CapExceededError(f"N**ell = {ps.N**ell} exceeds {cap}")
    prefixes = [d.entries for d in all_demands(ps.N, ell)]
    betas = [
        math.fsum(ctx.prefix_information(d, k) for d in prefixes) / (len(prefixes) * ctx.F)
        for k in range(1, ell + 1)
    ]
    M = ctx.memory
    return LemmaCheck(
        betas, expected_distinct(ps.N, ell) * ell * M / ps.N, math.fsum(k * M / ps.N for k in range(1, ell + 1))
    )
