"""Bit-exact centralized Maddah-Ali--Niesen placement and XOR delivery.

Files are non-negative integers of ``F`` bits.  Each file is split into
``C(K, t)`` equal subfiles, one per ``t``-subset of users, laid out as
contiguous bit ranges (least significant first) in colexicographic subset
order.  Receiver ``k`` caches every subfile whose label contains ``k``.

Bit operations are written so that a "file" may also be a numpy integer
array, one entry per message realisation; the entropy kit relies on this to
evaluate a scheme on every realisation at once.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .bounds import PiecewiseLinearCurve
from .problem import (
    CapExceededError,
    DecodeError,
    DemandVector,
    DomainError,
    ProblemSize,
    all_demands,
    as_demand,
)

Subset = tuple[int, ...]

ENUMERATION_CAP = 10**6


def colex_subsets(K: int, size: int) -> tuple[Subset, ...]:
    """``size``-subsets of ``1..K`` in colexicographic order."""
    combos = itertools.combinations(range(1, K + 1), size)
    return tuple(sorted(combos, key=lambda s: tuple(reversed(s))))


@dataclass(frozen=True)
class CacheScheme:
    ps: ProblemSize
    F: int
    t: int

    def __post_init__(self) -> None:
        if not 0 <= self.t <= self.ps.K:
            raise DomainError(f"t must lie in 0..K={self.ps.K}, got {self.t}")
        if self.F < 1 or self.F % math.comb(self.ps.K, self.t):
            raise DomainError(f"F={self.F} is not a positive multiple of C(K,t)={math.comb(self.ps.K, self.t)}")

    @cached_property
    def subsets(self) -> tuple[Subset, ...]:
        return colex_subsets(self.ps.K, self.t)

    @cached_property
    def subset_index(self) -> dict[Subset, int]:
        return {s: i for i, s in enumerate(self.subsets)}

    @property
    def subfile_bits(self) -> int:
        return self.F // len(self.subsets)

    @cached_property
    def placement(self) -> dict[int, tuple[tuple[int, Subset], ...]]:
        """Receiver -> stored ``(file, subset)`` labels in storage order."""
        return {
            k: tuple((n, s) for n in range(1, self.ps.N + 1) for s in self.subsets if k in s)
            for k in range(1, self.ps.K + 1)
        }

    @property
    def memory_used(self) -> Fraction:
        """Cache size in files: ``N C(K-1, t-1) / C(K, t) = N t / K``."""
        return Fraction(self.ps.N * self.t, self.ps.K)

    def cache_bits(self, k: int) -> int:
        return len(self.placement[k]) * self.subfile_bits

    def subfile(self, w, subset: Subset):
        s = self.subfile_bits
        return (w >> (self.subset_index[subset] * s)) & ((1 << s) - 1)

    def assemble(self, parts: dict[Subset, object]):
        s = self.subfile_bits
        w = 0
        for i, subset in enumerate(self.subsets):
            w = w | (parts[subset] << (i * s))
        return w


def place(ps: ProblemSize, t: int, F: int | None = None) -> CacheScheme:
    """MN placement with parameter ``t``; ``F`` defaults to ``C(K, t)``."""
    return CacheScheme(ps, math.comb(ps.K, t) if F is None else F, t)


def cache_contents(scheme: CacheScheme, files: Sequence) -> list:
    """Cache message of every receiver: its stored subfiles, concatenated."""
    s = scheme.subfile_bits
    out = []
    for k in range(1, scheme.ps.K + 1):
        v = 0
        for i, (n, subset) in enumerate(scheme.placement[k]):
            v = v | (scheme.subfile(files[n - 1], subset) << (i * s))
        out.append(v)
    return out


def unpack_cache(scheme: CacheScheme, k: int, v) -> dict[tuple[int, Subset], object]:
    s = scheme.subfile_bits
    mask = (1 << s) - 1
    return {label: (v >> (i * s)) & mask for i, label in enumerate(scheme.placement[k])}


def leaders(d: DemandVector) -> tuple[int, ...]:
    """First receiver requesting each distinct file."""
    seen: dict[int, int] = {}
    for k, f in enumerate(d, start=1):
        seen.setdefault(f, k)
    return tuple(sorted(seen.values()))


@dataclass(frozen=True)
class DeliveryTranscript:
    demand: DemandVector
    blocks: tuple[tuple[Subset, object], ...]
    block_bits: int
    F: int
    suppressed: bool = False

    @property
    def total_bits(self) -> int:
        return len(self.blocks) * self.block_bits

    @property
    def rate(self) -> Fraction:
        return Fraction(self.total_bits, self.F)

    def payload(self):
        """All blocks concatenated into one integer (first block least significant)."""
        x = 0
        for i, (_, bits) in enumerate(self.blocks):
            x = x | (bits << (i * self.block_bits))
        return x

    def dump(self) -> str:
        width = max(1, -(-self.block_bits // 4))
        return "\n".join(
            f"subset={','.join(map(str, subset))} bits={int(bits):0{width}x}" for subset, bits in self.blocks
        )


def _block(scheme: CacheScheme, d: DemandVector, files: Sequence, T: Subset):
    y = 0
    for k in T:
        y = y ^ scheme.subfile(files[d[k - 1] - 1], tuple(j for j in T if j != k))
    return y


def encode(scheme: CacheScheme, d, files: Sequence, suppress: bool = False) -> DeliveryTranscript:
    """Delivery without decoding checks; see :func:`deliver`."""
    d = as_demand(d)
    d.validate(scheme.ps)
    lead = set(leaders(d))
    blocks = []
    for T in colex_subsets(scheme.ps.K, scheme.t + 1) if scheme.t < scheme.ps.K else ():
        if suppress and not lead.intersection(T):
            continue
        blocks.append((T, _block(scheme, d, files, T)))
    return DeliveryTranscript(d, tuple(blocks), scheme.subfile_bits, scheme.F, suppress)


def _recover_block(scheme: CacheScheme, transcript: DeliveryTranscript, sent: dict, A: Subset):
    """Rebuild the block for an unsent subset ``A`` (no leader in ``A``).

    With ``U`` the leaders and ``B = A | U``, the XOR of the blocks
    ``B \\ V`` over all ``V`` picking one user in ``B`` per distinct file
    vanishes; every term other than ``V = U`` was transmitted.
    """
    d = transcript.demand
    U = leaders(d)
    B = sorted(set(A) | set(U))
    by_file: dict[int, list[int]] = {}
    for k in B:
        by_file.setdefault(d[k - 1], []).append(k)
    y = 0
    for choice in itertools.product(*by_file.values()):
        if tuple(sorted(choice)) == U:
            continue
        rest = tuple(k for k in B if k not in choice)
        if rest not in sent:
            raise DecodeError(f"block {rest} needed to rebuild {A} was not sent")
        y = y ^ sent[rest]
    return y


def decode(scheme: CacheScheme, transcript: DeliveryTranscript, k: int, cache):
    """Receiver ``k``'s estimate of its demanded file."""
    d = transcript.demand
    stored = unpack_cache(scheme, k, cache)
    sent = dict(transcript.blocks)
    want = d[k - 1]
    parts = {}
    for S in scheme.subsets:
        if k in S:
            parts[S] = stored[(want, S)]
            continue
        T = tuple(sorted(S + (k,)))
        y = sent[T] if T in sent else _recover_block(scheme, transcript, sent, T)
        for j in T:
            if j != k:
                y = y ^ stored[(d[j - 1], tuple(i for i in T if i != j))]
        parts[S] = y
    return scheme.assemble(parts)


def _same(x, y) -> bool:
    return bool(np.array_equal(np.asarray(x), np.asarray(y)))


def deliver(scheme: CacheScheme, d, files: Sequence, suppress: bool = False) -> DeliveryTranscript:
    """Encode the delivery for demand ``d`` and check every receiver decodes.

    Raises
    ------
    DecodeError
        If any receiver's estimate differs from its demanded file.
    """
    transcript = encode(scheme, d, files, suppress)
    caches = cache_contents(scheme, files)
    for k in range(1, scheme.ps.K + 1):
        if not _same(decode(scheme, transcript, k, caches[k - 1]), files[transcript.demand[k - 1] - 1]):
            raise DecodeError(f"receiver {k} failed for demand {transcript.demand}")
    return transcript


def random_files(scheme: CacheScheme, rng: np.random.Generator) -> list[int]:
    nbytes = -(-scheme.F // 8)
    return [int.from_bytes(rng.bytes(nbytes), "little") & ((1 << scheme.F) - 1) for _ in range(scheme.ps.N)]


def measure_rates(
    scheme: CacheScheme,
    suppress: bool = False,
    samples: int | None = None,
    seed: int = 0,
) -> tuple[Fraction, Fraction]:
    """Worst-case and average delivery rate in files.

    Every one of the ``N**K`` demands is delivered (on a random file
    realisation, decoding checked) unless ``N**K`` exceeds the enumeration
    cap, in which case ``samples`` uniformly drawn demands are used.
    """
    ps = scheme.ps
    rng = np.random.default_rng(seed)
    if ps.N ** ps.K <= ENUMERATION_CAP:
        demands = all_demands(ps.N, ps.K)
    elif samples:
        demands = (DemandVector(tuple(int(x) for x in rng.integers(1, ps.N + 1, size=ps.K))) for _ in range(samples))
    else:
        raise CapExceededError(f"N**K = {ps.N ** ps.K} demands exceed the cap; pass samples=")
    worst, total, count = 0, 0, 0
    for d in demands:
        bits = deliver(scheme, d, random_files(scheme, rng), suppress).total_bits
        worst = max(worst, bits)
        total += bits
        count += 1
    return Fraction(worst, scheme.F), Fraction(total, scheme.F * count)


def lower_convex_hull(points: Sequence[tuple]) -> list[tuple]:
    """Lower convex hull of ``(x, y)`` points, sorted by ``x`` (monotone chain)."""
    pts = sorted(set(points))
    hull: list[tuple] = []
    for p in pts:
        while hull and hull[-1][0] == p[0]:
            if hull[-1][1] <= p[1]:
                break
            hull.pop()
        else:
            while len(hull) >= 2:
                (x1, y1), (x2, y2) = hull[-2], hull[-1]
                if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                    hull.pop()
                else:
                    break
            hull.append(p)
    return hull


def achievable_curve(ps: ProblemSize, suppress: bool = False) -> PiecewiseLinearCurve:
    """Memory-sharing curve through the measured worst-case MN rates, exact."""
    pts = []
    for t in range(ps.K + 1):
        scheme = place(ps, t)
        pts.append((scheme.memory_used, measure_rates(scheme, suppress)[0]))
    return PiecewiseLinearCurve(tuple(lower_convex_hull(pts)))
