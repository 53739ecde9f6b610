"""Measures of solution classes on Cantor space over the primes.

A point W of Cantor space is a set of primes (the inverted ones); bit i of a
node refers to nth_prime(i).  For a set D of squarefree integers, the class
{W : some x in D has every prime factor in W} is an open set whose measure
is computed here in closed form for disjoint block families and by three
independent brute-force methods in general.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .dyadic import Dyadic
from .numtheory import nth_prime, prime_factors, prime_index
from .rings import (
    BitstringPrefix,
    Fe,
    FamilyPoly,
    Ge,
    InvertedCofinite,
    RingDescriptor,
    Verdict,
    family_verdict,
)

__all__ = [
    "BlockSequence",
    "nk_sequence",
    "alpha_closed_form",
    "alpha_bruteforce",
    "supports_of",
    "Region",
    "boundary_classify",
    "MeasureTriple",
    "ENUMERATION_LIMIT",
    "INCLUSION_EXCLUSION_LIMIT",
]

ENUMERATION_LIMIT = 24
INCLUSION_EXCLUSION_LIMIT = 20


@dataclass(frozen=True)
class BlockSequence:
    """Block sizes n_k, the blocks x_k (products of consecutive primes) and
    the rationals q_k they were fitted to."""

    n: tuple[int, ...]
    x: tuple[int, ...]
    q: tuple[Fraction, ...]

    def partial_products(self) -> list[Fraction]:
        """prod_{j <= k} (1 - 2^-n_j) for each k."""
        out, acc = [], Fraction(1)
        for n in self.n:
            acc *= 1 - Fraction(1, 2**n)
            out.append(acc)
        return out

    def universe(self, k: Optional[int] = None) -> int:
        """Number of prime positions used by the first k blocks."""
        return sum(self.n[: len(self.n) if k is None else k])


def nk_sequence(q_seq: Sequence[Fraction], count: int) -> BlockSequence:
    """Least n_k keeping prod (1 - 2^-n_j) >= 1 - q_k, blocks of consecutive primes."""
    qs = [Fraction(q) for q in q_seq[:count]]
    if len(qs) < count:
        raise ValueError(f"need {count} rationals, got {len(qs)}")
    for a, b in zip(qs, qs[1:]):
        if not a < b:
            raise ValueError("q_seq must be strictly increasing")
    if qs and not (0 < qs[0] and qs[-1] < 1):
        raise ValueError("q_seq must lie in (0, 1)")
    ns: list[int] = []
    xs: list[int] = []
    prod = Fraction(1)
    pos = 0
    for q in qs:
        n = 1
        while prod * (1 - Fraction(1, 2**n)) < 1 - q:
            n += 1
        prod *= 1 - Fraction(1, 2**n)
        ns.append(n)
        x = 1
        for i in range(pos, pos + n):
            x *= nth_prime(i)
        xs.append(x)
        pos += n
    return BlockSequence(tuple(ns), tuple(xs), tuple(qs))


def alpha_closed_form(blocks: BlockSequence, count: int) -> Dyadic:
    """Measure of the rings inverting some full block among the first ``count``.

    The blocks have disjoint supports, so this is 1 - prod (1 - 2^-n_k).
    """
    if count > len(blocks.n):
        raise ValueError(f"only {len(blocks.n)} blocks available")
    miss = Dyadic(1)
    for n in blocks.n[:count]:
        miss = miss * (1 - Dyadic(1, n))
    return 1 - miss


def supports_of(d: Iterable[int]) -> list[int]:
    """Each x as a bitmask over prime positions."""
    masks = []
    for x in d:
        if x < 1:
            raise ValueError(f"{x} is not a positive integer")
        m = 0
        for p in prime_factors(x):
            if x % (p * p) == 0:
                raise ValueError(f"{x} is not squarefree")
            m |= 1 << prime_index(p)
        masks.append(m)
    return masks


def _alpha_enumerate(masks: list[int], universe: int) -> Dyadic:
    points = np.arange(1 << universe, dtype=np.int64)
    hit = np.zeros(points.shape, dtype=bool)
    for m in masks:
        hit |= (points & m) == m
    return Dyadic(int(hit.sum()), universe)


def _alpha_inclusion_exclusion(masks: list[int]) -> Dyadic:
    total = Dyadic(0)
    for r in range(1, len(masks) + 1):
        sign = 1 if r % 2 else -1
        for combo in itertools.combinations(masks, r):
            union = 0
            for m in combo:
                union |= m
            total = total + Dyadic(sign, union.bit_count())
    return total


def _minimal(masks: Iterable[int]) -> frozenset[int]:
    """Drop any mask that contains another (absorption)."""
    ms = sorted(set(masks), key=int.bit_count)
    keep: list[int] = []
    for m in ms:
        if not any(k & m == k for k in keep):
            keep.append(m)
    return frozenset(keep)


def _alpha_shannon(masks: list[int]) -> Dyadic:
    """Cofactor expansion on one prime position at a time, memoized.

    Independent groups of masks (no shared positions) multiply their
    miss-probabilities, which keeps chains of private positions cheap.
    """
    memo: dict[frozenset[int], Dyadic] = {}

    def miss(fam: frozenset[int]) -> Dyadic:
        if not fam:
            return Dyadic(1)
        if 0 in fam:
            return Dyadic(0)
        if fam in memo:
            return memo[fam]
        comps = _components(fam)
        if len(comps) > 1:
            out = Dyadic(1)
            for c in comps:
                out = out * miss(c)
        elif len(fam) == 1:
            (m,) = fam
            out = 1 - Dyadic(1, m.bit_count())
        else:
            # branch on the position shared by the most masks
            counts: dict[int, int] = {}
            for m in fam:
                b = m
                while b:
                    low = b & -b
                    counts[low] = counts.get(low, 0) + 1
                    b ^= low
            bit = max(counts, key=lambda k: (counts[k], -k))
            present = _minimal(m & ~bit for m in fam)
            absent = frozenset(m for m in fam if not m & bit)
            out = (miss(present) + miss(absent)).scaled(1)
        memo[fam] = out
        return out

    return 1 - miss(_minimal(masks))


def _components(fam: frozenset[int]) -> list[frozenset[int]]:
    groups: list[tuple[int, list[int]]] = []
    for m in fam:
        merged_bits, merged = m, [m]
        rest = []
        for bits, members in groups:
            if bits & merged_bits:
                merged_bits |= bits
                merged.extend(members)
            else:
                rest.append((bits, members))
        groups = rest + [(merged_bits, merged)]
    return [frozenset(members) for _, members in groups]


def alpha_bruteforce(
    d: Iterable[int], universe: int, method: str = "auto"
) -> Dyadic:
    """Measure of {W : W contains every prime factor of some x in d}.

    ``method``: "enumerate" (all 2^universe sets, universe <= 24),
    "inclusion-exclusion" (|d| <= 20), "shannon" (cofactor expansion, no
    hard limit) or "auto".
    """
    masks = supports_of(d)
    if any(m >> universe for m in masks):
        raise ValueError(f"some prime factor lies beyond the first {universe} primes")
    if method == "auto":
        if universe <= 16:
            method = "enumerate"
        elif len(masks) <= 12:
            method = "inclusion-exclusion"
        else:
            method = "shannon"
    if method == "enumerate":
        if universe > ENUMERATION_LIMIT:
            raise ValueError(f"enumeration refused: universe {universe} > {ENUMERATION_LIMIT}")
        return _alpha_enumerate(masks, universe)
    if method == "inclusion-exclusion":
        if len(masks) > INCLUSION_EXCLUSION_LIMIT:
            raise ValueError(
                f"inclusion-exclusion refused: {len(masks)} sets > {INCLUSION_EXCLUSION_LIMIT}"
            )
        return _alpha_inclusion_exclusion(masks)
    if method == "shannon":
        return _alpha_shannon(masks)
    raise ValueError(f"unknown method {method!r}")


class Region(enum.Enum):
    A = "A"  # f has a solution in R_W
    B = "B"  # no solution, yet every finite prefix of W extends to one with
    C = "C"  # some finite set of non-inverted primes already rules solutions out

    def __str__(self) -> str:
        return self.value


def boundary_classify(fp: FamilyPoly, ring: RingDescriptor) -> Region:
    """Which of A(f), B(f), C(f) contains the ring.

    For Fe and Ge the witnesses are single primes from an infinite set, so
    excluding finitely many primes never rules a solution out: C is empty.
    ProductCoded blocks are read as the first members of an unbounded family
    of pairwise disjoint blocks, as a block coding keeps producing them;
    every cofinite ring then inverts some block, so C is empty there too.
    """
    if isinstance(ring, BitstringPrefix):
        raise TypeError("classification needs a fully specified ring")
    if isinstance(fp, (Fe, Ge)):
        return Region.A if family_verdict(fp, ring) is Verdict.IN else Region.B
    if isinstance(ring, InvertedCofinite):
        return Region.A
    return Region.A if family_verdict(fp, ring) is Verdict.IN else Region.B


@dataclass(frozen=True)
class MeasureTriple:
    """alpha, beta, gamma: measures of A(f), B(f), C(f)."""

    alpha: Dyadic | Fraction
    beta: Dyadic | Fraction
    gamma: Dyadic | Fraction

    def __post_init__(self) -> None:
        total = Fraction(0)
        for v in (self.alpha, self.beta, self.gamma):
            total += v.to_fraction() if isinstance(v, Dyadic) else Fraction(v)
        if total != 1:
            raise ValueError(f"measures sum to {total}, not 1")
