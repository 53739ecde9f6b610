"""Subrings of Q given by inverted primes, and the polynomials whose solvability
over them is decided here.

A ring is described by which primes it inverts: a finite set, the complement of
a finite set, or a finite 0/1 prefix over the primes in increasing order.  The
last kind is what a construction in progress knows, so statements about it can
come back ``NO_WITNESS_YET`` or ``None`` (unknown).
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

from .numtheory import (
    is_denominator_prime,
    is_prime,
    nth_prime,
    odd_prime,
    positivity_witness,
    prime_factors,
    prime_index,
)
from .poly import IntPoly, var

log = logging.getLogger(__name__)

__all__ = [
    "InvertedFinite",
    "InvertedCofinite",
    "BitstringPrefix",
    "RingDescriptor",
    "ring_contains",
    "Fe",
    "Ge",
    "ProductCoded",
    "FamilyPoly",
    "Verdict",
    "build_fe",
    "family_verdict",
    "extend_to_witness",
    "qe_semilocal_excluded",
    "search_solution",
    "solvable_excluding",
    "pad_injective",
    "TooManyVariables",
    "FE_X",
    "FE_Y",
    "FE_Z",
    "FE_W",
]


def _check_primes(primes: Iterable[int]) -> frozenset[int]:
    out = frozenset(int(p) for p in primes)
    bad = sorted(p for p in out if not is_prime(p))
    if bad:
        raise ValueError(f"not prime: {bad}")
    return out


@dataclass(frozen=True)
class InvertedFinite:
    """Z[W^-1] for a finite set W; ``InvertedFinite(frozenset())`` is Z."""

    primes: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "primes", _check_primes(self.primes))

    def inverts(self, p: int) -> Optional[bool]:
        return p in self.primes


@dataclass(frozen=True)
class InvertedCofinite:
    """The ring inverting every prime except the finitely many in ``excluded``."""

    excluded: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "excluded", _check_primes(self.excluded))

    def inverts(self, p: int) -> Optional[bool]:
        return p not in self.excluded


@dataclass(frozen=True)
class BitstringPrefix:
    """Bit i says whether nth_prime(i) is inverted; primes past the end are unknown."""

    bits: str

    def __post_init__(self) -> None:
        if set(self.bits) - {"0", "1"}:
            raise ValueError(f"bitstring must be 0/1, got {self.bits!r}")

    def inverts(self, p: int) -> Optional[bool]:
        i = prime_index(p)
        if i < 0:
            raise ValueError(f"{p} is not prime")
        if i >= len(self.bits):
            return None
        return self.bits[i] == "1"

    def inverted(self) -> list[int]:
        return [nth_prime(i) for i, b in enumerate(self.bits) if b == "1"]


RingDescriptor = Union[InvertedFinite, InvertedCofinite, BitstringPrefix]


def ring_contains(ring: RingDescriptor, r: Fraction | int) -> Optional[bool]:
    """Whether r lies in the ring; ``None`` if a prefix leaves it undetermined."""
    r = Fraction(r)
    unknown = False
    for p in prime_factors(r.denominator):
        v = ring.inverts(p)
        if v is False:
            return False
        if v is None:
            unknown = True
    return None if unknown else True


# --- the polynomial family ----------------------------------------------------

FE_X, FE_Y = 0, 1
FE_Z = (2, 3, 4, 5)
FE_W = (6, 7, 8, 9)


@dataclass(frozen=True)
class Fe:
    """Solvable over R iff x^2 + q_e y^2 = 1 has a solution in R with y > 0."""

    e: int


@dataclass(frozen=True)
class Ge:
    """Fe(e) solved over R intersected with the semilocal ring Q_e."""

    e: int


@dataclass(frozen=True)
class ProductCoded:
    """Solvable over R iff R inverts every prime factor of some block."""

    blocks: tuple[int, ...]

    def __post_init__(self) -> None:
        blocks = tuple(int(x) for x in self.blocks)
        for x in blocks:
            if x < 1 or any(x % (p * p) == 0 for p in prime_factors(x)):
                raise ValueError(f"block {x} is not a squarefree positive integer")
        object.__setattr__(self, "blocks", blocks)


FamilyPoly = Union[Fe, Ge, ProductCoded]


class Verdict(enum.Enum):
    IN = "In"
    OUT = "Out"
    NO_WITNESS_YET = "NoWitnessYet"

    def __str__(self) -> str:
        return self.value


def build_fe(e: int) -> IntPoly:
    """(X^2 + q Y^2 - 1)^2 + (Y (1 + sum Z_i^2) - (1 + sum W_i^2))^2 with q = q_e.

    The second square vanishes only when Y is a ratio of two sums of five
    squares, i.e. Y > 0 (every positive rational is such a ratio).
    """
    if e < 0:
        raise ValueError("e must be nonnegative")
    q = odd_prime(e)
    x, y = var(FE_X), var(FE_Y)
    zs = sum((var(i) ** 2 for i in FE_Z), IntPoly())
    ws = sum((var(i) ** 2 for i in FE_W), IntPoly())
    conic = x**2 + q * y**2 - 1
    positivity = y * (1 + zs) - (1 + ws)
    return conic**2 + positivity**2


def _fe_index(f: IntPoly) -> Optional[int]:
    """e if f is exactly build_fe(e), else None."""
    c = f.coefficient(((FE_X, 2), (FE_Y, 2)))
    if c <= 0 or c % 2:
        return None
    q = c // 2
    if q == 2 or not is_prime(q):
        return None
    e = prime_index(q) - 1
    return e if f == build_fe(e) else None


def qe_semilocal_excluded(e: int) -> frozenset[int]:
    """The primes pet(j, t) with j + t <= e, the only ones Q_e does not invert."""
    from .injury import pet

    if e < 0:
        raise ValueError("e must be nonnegative")
    values = [pet(j, t) for j in range(e + 1) for t in range(e + 1 - j)]
    out = frozenset(values)
    if len(out) != len(values):
        log.warning("pet values collide among j + t <= %d", e)
    return out


def _witness_allowed(fp: FamilyPoly) -> Callable[[int], bool]:
    q = odd_prime(fp.e)
    if isinstance(fp, Fe):
        return lambda p: is_denominator_prime(p, q)
    excluded = qe_semilocal_excluded(fp.e)
    return lambda p: p not in excluded and is_denominator_prime(p, q)


def family_verdict(fp: FamilyPoly, ring: RingDescriptor) -> Verdict:
    """Decide solvability of a family member over the ring.

    Fe/Ge: a witness is an inverted prime that can divide the denominator of a
    solution of x^2 + q_e y^2 = 1 with y > 0.  That is a q_e-appropriate prime,
    or 2 when q_e = 3 or q_e = 7 mod 8.  For Ge it must also lie outside the
    excluded set of Q_e.  Cofinite rings always contain a witness, since there
    are infinitely many appropriate primes.  ProductCoded: a witness is a block
    whose prime support is entirely inverted.
    """
    if isinstance(fp, ProductCoded):
        return _product_verdict(fp, ring)
    allowed = _witness_allowed(fp)
    if isinstance(ring, InvertedCofinite):
        return Verdict.IN
    if isinstance(ring, InvertedFinite):
        return Verdict.IN if any(allowed(p) for p in ring.primes) else Verdict.OUT
    if any(allowed(p) for p in ring.inverted()):
        return Verdict.IN
    return Verdict.NO_WITNESS_YET


def _product_verdict(fp: ProductCoded, ring: RingDescriptor) -> Verdict:
    undecided = False
    for x in fp.blocks:
        states = [ring.inverts(p) for p in prime_factors(x)]
        if all(s is True for s in states):
            return Verdict.IN
        if not any(s is False for s in states):
            undecided = True
    return Verdict.NO_WITNESS_YET if undecided else Verdict.OUT


def extend_to_witness(fp: Union[Fe, Ge], prefix: BitstringPrefix) -> BitstringPrefix:
    """Extend the prefix by zeros and then a one at the first allowed witness prime."""
    allowed = _witness_allowed(fp)
    i = len(prefix.bits)
    while not allowed(nth_prime(i)):
        i += 1
    return BitstringPrefix(prefix.bits + "0" * (i - len(prefix.bits)) + "1")


# --- bounded search -----------------------------------------------------------


class TooManyVariables(ValueError):
    pass


def _height(r: Fraction) -> int:
    return max(abs(r.numerator), r.denominator)


def _order_key(r: Fraction) -> tuple[int, int, int, int]:
    return (_height(r), r.denominator, abs(r.numerator), 1 if r < 0 else 0)


def _denominators(height: int, admits: Callable[[int], bool]) -> list[int]:
    return [d for d in range(1, height + 1) if all(admits(p) for p in prime_factors(d))]


def _elements(height: int, admits: Callable[[int], bool]) -> list[Fraction]:
    """Ring elements of height <= height, in enumeration order."""
    out = set()
    for d in _denominators(height, admits):
        for n in range(-height, height + 1):
            if math.gcd(n, d) == 1 or (n == 0 and d == 1):
                out.add(Fraction(n, d))
    return sorted(out, key=_order_key)


def _tuples_by_height(elems: list[Fraction], n: int, height: int) -> Iterator[tuple]:
    """All n-tuples over elems, grouped by max height, lexicographic within a group."""
    for h in range(1, height + 1):
        pool = [r for r in elems if _height(r) <= h]
        for tup in itertools.product(pool, repeat=n):
            if max(_height(r) for r in tup) == h:
                yield tup


def _is_rational_square(r: Fraction) -> Optional[Fraction]:
    if r < 0:
        return None
    a, b = math.isqrt(r.numerator), math.isqrt(r.denominator)
    if a * a == r.numerator and b * b == r.denominator:
        return Fraction(a, b)
    return None


def _search_fe(
    e: int, admits: Callable[[int], bool], height: int
) -> Optional[dict[int, Fraction]]:
    """Scan (x, y) in the order of a two-variable search, then complete z, w."""
    q = odd_prime(e)
    f = build_fe(e)
    elems = _elements(height, admits)
    candidates = []
    for y in elems:
        if y <= 0:
            continue
        x = _is_rational_square(1 - q * y * y)
        if x is None:
            continue
        for xx in {x, -x}:
            if _height(xx) <= height:
                candidates.append((xx, y))
    if not candidates:
        return None
    x, y = min(
        candidates,
        key=lambda xy: (max(map(_height, xy)), _order_key(xy[0]), _order_key(xy[1])),
    )
    z, w = positivity_witness(y, y.denominator)
    point = {FE_X: x, FE_Y: y}
    point.update(zip(FE_Z, z))
    point.update(zip(FE_W, w))
    if f.evaluate(point) != 0:
        raise AssertionError(f"composed witness fails for e={e}: {point}")
    return point


def _search(
    f: IntPoly, admits: Callable[[int], bool], height: int, max_vars: int
) -> Optional[dict[int, Fraction]]:
    if height < 1:
        raise ValueError("height must be positive")
    e = _fe_index(f)
    if e is not None:
        return _search_fe(e, admits, height)
    vs = f.variables()
    if not vs:
        return {} if f.evaluate({}) == 0 else None
    if len(vs) > max_vars:
        raise TooManyVariables(
            f"{len(vs)} variables exceeds the search cap of {max_vars}"
        )
    elems = _elements(height, admits)
    for tup in _tuples_by_height(elems, len(vs), height):
        point = dict(zip(vs, tup))
        if f.evaluate(point) == 0:
            return point
    return None


def search_solution(
    f: IntPoly, ring: RingDescriptor, height: int, max_vars: int = 4
) -> Optional[dict[int, Fraction]]:
    """First zero of f over ring elements of height <= height, or None.

    Height of a/b is max(|a|, b).  Tuples are visited by increasing maximum
    height and lexicographically within a height, elements ordered by
    (height, denominator, |numerator|, positive first).  Polynomials equal to
    build_fe(e) use a reduced scan over (x, y) and complete the remaining eight
    coordinates from four-square decompositions.  None is not a proof of
    unsolvability.
    """
    if isinstance(ring, BitstringPrefix):
        raise TypeError("search needs a fully specified ring")
    return _search(f, lambda p: ring.inverts(p) is True, height, max_vars)


def solvable_excluding(
    f: IntPoly, a0: Iterable[int], height: int, max_vars: int = 4
) -> Optional[dict[int, Fraction]]:
    """Bounded search over rationals whose denominators avoid the primes in a0."""
    return search_solution(f, InvertedCofinite(frozenset(a0)), height, max_vars)


# --- padding ------------------------------------------------------------------


def pad_injective(
    code_table: Mapping[int, IntPoly], literal: bool = False
) -> dict[int, IntPoly]:
    """n -> G(n)^2 + X_0^(2n): injective in n, and solvable over a ring iff G(n) is.

    The extra square forces X_0 = 0 at any zero, so solvability is unchanged,
    while the X_0 exponent records n.  If some G(n) already uses X_0, every
    polynomial's variables are shifted up by one first.  ``literal=True``
    builds G(n)^2 + X_0^n instead; for odd n that is always solvable
    (take X_0 = -G^2), so it is kept only to exhibit the failure.
    """
    table = dict(code_table)
    if any(n < 1 for n in table):
        raise ValueError("code table indices must be positive")
    if any(0 in g.variables() for g in table.values()):
        table = {n: g.shift_variables(1) for n, g in table.items()}
    x0 = var(0)
    return {n: g**2 + x0 ** (n if literal else 2 * n) for n, g in table.items()}
