"""Exact number-theoretic primitives.

Primes are indexed from zero: ``nth_prime(0) == 2``.  Odd primes get their own
indexing, ``odd_prime(0) == 3``, which is how the coefficients ``q_e`` of the
conic family are named throughout the package.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

__all__ = [
    "SearchCapExceeded",
    "ConicSolution",
    "is_prime",
    "nth_prime",
    "odd_prime",
    "prime_index",
    "primes_up_to",
    "next_prime",
    "legendre",
    "legendre_bruteforce",
    "is_q_appropriate",
    "is_q_appropriate_mod4",
    "is_denominator_prime",
    "find_appropriate_primes",
    "crt_residue_witness",
    "conic_primitive_solution",
    "conic_primitive_solution_bruteforce",
    "solution_in_localization",
    "four_square_decomposition",
    "positivity_witness",
    "prime_factors",
]


class SearchCapExceeded(RuntimeError):
    """A bounded scan ran past its cap before finding enough answers."""


# Deterministic Miller-Rabin bases valid for every n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_TRIAL_BOUND = 1000


def _sieve(limit: int) -> bytearray:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, limit + 1, i)))
    return sieve


def _small_primes(limit: int) -> list[int]:
    return [i for i, flag in enumerate(_sieve(limit)) if flag]


_TRIAL_PRIMES = _small_primes(_TRIAL_BOUND)
# O(1) lookup for the range the constructions actually touch
_LOOKUP_LIMIT = 1 << 21
_LOOKUP = _sieve(_LOOKUP_LIMIT)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n <= _LOOKUP_LIMIT:
        return bool(_LOOKUP[n])
    for p in _TRIAL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    if n < _TRIAL_BOUND * _TRIAL_BOUND:
        return True
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class _PrimeList:
    """Growable list of consecutive primes, extended by segmented sieving."""

    def __init__(self) -> None:
        self.primes: list[int] = _small_primes(1 << 12)
        self.limit = 1 << 12

    def _grow(self) -> None:
        lo, hi = self.limit + 1, self.limit * 2
        seg = bytearray([1]) * (hi - lo + 1)
        for p in self.primes:
            if p * p > hi:
                break
            start = max(p * p, (lo + p - 1) // p * p)
            seg[start - lo :: p] = bytearray(len(range(start, hi + 1, p)))
        self.primes.extend(lo + i for i, flag in enumerate(seg) if flag)
        self.limit = hi

    def nth(self, i: int) -> int:
        while i >= len(self.primes):
            self._grow()
        return self.primes[i]

    def upto(self, n: int) -> list[int]:
        while self.limit < n:
            self._grow()
        return self.primes[: bisect.bisect_right(self.primes, n)]

    def index(self, p: int) -> int:
        while self.limit < p:
            self._grow()
        i = bisect.bisect_left(self.primes, p)
        if i == len(self.primes) or self.primes[i] != p:
            raise ValueError(f"{p} is not prime")
        return i


_PRIMES = _PrimeList()


def nth_prime(i: int) -> int:
    """Return the i-th prime, counting from ``nth_prime(0) == 2``."""
    if i < 0:
        raise ValueError("prime index must be nonnegative")
    return _PRIMES.nth(i)


def odd_prime(i: int) -> int:
    """Return the i-th odd prime, ``odd_prime(0) == 3``."""
    if i < 0:
        raise ValueError("prime index must be nonnegative")
    return _PRIMES.nth(i + 1)


def prime_index(p: int) -> int:
    """Inverse of :func:`nth_prime`."""
    return _PRIMES.index(p)


def primes_up_to(n: int) -> list[int]:
    return list(_PRIMES.upto(n))


def next_prime(n: int) -> int:
    """Least prime strictly greater than n."""
    m = max(n + 1, 2)
    while not is_prime(m):
        m += 1
    return m


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of a nonzero integer, ascending."""
    n = abs(n)
    if n == 0:
        raise ValueError("0 has no finite factorization")
    out = []
    for p in _TRIAL_PRIMES:
        if p * p > n:
            break
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
    f = _TRIAL_BOUND + 1
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 2
    if n > 1:
        out.append(n)
    return out


def _require_odd_prime(p: int, name: str = "p") -> None:
    if p % 2 == 0 or not is_prime(p):
        raise ValueError(f"{name}={p} must be an odd prime")


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) by Euler's criterion."""
    _require_odd_prime(p)
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def legendre_bruteforce(a: int, p: int) -> int:
    """Legendre symbol by scanning the squares mod p; an oracle for :func:`legendre`."""
    _require_odd_prime(p)
    a %= p
    if a == 0:
        return 0
    return 1 if any(x * x % p == a for x in range(1, p)) else -1


def is_q_appropriate(p: int, q: int) -> bool:
    """True iff p is odd, p != q, and -q is a square modulo p."""
    _require_odd_prime(q, "q")
    if not is_prime(p):
        raise ValueError(f"p={p} must be prime")
    if p == 2 or p == q:
        return False
    return legendre(-q, p) == 1


def is_q_appropriate_mod4(p: int, q: int) -> bool:
    """Same predicate as :func:`is_q_appropriate`, decided by the residue of p mod 4
    and the quadratic character of p modulo q instead of -q modulo p."""
    _require_odd_prime(q, "q")
    if not is_prime(p):
        raise ValueError(f"p={p} must be prime")
    if p == 2 or p == q:
        return False
    p_square_mod_q = legendre(p, q) == 1
    if q % 4 == 3:
        return p_square_mod_q
    if p % 4 == 1:
        return p_square_mod_q
    return not p_square_mod_q


def is_denominator_prime(p: int, q: int) -> bool:
    """True iff p divides the denominator of some solution of x^2 + q y^2 = 1, y != 0.

    For odd p this is q-appropriateness.  The prime 2 also qualifies when -q is
    a 2-adic square (q = 7 mod 8), and for q = 3 through (1/2)^2 + 3 (1/2)^2 = 1.
    """
    _require_odd_prime(q, "q")
    if p == 2:
        return q == 3 or q % 8 == 7
    return is_q_appropriate(p, q)


def _appropriate_for_exactly(p: int, e: int, avoid: Iterable[int]) -> bool:
    if not is_q_appropriate(p, odd_prime(e)):
        return False
    return not any(is_q_appropriate(p, odd_prime(i)) for i in avoid)


def find_appropriate_primes(
    e: int, avoid: Iterable[int] = (), count: int = 1, cap: int = 10**7
) -> list[int]:
    """The ``count`` smallest primes that are q_e-appropriate and q_i-inappropriate
    for every i in ``avoid``.

    Raises :class:`SearchCapExceeded` if the scan passes ``cap`` first.
    """
    avoid = sorted(set(avoid))
    if e in avoid:
        raise ValueError("e must not be in the avoided index set")
    if count < 1:
        raise ValueError("count must be positive")
    found: list[int] = []
    i = 0
    while len(found) < count:
        p = nth_prime(i)
        if p > cap:
            raise SearchCapExceeded(
                f"only {len(found)} of {count} primes found below cap {cap}"
            )
        if _appropriate_for_exactly(p, e, avoid):
            found.append(p)
        i += 1
    return found


def _least_nonresidue(q: int) -> int:
    return next(r for r in range(2, q) if legendre(r, q) == -1)


def crt_residue_witness(e: int, avoid: Iterable[int] = ()) -> tuple[int, int]:
    """Residue class n mod m, m = 4 * prod(q_i) * q_e, whose primes all satisfy the
    :func:`find_appropriate_primes` predicate.

    n is 1 mod 4, 1 mod q_e, and the least quadratic nonresidue mod each q_i.
    """
    avoid = sorted(set(avoid))
    if e in avoid:
        raise ValueError("e must not be in the avoided index set")
    n, m = 1, 4
    for i in avoid:
        q = odd_prime(i)
        n, m = _crt(n, m, _least_nonresidue(q), q)
    n, m = _crt(n, m, 1, odd_prime(e))
    return n, m


def _crt(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int]:
    k = (r2 - r1) * pow(m1, -1, m2) % m2
    return (r1 + m1 * k) % (m1 * m2), m1 * m2


@dataclass(frozen=True)
class ConicSolution:
    """Primitive integer solution of a^2 + q*b^2 = (p^k)^2."""

    a: int
    b: int
    k: int
    p: int
    q: int

    def __post_init__(self) -> None:
        if self.a * self.a + self.q * self.b * self.b != self.p ** (2 * self.k):
            raise ValueError(f"{self} does not satisfy a^2 + q b^2 = p^(2k)")
        if math.gcd(self.a, self.b, self.p) != 1 or self.b <= 0 or self.a < 0:
            raise ValueError(f"{self} is not a primitive solution with b > 0")


def _sqrt_mod_prime(a: int, p: int) -> int:
    """A square root of a modulo an odd prime p (Tonelli-Shanks)."""
    a %= p
    if a == 0:
        return 0
    if legendre(a, p) != 1:
        raise ValueError(f"{a} is not a square mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    s, d = 0, p - 1
    while d % 2 == 0:
        d //= 2
        s += 1
    z = _least_nonresidue(p)
    m, c, t, r = s, pow(z, d, p), pow(a, d, p), pow(a, (d + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


def _sqrt_mod_prime_power(a: int, p: int, e: int) -> int:
    """Hensel-lift a root of x^2 = a mod p to mod p^e (p odd, p not dividing a)."""
    r = _sqrt_mod_prime(a, p)
    mod = p
    for _ in range(e - 1):
        mod *= p
        inv = pow(2 * r, -1, mod)
        r = (r - (r * r - a) * inv) % mod
    return r


def _cornacchia(q: int, n: int, root: int) -> tuple[int, int] | None:
    """Solve x^2 + q y^2 = n with x = root-branch of Cornacchia's algorithm."""
    r0, r1 = n, root
    bound = math.isqrt(n)
    while r1 > bound:
        r0, r1 = r1, r0 % r1
    rest = n - r1 * r1
    if rest % q:
        return None
    y2 = rest // q
    y = math.isqrt(y2)
    if y * y != y2 or y == 0:
        return None
    return r1, y


def conic_primitive_solution(p: int, q: int, k_max: int = 8) -> ConicSolution | None:
    """Least-k (then least-b) primitive solution of X^2 + qY^2 = Z^2 with Z = p^k.

    Primitive solutions with b > 0 correspond to square roots of -q modulo p^(2k),
    so each level k is settled completely by Cornacchia's algorithm on both roots.
    ``None`` only means nothing was found with k <= k_max.
    """
    _require_odd_prime(q, "q")
    _require_odd_prime(p)
    if p == q:
        raise ValueError("p must differ from q")
    if legendre(-q, p) != 1:
        return None
    for k in range(1, k_max + 1):
        n = p ** (2 * k)
        t = _sqrt_mod_prime_power(-q, p, 2 * k)
        hits = []
        for root in {t, n - t}:
            sol = _cornacchia(q, n, root)
            if sol is not None and math.gcd(sol[0], sol[1], p) == 1:
                hits.append(sol)
        if hits:
            a, b = min(hits, key=lambda ab: ab[1])
            return ConicSolution(a=a, b=b, k=k, p=p, q=q)
    return None


def conic_primitive_solution_bruteforce(
    p: int, q: int, k_max: int = 2
) -> ConicSolution | None:
    """Exhaustive scan over b for each k; an oracle for small p**k."""
    for k in range(1, k_max + 1):
        z2 = p ** (2 * k)
        b = 1
        while q * b * b <= z2:
            a2 = z2 - q * b * b
            a = math.isqrt(a2)
            if a * a == a2 and math.gcd(a, b, p) == 1:
                return ConicSolution(a=a, b=b, k=k, p=p, q=q)
            b += 1
    return None


def solution_in_localization(sol: ConicSolution) -> tuple[Fraction, Fraction]:
    """The point (a/p^k, b/p^k) on x^2 + q y^2 = 1."""
    z = sol.p**sol.k
    return Fraction(sol.a, z), Fraction(sol.b, z)


def _is_three_square_excluded(n: int) -> bool:
    # Legendre: n is not a sum of three squares iff n = 4^a (8b + 7).
    if n == 0:
        return False
    while n % 4 == 0:
        n //= 4
    return n % 8 == 7


def four_square_decomposition(n: int) -> tuple[int, int, int, int]:
    """Four nonnegative integers, nonincreasing, whose squares sum to n.

    Among nondecreasing 4-tuples (a, b, c, d) the lexicographically least is taken,
    then returned reversed, e.g. ``49 -> (7, 0, 0, 0)``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    a = 0
    while 4 * a * a <= n:
        ra = n - a * a
        if not _is_three_square_excluded(ra):
            b = a
            while 3 * b * b <= ra:
                rb = ra - b * b
                c = b
                while 2 * c * c <= rb:
                    d2 = rb - c * c
                    d = math.isqrt(d2)
                    if d * d == d2:
                        return d, c, b, a
                    c += 1
                b += 1
        a += 1
    raise AssertionError("unreachable: every n is a sum of four squares")


def positivity_witness(
    y: Fraction, denominator: int
) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Rationals z, w (4 each) with y * (1 + sum z^2) = 1 + sum w^2.

    All denominators only involve primes dividing ``denominator``.
    """
    y = Fraction(y)
    if y <= 0:
        raise ValueError("y must be positive")
    if denominator < 1:
        raise ValueError("denominator must be positive")
    d = y.denominator
    g = d
    while (g2 := math.gcd(g, denominator)) > 1:
        g //= g2
    if g != 1:
        raise ValueError(f"denominator of {y} has primes not dividing {denominator}")
    s = max(0, math.ceil(1 / y) - 1)
    z = tuple(Fraction(v) for v in four_square_decomposition(s))
    excess = y * (1 + s) - 1
    num, den = excess.numerator, excess.denominator
    w = tuple(Fraction(v, den) for v in four_square_decomposition(num * den))
    return z, w
