"""Which primes carry a rational point on x^2 + q y^2 = 1 with y > 0?

Walks through the number theory behind the family f_e: the Legendre test,
the conic solution it predicts, the subring of Q where that solution lives,
and the one prime (2) that slips through the odd-prime test.

    python3 demos/appropriate_primes.py
"""

from fractions import Fraction

from htpq.numtheory import (
    conic_primitive_solution,
    find_appropriate_primes,
    is_denominator_prime,
    is_q_appropriate,
    legendre,
    odd_prime,
    positivity_witness,
    primes_up_to,
    solution_in_localization,
)
from htpq.rings import FE_W, FE_X, FE_Y, FE_Z, Fe, InvertedFinite, Verdict, build_fe, family_verdict


def section(title):
    print()
    print(title)
    print("-" * len(title))


def main():
    q = odd_prime(0)
    section(f"1. Odd primes p with (-{q}/p) = 1")
    for p in primes_up_to(40)[1:]:
        mark = "appropriate" if is_q_appropriate(p, q) else ""
        print(f"  p={p:3d}  (-{q}/p) = {legendre(-q, p):2d}  {mark}")

    section("2. Each appropriate p gives a primitive a^2 + q b^2 = p^(2k)")
    for p in find_appropriate_primes(0, (), 5):
        sol = conic_primitive_solution(p, q)
        x, y = solution_in_localization(sol)
        print(f"  p={p:3d}: {sol.a}^2 + {q}*{sol.b}^2 = {p}^{2 * sol.k}  ->  (x, y) = ({x}, {y})")

    section("3. The point extends to a zero of f_0 over Z[1/7]")
    x, y = solution_in_localization(conic_primitive_solution(7, q))
    z, w = positivity_witness(y, 7)
    point = {FE_X: x, FE_Y: y, **dict(zip(FE_Z, z)), **dict(zip(FE_W, w))}
    print(f"  y = {y} is positive: {y} * (1 + sum z^2) = 1 + sum w^2")
    print(f"  z = {[str(t) for t in z]}")
    print(f"  w = {[str(t) for t in w]}")
    print(f"  f_0 at that point: {build_fe(0).evaluate(point)}")

    section("4. Verdicts for a few finite inversions")
    for primes in [{7}, {5}, {5, 11}, {13, 5}]:
        print(f"  Z[1/{','.join(map(str, sorted(primes)))}]: {family_verdict(Fe(0), InvertedFinite(primes)).value}")

    section("5. The prime 2")
    print("  2 is never q-appropriate (the test needs an odd prime), yet")
    print(f"  (1/2)^2 + 3 (1/2)^2 = {Fraction(1, 4) + 3 * Fraction(1, 4)}")
    twos = [e for e in range(12) if is_denominator_prime(2, odd_prime(e))]
    print(f"  so Z[1/2] solves f_e for e in {twos} (q = 3 or q = 7 mod 8).")
    print(f"  Verdict for Z[1/2] and f_0: {family_verdict(Fe(0), InvertedFinite({2})) is Verdict.IN}")


if __name__ == "__main__":
    main()
