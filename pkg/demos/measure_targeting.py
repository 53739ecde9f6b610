"""Steering the measure of a solution class on Cantor space.

A point of Cantor space picks which primes to invert.  A polynomial coded by
a set D of squarefree integers has a solution exactly when every prime factor
of some x in D is inverted.  Part one fits disjoint blocks to a measure from
below; part two runs the stage-by-stage green/red enumeration that holds the
green measure inside a shrinking window below u_s.

    python3 demos/measure_targeting.py [stages]
"""

import sys
from fractions import Fraction

from htpq.boundary import alpha_bruteforce, alpha_closed_form, nk_sequence
from htpq.greenred import run_greenred, u_preset


def blocks_part():
    qs = [Fraction(1, 2) - Fraction(1, 2 ** (s + 2)) for s in range(4)]
    blocks = nk_sequence(qs, 4)
    print("Block coding toward 1/2")
    print("  k  q_k      n_k  x_k            prod (1 - 2^-n_j)")
    for k, prod in enumerate(blocks.partial_products()):
        print(f"  {k}  {str(qs[k]):7s}  {blocks.n[k]:3d}  {blocks.x[k]:<13d}  {prod}")
    closed = alpha_closed_form(blocks, 4)
    brute = alpha_bruteforce(blocks.x, blocks.universe(), "enumerate")
    print(f"  alpha: closed form {closed}, enumeration of all 2^{blocks.universe()} sets {brute}")
    gap = abs(blocks.partial_products()[-1] - Fraction(1, 2))
    print(f"  the product sits {gap} away from 1/2, more than 1/2 - q_3 = {Fraction(1, 2) - qs[3]}:")
    print("  least block sizes overshoot, so the partial products need not track 1/2 that closely.")


def greenred_part(stages):
    u = u_preset("geometric", Fraction(3, 10))
    print(f"\nGreen/red enumeration, v = 1/4, u_s -> 3/10, {stages} stages")
    print("  s    chip   prioritized  |D_s|   a_s (decimal)   window")

    def show(rec, check):
        if rec.s <= 10 or rec.s % 10 == 0:
            lo, hi = rec.window
            a = float(rec.a.to_fraction())
            print(
                f"  {rec.s:3d}  {str(rec.chip):5s}  {len(rec.prioritized):11d}  {rec.d_size:5d}"
                f"   {a:.10f}  ({float(lo):.6f}, {float(hi):.6f})  {'ok' if check.ok else 'FAIL'}"
            )

    state, checks = run_greenred(Fraction(1, 4), u, stages, 10, on_stage=show)
    print(f"  every invariant held: {all(c.ok for c in checks)}")
    print(f"  brute-force measure of D matched the running total {sum(c.dual is True for c in checks)} times")


if __name__ == "__main__":
    blocks_part()
    greenred_part(int(sys.argv[1]) if len(sys.argv) > 1 else 60)
