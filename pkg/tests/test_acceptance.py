"""The seven acceptance criteria, each at its stated size and time budget.

Each test records one PASS/FAIL line, repeated in the terminal summary.
Tolerances are zero: every comparison is exact.
"""

import random
import time
from fractions import Fraction

from htpq.boundary import alpha_bruteforce, alpha_closed_form, nk_sequence
from htpq.greenred import run_greenred, u_preset
from htpq.injury import (
    ConstructionTrace,
    decide_membership,
    pet,
    run,
    verify_requirements,
)
from htpq.numtheory import (
    conic_primitive_solution,
    is_q_appropriate,
    is_q_appropriate_mod4,
    primes_up_to,
)
from htpq.poly import var
from htpq.rings import InvertedFinite, pad_injective, search_solution


def sieve(n):
    flags = bytearray([1]) * (n + 1)
    flags[0] = flags[1] = 0
    for i in range(2, int(n**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(flags[i * i :: i]))
    return [i for i in range(n + 1) if flags[i]]


def euler_appropriate(p, q):
    return p % 2 == 1 and p != q and pow(-q % p, (p - 1) // 2, p) == 1


def test_appropriateness_criteria_agree(acceptance_report):
    start = time.perf_counter()
    qs = sieve(300)[1:51]
    assert len(qs) == 50
    mismatches = [
        (p, q)
        for p in sieve(2000)[1:]
        for q in qs
        if p != q and is_q_appropriate(p, q) != is_q_appropriate_mod4(p, q)
    ]
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 5
    acceptance_report(1, ok, f"{len(mismatches)} mismatches, {elapsed:.2f}s (< 5s)")
    assert ok, mismatches[:5]


def test_conic_solvable_iff_appropriate(acceptance_report):
    start = time.perf_counter()
    bad = []
    for q in [3, 5, 7, 11, 13]:
        for p in sieve(299)[1:]:
            if p == q:
                continue
            sol = conic_primitive_solution(p, q, 8)
            if (sol is not None) != is_q_appropriate(p, q):
                bad.append((p, q, "iff"))
            if sol is not None and sol.a**2 + q * sol.b**2 != p ** (2 * sol.k):
                bad.append((p, q, "identity"))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 120
    acceptance_report(2, ok, f"{len(bad)} failures, {elapsed:.2f}s (< 120s)")
    assert ok, bad[:5]


def test_pet_table(acceptance_report):
    start = time.perf_counter()
    primes = sieve(600000)
    qs = sieve(100)[1:14]
    good = [frozenset(i for i, q in enumerate(qs) if euler_appropriate(p, q)) for p in primes]
    bad = []
    for e in range(13):
        prev, idx = e, 0
        for t in range(13 - e):
            # least prime above the previous value with the right pattern
            while True:
                p, g = primes[idx], good[idx]
                idx += 1
                if p > prev and e in g and not any(i in g for i in range(e + t + 1) if i != e):
                    break
            if pet(e, t) != p:
                bad.append((e, t, pet(e, t), p))
            prev = p
    examples = (pet(0, 0), pet(0, 1), pet(1, 0)) == (7, 13, 3)
    elapsed = time.perf_counter() - start
    ok = not bad and examples and elapsed < 30
    acceptance_report(3, ok, f"91 values, {len(bad)} wrong, examples {examples}, {elapsed:.2f}s (< 30s)")
    assert ok, bad[:5]


def test_construction_replay(acceptance_report):
    start = time.perf_counter()
    sched = {0: 2, 3: 5}
    trace, state = run(sched, 40)

    violations = 0
    protected = {}
    for ev in trace.events:
        violations += sum(d in protected for d in ev.deleted)
        if ev.protected:
            violations += len(set(protected.get(ev.e, ())) - set(ev.protected))
            protected.update({p: ev.e for p in ev.protected})
    violations += sum(p in state.removed for p in protected)

    disagree = [
        p for p in primes_up_to(50) if decide_membership(p, sched, stages=40) != state.in_v(p)
    ]

    e_max = max(ev.e for ev in trace.events)
    reports = {r.e: r for r in verify_requirements(trace, state, sched, e_max)}
    wrong = []
    for e, r in reports.items():
        considered = [ev for ev in trace.events if ev.e == e]
        if e in sched:
            if any(ev.converged for ev in considered) and r.status != "In":
                wrong.append((e, r.status))
        elif considered and r.status != "NoSurvivingWitness":
            wrong.append((e, r.status))

    text = trace.to_jsonl()
    identical = run(sched, 40)[0].to_jsonl() == text and (
        ConstructionTrace.from_jsonl(text).to_jsonl() == text
    )
    elapsed = time.perf_counter() - start
    ok = not violations and not disagree and not wrong and identical and elapsed < 30
    acceptance_report(
        4,
        ok,
        f"permanence violations {violations}, membership mismatches {disagree}, "
        f"requirement mismatches {wrong}, replay identical {identical}, {elapsed:.2f}s (< 30s)",
    )
    assert ok


def test_block_coding(acceptance_report):
    start = time.perf_counter()
    qs = [Fraction(1, 2) - Fraction(1, 2 ** (s + 2)) for s in range(4)]
    blocks = nk_sequence(qs, 4)

    # recursion oracle: least n with the running product still >= 1 - q_k
    expected, prod = [], Fraction(1)
    for q in qs:
        n = next(n for n in range(1, 64) if prod * (1 - Fraction(1, 2**n)) >= 1 - q)
        prod *= 1 - Fraction(1, 2**n)
        expected.append(n)
    recursion_ok = list(blocks.n) == expected

    product = blocks.partial_products()[-1]
    gap = abs(product - Fraction(1, 2))
    bound = Fraction(1, 2) - qs[3]
    bound_ok = gap <= bound

    closed = alpha_closed_form(blocks, 4)
    brute = alpha_bruteforce(blocks.x, blocks.universe(), "inclusion-exclusion")
    alpha_ok = closed == brute
    elapsed = time.perf_counter() - start
    ok = recursion_ok and bound_ok and alpha_ok and elapsed < 10
    acceptance_report(
        5,
        ok,
        f"n={list(blocks.n)} (oracle {expected}), |prod - 1/2| = {gap} vs bound {bound}: "
        f"{'ok' if bound_ok else 'exceeded'}, alpha {closed} == {brute}: {alpha_ok}, "
        f"{elapsed:.2f}s (< 10s)",
    )
    assert ok


def test_green_red_simulation(acceptance_report):
    start = time.perf_counter()
    state, checks = run_greenred(Fraction(1, 4), u_preset("geometric", Fraction(3, 10)), 200, 10)
    window = all(c.window for c in checks)
    lemma = all(c.lemma for c in checks)
    below = all(c.prioritized_below_chip for c in checks)
    duals = [c.dual for c in checks if c.s % 10 == 0]
    dual = len(duals) == 20 and all(duals)
    elapsed = time.perf_counter() - start
    ok = len(checks) == 200 and window and lemma and below and dual and elapsed < 120
    acceptance_report(
        6,
        ok,
        f"window {window}, lemma {lemma}, prioritized < c {below}, dual {sum(map(bool, duals))}/20, "
        f"a_200 = {float(state.a.to_fraction()):.9f}, {elapsed:.1f}s (< 120s)",
    )
    assert ok


def code_polynomial(n):
    """A varied deterministic G(n) in x1 (and x2 for some n)."""
    a, b = n % 5 + 1, n % 7 + 1
    kind = n % 3
    if kind == 0:
        return a * var(1) - b
    if kind == 1:
        return var(1) ** 2 - b
    return a * var(1) * var(2) - b


def test_padding(acceptance_report):
    start = time.perf_counter()
    table = {n: code_polynomial(n) for n in range(1, 1001)}
    padded = pad_injective(table)
    distinct = len(set(padded.values())) == 1000

    rng = random.Random(20)
    mismatches, solvable = [], 0
    for _ in range(20):
        n = rng.randrange(1, 1001)
        ring = InvertedFinite(set(rng.sample([2, 3, 5, 7], rng.randrange(0, 3))))
        g = search_solution(table[n], ring, 8) is not None
        f = search_solution(padded[n], ring, 8) is not None
        solvable += g
        if g != f:
            mismatches.append((n, ring))
    elapsed = time.perf_counter() - start
    ok = distinct and not mismatches and elapsed < 60
    acceptance_report(
        7, ok, f"1000 distinct {distinct}, {len(mismatches)}/20 solvability mismatches ({solvable} solvable), {elapsed:.2f}s (< 60s)"
    )
    assert ok, mismatches
