import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from htpq.injury import (
    ConstructionTrace,
    PetTable,
    considered_primes,
    decide_membership,
    load_schedule,
    next_considered,
    pet,
    pet_pattern_holds,
    run,
    ConstructionState,
    verify_requirements,
)
from htpq.numtheory import SearchCapExceeded, is_q_appropriate, odd_prime, primes_up_to


def sieve(n):
    flags = bytearray([1]) * (n + 1)
    flags[0] = flags[1] = 0
    for i in range(2, int(n**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(flags[i * i :: i]))
    return [i for i in range(n + 1) if flags[i]]


SMALL_Q = sieve(100)[1:14]  # q_0 .. q_12


def euler_appropriate(p, q):
    return p % 2 == 1 and p != q and pow(-q % p, (p - 1) // 2, p) == 1


@pytest.fixture(scope="module")
def oracle_pets():
    """pet(e, t) for e + t <= 12, straight from the recursive definition."""
    primes = sieve(600000)
    good = [
        frozenset(i for i, q in enumerate(SMALL_Q) if euler_appropriate(p, q)) for p in primes
    ]
    out = {}
    for e in range(13):
        prev = e
        idx = 0
        for t in range(13 - e):
            while True:
                p, g = primes[idx], good[idx]
                idx += 1
                if p > prev and e in g and not any(i in g for i in range(e + t + 1) if i != e):
                    break
            out[e, t] = prev = p
    return out


# --- pet values ---------------------------------------------------------------


def test_pet_examples():
    assert pet(0, 0) == 7
    assert pet(0, 1) == 13
    assert pet(1, 0) == 3
    assert [pet(e, 0) for e in range(4)] == [7, 3, 11, 5]


def test_pet_matches_the_recursive_definition(oracle_pets):
    for (e, t), p in oracle_pets.items():
        assert pet(e, t) == p, (e, t)


def test_pet_pattern_matches_direct_check():
    for p in primes_up_to(400):
        for e in range(5):
            for t in range(4):
                expected = euler_appropriate(p, odd_prime(e)) and not any(
                    euler_appropriate(p, odd_prime(i)) for i in range(e + t + 1) if i != e
                )
                assert pet_pattern_holds(p, e, t) == expected, (p, e, t)


def test_pet_values_never_collide(oracle_pets):
    assert len(set(oracle_pets.values())) == len(oracle_pets)


def test_pet_owner_is_least_appropriate_index():
    table = PetTable()
    table.scan_to(20000)
    for p, e, _ in table.values:
        assert min(i for i in range(e + 1) if is_q_appropriate(p, odd_prime(i))) == e


def test_pet_table_cap():
    with pytest.raises(SearchCapExceeded):
        PetTable(cap=100)(0, 20)


def test_considered_order():
    assert next_considered(ConstructionState()) == (1, 0, 3)
    assert [p for _, _, p in considered_primes(8)] == [3, 5, 7, 11, 13, 17, 19, 41]
    primes = [p for _, _, p in considered_primes(60)]
    assert primes == sorted(primes)


# --- runs ---------------------------------------------------------------------


def test_converged_requirement_protects_its_pet():
    trace, state = run({0: 0}, 3)
    ev = trace.events[2]
    assert (ev.stage, ev.e, ev.prime, ev.converged) == (3, 0, 7, True)
    assert state.protected[0] == {7}
    trace, state = run({1: 0}, 1)
    assert state.protected[1] == {3}


def test_never_converging_requirements_delete_appropriate_primes():
    trace, state = run({}, 5)
    assert not any(state.protected.values())
    assert all(not ev.converged for ev in trace.events)
    for ev in trace.events:
        q = odd_prime(ev.e)
        expected = [c for c in primes_up_to(ev.prime - 1) if c > ev.e and is_q_appropriate(c, q)]
        assert set(ev.deleted) <= set(expected)
        assert all(c in state.removed for c in expected)


def test_never_converging_e_leaves_no_witness():
    trace, state = run({}, 30)
    for rep in verify_requirements(trace, state, {}, 4):
        assert rep.status == "NoSurvivingWitness", rep


def test_converged_e_reports_in_or_pending():
    sched = {0: 2, 3: 5}
    trace, state = run(sched, 40)
    reps = {r.e: r for r in verify_requirements(trace, state, sched, 9)}
    assert reps[0].status == "In" and reps[3].status == "In"
    assert reps[8].status == "Pending"
    assert {r.status for r in reps.values()} <= {"In", "NoSurvivingWitness", "Pending"}


def test_starting_with_two_leaves_a_witness_for_q_three():
    # Z[1/2] solves the conic for q = 3 and for q = 7 mod 8
    trace, state = run({}, 30, odd_only=False)
    status = {r.e: r.status for r in verify_requirements(trace, state, {}, 4)}
    assert status[0] == "Violation"
    assert status[2] == "Violation"  # q = 7
    assert status[1] == "NoSurvivingWitness"  # q = 5


schedules = st.dictionaries(
    st.integers(0, 6), st.one_of(st.none(), st.integers(0, 15)), max_size=5
)


@settings(max_examples=40)
@given(schedules, st.integers(1, 30))
def test_protection_is_permanent(sched, stages):
    trace, state = run(sched, stages)
    seen = {}
    for ev in trace.events:
        if ev.protected:
            assert set(seen.get(ev.e, ())) <= set(ev.protected)
            seen[ev.e] = ev.protected
    for e, ps in state.protected.items():
        assert not ps & state.removed


@settings(max_examples=40)
@given(schedules, st.integers(1, 30))
def test_deletions_respect_priority(sched, stages):
    trace, _ = run(sched, stages)
    owner = {}
    for ev in trace.events:
        for d in ev.deleted:
            assert owner.get(d, ev.e + 1) > ev.e  # no lower index protects d
        if ev.converged:
            owner.setdefault(ev.prime, ev.e)


@settings(max_examples=20)
@given(schedules, st.integers(1, 25))
def test_runs_are_deterministic_and_replayable(sched, stages):
    a = run(sched, stages)[0].to_jsonl()
    b = run(sched, stages)[0].to_jsonl()
    assert a == b
    assert ConstructionTrace.from_jsonl(a).to_jsonl() == a


# --- membership ---------------------------------------------------------------


def test_membership_examples():
    assert decide_membership(7, {0: 0}) is True
    assert decide_membership(2, {}) is False
    assert decide_membership(2, {}, odd_only=False) is True
    with pytest.raises(ValueError):
        decide_membership(9, {})


@pytest.mark.parametrize("seed", range(5))
def test_membership_agrees_with_the_trace(seed):
    rng = random.Random(seed)
    sched = {e: rng.choice([None, rng.randrange(12)]) for e in range(8)}
    stages = 25
    _, state = run(sched, stages)
    for p in primes_up_to(50):
        assert decide_membership(p, sched, stages=stages) == state.in_v(p), (p, sched)


def test_limit_membership_matches_a_long_run():
    sched = {0: 2, 3: 5}
    _, state = run(sched, 60)
    for p in primes_up_to(40):
        assert decide_membership(p, sched) == state.in_v(p), p


# --- schedule files -----------------------------------------------------------


def test_load_schedule():
    assert load_schedule('{"0": 2, "3": null}') == {0: 2, 3: None}
    for bad in ["[1]", "{", '{"x": 1}', '{"-1": 1}', '{"0": true}', '{"0": -3}']:
        with pytest.raises(ValueError):
            load_schedule(bad)


def test_trace_rejects_unknown_schema():
    with pytest.raises(ValueError):
        ConstructionTrace.from_jsonl(json.dumps({"schema": "other"}) + "\n")
