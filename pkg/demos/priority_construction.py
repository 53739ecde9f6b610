"""A finite-injury construction, one stage at a time.

Requirement R_e watches one computation.  Until that computation converges,
R_e deletes every q_e-appropriate prime below the prime it is considering;
afterwards it protects the primes it considers.  Lower indices win conflicts.
The script replays a short run, then checks each requirement.

    python3 demos/priority_construction.py [stages]
"""

import sys

from htpq.injury import decide_membership, pet, run, verify_requirements
from htpq.numtheory import odd_prime, primes_up_to

SCHEDULE = {0: 2, 3: 5}  # R_0 converges by stage 2, R_3 by stage 5, the rest never


def main(stages=12):
    print("pet(e, t) for small e and t: the primes each requirement looks at")
    for e in range(4):
        print(f"  e={e} (q={odd_prime(e):2d}):", [pet(e, t) for t in range(5)])

    print(f"\nSchedule {SCHEDULE}; all other computations never converge.\n")
    trace, state = run(SCHEDULE, stages)
    print("stage  R_e  prime  mode        action")
    for ev in trace.events:
        if ev.converged:
            action = f"protect {list(ev.protected)}"
        else:
            action = f"delete {list(ev.deleted)}" if ev.deleted else "nothing to delete"
        mode = "protecting" if ev.converged else "deleting"
        print(f"{ev.stage:5d}  {ev.e:3d}  {ev.prime:5d}  {mode:10s}  {action}")

    survivors = [p for p in primes_up_to(60) if state.in_v(p)]
    print(f"\nPrimes up to 60 still in V after {stages} stages: {survivors}")
    agree = all(
        decide_membership(p, SCHEDULE, stages=stages) == state.in_v(p) for p in primes_up_to(60)
    )
    print(f"The closed-form membership test agrees with the replay: {agree}")

    print("\nRequirement check over the window:")
    for r in verify_requirements(trace, state, SCHEDULE, 5):
        print(f"  R_{r.e}: {r.status:18s} {r.detail}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 12)
