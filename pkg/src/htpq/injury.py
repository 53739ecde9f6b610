"""Replay of the finite-injury construction of an HTP-complete set V.

Requirement R_e watches a halting schedule for e.  While the schedule says
"not yet converged", R_e deletes q_e-appropriate primes from V; once converged,
it protects the primes pet(e, t) it considers from then on.  Exactly one prime
pet(e, t) is considered per stage, in increasing order of value.

The oracle computation is abstracted as a :data:`HaltSchedule`: a map from e to
the stage number by which it has converged, or ``None`` for "never within this
run".  At stage s+1 the construction asks whether the computation has converged
by stage s, i.e. whether ``schedule[e] <= s``.

By default V starts as the odd primes.  The prime 2 is never q-appropriate, so
no requirement would delete it, yet Z[1/2] already solves x^2 + q y^2 = 1 with
y > 0 for q = 3 and every q = 7 mod 8.  ``odd_only=False`` starts from all
primes instead.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Mapping, Optional

from .numtheory import (
    SearchCapExceeded,
    is_denominator_prime,
    is_q_appropriate,
    nth_prime,
    odd_prime,
    prime_index,
    primes_up_to,
)


HaltSchedule = Mapping[int, Optional[int]]

TRACE_SCHEMA = "htpq.construct/1"

__all__ = [
    "HaltSchedule",
    "PetTable",
    "pet",
    "pet_pattern_holds",
    "ConstructionState",
    "StageEvent",
    "ConstructionTrace",
    "next_considered",
    "considered_primes",
    "run",
    "decide_membership",
    "RequirementReport",
    "verify_requirements",
    "load_schedule",
    "TRACE_SCHEMA",
]


# By the mod-4 criterion, q-appropriateness of p != q depends only on p mod 4q.
# For small q_i, _RESIDUES[i][r] records it for each residue r mod 4 q_i.
_TABLE_Q_LIMIT = 2000
_RESIDUES: list[bytes] = []


def _appropriate(p: int, i: int) -> bool:
    """is_q_appropriate(p, q_i) for an odd prime p, without argument checks."""
    q = odd_prime(i)
    if q > _TABLE_Q_LIMIT:
        return p != q and pow(-q % p, (p - 1) >> 1, p) == 1
    while len(_RESIDUES) <= i:
        qq = odd_prime(len(_RESIDUES))
        squares = {x * x % qq for x in range(1, qq)}
        table = bytearray(4 * qq)
        for r in range(1, 4 * qq, 2):
            if r % qq:
                sq = r % qq in squares
                table[r] = sq if (qq % 4 == 3 or r % 4 == 1) else not sq
        _RESIDUES.append(bytes(table))
    # p == q leaves residue 0 mod q, which the table marks inappropriate
    return bool(_RESIDUES[i][p % (4 * q)])


def pet_pattern_holds(p: int, e: int, t: int) -> bool:
    """p is q_e-appropriate and q_i-inappropriate for every other i <= e + t."""
    if p == 2 or not _appropriate(p, e):
        return False
    return not any(_appropriate(p, i) for i in range(e + t + 1) if i != e)


def _least_appropriate_index(p: int) -> int:
    i = 0
    while not _appropriate(p, i):
        i += 1
    return i


class PetTable:
    """Memoized p_{e,t} values from one increasing scan over the odd primes.

    If p = pet(e, t) then p is q_i-inappropriate for every i < e, so e is the
    least index with p q_e-appropriate.  Each prime is therefore a candidate
    for exactly one e, pet values never collide, and scanning primes in order
    yields all pet values in increasing order (the order of consideration).
    """

    def __init__(self, cap: int = 10**8) -> None:
        self.cap = cap
        self._found: dict[int, list[int]] = {}
        self.values: list[tuple[int, int, int]] = []  # (prime, e, t), ascending
        self._index = 1  # prime index scanned next (skip 2)
        self._scanned = 2  # every prime <= this has been classified

    def _advance(self) -> None:
        p = nth_prime(self._index)
        if p > self.cap:
            raise SearchCapExceeded(f"pet scan passed cap {self.cap}")
        e = _least_appropriate_index(p)
        found = self._found.setdefault(e, [])
        t = len(found)
        if p > e and pet_pattern_holds(p, e, t):
            found.append(p)
            self.values.append((p, e, t))
        self._index += 1
        self._scanned = p

    def scan_to(self, bound: int) -> None:
        while self._scanned < bound and nth_prime(self._index) <= bound:
            self._advance()

    def bounded(self, e: int, t: int, bound: int) -> int | None:
        """pet(e, t) if it is <= bound, else None."""
        if e < 0 or t < 0:
            raise ValueError("e and t must be nonnegative")
        found = self._found.setdefault(e, [])
        while len(found) <= t and nth_prime(self._index) <= bound:
            self._advance()
        return found[t] if len(found) > t and found[t] <= bound else None

    def __call__(self, e: int, t: int) -> int:
        value = self.bounded(e, t, self.cap)
        if value is None:
            raise SearchCapExceeded(f"pet({e},{t}) exceeds cap {self.cap}")
        return value

    def values_below(self, e: int, bound: int) -> list[int]:
        """All pet(e, t) < bound, ascending."""
        self.scan_to(bound - 1)
        return [p for p in self._found.get(e, []) if p < bound]

    def value(self, k: int) -> tuple[int, int, int]:
        """The k-th pet value overall (0-based) as (prime, e, t)."""
        while len(self.values) <= k:
            self._advance()
        return self.values[k]


_TABLE = PetTable()


def pet(e: int, t: int) -> int:
    """The prime p_{e,t}: least prime above p_{e,t-1} (with p_{e,-1} = e) that is
    q_e-appropriate and q_i-inappropriate for every other i <= e + t."""
    return _TABLE(e, t)


@dataclass
class ConstructionState:
    stage: int = 0
    considered: list[tuple[int, int, int]] = field(default_factory=list)
    protected: dict[int, set[int]] = field(default_factory=dict)
    removed: set[int] = field(default_factory=set)
    next_t: dict[int, int] = field(default_factory=dict)
    considered_primes: set[int] = field(default_factory=set)

    def protector(self, p: int) -> int | None:
        for e, ps in self.protected.items():
            if p in ps:
                return e
        return None

    def in_v(self, p: int) -> bool:
        return p not in self.removed


@dataclass(frozen=True)
class StageEvent:
    stage: int
    e: int
    t: int
    prime: int
    converged: bool
    protected: tuple[int, ...]
    deleted: tuple[int, ...]

    def to_json(self) -> str:
        d = asdict(self)
        d["protected"] = list(self.protected)
        d["deleted"] = list(self.deleted)
        return json.dumps(d, sort_keys=True, separators=(",", ":"))


@dataclass
class ConstructionTrace:
    schedule: dict[int, Optional[int]]
    events: list[StageEvent] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    odd_only: bool = True

    def header(self) -> dict:
        from . import __version__

        return {
            "schema": TRACE_SCHEMA,
            "version": __version__,
            "config": {
                "schedule": {str(k): v for k, v in sorted(self.schedule.items())},
                "stages": len(self.events),
                "odd_only": self.odd_only,
            },
        }

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header(), sort_keys=True, separators=(",", ":"))]
        lines.extend(ev.to_json() for ev in self.events)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "ConstructionTrace":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = json.loads(lines[0])
        if head.get("schema") != TRACE_SCHEMA:
            raise ValueError(f"unknown trace schema {head.get('schema')!r}")
        sched = {int(k): v for k, v in head["config"]["schedule"].items()}
        events = []
        for ln in lines[1:]:
            d = json.loads(ln)
            events.append(
                StageEvent(
                    stage=d["stage"],
                    e=d["e"],
                    t=d["t"],
                    prime=d["prime"],
                    converged=d["converged"],
                    protected=tuple(d["protected"]),
                    deleted=tuple(d["deleted"]),
                )
            )
        return cls(
            schedule=sched, events=events, odd_only=head["config"].get("odd_only", True)
        )


def _converged(schedule: HaltSchedule, e: int, by_stage: int) -> bool:
    s = schedule.get(e)
    return s is not None and s <= by_stage


def next_considered(
    state: ConstructionState, table: PetTable | None = None
) -> tuple[int, int, int]:
    """Least pet value not yet considered, as (e, t, prime)."""
    table = table or _TABLE
    k = 0
    while True:
        p, e, t = table.value(k)
        if p not in state.considered_primes:
            return e, t, p
        k += 1


def run(
    schedule: HaltSchedule,
    stages: int,
    table: PetTable | None = None,
    odd_only: bool = True,
) -> tuple[ConstructionTrace, ConstructionState]:
    """Run the construction for ``stages`` stages (numbered from 1)."""
    if stages < 1:
        raise ValueError("stages must be >= 1")
    table = table or _TABLE
    state = ConstructionState()
    if odd_only:
        state.removed.add(2)
    trace = ConstructionTrace(schedule=dict(schedule), odd_only=odd_only)
    for _ in range(stages):
        state.stage += 1
        s = state.stage - 1  # consult the computation as of stage s
        e, t, p = next_considered(state, table)
        if t != state.next_t.get(e, 0):
            # pet values are distinct, so each R_e sees t = 0, 1, 2, ... in turn
            raise AssertionError(f"stage {state.stage}: pet({e},{t})={p} out of order")
        state.next_t[e] = t + 1
        state.considered.append((e, t, p))
        state.considered_primes.add(p)
        converged = _converged(schedule, e, s)
        deleted: list[int] = []
        if converged:
            mine = state.protected.setdefault(e, set())
            lost = mine & state.removed
            if lost:
                raise AssertionError(f"R_{e} lost protected primes {sorted(lost)}")
            mine.add(p)
            if p in state.removed:
                raise AssertionError(f"R_{e} protects already removed prime {p}")
            protected_now = tuple(sorted(mine))
        else:
            if state.protected.get(e):
                raise AssertionError(f"R_{e} protects primes before converging")
            protected_now = ()
            higher = set()
            for i, ps in state.protected.items():
                if i < e:
                    higher |= ps
            q = odd_prime(e)
            for cand in primes_up_to(p - 1):
                if cand <= e or cand in state.removed or cand in higher:
                    continue
                if is_q_appropriate(cand, q):
                    if state.protector(cand) is not None:
                        raise AssertionError(
                            f"R_{e} would delete {cand}, protected by lower priority"
                        )
                    deleted.append(cand)
            state.removed.update(deleted)
        trace.events.append(
            StageEvent(
                stage=state.stage,
                e=e,
                t=t,
                prime=p,
                converged=converged,
                protected=protected_now,
                deleted=tuple(deleted),
            )
        )
    return trace, state


def considered_primes(
    stages: int, table: PetTable | None = None
) -> list[tuple[int, int, int]]:
    """The (e, t, prime) considered at stages 1..stages; schedule-independent."""
    table = table or _TABLE
    state = ConstructionState()
    out = []
    for _ in range(stages):
        e, t, p = next_considered(state, table)
        state.next_t[e] = t + 1
        state.considered_primes.add(p)
        out.append((e, t, p))
    return out


def _consideration_stage(p: int, table: PetTable) -> int:
    """Stage at which the pet value p is considered: one plus the number of
    pet values below p (they are considered in increasing order)."""
    table.scan_to(p)
    return 1 + sum(1 for v in table.values if v[0] < p)


def _pet_owner(p: int, table: PetTable) -> int | None:
    table.scan_to(p)
    return next((e for v, e, _ in table.values if v == p), None)


def decide_membership(
    p: int,
    schedule: HaltSchedule,
    stages: int | None = None,
    table: PetTable | None = None,
    odd_only: bool = True,
) -> bool:
    """Whether p lies in V (``stages=None``) or in V after ``stages`` stages.

    Only R_e with e < p can delete p, and each does so, if ever, exactly at the
    stage s_e where it first considers some pet(e, t) > p.  At that stage R_e
    deletes p unless p is q_e-inappropriate, R_e has converged, or p is
    protected by a higher-priority requirement.  Each of these is decided from
    pet values up to p and the first few considered primes, so the answer never
    needs the (possibly astronomically late) stages s_e themselves.
    """
    table = table or _TABLE
    if p < 2 or prime_index(p) < 0:
        raise ValueError(f"{p} is not prime")
    if p == 2:
        # never q-appropriate, so only the starting set decides
        return not odd_only
    protected = False
    owner = _pet_owner(p, table)
    if owner is not None:
        s_p = _consideration_stage(p, table)
        protected = _converged(schedule, owner, s_p - 1)
    halts = [s for s in schedule.values() if s is not None]
    horizon = max([stages or 0] + [s + 1 for s in halts])
    early = considered_primes(horizon, table) if horizon else []
    for e in range(p):
        if e == owner and protected:
            continue
        if protected and owner < e:
            continue
        if not is_q_appropriate(p, odd_prime(e)):
            continue
        s_e = next(
            (k + 1 for k, (ee, _, q) in enumerate(early) if ee == e and q > p), None
        )
        if stages is not None:
            if s_e is None or s_e > stages:
                continue
            if not _converged(schedule, e, s_e - 1):
                return False
            continue
        if s_e is None:
            # s_e lies beyond horizon >= schedule[e] + 1
            if schedule.get(e) is None:
                return False
            continue
        if not _converged(schedule, e, s_e - 1):
            return False
    return True


@dataclass(frozen=True)
class RequirementReport:
    e: int
    status: str  # "In", "NoSurvivingWitness", "Pending", "Violation"
    detail: str
    witnesses: tuple[int, ...] = ()


def verify_requirements(
    trace: ConstructionTrace,
    state: ConstructionState,
    schedule: HaltSchedule,
    e_max: int,
) -> list[RequirementReport]:
    """Check each R_e (e <= e_max) against the finite prefix of the construction.

    Converged e: some prime protected by R_e must survive outside the excluded
    set of Q_e, so the g_e verdict on V is In.  Pending if no such prime has
    been considered yet.
    Never-converging e: every prime below the last pet(e, t) considered that
    could carry a solution of x^2 + q_e y^2 = 1 must be gone from V or excluded
    from Q_e.  This includes primes <= e, which R_e itself never deletes.
    """
    from .rings import BitstringPrefix, Ge, Verdict, family_verdict, qe_semilocal_excluded

    reports = []
    last_prime = max((ev.prime for ev in trace.events), default=2)
    window_primes = primes_up_to(last_prime)
    for e in range(e_max + 1):
        excluded = qe_semilocal_excluded(e)
        mine = [ev for ev in trace.events if ev.e == e]
        halt = schedule.get(e)
        if halt is not None:
            post = [ev for ev in mine if ev.converged]
            if not post:
                reports.append(
                    RequirementReport(e, "Pending", "no consideration after convergence")
                )
                continue
            survivors = sorted(
                p for p in state.protected.get(e, ()) if p not in state.removed
            )
            if len(survivors) != len(state.protected.get(e, ())):
                reports.append(RequirementReport(e, "Violation", "protected prime removed"))
                continue
            prefix = BitstringPrefix(
                "".join("1" if q in survivors else "0" for q in window_primes)
            )
            verdict = family_verdict(Ge(e), prefix)
            usable = tuple(p for p in survivors if p not in excluded)
            if verdict is Verdict.IN:
                reports.append(RequirementReport(e, "In", "protected witness survives", usable))
            else:
                reports.append(
                    RequirementReport(
                        e,
                        "Pending",
                        "only protected witnesses lie outside Q_e so far",
                        tuple(survivors),
                    )
                )
        else:
            if not mine:
                reports.append(RequirementReport(e, "Pending", "never considered"))
                continue
            top = mine[-1].prime
            q = odd_prime(e)
            leftovers = tuple(
                p
                for p in primes_up_to(top - 1)
                if p not in state.removed
                and p not in excluded
                and is_denominator_prime(p, q)
            )
            window = BitstringPrefix(
                "".join("0" if p in state.removed else "1" for p in primes_up_to(top - 1))
            )
            verdict = family_verdict(Ge(e), window)
            if leftovers or verdict is Verdict.IN:
                reports.append(
                    RequirementReport(
                        e, "Violation", f"witness primes below {top} survive", leftovers
                    )
                )
            else:
                reports.append(
                    RequirementReport(e, "NoSurvivingWitness", f"primes below {top} clean")
                )
    return reports


def load_schedule(text: str) -> dict[int, Optional[int]]:
    """Parse a schedule file: a JSON object mapping e to a stage or null."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"schedule is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ValueError("schedule must be a JSON object {e: stage|null}")
    out: dict[int, Optional[int]] = {}
    for k, v in raw.items():
        try:
            e = int(k)
        except ValueError:
            raise ValueError(f"schedule key {k!r} is not an index") from None
        if e < 0:
            raise ValueError("schedule indices must be nonnegative")
        if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < 0):
            raise ValueError(f"schedule value for {e} must be a stage or null")
        out[e] = v
    return out
