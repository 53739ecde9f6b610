"""Stage simulation of the green/red enumeration of a c.e. set D of squarefree
integers whose solution class has measure u, driven by a chip function.

Nodes are finite 0/1 words over the primes in increasing order.  At any stage
a node is green if its inverted primes include all prime factors of some x in
D, and red if no extension of it is green.  Colors are always recomputed from
D.  Internally a node is ``(length, ones)`` with ``ones`` a bitmask of prime
positions, and each x in D is kept as the bitmask of its prime factors.

Each stage prioritizes the highest-priority minimal red nodes (total measure
below the current chip) and then turns enough of the remaining red measure
green to put the green measure a_s inside (u_s - 2^-s, u_s).
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional

from .dyadic import Dyadic
from .numtheory import nth_prime

__all__ = [
    "Node",
    "USequence",
    "u_preset",
    "ChipFunction",
    "chip_for_rational",
    "GreenRedState",
    "StageRecord",
    "InfeasibleWindow",
    "minimal_red_nodes",
    "minimal_green_level",
    "is_red",
    "is_green",
    "greenred_stage",
    "lemma_red_check",
    "StageCheck",
    "node_str",
    "node_from_str",
    "run_greenred",
    "GREENRED_SCHEMA",
]

GREENRED_SCHEMA = "htpq.greenred/1"

Node = tuple[int, int]  # (length, bitmask of positions holding 1)


def node_str(node: Node) -> str:
    length, ones = node
    return format(ones, f"0{length}b")[::-1] if length else ""


def node_from_str(bits: str) -> Node:
    return len(bits), sum(1 << i for i, b in enumerate(bits) if b == "1")


def _zeros(node: Node) -> int:
    length, ones = node
    return ((1 << length) - 1) & ~ones


def _priority_key(node: Node) -> tuple[int, str]:
    return node[0], node_str(node)


def mask_to_int(mask: int) -> int:
    x, i = 1, 0
    while mask:
        if mask & 1:
            x *= nth_prime(i)
        mask >>= 1
        i += 1
    return x


# --- u sequences and chips ----------------------------------------------------


@dataclass(frozen=True)
class USequence:
    """A computable increasing sequence of rationals u_s with a known limit."""

    name: str
    limit: Fraction
    term: Callable[[int], Fraction] = field(compare=False, repr=False)

    def __call__(self, s: int) -> Fraction:
        return self.term(s)


def u_preset(name: str, limit: Fraction | str = Fraction(3, 10)) -> USequence:
    """Named u-sequences increasing to ``limit``.

    "geometric": u_s = L - (L/3) 2^-s; for L = 3/10 this is 3/10 - 2^-s / 10.
    "harmonic":  u_s = L - (L/3) / (s + 1).
    """
    L = Fraction(limit)
    if not 0 < L < 1:
        raise ValueError("u limit must lie in (0, 1)")
    if name == "geometric":
        return USequence(name, L, lambda s: L - L / 3 / 2**s)
    if name == "harmonic":
        return USequence(name, L, lambda s: L - L / 3 / (s + 1))
    raise ValueError(f"unknown u preset {name!r}")


@dataclass(frozen=True)
class ChipFunction:
    """c(1), c(2), ... as delivered to the simulation (already filtered)."""

    values: tuple[Fraction, ...]
    v: Fraction
    cutoff: Fraction

    def __call__(self, s: int) -> Fraction:
        if not 1 <= s <= len(self.values):
            raise IndexError(f"chip for stage {s} is beyond the horizon {len(self.values)}")
        return self.values[s - 1]


EARLY_DENOMINATOR = 8


def _raw_chips(v: Fraction, cutoff: Fraction) -> Iterator[Fraction]:
    # one chip each for the small-denominator rationals below v
    early = sorted(
        {Fraction(a, b) for b in range(1, EARLY_DENOMINATOR + 1) for a in range(1, b)}
    )
    yield from (r for r in early if r < v)
    # then sweep [v, cutoff) with ever finer denominators, forever
    n = 1
    while True:
        n += 1
        sweep = sorted(
            {Fraction(a, b) for b in range(1, n + 1) for a in range(1, b)}
            | {v}
        )
        yield from (r for r in sweep if v <= r < cutoff)


def chip_for_rational(v: Fraction | str, u: USequence, horizon: int) -> ChipFunction:
    """A chip function whose finitely-chipped rationals are exactly those below v.

    Rationals below v get at most one chip, early on.  Every rational in
    [v, q') is chipped in infinitely many sweeps, q' = (v + 1 - lim u) / 2.
    Stages whose chip is not below 1 - u_s are skipped.
    """
    v = Fraction(v)
    if not 0 < v < 1:
        raise ValueError("v must lie in (0, 1)")
    if v + u.limit >= 1:
        raise ValueError(f"v + lim u = {v + u.limit} must be < 1")
    cutoff = (v + 1 - u.limit) / 2
    values: list[Fraction] = []
    for c in _raw_chips(v, cutoff):
        if len(values) >= horizon:
            break
        s = len(values) + 1
        if c < 1 - u(s) and c < cutoff:
            values.append(c)
    return ChipFunction(tuple(values), v, cutoff)


# --- colors -------------------------------------------------------------------


def is_red(node: Node, masks: list[int]) -> bool:
    z = _zeros(node)
    return all(m & z for m in masks)


def is_green(node: Node, masks: list[int]) -> bool:
    length, ones = node
    return any(m & ones == m and m >> length == 0 for m in masks)


def _absorbed(masks: list[int]) -> list[int]:
    keep: list[int] = []
    for m in sorted(set(masks), key=int.bit_count):
        if not any(k & m == k for k in keep):
            keep.append(m)
    return keep


def minimal_green_level(masks: list[int]) -> int:
    """Least level at or below which every minimal green node lies (0 if none).

    A minimal green node for x ends at the largest prime of x, unless some
    other y in D divides x, so only divisibility-minimal masks count.
    """
    return max((m.bit_length() for m in _absorbed(masks)), default=0)


def minimal_red_nodes(masks: list[int]) -> list[Node]:
    """Red nodes whose parent is not red, in priority order (length, then lex)."""
    out: list[Node] = []
    # alive masks stay sorted by bit length, so the green test looks at one
    start = sorted(_absorbed(masks), key=int.bit_length)
    stack: list[tuple[int, int, list[int]]] = [(0, 0, start)]
    while stack:
        length, ones, alive = stack.pop()
        if not alive:
            out.append((length, ones))
            continue
        if alive[0].bit_length() <= length:
            continue  # green: some alive x lies inside ones
        bit = 1 << length
        stack.append((length + 1, ones | bit, alive))
        stack.append((length + 1, ones, [m for m in alive if not m & bit]))
    # the 0 branch pops first, so nodes arrive in lex order; stable sort by length
    out.sort(key=lambda node: node[0])
    return out


# --- stage machine ------------------------------------------------------------


class InfeasibleWindow(RuntimeError):
    pass


@dataclass(frozen=True)
class StageRecord:
    s: int  # the stage just completed
    level: int  # l at the start of the stage
    k: int  # index of the last prioritized minimal red node, -1 if none
    chip: Fraction
    minimal_red: int
    prioritized: tuple[Node, ...]
    prioritized_measure: Dyadic
    new_masks: tuple[int, ...]
    d_size: int
    a: Dyadic
    window: tuple[Fraction, Fraction]

    def to_json(self) -> str:
        return json.dumps(
            {
                "s": self.s,
                "l_s": self.level,
                "k_s": self.k,
                "c": str(self.chip),
                "minimal_red": self.minimal_red,
                "prioritized": len(self.prioritized),
                "prioritized_measure": str(self.prioritized_measure),
                "new_x": len(self.new_masks),
                "D_size": self.d_size,
                "a": str(self.a),
                "window": [str(self.window[0]), str(self.window[1])],
            },
            sort_keys=True,
            separators=(",", ":"),
        )


@dataclass
class GreenRedState:
    s: int = 0
    masks: list[int] = field(default_factory=list)
    a: Dyadic = field(default_factory=lambda: Dyadic(0))
    records: list[StageRecord] = field(default_factory=list)

    @property
    def d(self) -> list[int]:
        """D_s as integers, in enumeration order."""
        return [mask_to_int(m) for m in self.masks]

    @property
    def universe(self) -> int:
        return max((m.bit_length() for m in self.masks), default=0)

    @property
    def level(self) -> int:
        return minimal_green_level(self.masks)


def _threshold_supports(rho: Node, word: str) -> list[int]:
    """Supports whose up-closure inside rho's cylinder is {w >= word}.

    Words are compared lexicographically on the positions right after rho.
    The minimal members of that up-set are the word's 1 bits and, for each
    0 bit j, the 1 bits before j together with j itself.
    """
    length, ones = rho
    supports = []
    prefix = ones
    for j, b in enumerate(word):
        pos = 1 << (length + j)
        if b == "1":
            prefix |= pos
        else:
            supports.append(prefix | pos)
    supports.append(prefix)
    return supports


def _merge(a: Optional[str], b: Optional[str]) -> Optional[str]:
    """Union of {w >= a} and {w >= b}: both are up-sets in one total order,
    so the union is whichever has the smaller word value (None is empty)."""
    if a is None:
        return b
    if b is None:
        return a
    va = int(a, 2) if a else 0
    vb = int(b, 2) if b else 0
    return a if va << len(b) < vb << len(a) else b


def _leak(src: Node, word: str, dst: Node, dst_bits: Optional[str] = None) -> Optional[str]:
    """What {w >= word} enumerated above ``src`` turns green inside ``dst``.

    ``dst`` must be no shorter than ``src``.  Inside dst's cylinder the bits
    of dst after src are fixed, so the trace is again a set {w >= word'} on
    the positions after dst, or everything, or nothing.
    """
    if src[1] & ~dst[1]:
        return None
    b = (node_str(dst) if dst_bits is None else dst_bits)[src[0]:]
    if len(b) >= len(word):
        return "" if b[: len(word)] >= word else None
    head = word[: len(b)]
    if b != head:
        return "" if b > head else None
    return word[len(b):]


def _fill_word(numerator: int, bits: int) -> str:
    """Word whose up-set has measure numerator / 2^bits (0 < numerator < 2^bits)."""
    return format((1 << bits) - numerator, f"0{bits}b").rstrip("0")


class _FillEffect:
    """Exact green gain of enumerating {w >= word} above the i-th minimal red.

    The later minimal reds whose 1 bits contain node i's are sorted by their
    bits after node i.  A word t then turns green every cylinder whose key is
    >= t, and part of those whose key is a proper prefix of t; nothing else.
    """

    def __init__(self, i, rest, bits_of, words, mass):
        self.i, self.words, self.mass = i, words, mass
        length, ones = rest[i]
        entries = sorted(
            (bits_of[j][length:], j)
            for j in range(i + 1, len(rest))
            if not ones & ~rest[j][1]
        )
        self.keys = [k for k, _ in entries]
        self.order = [j for _, j in entries]
        self.cum = [0]
        for j in self.order:
            self.cum.append(self.cum[-1] + mass(j, ""))
        self.by_key: dict[str, list[int]] = {}
        for k, j in entries:
            self.by_key.setdefault(k, []).append(j)
        self.touched = [
            (pos, j) for pos, j in enumerate(self.order) if words[j] is not None
        ]

    def _partial(self, word: str) -> Iterator[tuple[int, Optional[str]]]:
        for n in range(len(word)):
            for j in self.by_key.get(word[:n], ()):
                yield j, _merge(self.words[j], word[n:])

    def gain(self, word: str) -> int:
        i, words, mass = self.i, self.words, self.mass
        total = mass(i, _merge(words[i], word)) - mass(i, words[i])
        start = bisect.bisect_left(self.keys, word)
        total += self.cum[-1] - self.cum[start]
        total -= sum(mass(j, words[j]) for pos, j in self.touched if pos >= start)
        for j, w in self._partial(word):
            total += mass(j, w) - mass(j, words[j])
        return total

    def commit(self, word: str) -> None:
        words = self.words
        updates = list(self._partial(word))
        words[self.i] = _merge(words[self.i], word)
        for j in self.order[bisect.bisect_left(self.keys, word):]:
            words[j] = ""
        for j, w in updates:
            words[j] = w


def greenred_stage(state: GreenRedState, chip: ChipFunction, u: USequence) -> StageRecord:
    """Run stage s+1 in place and return its record."""
    s = state.s
    c = chip(s + 1)
    level = state.level
    reds = minimal_red_nodes(state.masks)
    # prioritize the longest run of top-priority minimal reds with measure < c
    k, total = -1, Dyadic(0)
    for node in reds:
        nxt = total + Dyadic(1, node[0])
        if not nxt < c:
            break
        total, k = nxt, k + 1
    prioritized = tuple(reds[: k + 1])
    rest = reds[k + 1 :]

    hi = u(s + 1)
    lo = hi - Fraction(1, 2 ** (s + 1))
    # the largest multiple of 2^-(s+3) strictly below u_{s+1}
    step = s + 3
    target = Dyadic(math.ceil(hi * 2**step) - 1, step)
    need = target - state.a if state.a < target else Dyadic(0)
    deepest = max((r[0] for r in rest), default=0)
    available = Dyadic(sum(1 << (deepest - r[0]) for r in rest), deepest)
    if available < need:
        raise InfeasibleWindow(
            f"stage {s + 1}: need {need} green but only {available} red is unprioritized"
        )

    # Largest chunks first.  A fill above rho also greens parts of the later
    # minimal reds whose 1 bits contain rho's; every green set inside a red
    # cylinder is an up-set in one lexicographic order, so each cylinder's
    # green part is tracked exactly by the smallest word reaching it.
    words: list[Optional[str]] = [None] * len(rest)
    # every measure below is an integer multiple of 2^-scale
    scale = max([s + 6, state.a.exp, target.exp] + [r[0] + 1 for r in rest])
    bits_of = [node_str(r) for r in rest]

    def mass(j: int, word: Optional[str]) -> int:
        if word is None:
            return 0
        n = len(word)
        return ((1 << n) - (int(word, 2) if word else 0)) << (scale - rest[j][0] - n)

    new: list[int] = []
    remaining = need.num << (scale - need.exp)
    added = 0
    for i, rho in enumerate(rest):
        if remaining == 0:
            break
        if words[i] == "":
            continue
        fill = _FillEffect(i, rest, bits_of, words, mass)
        gain, word = fill.gain(""), ""
        if remaining < gain:
            # largest partial fill whose total effect still fits
            bits = max(1, s + 6 - rho[0])
            lo_n, hi_n, best = 1, (1 << bits) - 1, None
            while lo_n <= hi_n:
                mid = (lo_n + hi_n) // 2
                g = fill.gain(_fill_word(mid, bits))
                if g <= remaining:
                    best, lo_n = (mid, g), mid + 1
                else:
                    hi_n = mid - 1
            if best is None or best[1] == 0:
                continue
            word, gain = _fill_word(best[0], bits), best[1]
        fill.commit(word)
        added += gain
        remaining -= gain
        new.extend(_threshold_supports(rho, word))

    known = set(state.masks)
    fresh = tuple(m for m in dict.fromkeys(new) if m not in known)
    state.masks.extend(fresh)
    state.a = state.a + Dyadic(added, scale)
    state.s = s + 1
    if not lo < state.a:
        raise InfeasibleWindow(f"stage {s + 1}: a = {state.a} fell short of {lo}")
    rec = StageRecord(
        s=s + 1,
        level=level,
        k=k,
        chip=c,
        minimal_red=len(reds),
        prioritized=prioritized,
        prioritized_measure=total,
        new_masks=fresh,
        d_size=len(state.masks),
        a=state.a,
        window=(lo, hi),
    )
    state.records.append(rec)
    return rec


def lemma_red_check(record: StageRecord) -> bool:
    """Every new x misses a prime that each prioritized node excludes.

    Then no extension of a prioritized node turns green from this stage's
    enumerations.
    """
    return all(m & _zeros(rho) for m in record.new_masks for rho in record.prioritized)


@dataclass
class StageCheck:
    s: int
    window: bool
    lemma: bool
    prioritized_below_chip: bool
    prioritized_still_red: bool
    monotone: bool
    dual: Optional[bool] = None

    @property
    def ok(self) -> bool:
        return all(
            v for v in (self.window, self.lemma, self.prioritized_below_chip,
                        self.prioritized_still_red, self.monotone)
        ) and self.dual is not False


def run_greenred(
    v: Fraction,
    u: USequence,
    horizon: int,
    dual_every: int = 10,
    on_stage: Optional[Callable[[StageRecord, StageCheck], None]] = None,
) -> tuple[GreenRedState, list[StageCheck]]:
    """Run ``horizon`` stages, checking every invariant after each one.

    Every ``dual_every`` stages the incremental a_s is compared with an
    independent brute-force measure of D_s (0 disables the comparison).
    """
    from .boundary import alpha_bruteforce

    chip = chip_for_rational(v, u, horizon)
    if len(chip.values) < horizon:
        raise ValueError("chip function ran short of the horizon")
    state = GreenRedState()
    checks = []
    prev = state.a
    for _ in range(horizon):
        rec = greenred_stage(state, chip, u)
        lo, hi = rec.window
        check = StageCheck(
            s=rec.s,
            window=lo < rec.a and rec.a < hi,
            lemma=lemma_red_check(rec),
            prioritized_below_chip=rec.prioritized_measure < rec.chip,
            prioritized_still_red=all(is_red(r, state.masks) for r in rec.prioritized),
            monotone=not rec.a < prev,
        )
        if dual_every and rec.s % dual_every == 0:
            check.dual = alpha_bruteforce(state.d, state.universe, "shannon") == rec.a
        prev = rec.a
        checks.append(check)
        if on_stage is not None:
            on_stage(rec, check)
    return state, checks
