"""Command-line front end: ``htpq <subcommand> ...``.

Every option that affects a result is explicit and is echoed into the header
line of any trace written.  Exit codes: 0 success, 1 invariant violation,
2 input error, 3 search cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import __version__
from .numtheory import (
    SearchCapExceeded,
    conic_primitive_solution,
    find_appropriate_primes,
    is_q_appropriate,
    is_q_appropriate_mod4,
    legendre,
    odd_prime,
)

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class InputError(ValueError):
    pass


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _write(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text)


def parse_ring(text: str):
    """finite:2,3 | cofinite:5,7 | prefix:0110 (empty lists allowed)."""
    from .rings import BitstringPrefix, InvertedCofinite, InvertedFinite

    kind, _, body = text.partition(":")
    if kind == "prefix":
        return BitstringPrefix(body)
    try:
        primes = frozenset(int(p) for p in body.split(",") if p.strip())
    except ValueError:
        raise InputError(f"bad prime list in ring {text!r}") from None
    if kind == "finite":
        return InvertedFinite(primes)
    if kind == "cofinite":
        return InvertedCofinite(primes)
    raise InputError(f"unknown ring kind {kind!r}; use finite:, cofinite: or prefix:")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


# --- subcommands --------------------------------------------------------------


def cmd_primes(args: argparse.Namespace) -> int:
    q = odd_prime(args.e)
    found = find_appropriate_primes(args.e, args.avoid, args.count, args.cap)
    print("prime\t(-q_e/p)\tavoided (-q_i/p)\tmod4 agrees")
    status = EXIT_OK
    for p in found:
        others = ",".join(
            f"{i}:{legendre(-odd_prime(i), p) if p != odd_prime(i) else 0}"
            for i in sorted(set(args.avoid))
        )
        agree = is_q_appropriate(p, q) == is_q_appropriate_mod4(p, q)
        if not agree:
            status = EXIT_VIOLATION
        print(f"{p}\t{legendre(-q, p)}\t{others or '-'}\t{'yes' if agree else 'NO'}")
    return status


def cmd_conic(args: argparse.Namespace) -> int:
    sol = conic_primitive_solution(args.p, args.q, args.k_max)
    appropriate = is_q_appropriate(args.p, args.q)
    if sol is None:
        print(f"none with k <= {args.k_max} (p is {'' if appropriate else 'not '}appropriate)")
        return EXIT_CAP if appropriate else EXIT_OK
    print(f"a={sol.a} b={sol.b} k={sol.k}: {sol.a}^2 + {args.q}*{sol.b}^2 = {args.p}^{2 * sol.k}")
    return EXIT_OK if appropriate else EXIT_VIOLATION


def cmd_search(args: argparse.Namespace) -> int:
    from .poly import IntPoly
    from .rings import build_fe, search_solution

    if (args.poly is None) == (args.fe is None):
        raise InputError("give exactly one of --poly and --fe")
    f = build_fe(args.fe) if args.fe is not None else IntPoly.parse(args.poly)
    ring = parse_ring(args.ring)
    try:
        sol = search_solution(f, ring, args.height, args.max_vars)
    except TypeError as exc:
        raise InputError(str(exc)) from None
    if sol is None:
        print(f"none up to height {args.height}")
    else:
        print(" ".join(f"x{i}={v}" for i, v in sorted(sol.items())))
    return EXIT_OK


def cmd_construct(args: argparse.Namespace) -> int:
    from .injury import ConstructionTrace, load_schedule, run, verify_requirements

    if args.replay:
        old_text = Path(args.replay).read_text()
        old = ConstructionTrace.from_jsonl(old_text)
        head = json.loads(old_text.splitlines()[0])
        if head.get("version") != __version__:
            print(f"trace version {head.get('version')} differs from {__version__}")
        trace, _ = run(old.schedule, len(old.events), odd_only=old.odd_only)
        same = trace.to_jsonl() == old_text
        print("replay: byte-identical" if same else "replay: MISMATCH")
        return EXIT_OK if same else EXIT_VIOLATION

    if args.schedule is None or args.stages is None:
        raise InputError("construct needs --schedule and --stages (or --replay)")
    schedule = load_schedule(Path(args.schedule).read_text())
    trace, state = run(schedule, args.stages, odd_only=not args.include_two)
    _write(args.out, trace.to_jsonl())
    e_max = args.e_max if args.e_max is not None else max(ev.e for ev in trace.events)
    reports = verify_requirements(trace, state, schedule, e_max)

    protected_seen: set[int] = set()
    permanence = 0
    for ev in trace.events:
        permanence += len(protected_seen & set(ev.deleted))
        protected_seen |= set(ev.protected)
    for w in trace.warnings:
        print(f"warning: {w}")
    for ev in trace.events:
        if ev.protected:
            print(f"stage {ev.stage}: R_{ev.e} protects {ev.prime}")
    print(f"protections: {len(protected_seen)}, permanence violations: {permanence}")
    for r in reports:
        mode = "protecting" if schedule.get(r.e) is not None else "deleting"
        wit = ",".join(map(str, r.witnesses)) or "-"
        print(f"R_{r.e}\t{mode}\t{r.status}\t{r.detail}\twitnesses={wit}")
    bad = permanence or any(r.status == "Violation" for r in reports)
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_blocks(args: argparse.Namespace) -> int:
    from .boundary import alpha_bruteforce, alpha_closed_form, nk_sequence

    if args.q:
        qs = [_fraction(t) for t in args.q.split(",")]
    else:
        qs = [Fraction(1, 2) - Fraction(1, 2 ** (s + 2)) for s in range(args.count)]
    blocks = nk_sequence(qs, args.count)
    for k, (n, x, q, prod) in enumerate(zip(blocks.n, blocks.x, blocks.q, blocks.partial_products())):
        print(f"k={k} q={q} n={n} x={x} prod={prod} alpha={alpha_closed_form(blocks, k + 1)}")
    closed = alpha_closed_form(blocks, args.count)
    status = EXIT_OK
    if args.bruteforce:
        brute = alpha_bruteforce(blocks.x, blocks.universe(), args.method)
        ok = brute == closed
        print(f"alpha closed form {closed}, brute force {brute}: {'equal' if ok else 'DIFFER'}")
        status = EXIT_OK if ok else EXIT_VIOLATION
    return status


def cmd_greenred(args: argparse.Namespace) -> int:
    from .greenred import GREENRED_SCHEMA, InfeasibleWindow, run_greenred, u_preset

    u = u_preset(args.u, args.u_limit)
    if args.v + u.limit >= 1:
        raise InputError(f"v + lim u = {args.v + u.limit} must be < 1")
    header = {
        "schema": GREENRED_SCHEMA,
        "version": __version__,
        "config": {
            "v": str(args.v),
            "u": args.u,
            "u_limit": str(u.limit),
            "horizon": args.horizon,
            "dual_every": args.dual_every,
        },
    }
    lines = [_dump(header)]
    failed: list[int] = []

    def on_stage(rec, check) -> None:
        row = json.loads(rec.to_json())
        row["ok"] = check.ok
        row["dual"] = check.dual
        lines.append(_dump(row))
        if not check.ok:
            failed.append(rec.s)

    try:
        state, _ = run_greenred(args.v, u, args.horizon, args.dual_every, on_stage)
    except InfeasibleWindow as exc:
        _write(args.out, "\n".join(lines) + "\n")
        print(f"infeasible: {exc}")
        return EXIT_VIOLATION
    last = state.records[-1]
    lo, hi = last.window
    summary = {
        "summary": {
            "stages": state.s,
            "a": str(state.a),
            "red": str(1 - state.a),
            "in_window": lo < state.a < hi,
            "D_size": len(state.masks),
            "universe": state.universe,
            "failed_stages": failed,
        }
    }
    lines.append(_dump(summary))
    _write(args.out, "\n".join(lines) + "\n")
    print(f"stages {state.s}, |D| = {len(state.masks)}, universe {state.universe} primes")
    print(f"a_{state.s} = {state.a} in ({lo}, {hi}): {lo < state.a < hi}")
    print(f"red measure 1 - a = {1 - state.a}")
    print(f"stages with a prioritized node: {sum(r.k >= 0 for r in state.records)}")
    if failed:
        print(f"invariant failures at stages {failed[:10]}")
        return EXIT_VIOLATION
    print("all invariants hold")
    return EXIT_OK


def cmd_pad(args: argparse.Namespace) -> int:
    from .poly import IntPoly
    from .rings import pad_injective

    table: dict[int, IntPoly] = {}
    for item in args.entry:
        n, sep, text = item.partition("=")
        if not sep:
            raise InputError(f"entries look like N=POLY, got {item!r}")
        table[int(n)] = IntPoly.parse(text)
    for n, f in sorted(pad_injective(table, literal=args.literal).items()):
        print(f"{n}\t{f}")
    return EXIT_OK


# --- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="htpq", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("primes", help="primes appropriate for q_e and not for q_i")
    p.add_argument("--e", type=int, required=True, help="index of q_e among odd primes")
    p.add_argument("--not", dest="avoid", type=int, action="append", default=[],
                   help="index i whose q_i must be inappropriate (repeatable)")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--cap", type=int, default=10**7, help="give up past this prime")
    p.set_defaults(func=cmd_primes)

    p = sub.add_parser("conic", help="primitive solution of a^2 + q b^2 = p^(2k)")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--k-max", type=int, default=8)
    p.set_defaults(func=cmd_conic)

    p = sub.add_parser("search", help="bounded search for a zero over a subring of Q")
    p.add_argument("--poly", help="polynomial text, e.g. '2*x0 - 1'")
    p.add_argument("--fe", type=int, help="use the family polynomial f_e instead")
    p.add_argument("--ring", required=True, help="finite:2,3 | cofinite:5 | prefix:0110")
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--max-vars", type=int, default=4)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("construct", help="run the priority construction and verify it")
    p.add_argument("--schedule", help="JSON file {e: stage or null}")
    p.add_argument("--stages", type=int)
    p.add_argument("--out", help="write the JSONL trace here")
    p.add_argument("--e-max", type=int, help="verify R_0..R_e-max (default: all considered)")
    p.add_argument("--include-two", action="store_true",
                   help="keep 2 in V as the bare construction does")
    p.add_argument("--replay", help="rerun a trace file and compare byte for byte")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("blocks", help="block sizes fitted to a rational sequence")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--q", help="comma-separated rationals (default 1/2 - 2^-(s+2))")
    p.add_argument("--bruteforce", action="store_true")
    p.add_argument("--method", default="auto",
                   choices=["auto", "enumerate", "inclusion-exclusion", "shannon"])
    p.set_defaults(func=cmd_blocks)

    p = sub.add_parser("greenred", help="green/red measure-targeting simulation")
    p.add_argument("--v", type=_fraction, required=True)
    p.add_argument("--u", default="geometric", choices=["geometric", "harmonic"])
    p.add_argument("--u-limit", type=_fraction, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--dual-every", type=int, default=10)
    p.add_argument("--out", help="write the JSONL trace here")
    p.set_defaults(func=cmd_greenred)

    p = sub.add_parser("pad", help="injective padding of a code table")
    p.add_argument("entry", nargs="+", help="N=POLY")
    p.add_argument("--literal", action="store_true", help="use X_0^n (not injective-safe)")
    p.set_defaults(func=cmd_pad)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler: Callable[[argparse.Namespace], int] = args.func
    try:
        return handler(args)
    except SearchCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
