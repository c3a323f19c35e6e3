"""Command-line entry point: ``satcfk {hfunction,bimodule,satellite,selftest}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field

from .alexander import AlexanderError
from .assembly import AssemblyError, build_grid
from .bimodule import (PatternData, PatternError, build_bimodule, builtin_pattern,
                       default_window)
from .chain import ChainError, reduce
from .companion import CompanionData, CompanionError, builtin_companion, load_companion
from .io import (SchemaError, bimodule_text, bimodule_to_json, complex_to_json, h_table_text,
                 load_json, pattern_from_json, to_dot, to_text)
from .ring import RingError, parse_half

EXIT_OK, EXIT_VALIDATION, EXIT_SCHEMA = 0, 2, 3

log = logging.getLogger("satcfk")


@dataclass
class JobSpec:
    pattern: PatternData
    companion: CompanionData | None = None
    framing: int = 0
    output: str = "text"
    flags: set[str] = field(default_factory=set)


def _pattern(args: argparse.Namespace) -> PatternData:
    src = args.pattern
    if src.endswith(".json") or os.path.sep in src:
        return pattern_from_json(load_json(src))
    return builtin_pattern(src, p=args.p, q=args.q, m=args.m)


def _companion(args: argparse.Namespace) -> CompanionData:
    src = args.companion
    if src.endswith(".json") or os.path.sep in src:
        return load_companion(load_json(src))
    return builtin_companion(src, args.k)


def _window(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    lo, hi = (parse_half(x.strip()) for x in text.split(","))
    if lo > hi:
        raise SchemaError("window must be lo,hi with lo <= hi")
    return lo, hi


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _pattern_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pattern", required=True,
                   help="torus2q, cable, whitehead, mazur, ktwobridge, or a pattern JSON file")
    p.add_argument("--q", type=int, help="q for torus2q(q) and cable(p,q)")
    p.add_argument("--p", type=int, help="p for cable(p,q)")
    p.add_argument("--m", type=int, help="m for ktwobridge(m)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="satcfk", description="Knot Floer complexes of L-space satellites")
    sub = ap.add_subparsers(dest="command", required=True)

    h = sub.add_parser("hfunction", help="print a window of the pattern link's H-function")
    _pattern_args(h)
    h.add_argument("--window", help="lo,hi for both coordinates; write --window=-5/2,5/2 for negative bounds")
    h.add_argument("--format", choices=("text", "json"), default="text")
    h.add_argument("--out")

    b = sub.add_parser("bimodule", help="print the pattern bimodule arrows column by column")
    _pattern_args(b)
    b.add_argument("--window", help="lo,hi range of s; write --window=-1,1 for negative bounds")
    b.add_argument("--format", choices=("text", "json"), default="text")
    b.add_argument("--out")

    s = sub.add_parser("satellite", help="compute the reduced complex of P(K, n)")
    _pattern_args(s)
    s.add_argument("--companion", default="trefoil-rh",
                   help="unknot, trefoil-rh, torus (with --k), figure-eight, or a companion JSON file")
    s.add_argument("--k", type=int, help="k for the torus(2,k) companion")
    s.add_argument("--framing", type=int, default=0)
    s.add_argument("--format", choices=("json", "dot", "text"), default="text")
    s.add_argument("--out")
    s.add_argument("--no-reduce", action="store_true", help="emit the unreduced grid complex")
    s.add_argument("--check", action="store_true",
                   help="also run the Path-B assembly, symmetry and Euler-characteristic checks")
    s.add_argument("--seed", type=int, default=0)

    t = sub.add_parser("selftest", help="replay every acceptance criterion")
    t.add_argument("--seed", type=int, default=0)
    return ap


def cmd_hfunction(args: argparse.Namespace) -> int:
    P = _pattern(args)
    win = _window(args.window)
    if win is None:
        w = P.N2 + 2
        win = (-w, w)
    B = build_bimodule(P, window=(win[0] - 2, win[1] + 2))
    par = P.l % 2
    lo = win[0] if win[0] % 2 == par else win[0] + 1
    hi = win[1] if win[1] % 2 == par else win[1] - 1
    if args.format == "json":
        cells = [[s, t, B.H(s, t)] for t in range(hi, lo - 1, -2) for s in range(lo, hi + 1, 2)]
        _emit(json.dumps({"pattern": P.name, "coords": "doubled", "cells": cells}) + "\n", args.out)
    else:
        _emit(h_table_text(B.H, lo, hi, lo, hi), args.out)
    return EXIT_OK


def cmd_bimodule(args: argparse.Namespace) -> int:
    P = _pattern(args)
    win = _window(args.window)
    B = build_bimodule(P, window=win if win is not None else default_window(P))
    svals = B.s_values()
    if win is not None:
        svals = [s for s in svals if win[0] <= s <= win[1]]
    if args.format == "json":
        _emit(json.dumps(bimodule_to_json(B, svals), indent=1) + "\n", args.out)
    else:
        _emit(bimodule_text(B, svals), args.out)
    return EXIT_OK


def cmd_satellite(args: argparse.Namespace) -> int:
    job = JobSpec(_pattern(args), _companion(args), args.framing, args.format,
                  {f for f in ("no_reduce", "check") if getattr(args, f)})
    log.info("assembling %s on %s with framing %d", job.pattern.name, job.companion.name, job.framing)
    grid = build_grid(job.pattern, job.companion, job.framing)
    log.info("grid: %d blocks, %d generators", len(grid.index), len(grid.complex))
    C = grid.complex if "no_reduce" in job.flags else reduce(grid.complex, track=False).complex
    status = EXIT_OK
    if "check" in job.flags:
        from .selftest import property_violations

        bad = property_violations(job.pattern, job.companion, job.framing, path_b=True, seed=args.seed)
        for v in bad:
            print(f"check failed: {v}", file=sys.stderr)
        if bad:
            status = EXIT_VALIDATION
        else:
            print("checks passed: grid d^2 = 0, symmetry, Euler characteristic, Path-B", file=sys.stderr)
    if job.output == "json":
        _emit(json.dumps(complex_to_json(C)) + "\n", args.out)
    elif job.output == "dot":
        _emit(to_dot(C, f"{job.pattern.name}({job.companion.name},{job.framing})"), args.out)
    else:
        _emit(to_text(C), args.out)
    return status


def cmd_selftest(args: argparse.Namespace) -> int:
    from .selftest import run_all

    results = run_all(args.seed)
    for r in results:
        print(r.line())
    failed = [r.number for r in results if not r.ok]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_VALIDATION if failed else EXIT_OK


COMMANDS = {"hfunction": cmd_hfunction, "bimodule": cmd_bimodule,
            "satellite": cmd_satellite, "selftest": cmd_selftest}


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("SATCFK_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (SchemaError, PatternError, CompanionError, RingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (AssemblyError, ChainError, AlexanderError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
