"""Command-line entry point: ``bellforge generate | bound | optimize | scan | reproduce``.

Exit codes: 0 success, 2 validation error, 3 enumeration cap exceeded,
4 reproduction mismatch.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .inequalities import BellCoefficients, FamilyDescriptor
from .io import (
    inequality_from_dict,
    inequality_to_dict,
    read_json,
    scan_csv,
    state_from_dict,
    write_json,
)
from .lhv import DEFAULT_CAP, EnumerationCapError, lhv_bound
from .optimize import OptimizationConfig, config_dict, optimize_quantum_value, scan_generalized_ghz
from .reproduce import format_report, run_checks
from .signs import ConstructionError

EXIT_OK, EXIT_INVALID, EXIT_CAP, EXIT_MISMATCH = 0, 2, 3, 4

KINDS = {
    "standard": "standard",
    "composed-442": "composed_442",
    "reduced-332": "reduced_332",
    "recursive": "recursive",
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="u64 seed; generated and printed if omitted")
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="max deterministic strategies")
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--quick", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write inequality JSON files with LHV bounds")
    g.add_argument("kind", choices=sorted(KINDS))
    g.add_argument("--parties", type=int, default=3)
    g.add_argument("--base-arity", type=int, default=2)
    g.add_argument("--levels", type=int, default=1)
    sel = g.add_mutually_exclusive_group(required=True)
    sel.add_argument("--all", action="store_true", help="every generator index")
    sel.add_argument("--index", type=int, action="append", help="generator index (repeatable)")
    sel.add_argument("--generators", help="comma-separated sign-function masks")
    g.add_argument("--limit", type=int, default=None, help="stop after this many indices")
    g.add_argument("--unique", action="store_true", help="skip tensors already written")
    g.add_argument("--normalize", action="store_true", help="divide by the gcd of the coefficients")
    g.add_argument("--output", "-o", default=None, help="file (single member) or directory")
    _common(g)

    b = sub.add_parser("bound", help="compute the LHV bound of an inequality file")
    b.add_argument("input")
    b.add_argument("--output", "-o", default=None)
    _common(b)

    o = sub.add_parser("optimize", help="maximise the quantum value for a state")
    o.add_argument("inequality")
    o.add_argument("state")
    o.add_argument("--output", "-o", default=None)
    _common(o)

    s = sub.add_parser("scan", help="family violation over generalized GHZ states")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--family", choices=sorted(KINDS))
    src.add_argument("--inequality")
    s.add_argument("--parties", type=int, default=3)
    s.add_argument("--alphas", help="comma-separated alpha values (radians)")
    s.add_argument("--grid", help="start,stop,count for an evenly spaced alpha grid")
    s.add_argument("--output", "-o", default=None)
    _common(s)

    r = sub.add_parser("reproduce", help="recompute the reference values")
    r.add_argument("--output", "-o", default="reproduction")
    r.add_argument("--family-restarts", type=int, default=16)
    _common(r)
    return parser


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(64)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def _cfg(args) -> OptimizationConfig:
    return OptimizationConfig(restarts=args.restarts, tolerance=args.tolerance, seed=_seed(args))


def _manifest(args, inputs, start: float, cfg: OptimizationConfig | None = None) -> dict:
    return {
        "command": args.command,
        "inputs": [str(p) for p in inputs],
        "config": config_dict(cfg) if cfg else {"cap": args.cap},
        "rng_seed": args.seed,
        "version": __version__,
        "duration_s": round(time.perf_counter() - start, 3),
    }


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _descriptor(args) -> FamilyDescriptor:
    if args.kind == "recursive" and args.parties != args.base_arity + args.levels:
        raise ConstructionError(
            f"recursive family has base_arity + levels = {args.base_arity + args.levels} parties, "
            f"not {args.parties}"
        )
    return FamilyDescriptor(
        KINDS[args.kind], parties=args.parties, base_arity=args.base_arity, levels=args.levels
    )


def _normalized(ineq: BellCoefficients) -> BellCoefficients:
    g = int(np.gcd.reduce(np.abs(ineq.coefficients).ravel()))
    if g <= 1:
        return ineq
    return BellCoefficients(
        ineq.coefficients // g,
        descriptor={**ineq.descriptor, "divided_by": g},
        labels=ineq.labels,
    )


def cmd_generate(args) -> int:
    start = time.perf_counter()
    fd = _descriptor(args)
    if args.generators:
        masks = [int(x) for x in args.generators.split(",")]
        if len(masks) != len(fd.generators(0)):
            raise ConstructionError(f"{fd.kind} needs {len(fd.generators(0))} generators")
        members = [(None, fd.build(masks))]
    else:
        total = fd.generator_count()
        indices = range(total) if args.all else args.index
        if args.limit is not None:
            indices = list(indices)[: args.limit]
        for i in indices:
            if not 0 <= i < total:
                raise ConstructionError(f"generator index {i} outside [0, {total})")
        members = ((i, fd.member(i)) for i in indices)

    many = args.all or (args.index and len(args.index) > 1)
    outdir = Path(args.output or "inequalities") if many else None
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)
    seen: set[bytes] = set()
    written = 0
    for index, ineq in members:
        if args.normalize:
            ineq = _normalized(ineq)
        if args.unique:
            key = ineq.coefficients.tobytes()
            if key in seen:
                continue
            seen.add(key)
        res = lhv_bound(ineq, args.cap)
        data = inequality_to_dict(ineq, res)
        if index is not None:
            data["descriptor"]["index"] = index
        data["manifest"] = _manifest(args, [], start)
        if outdir:
            write_json(outdir / f"{fd.kind}_{index:06d}.json", data)
        elif args.output:
            write_json(args.output, data)
        else:
            print(json.dumps(data, indent=2))
        written += 1
    if outdir:
        print(f"wrote {written} inequalities to {outdir}", file=sys.stderr)
    return EXIT_OK


def cmd_bound(args) -> int:
    start = time.perf_counter()
    ineq = inequality_from_dict(read_json(args.input))
    res = lhv_bound(ineq, args.cap)
    data = inequality_to_dict(ineq, res)
    data["manifest"] = _manifest(args, [args.input], start)
    write_json(args.output or args.input, data)
    print(f"lhv_bound = {res.bound}", file=sys.stderr)
    return EXIT_OK


def cmd_optimize(args) -> int:
    start = time.perf_counter()
    ineq = inequality_from_dict(read_json(args.inequality))
    state = state_from_dict(read_json(args.state))
    cfg = _cfg(args)
    report = optimize_quantum_value(ineq, state, cfg)
    data = report.to_dict()
    data["manifest"] = _manifest(args, [args.inequality, args.state], start, cfg)
    if args.output:
        write_json(args.output, data)
    else:
        print(json.dumps(data, indent=2))
    return EXIT_OK


def _alphas(args) -> list[float]:
    if args.alphas:
        return [float(a) for a in args.alphas.split(",")]
    if args.grid:
        lo, hi, n = args.grid.split(",")
        return [float(a) for a in np.linspace(float(lo), float(hi), int(n))]
    raise ConstructionError("give --alphas or --grid")


def cmd_scan(args) -> int:
    start = time.perf_counter()
    cfg = _cfg(args)
    if args.family:
        family = FamilyDescriptor(KINDS[args.family], parties=args.parties)
        inputs = []
    else:
        family = [inequality_from_dict(read_json(args.inequality))]
        inputs = [args.inequality]
    results = scan_generalized_ghz(family, _alphas(args), cfg)
    if args.format == "csv":
        _emit(scan_csv((a, r.violation_factor, r.critical_noise) for a, r in results), args.output)
    else:
        data = {
            "results": [{"alpha": a, **r.to_dict()} for a, r in results],
            "manifest": _manifest(args, inputs, start, cfg),
        }
        if args.output:
            write_json(args.output, data)
        else:
            print(json.dumps(data, indent=2))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    start = time.perf_counter()
    seed = _seed(args)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    checks = run_checks(
        seed=seed,
        restarts=args.restarts,
        family_restarts=args.family_restarts,
        quick=args.quick,
        progress=lambda c: print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}", file=sys.stderr),
    )
    body = format_report(checks)
    (out / "report.txt").write_text(body, encoding="utf-8")
    cfg = OptimizationConfig(restarts=args.restarts, tolerance=args.tolerance, seed=seed)
    write_json(
        out / "manifest.json",
        {**_manifest(args, [], start, cfg), "quick": args.quick, "family_restarts": args.family_restarts},
    )
    sys.stdout.write(body)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_MISMATCH


COMMANDS = {
    "generate": cmd_generate,
    "bound": cmd_bound,
    "optimize": cmd_optimize,
    "scan": cmd_scan,
    "reproduce": cmd_reproduce,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except EnumerationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
