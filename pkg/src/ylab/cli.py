"""Command-line driver.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 solver error.
``YLAB_EPS`` overrides the default tie tolerance.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import io
from .analysis import LoopRateReport, check_tour, find_crossings, loop_rate_experiment
from .branching import DEFAULT_MAX_NODES, enumerate_runs, format_report
from .generators import FIXTURES, gen_grid, gen_random_uniform
from .heuristic import VARIANTS, default_eps, run_adding
from .instance import InstanceError, tour_length
from .oracle import gap, optimal

log = logging.getLogger("ylab")

EXIT_OK, EXIT_INVALID, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


class InputError(Exception):
    pass


def _load(path):
    try:
        return io.load_instance(path)
    except (OSError, io.FormatError, InstanceError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read instance {path}: {exc}") from exc


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_solve(args):
    inst = _load(args.instance)
    trace = run_adding(inst, args.variant, args.eps)
    sizes = trace.tie_sizes()
    labels = ["initial pair", "third point"] + [f"step {i + 1}" for i in range(len(sizes) - 2)]
    tied = [f"{label} ({size} candidates)" for label, size in zip(labels, sizes) if size > 1]
    if tied:
        shown = ", ".join(tied[:5]) + (" ..." if len(tied) > 5 else "")
        print(f"warning: ties resolved by the deterministic policy: {shown}", file=sys.stderr)
    if args.format == "tsplib":
        _write(args.out, io.dumps_tsplib_tour(inst, trace.final))
    else:
        _write(args.out, json.dumps(io.tour_to_dict(inst, trace.final)) + "\n")
    if args.trace:
        Path(args.trace).write_text(io.dumps_trace(trace))
    if args.svg:
        crossings = find_crossings(inst, trace.final)
        Path(args.svg).write_text(io.render_svg(inst, trace.final, crossings))
    return EXIT_OK


def cmd_enumerate(args):
    inst = _load(args.instance)
    report = enumerate_runs(inst, args.variant, args.eps, max_nodes=args.max_nodes,
                            max_depth=args.max_depth, dedup=args.dedup)
    print(format_report(report))
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=1) + "\n")
    return EXIT_OK


def cmd_verify(args):
    inst = _load(args.instance)
    try:
        doc = io.load_tour(args.tour)
    except (OSError, io.FormatError) as exc:
        raise InputError(f"cannot read tour {args.tour}: {exc}") from exc
    order = doc["order"]
    result = check_tour(inst, order)
    print(f"instance: {inst.name} (n={inst.n}, distances {inst.convention})")
    print(f"valid: {'yes' if result['valid'] else 'no'}")
    for problem in result["problems"]:
        print(f"  {problem}")
    if not result["valid"]:
        return EXIT_INVALID
    print(f"length: {result['length']:.6f}")
    if result["crossings"] is not None:
        print(f"crossings: {result['crossings']}")
    reference = None
    if args.oracle:
        opt = optimal(inst)
        reference = opt.length
        print(f"optimal length ({opt.method}): {opt.length:.6f}")
    elif args.optimum is not None:
        reference = args.optimum
        print(f"reference optimum: {reference:.6f}")
    if reference is not None:
        result["optimal_length"] = reference
        result["gap"] = gap(result["length"], reference)
        print(f"gap: {result['gap']:.6g}")
    if args.json:
        Path(args.json).write_text(json.dumps(result) + "\n")
    return EXIT_OK


def cmd_experiment(args):
    rows = []
    for n in args.n:
        report = loop_rate_experiment(n, args.trials, args.variant, args.seed, args.eps, n_jobs=args.jobs)
        rows.append(report.csv_row())
        log.info("n=%d: %d/%d tours self-intersect", n, report.with_crossings, report.trials)
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(LoopRateReport.CSV_COLUMNS)
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_generate(args):
    kind, params = args.kind, args.params
    try:
        if kind in FIXTURES:
            inst = FIXTURES[kind].generate()
        elif kind == "grid" and len(params) == 1:
            inst = gen_grid(int(params[0]))
        elif kind == "random" and len(params) == 2:
            inst = gen_random_uniform(int(params[0]), int(params[1]))
        else:
            known = ", ".join(sorted(FIXTURES))
            raise InputError(f"unknown generator {kind!r} {params}; use one of {known}, 'grid K', 'random N SEED'")
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    fmt = args.format or ("tsplib" if args.out and args.out.endswith(".tsp") else "json")
    _write(args.out, io.dumps_tsplib(inst) if fmt == "tsplib" else io.dumps_instance(inst))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ylab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--variant", choices=VARIANTS, default="maxmin")
        p.add_argument("--eps", type=float, default=None,
                       help="tie tolerance (default: $YLAB_EPS or 1e-9)")

    p = sub.add_parser("solve", help="run the adding procedure on an instance")
    p.add_argument("instance")
    common(p)
    p.add_argument("--out", help="tour file (default: stdout)")
    p.add_argument("--format", choices=("json", "tsplib"), default="json")
    p.add_argument("--trace", help="write the run trace as JSON")
    p.add_argument("--svg", help="write an SVG rendering of the tour")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("enumerate", help="explore every tie resolution")
    p.add_argument("instance")
    common(p)
    p.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--dedup", action="store_true",
                   help="merge equal partial routes (a pruning extension, off by default)")
    p.add_argument("--out", help="write the branch report as JSON")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify", help="check a tour: validity, length, crossings, gap")
    p.add_argument("instance")
    p.add_argument("tour")
    p.add_argument("--oracle", action="store_true", help="compute the exact optimum (small n only)")
    p.add_argument("--optimum", type=float, help="published optimal length to compare against")
    p.add_argument("--json", help="write the report as JSON")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", help="self-intersection rate on random instances")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="CSV output (default: stdout)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("generate", help="write a fixture, grid or random instance")
    p.add_argument("kind")
    p.add_argument("params", nargs="*")
    p.add_argument("--out", help="instance file (default: stdout)")
    p.add_argument("--format", choices=("json", "tsplib"))
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    if getattr(args, "eps", None) is None and hasattr(args, "eps"):
        args.eps = default_eps()
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - any solver failure maps to one exit code
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
