"""Command-line front end: reproducible experiments with CSV/JSON artifacts.

Exit codes: 0 success, 1 precondition failure or falsification, 2 usage.
All floats are printed with 12 significant digits so identical configurations
produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from pathlib import Path

from . import bounds as bounds_mod
from . import clusters as clusters_mod
from . import density as density_mod
from . import tuples as tuples_mod
from .errors import ShortIntervalError
from .primes import ALL, PrimeFilter, build_table


def _write_output(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _round12(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _filter_from_args(args) -> PrimeFilter:
    mod = getattr(args, "mod", None)
    disc = getattr(args, "disc", None)
    if mod is not None and disc is not None:
        raise ValueError("choose either --mod/--res or --disc/--class, not both")
    if mod is not None:
        if args.res is None:
            raise ValueError("--mod requires --res")
        return PrimeFilter.residue_class(args.res, mod)
    if disc is not None:
        if args.cls is None:
            raise ValueError("--disc requires --class +1 or -1")
        return PrimeFilter.kronecker(disc, args.cls)
    return ALL


def _params_from_args(args) -> bounds_mod.BoundParams:
    if getattr(args, "constants", None):
        with open(args.constants) as fh:
            return bounds_mod.params_from_dict(json.load(fh))
    return bounds_mod.DEFAULT_PARAMS


def default_cache_path(limit: int) -> Path:
    root = os.environ.get("SHORTINT_CACHE_DIR")
    base = Path(root) if root else Path.home() / ".cache" / "shortint"
    return base / f"primes-{limit}.pbm"


def _cmd_sieve(args) -> int:
    table = build_table(
        args.limit, segment_size=args.segment_size, threads=args.threads
    )
    if args.cache is not None:
        path = Path(args.cache) if args.cache else default_cache_path(args.limit)
        path.parent.mkdir(parents=True, exist_ok=True)
        table.save(path)
        print(f"cache written: {path}", file=sys.stderr)
    print(table.count)
    return 0


def _cmd_density(args) -> int:
    filt = _filter_from_args(args)
    top = 2 * args.x if args.growth else args.x
    table = build_table(
        density_mod.required_limit(args.lam, top), threads=args.threads
    )
    if args.growth:
        results = [
            density_mod.growth_check(table, args.lam, m, args.x, filt)
            for m in range(args.m_max + 1)
        ]
        if args.json:
            payload = [
                {
                    "m": r.m,
                    "x": r.x,
                    "count_x": r.count_at_x,
                    "count_2x": r.count_at_2x,
                    "ratio": r.ratio,
                }
                for r in results
            ]
            text = json.dumps(_round12(payload), indent=2) + "\n"
        else:
            text = density_mod.growth_csv(results)
        _write_output(text, args.out)
        return 0
    report = density_mod.measure_density(
        table, args.lam, args.x, args.m_max, filt, threads=args.threads
    )
    if args.json:
        payload = density_mod.density_json(report, args.compare_poisson)
        text = json.dumps(_round12(payload), indent=2) + "\n"
    else:
        text = density_mod.density_csv(report, args.compare_poisson)
    _write_output(text, args.out)
    return 0


def _cmd_tuples_greedy(args) -> int:
    sieved = tuples_mod.greedy_sieve(args.window, args.k)
    if args.count:
        if args.spacing is None:
            raise ValueError("--count requires --spacing")
        exact, bound = tuples_mod.count_spaced_selections(
            sieved, args.k, args.spacing
        )
        _write_output(f"exact,bound\n{exact},{bound:.12g}\n", args.out)
        return 0
    if args.spacing is not None:
        picked = tuples_mod.select_spaced(
            sieved, args.k, args.spacing, args.strategy, args.seed
        )
        line = tuples_mod.format_offsets(picked.offsets) if picked else "none"
        _write_output(line + "\n", args.out)
        return 0
    _write_output(tuples_mod.format_offsets(sieved.elements.tolist()) + "\n", args.out)
    return 0


def _cmd_tuples_check(args) -> int:
    offsets = tuples_mod.parse_offsets(args.offsets)
    witness = tuples_mod.first_covered_prime(offsets)
    if witness is None:
        print("admissible")
        return 0
    print(f"inadmissible (p={witness} covered)")
    return 1


def _cmd_tuples_series(args) -> int:
    offsets = tuples_mod.parse_offsets(args.offsets)
    value = tuples_mod.singular_series(offsets, args.cutoff)
    print(f"{value:.12g}")
    return 0


def _cmd_slide(args) -> int:
    params = _params_from_args(args)
    need = math.ceil(args.x_hi + 6 * args.lam * math.log(args.x_hi) + 2)
    table = build_table(need, threads=args.threads)
    stream = clusters_mod.find_clusters(
        table,
        args.lam,
        args.x_lo,
        args.x_hi,
        args.m,
        require_spacing=args.require_spacing,
        params=params,
    )
    traces = [
        clusters_mod.slide(table, c, args.m)
        for c in itertools.islice(stream, args.max_clusters)
    ]
    _write_output(clusters_mod.trace_csv(traces), args.out)
    records = clusters_mod.falsifications_jsonl(traces)
    if args.falsifications != "-":
        Path(args.falsifications).write_text(records)
    elif records:
        sys.stderr.write(records)
    n_fals = sum(len(t.falsifications) for t in traces)
    n_drop = sum(1 for t in traces if t.j_drop is not None)
    run_lengths = [
        length
        for t in traces
        for start, length in clusters_mod.extract_m_runs(t, args.m)
    ]
    stats = (
        f"traces={len(traces)} with_drop={n_drop} "
        f"m_runs={len(run_lengths)} longest_run={max(run_lengths, default=0)} "
        f"falsifications={n_fals}"
    )
    print(stats, file=sys.stderr)
    return 1 if n_fals else 0


def _cmd_bounds(args) -> int:
    params = _params_from_args(args)
    report = bounds_mod.bounds_report(
        args.m, lam=args.lam, x=args.x, q=args.q, params=params
    )
    _write_output(json.dumps(_round12(report), indent=2) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shortint",
        description="Prime counts in short intervals: sieve, tuples, densities, "
        "window slides, and bound formulas.",
    )
    parser.set_defaults(func=None)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("sieve", help="build a prime table and print its count")
    p.add_argument("--limit", type=int, required=True)
    p.add_argument("--segment-size", type=int, default=2**18)
    p.add_argument(
        "--cache",
        nargs="?",
        const="",
        default=None,
        metavar="PATH",
        help="write the table cache (default location under SHORTINT_CACHE_DIR)",
    )
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_sieve)

    p = sub.add_parser("density", help="window-count densities or growth ratios")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--m-max", type=int, required=True)
    p.add_argument("--mod", type=int, default=None, help="progression modulus")
    p.add_argument("--res", type=int, default=None, help="progression residue")
    p.add_argument("--disc", type=int, default=None, help="fundamental discriminant")
    p.add_argument(
        "--class", dest="cls", type=int, choices=(1, -1), default=None,
        help="quadratic splitting class (+1 or -1)",
    )
    p.add_argument("--compare-poisson", action="store_true")
    p.add_argument("--growth", action="store_true", help="emit x vs 2x count ratios")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default="-")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("tuples", help="greedy sieve, admissibility, singular series")
    tsub = p.add_subparsers(dest="tuples_command")

    g = tsub.add_parser("greedy", help="greedy-sieve a window; optionally select")
    g.add_argument("--window", type=float, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--spacing", type=int, default=None)
    g.add_argument("--count", action="store_true", help="count spaced selections")
    g.add_argument("--strategy", choices=("first-fit", "random"), default="first-fit")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", default="-")
    g.set_defaults(func=_cmd_tuples_greedy)

    c = tsub.add_parser("check", help="test offsets for admissibility")
    c.add_argument("--offsets", required=True, help='comma list "h1,h2,..."')
    c.set_defaults(func=_cmd_tuples_check)

    s = tsub.add_parser("series", help="singular series of an admissible tuple")
    s.add_argument("--offsets", required=True)
    s.add_argument("--cutoff", type=int, required=True)
    s.set_defaults(func=_cmd_tuples_series)

    p = sub.add_parser("slide", help="scan clusters and slide windows across them")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--x-lo", type=int, required=True)
    p.add_argument("--x-hi", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--require-spacing", action="store_true")
    p.add_argument("--max-clusters", type=int, default=1000)
    p.add_argument("--constants", default=None, help="JSON file of bound constants")
    p.add_argument("--out", default="-", help="trace CSV destination")
    p.add_argument(
        "--falsifications", default="-",
        help="falsification JSONL destination (default: stderr)",
    )
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_slide)

    p = sub.add_parser("bounds", help="derived constants and bound values as JSON")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--constants", default=None, help="JSON file of bound constants")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_bounds)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.func is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ShortIntervalError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    main_entry()
