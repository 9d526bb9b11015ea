"""``histosan`` command line.

Exit status: 0 on success, 2 when a resemblance/avoidance result misses the
privacy parameter ``--c``, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import evaluation, ingest, oracle
from .histogram import (
    KINDS,
    BinDistance,
    Histogram,
    HistogramError,
    InfeasibleError,
    TargetHistogram,
    expand_sensitive,
    load_histogram,
    load_taxonomy,
    read_json,
    uniform_target,
)
from .report import SCHEMA_VERSION, digest
from .slh import SlhInstance, lho_solve, proportional_baseline
from .sweep import SweepConfig, run_sweep, write_csv
from .tr import AVOID, RESEMBLE, TrInstance, heuristic_solve, optimal_solve

DEFAULT_SEED = 0
EXIT_OK, EXIT_ERROR, EXIT_PRIVACY = 0, 1, 2

log = logging.getLogger("histosan")


class CliError(Exception):
    pass


def _emit(obj, output):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _read_sensitive(path) -> set[str]:
    obj = read_json(path)
    if isinstance(obj, dict):
        obj = obj.get("sensitive", obj.get("locations"))
    if not isinstance(obj, list):
        raise CliError(f"{path}: expected a list of location ids or {{'sensitive': [...]}}")
    return {str(v) for v in obj}


def _read_target(args, h: Histogram) -> TargetHistogram:
    if args.target:
        return TargetHistogram.from_json(read_json(args.target))
    if args.target_dist:
        obj = read_json(args.target_dist)
        profiles = obj if isinstance(obj, list) else [obj]
        if args.profile:
            profiles = [p for p in profiles if p.get("profile") == args.profile]
            if not profiles:
                raise CliError(f"profile {args.profile!r} not found in {args.target_dist}")
        if len(profiles) != 1:
            raise CliError("target distribution file holds several profiles; pass --profile")
        return TargetHistogram.from_distribution(profiles[0]["distribution"], h.size)
    return uniform_target(h)


def _slh_instance(args) -> SlhInstance:
    h = load_histogram(args.input)
    sensitive: set[str] = set()
    if args.sensitive:
        sensitive |= _read_sensitive(args.sensitive)
    if args.taxonomy:
        tax = load_taxonomy(args.taxonomy)
        sensitive |= expand_sensitive(tax, args.select or [])
    sensitive &= set(h.vocabulary)
    forbidden = {v for v, c in zip(h.vocabulary, h.counts) if c == 0} if args.forbid_unvisited else set()
    return SlhInstance(h, frozenset(sensitive), BinDistance(args.distance), args.r,
                       frozenset(forbidden - sensitive))


def _tr_instance(args, mode) -> TrInstance:
    h = load_histogram(args.input)
    target = _read_target(args, h)
    forbidden = {v for v, c in zip(h.vocabulary, h.counts) if c == 0} if args.forbid_unvisited else set()
    return TrInstance(h, target, args.epsilon, privacy=BinDistance(args.privacy_distance),
                      quality=BinDistance(args.distance), c=args.c, mode=mode,
                      size_from_target=args.size_from_target, rounding=args.rounding,
                      delta=args.delta, forbidden=frozenset(forbidden))


def cmd_slh(args) -> int:
    inst = _slh_instance(args)
    rep = proportional_baseline(inst) if args.solver == "proportional" else lho_solve(inst)
    _emit(rep.to_json(timing=not args.no_timing), args.output)
    return EXIT_OK


def _cmd_target(args, mode) -> int:
    inst = _tr_instance(args, mode)
    rep = heuristic_solve(inst) if args.solver == "heuristic" else optimal_solve(inst)
    rep.parameters["seed"] = DEFAULT_SEED if args.seed is None else args.seed
    _emit(rep.to_json(timing=not args.no_timing), args.output)
    return EXIT_PRIVACY if rep.feasible_vs_c is False else EXIT_OK


def cmd_tr(args) -> int:
    return _cmd_target(args, RESEMBLE)


def cmd_ta(args) -> int:
    return _cmd_target(args, AVOID)


def cmd_oracle(args) -> int:
    if args.problem == "slh":
        inst = _slh_instance(args)
        res = oracle.oracle_slh(inst, args.cap)
        desc = inst.describe()
    else:
        inst = _tr_instance(args, RESEMBLE if args.problem == "tr" else AVOID)
        res = (oracle.oracle_tr if args.problem == "tr" else oracle.oracle_ta)(inst, args.cap)
        desc = inst.describe()
    _emit({
        "schema_version": SCHEMA_VERSION,
        "problem": args.problem,
        "input_digest": digest(desc),
        "cap": args.cap,
        "optimum": res.optimum,
        "tie_set_size": len(res.ties),
        "tie_set": [list(t) for t in res.ties],
        "scanned": res.scanned,
    }, args.output)
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.metric == "nce":
        before, after = load_histogram(args.before), load_histogram(args.after)
        k = min(args.k, before.n)
        c0 = evaluation.ckmeans(before.counts, k)
        c1 = evaluation.ckmeans(after.counts, k)
        out = {"metric": "nce", "k": args.k, "before": args.before, "after": args.after,
               "nce": evaluation.nce(c0, c1),
               "degenerate": evaluation.entropy(c1) == 0.0}
    else:
        seed = DEFAULT_SEED if args.seed is None else args.seed
        print(f"histosan: seed {seed}", file=sys.stderr)
        ds = ingest.load_dataset(args.dataset)
        run = evaluation.cf_run(ds.histograms, seed, args.neighbors)
        out = {"metric": "cf", "dataset": str(args.dataset), "seed": seed,
               "neighbors": args.neighbors, "error": args.error,
               "value": run.mae if args.error == "mae" else run.rmse,
               "mae": run.mae, "rmse": run.rmse, "test_users": len(run.test)}
    out["schema_version"] = SCHEMA_VERSION
    _emit(out, args.output)
    return EXIT_OK


def _parse_columns(text: str | None) -> dict:
    cols = dict(ingest.FOURSQUARE_COLUMNS)
    if text:
        for item in text.split(","):
            key, _, val = item.partition("=")
            if key not in cols:
                raise CliError(f"unknown column {key!r}")
            cols[key] = int(val)
    return cols


def cmd_ingest(args) -> int:
    ds = ingest.load_checkins(args.checkins, columns=_parse_columns(args.columns),
                              delimiter=args.delimiter, strict=args.strict)
    ingest.save_dataset(ds, args.output)
    _emit(ds.statistics(), "-")
    return EXIT_OK


def cmd_gen_synthetic(args) -> int:
    h = ingest.gen_synthetic(load_histogram(args.input), args.length)
    _emit(h.to_json(), args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = SweepConfig.from_toml(args.config, {"seed": args.seed})
    print(f"histosan: seed {cfg.seed}", file=sys.stderr)
    rows = run_sweep(cfg)
    if args.output in (None, "-"):
        write_csv(rows, sys.stdout)
    else:
        write_csv(rows, args.output)
    return EXIT_OK


def _add_slh_inputs(p):
    p.add_argument("--input", required=True, help="histogram JSON")
    p.add_argument("--sensitive", help="JSON list of sensitive location ids")
    p.add_argument("--taxonomy", help="taxonomy JSON")
    p.add_argument("--select", nargs="*", help="taxonomy nodes whose leaves are sensitive")
    p.add_argument("--r", type=int, help="counts to redistribute (default: all sensitive counts)")
    p.add_argument("--distance", choices=KINDS, default="js")
    p.add_argument("--forbid-unvisited", action="store_true")


def _add_tr_inputs(p):
    p.add_argument("--input", required=True, help="histogram JSON")
    p.add_argument("--target", help="target histogram JSON")
    p.add_argument("--target-dist", help="target distribution JSON")
    p.add_argument("--profile", help="profile name inside --target-dist")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--c", type=float)
    p.add_argument("--size-from-target", action="store_true")
    p.add_argument("--rounding", default="half-even", choices=["half-even", "half-up", "floor", "ceil"])
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--distance", choices=KINDS, default="js", help="quality distance")
    p.add_argument("--privacy-distance", choices=KINDS, default="js")
    p.add_argument("--forbid-unvisited", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="histosan", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None,
                        help=f"random seed (default {DEFAULT_SEED}, or the sweep config's)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("slh", help="hide sensitive locations")
    _add_slh_inputs(p)
    p.add_argument("--solver", choices=["lho", "proportional"], default="lho")
    p.add_argument("--output")
    p.add_argument("--no-timing", action="store_true", help="omit wall time from the report")
    p.set_defaults(func=cmd_slh)

    for name, fn, help_ in (("tr", cmd_tr, "resemble a target"), ("ta", cmd_ta, "avoid a target")):
        p = sub.add_parser(name, help=help_)
        _add_tr_inputs(p)
        p.add_argument("--solver", choices=["optimal", "heuristic"], default="optimal")
        p.add_argument("--output")
        p.add_argument("--no-timing", action="store_true")
        p.set_defaults(func=fn)

    p = sub.add_parser("oracle", help="exhaustive optimum for small instances")
    osub = p.add_subparsers(dest="problem", required=True)
    for name in ("slh", "tr", "ta"):
        q = osub.add_parser(name)
        (_add_slh_inputs if name == "slh" else _add_tr_inputs)(q)
        q.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP)
        q.add_argument("--output")
        q.set_defaults(func=cmd_oracle)

    p = sub.add_parser("eval", help="clustering and recommendation quality")
    esub = p.add_subparsers(dest="metric", required=True)
    q = esub.add_parser("nce")
    q.add_argument("--before", required=True)
    q.add_argument("--after", required=True)
    q.add_argument("--k", type=int, default=3)
    q.add_argument("--output")
    q.set_defaults(func=cmd_eval)
    q = esub.add_parser("cf")
    q.add_argument("--dataset", required=True)
    q.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    q.add_argument("--neighbors", type=int, default=25)
    q.add_argument("--error", choices=["mae", "rmse"], default="mae")
    q.add_argument("--output")
    q.set_defaults(func=cmd_eval)

    p = sub.add_parser("ingest", help="check-in TSV to a histogram dataset directory")
    p.add_argument("--checkins", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--columns", help="e.g. user_id=0,category_id=2,category_name=3")
    p.add_argument("--delimiter", default="\t")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("gen-synthetic", help="append zero bins to a histogram")
    p.add_argument("--input", required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("sweep", help="run a parameter grid to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, HistogramError, InfeasibleError, oracle.CapExceeded, KeyError,
            OSError, ValueError) as exc:
        print(f"histosan: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
