"""``randsets`` command line.

Exit codes: 0 success, 1 an experiment check failed, 2 usage or config
error, 3 numeric or runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .analyzers import (ap_block_events, aps_csv, block_counts, block_counts_csv, find_aps, gap_sequence,
                        gaps_csv, intersect_bounded_gap, max_block_index)
from .convergence import DEFAULT_CUTOFFS, check_admissibility
from .errors import ConfigError, NumericError
from .exact import MAX_BLOCK, block_count_distribution
from .profiles import AdmissibleFunction, load_profile
from .realization import Realization
from .sampler import DEFAULT_CHUNK, sample
from .sets import BoundedGapSet

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _json_arg(text: str):
    """Inline JSON or a path to a JSON file."""
    if not text.lstrip().startswith(("{", "[")):
        try:
            with open(text) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {text}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers: {text!r}") from exc


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_text(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------- sample

def cmd_sample(args) -> int:
    profile = load_profile(_json_arg(args.profile))
    t0 = time.perf_counter()
    r = sample(profile, args.range, args.seed, kind=args.sampler, chunk_size=args.chunk_size)
    elapsed = time.perf_counter() - t0
    data = r.to_bytes(args.format)
    summary = {"count": len(r), "min": int(r.indices[0]) if len(r) else None,
               "max": int(r.indices[-1]) if len(r) else None, "elapsed_seconds": round(elapsed, 6),
               "config": {"profile": profile.to_spec(), "range": args.range, "seed": args.seed,
                          "sampler": args.sampler, "format": args.format, "chunk_size": args.chunk_size}}
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
        print(_dump(summary), end="")
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        print(_dump(summary), end="", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- analyze

def _rows(csv_text: str) -> list:
    lines = csv_text.strip("\n").split("\n")
    return [line.split(",") for line in lines]


def cmd_analyze(args) -> int:
    r = Realization.read(args.file)
    config = {"file": args.file, "block_base": args.block_base, "ap_length": args.ap_length,
              "gap_window": args.gap_window, "bounded_gap_set": None, "emit": args.emit}
    tables = {}
    summary = {"count": len(r), "range_start": r.range_start, "range_end": r.range_end}
    gs = gap_sequence(r)
    tables["gaps"] = gaps_csv(gs)
    if args.gap_window is not None:
        summary["tail_min_gap"] = gs.tail_min_gap(args.gap_window)
    if args.block_base is not None:
        a = args.block_base
        last = max_block_index(a, r.range_end)
        if last >= 0:
            tables["block_counts"] = block_counts_csv(block_counts(r, a, 0, last))
        else:
            tables["block_counts"] = "n,N_n,L_n,product_with_next\n"
    if args.ap_length is not None:
        rep = find_aps(r, args.ap_length)
        summary["aps"] = rep.to_dict()
        tables["aps"] = aps_csv(rep)
    if args.bounded_gap_set is not None:
        S = BoundedGapSet.from_spec(_json_arg(args.bounded_gap_set))
        config["bounded_gap_set"] = S.to_spec()
        hit, first = intersect_bounded_gap(r, S)
        summary["bounded_gap"] = {"intersects": hit, "first": first}
    if args.block_events:
        l = args.ap_length or 3
        k_max = r.range_end // l - 1
        summary["block_events"] = len(ap_block_events(r, l, k_max)) if k_max >= 0 else 0
    doc = {"config": config, "summary": summary}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        if args.emit in ("json", "both"):
            _write_text(os.path.join(args.out, "analysis.json"),
                        _dump({**doc, "tables": {k: _rows(v) for k, v in tables.items()}}))
        if args.emit in ("csv", "both"):
            for name, text in tables.items():
                _write_text(os.path.join(args.out, f"{name}.csv"), text)
        print(_dump(doc), end="")
    elif args.emit == "csv":
        for name, text in tables.items():
            sys.stdout.write(f"# {name}\n{text}\n")
    else:
        print(_dump({**doc, "tables": {k: _rows(v) for k, v in tables.items()}}), end="")
    return EXIT_OK


# ---------------------------------------------------------------- dist

def cmd_dist(args) -> int:
    profile = load_profile(_json_arg(args.profile))
    law = block_count_distribution(profile, args.base, args.n, args.cap, args.max_block)
    rows = [[str(j), repr(float(v))] for j, v in enumerate(law.probs)]
    if args.cap < law.length:
        rows.append([f">{args.cap}", repr(law.overflow)])
    if args.format == "csv":
        sys.stdout.write("j,probability\n" + "".join(f"{a},{b}\n" for a, b in rows))
    else:
        print(_dump({"config": {"profile": profile.to_spec(), "base": args.base, "n": args.n, "cap": args.cap,
                                "max_block": args.max_block},
                     "block": {"lo": law.lo, "hi": law.hi, "length": law.length},
                     "rows": [{"j": a, "probability": float(b)} for a, b in rows]}), end="")
    return EXIT_OK


# ---------------------------------------------------------------- admissible

def cmd_admissible(args) -> int:
    f = AdmissibleFunction.from_spec(_json_arg(args.f))
    rep = check_admissibility(f, epsilons=args.epsilons, cutoffs=args.cutoffs)
    print(_dump({"config": {"f": f.to_spec(), "epsilons": args.epsilons, "cutoffs": args.cutoffs},
                 **rep.to_dict()}), end="")
    return EXIT_OK


# ---------------------------------------------------------------- experiment

def cmd_experiment(args) -> int:
    from .montecarlo import ExperimentConfig, run_experiment

    doc = _json_arg(args.config)
    if not isinstance(doc, dict):
        raise ConfigError("experiment config must be a JSON object")
    cfg = ExperimentConfig.from_dict(doc)
    report = run_experiment(cfg, jobs=args.jobs)
    if args.out:
        report.write(args.out, args.emit)
    elif args.emit in ("json", "both"):
        sys.stdout.write(report.to_json())
    if args.emit == "csv" and not args.out:
        for name in sorted(report.tables):
            sys.stdout.write(f"# {name}\n{report.table_csv(name)}\n")
    for name, c in sorted(report.checks.items()):
        status = {True: "PASS", False: "FAIL", None: "SKIP"}[c["passed"]]
        print(f"{status} {name}: {c['detail']}", file=sys.stderr)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


# ---------------------------------------------------------------- entry point

def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _non_negative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="randsets", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample E_X ∩ [1, N] and write a realization file")
    p.add_argument("profile", help="profile JSON or path to it")
    p.add_argument("--range", type=_positive, required=True, metavar="N")
    p.add_argument("--seed", type=_non_negative, default=0)
    p.add_argument("--sampler", choices=("naive", "skip"), default="skip")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=("text", "binary"), default="text")
    p.add_argument("--chunk-size", type=_positive, default=DEFAULT_CHUNK)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("analyze", help="statistics of one realization file")
    p.add_argument("file")
    p.add_argument("--block-base", type=float, metavar="A")
    p.add_argument("--ap-length", type=int, metavar="L")
    p.add_argument("--gap-window", type=_positive, metavar="W")
    p.add_argument("--bounded-gap-set", metavar="SPEC")
    p.add_argument("--block-events", action="store_true",
                   help="count step-1 blocks of length --ap-length (default 3) inside the set")
    p.add_argument("--out", help="output directory")
    p.add_argument("--emit", choices=("csv", "json", "both"), default="json")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("dist", help="exact law of one block count")
    p.add_argument("profile")
    p.add_argument("--base", type=float, default=2.0)
    p.add_argument("--n", type=_non_negative, required=True)
    p.add_argument("--cap", type=_positive, required=True)
    p.add_argument("--max-block", type=_positive, default=MAX_BLOCK)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("admissible", help="diagnose whether f is admissible")
    p.add_argument("f", help="function JSON or path to it")
    p.add_argument("--epsilons", type=_floats, default=[1.0])
    p.add_argument("--cutoffs", type=_floats, default=list(DEFAULT_CUTOFFS))
    p.set_defaults(func=cmd_admissible)

    p = sub.add_parser("experiment", help="run a verification suite")
    p.add_argument("config", help="experiment config JSON or path to it")
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--emit", choices=("csv", "json", "both"), default="json")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, ArithmeticError, MemoryError, OSError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
