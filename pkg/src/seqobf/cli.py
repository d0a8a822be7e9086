"""Command-line entry point: one binary, one subcommand per operation.

Every run prints its fully-resolved configuration as a leading ``#``
comment line, so any output can be reproduced from the output alone.
Tabular results are CSV with a header row.  Exit codes: 0 on success, 2 on
usage errors (including contradictory parameters), 1 on runtime errors.
"""
from __future__ import annotations

import argparse
import configparser
import os
import sys

import numpy as np

from . import bounds as bounds_mod
from . import ingest as ingest_mod
from . import sim as sim_mod
from .core import Alphabet, Pattern, RandomSource, Trace
from .detect import first_occurrence, has_pattern
from .engines import EngineConfig, lov_bound, obfuscate
from .superstring import concat_superstring, shortest_superstring

_KIND_ALIASES = {"shortest": "shortest", "concat": "concatenation",
                 "concatenation": "concatenation"}


def _default_seed() -> int:
    return int(os.environ.get("SEQOBF_SEED", "0"))


def _parse_gap(text: str) -> int | None:
    if text.lower() in ("inf", "unbounded", "none"):
        return None
    return int(text)


def _print_config(command: str, **kv) -> None:
    pairs = " ".join(f"{k}={v}" for k, v in kv.items())
    print(f"# {command} {pairs}")


def _emit_csv(records) -> None:
    import csv

    records = list(records)
    fields: list[str] = []
    for rec in records:
        for key in rec:
            if key not in fields:
                fields.append(key)
    writer = csv.DictWriter(sys.stdout, fieldnames=fields)
    writer.writeheader()
    for rec in records:
        writer.writerow(rec)


def _cmd_gen_superstring(args) -> int:
    kind = _KIND_ALIASES[args.kind]
    _print_config("gen-superstring", r=args.r, l=args.l, kind=kind, seed=args.seed)
    source = RandomSource(args.seed)
    if kind == "shortest":
        ss = shortest_superstring(args.r, args.l, source)
    else:
        ss = concat_superstring(args.r, args.l, source)
    print(" ".join(str(int(s)) for s in ss.symbols))
    return 0


def _cmd_obfuscate(args) -> int:
    traces = ingest_mod.read_trace_file(args.infile, alphabet_size=2**31 - 1)
    if not traces:
        raise ValueError(f"{args.infile}: no traces found")
    r = args.r
    if r is None:
        r = max(int(t.symbols.max()) for t in traces) + 1
        r = max(r, 2)
    config = EngineConfig(
        method=args.method,
        p_obf=args.p_obf,
        order=args.l,
        gamma=args.gamma,
        gap=args.gap,
        stage_noise=(args.stage_a, args.stage_b),
    )
    _print_config(
        "obfuscate", method=args.method, p_obf=args.p_obf, gamma=args.gamma,
        h=args.gap, l=args.l, r=r, seed=args.seed,
        infile=args.infile, outfile=args.outfile,
    )
    alphabet = Alphabet(r)
    source = RandomSource(args.seed)
    out = []
    for u, trace in enumerate(traces):
        rebound = Trace(trace.symbols, alphabet)
        out.append(obfuscate(rebound, config, source.derive(u)))
    ingest_mod.write_trace_file(args.outfile, out)
    print(f"wrote {len(out)} obfuscated traces to {args.outfile}")
    return 0


def _cmd_detect(args) -> int:
    symbols = tuple(int(s) for s in args.pattern.replace(",", " ").split())
    gap = args.gap
    _print_config("detect", trace_file=args.trace_file,
                  pattern=",".join(map(str, symbols)), h=gap)
    r = max(symbols) + 2
    traces = ingest_mod.read_trace_file(args.trace_file, alphabet_size=2**31 - 1)
    records = []
    for idx, trace in enumerate(traces):
        r_eff = max(r, int(trace.symbols.max()) + 1)
        rebound = Trace(trace.symbols, Alphabet(r_eff))
        pattern = Pattern(symbols, gap=gap)
        found = has_pattern(rebound, pattern)
        first = first_occurrence(rebound, pattern) if gap == 1 else None
        records.append(
            {"trace": idx, "contains": found,
             "first_index": "" if first is None else first}
        )
    _emit_csv(records)
    return 0


def _cmd_bounds(args) -> int:
    _print_config("bounds", which=args.which, m=args.m, r=args.r, l=args.l,
                  h=args.gap, p=args.p, n=args.n, beta=args.beta, theta=args.theta)
    if args.which == "schedule":
        if args.n is None or args.beta is None or args.theta is None:
            raise ValueError("schedule requires --n, --beta and --theta")
        sched = bounds_mod.schedule(
            bounds_mod.ScheduleParams(
                n_users=args.n, order=args.l, gap=args.gap or 1,
                beta=args.beta, theta=args.theta, trace_length=args.m,
            )
        )
        _emit_csv([{
            "n": args.n, "l": args.l, "beta": args.beta, "theta": args.theta,
            "m": args.m, "scale": sched.scale, "noise_level": sched.noise_level,
            "alphabet_min": sched.alphabet_min, "alphabet_max": sched.alphabet_max,
            "noise_samples": sched.noise_samples,
            "noise_samples_ok": sched.noise_samples_ok,
            "crowd_threshold": sched.crowd_threshold,
        }])
        return 0
    if args.which == "lov":
        value = lov_bound(args.m, args.r, args.p)
    else:
        params = bounds_mod.BoundParams(
            trace_length=args.m, alphabet_size=args.r, order=args.l,
            gap=args.gap, p_obf=args.p,
        )
        fn = bounds_mod.bound_sbu if args.which == "sbu" else bounds_mod.bound_slsbu
        value = fn(params)
    _emit_csv([{"which": args.which, "m": args.m, "r": args.r, "l": args.l,
                "h": args.gap, "p": args.p, "value": value}])
    return 0


def _parse_p_grid(text: str) -> list[float]:
    text = text.strip()
    if ":" in text:
        start, step, stop = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ValueError(f"bad noise grid {text!r}: step must be > 0")
        values = np.arange(start, stop + step / 2, step)
        return [float(round(v, 12)) for v in values]
    return [float(x) for x in text.split(",")]


def load_spec(path) -> tuple[sim_mod.ExperimentSpec, list[float], int]:
    """Parse an INI experiment spec; returns (spec, p grid, workers)."""
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise OSError(f"cannot read spec file {path}")
    if "experiment" not in parser or "parameters" not in parser:
        raise ValueError(f"{path}: spec needs [experiment] and [parameters] sections")
    exp = parser["experiment"]
    par = parser["parameters"]
    src = parser["source"] if "source" in parser else {}
    lem = parser["crowd"] if "crowd" in parser else {}
    methods = tuple(
        m.strip() for m in exp.get("methods", "iid, sl_sbu").split(",") if m.strip()
    )
    p_grid = _parse_p_grid(par.get("p_obf", "0.1"))
    spec = sim_mod.ExperimentSpec(
        scenario=exp.get("scenario", "fraction"),
        alphabet_size=int(par.get("r", "20")),
        order=int(par.get("l", "2")),
        gap=_parse_gap(par.get("h", "10")),
        trace_length=int(par.get("m", "1000")),
        p_obf=p_grid[0],
        methods=methods,
        n_users=int(par.get("n_users", "100")),
        iterations=int(exp.get("iterations", "100")),
        master_seed=int(exp.get("seed", str(_default_seed()))),
        trace_source=src.get("kind", "synthetic_iid"),
        trace_file=src.get("trace_file", None),
        gamma=float(par.get("gamma", "0.1")),
        match_probability=(
            float(lem["match_probability"]) if "match_probability" in lem else None
        ),
        beta=float(lem["beta"]) if "beta" in lem else None,
    )
    workers = int(exp.get("workers", "1"))
    return spec, p_grid, workers


def _cmd_simulate(args) -> int:
    spec, p_grid, workers = load_spec(args.spec)
    if args.workers is not None:
        workers = args.workers
    _print_config(
        "simulate", spec_file=args.spec, scenario=spec.scenario,
        methods=",".join(spec.methods), m=spec.trace_length, r=spec.alphabet_size,
        l=spec.order, h=spec.gap, p_obf=",".join(str(p) for p in p_grid),
        iterations=spec.iterations, n_users=spec.n_users, seed=spec.master_seed,
        workers=workers, out=args.out,
    )
    if spec.scenario == "fraction" and len(p_grid) > 1:
        result = sim_mod.sweep(spec, p_grid, workers=workers)
    else:
        result = sim_mod.run(spec, workers=workers)
    sim_mod.write_csv(result.records, args.out)
    print(f"wrote {len(result.records)} records to {args.out} "
          f"in {result.wall_clock:.2f}s")
    return 0


def _cmd_ingest(args) -> int:
    _print_config("ingest", infile=args.infile, min_interval=args.min_interval,
                  r=args.r, min_length=args.min_length, outfile=args.outfile)
    raws = ingest_mod.parse_csv(args.infile)
    raws = [ingest_mod.resample(raw, args.min_interval) for raw in raws]
    traces, mapping = ingest_mod.encode(raws, args.r, min_length=args.min_length)
    ingest_mod.write_trace_file(args.outfile, traces)
    print(f"encoded {len(traces)} traces over {len(mapping)} categories "
          f"to {args.outfile}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqobf",
        description="Sequence obfuscation against pattern-matching "
                    "de-anonymization: noise streams, privacy bounds, and "
                    "experiment reproduction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-superstring", help="emit a covering superstring")
    p.add_argument("--r", type=int, required=True, help="alphabet size")
    p.add_argument("--l", type=int, required=True, help="covering order")
    p.add_argument("--kind", choices=sorted(_KIND_ALIASES), default="shortest")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(fn=_cmd_gen_superstring)

    p = sub.add_parser("obfuscate", help="obfuscate a trace file")
    p.add_argument("--method", required=True)
    p.add_argument("--p-obf", dest="p_obf", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--h", dest="gap", type=_parse_gap, default=None)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--r", type=int, default=None,
                   help="alphabet size (default: max symbol + 1)")
    p.add_argument("--stage-a", dest="stage_a", type=float, default=0.0)
    p.add_argument("--stage-b", dest="stage_b", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(fn=_cmd_obfuscate)

    p = sub.add_parser("detect", help="search traces for a pattern")
    p.add_argument("--trace-file", required=True)
    p.add_argument("--pattern", required=True,
                   help="comma- or space-separated symbols")
    p.add_argument("--h", dest="gap", type=_parse_gap, default=1)
    p.set_defaults(fn=_cmd_detect)

    p = sub.add_parser("bounds", help="evaluate closed-form guarantees")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--h", dest="gap", type=int, default=1)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--which", choices=("sbu", "slsbu", "lov", "schedule"),
                   required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.set_defaults(fn=_cmd_bounds)

    p = sub.add_parser("simulate", help="run an experiment spec file")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("ingest", help="encode a raw event CSV into traces")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--min-interval", type=float, default=600.0)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--min-length", type=int, default=None)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(fn=_cmd_ingest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"seqobf: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"seqobf: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
