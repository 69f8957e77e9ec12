"""Command-line entry point: ``beepmis {generate,run,replay,verify,summarize,bench}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .channel import Trace, TraceError
from .experiment import (ConfigError, RunConfig, format_table, graph_from_spec, replay,
                         run_batch, summarize)
from .graph import GraphError, load_edge_list, save_edge_list
from .verifier import verify

EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2


def _kv(items: list[str]) -> dict:
    out = {}
    for item in items:
        key, sep, text = item.partition("=")
        if not sep:
            raise GraphError(f"expected key=value, got {item!r}")
        try:
            out[key] = json.loads(text)
        except json.JSONDecodeError:
            out[key] = text
    return out


def cmd_generate(args) -> int:
    g = graph_from_spec(args.generator, _kv(args.params))
    text = save_edge_list(g)
    if args.output:
        Path(args.output).write_text(text)
        print(f"wrote {args.output}: n={g.n} m={len(g.edges())} max_degree={g.max_degree()}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _load_config(args) -> RunConfig:
    overrides = list(args.set or [])
    for flag, path in (("trials", "trials"), ("seed", "seed"), ("workers", "workers"),
                       ("out", "output.dir"), ("trace", "trace")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides.append(f"{path}={json.dumps(value)}")
    return RunConfig.load(args.config, overrides)


def cmd_run(args) -> int:
    cfg = _load_config(args)
    batch = run_batch(cfg)
    agg = batch.aggregate
    print(f"config {agg['config_hash']}: {agg['trials']} trials, protocol={agg['protocol']}, "
          f"Delta={agg['delta']}, I={agg['interval']}, R={agg['rounds']}")
    print(f"  violation trials: {agg['violation_trials']} "
          f"(independence {agg['independence_violation_trials']}, "
          f"maximality {agg['maximality_violations']}, temporal {agg['temporal_violations']}, "
          f"undecided {agg['undecided_nodes']})")
    print(f"  median decision {agg['unit']}: {agg['median_decision_slot']}, "
          f"within budget: {agg['fraction_within_budget']}")
    if "good_node_frequency" in agg:
        print(f"  good-node frequency: {agg['good_node_frequency']:.4f} "
              f"(analytic floor {agg['good_node_analytic_floor']:.4f})")
    if "target" in agg:
        print(f"  target node {agg['target']['node']}: decided within budget in "
              f"{agg['target']['decided_within_budget_rate']:.3f} of trials")
    for f in agg["failures"]:
        print(f"  trial {f['trial']} failed: {f['error']}", file=sys.stderr)
    print(f"  wrote {batch.csv_path} and {batch.json_path}")
    return EXIT_OK if batch.ok else EXIT_VIOLATION


def cmd_replay(args) -> int:
    cfg = RunConfig.load(args.config, list(args.set or []))
    res = replay(cfg, args.seed, args.expect_hash)
    if res.trace_text is None:
        print("config has trace=none; nothing to write (use --set trace=\"full\")", file=sys.stderr)
    elif args.trace:
        Path(args.trace).write_text(res.trace_text)
    else:
        sys.stdout.write(res.trace_text)
    print(json.dumps(res.report, sort_keys=True), file=sys.stderr)
    return EXIT_OK if res.report["ok"] else EXIT_VIOLATION


def cmd_verify(args) -> int:
    trace = Trace.from_jsonl(Path(args.trace).read_text())
    g = load_edge_list(Path(args.graph).read_text()) if args.graph else trace.graph()
    report = verify(g, trace).to_dict()
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.json:
        Path(args.json).write_text(text + "\n")
    print(text)
    return EXIT_OK if report["ok"] else EXIT_VIOLATION


def cmd_summarize(args) -> int:
    rows = summarize(args.files)
    print(format_table(rows))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import main as bench_main

    bench_main(["--repeat", str(args.repeat)])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="beepmis", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a graph in edge-list format")
    g.add_argument("generator")
    g.add_argument("params", nargs="*", help="generator arguments as key=value")
    g.add_argument("-o", "--output")
    g.set_defaults(fn=cmd_generate)

    r = sub.add_parser("run", help="run a seeded batch from a JSON config")
    r.add_argument("config")
    r.add_argument("--set", action="append", metavar="PATH=VALUE",
                   help="override a config field, e.g. params.eps=0.1")
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--trace", choices=["none", "decisions", "full"])
    r.add_argument("--out", help="output directory")
    r.set_defaults(fn=cmd_run)

    rp = sub.add_parser("replay", help="rerun one trial from its recorded seed")
    rp.add_argument("config")
    rp.add_argument("--seed", type=int, required=True, help="trial_seed column of results.csv")
    rp.add_argument("--expect-hash", help="config_hash column of results.csv")
    rp.add_argument("--set", action="append", metavar="PATH=VALUE")
    rp.add_argument("--trace", help="write the trace here instead of stdout")
    rp.set_defaults(fn=cmd_replay)

    v = sub.add_parser("verify", help="re-check a saved trace")
    v.add_argument("trace")
    v.add_argument("--graph", help="edge-list file (default: graph embedded in the trace)")
    v.add_argument("--json", help="also write the report here")
    v.set_defaults(fn=cmd_verify)

    s = sub.add_parser("summarize", help="tabulate aggregate.json files")
    s.add_argument("files", nargs="*")
    s.add_argument("--csv")
    s.set_defaults(fn=cmd_summarize)

    b = sub.add_parser("bench", help="compare compiled and pure-Python kernels")
    b.add_argument("--repeat", type=int, default=3)
    b.set_defaults(fn=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (ConfigError, GraphError, TraceError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
