"""Seeded trial batches: config parsing, execution, result files, summaries."""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .beep_mis import ProtocolParams, run_beep_mis
from .channel import TRACE_SCHEMA, Decision, SlotRecord, Trace
from .coins import CoinSource, derive_seed, script_adversary
from .fastsim import simulate_beep_mis
from .graph import GENERATORS, Graph, GraphError, generate, load_edge_list, neighborhood
from .local_mis import run_local_mis
from .mac import MODES, MacParams, run_beep_mis_over_mac
from .verifier import (GoodNodeReport, Verdict, good_node_stats, interval_records,
                       termination_stats, verify)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
PROTOCOLS = ("beep", "local", "beep-over-mac")
TRACE_LEVELS = ("none", "decisions", "full")
ENGINES = ("fast", "reference")
CSV_FIELDS = ("schema_version", "config_hash", "trial", "trial_seed", "node", "decision",
              "decision_slot", "within_budget")
# config keys that do not change results
_UNHASHED = ("output", "workers", "backend")


class ConfigError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


DEFAULTS: dict[str, Any] = {
    "schema_version": SCHEMA_VERSION,
    "protocol": "beep",
    "params": {"eps": 0.2},
    "mac": None,
    "trials": 1,
    "seed": 0,
    "adversary": None,
    "trace": "none",
    "engine": "fast",
    "backend": None,
    "workers": 1,
    "output": {"dir": "results"},
}


@dataclass
class RunConfig:
    raw: dict[str, Any]
    base_dir: Path = field(default_factory=Path.cwd)

    @classmethod
    def from_dict(cls, data: dict[str, Any], base_dir: Path | None = None) -> "RunConfig":
        merged = copy.deepcopy(DEFAULTS)
        for key, value in data.items():
            merged[key] = copy.deepcopy(value)
        cfg = cls(merged, base_dir or Path.cwd())
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | os.PathLike, overrides: list[str] = ()) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON in {path}: {exc}") from None
        for item in overrides:
            apply_override(data, item)
        return cls.from_dict(data, path.parent)

    def __getitem__(self, key):
        return self.raw[key]

    @property
    def config_hash(self) -> str:
        body = {k: v for k, v in self.raw.items() if k not in _UNHASHED}
        text = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def validate(self) -> None:
        r = self.raw
        if r.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"expected {SCHEMA_VERSION}")
        if r["protocol"] not in PROTOCOLS:
            raise ConfigError("protocol", f"must be one of {PROTOCOLS}")
        if not isinstance(r["trials"], int) or r["trials"] < 1:
            raise ConfigError("trials", "must be an integer >= 1")
        if not isinstance(r["seed"], int):
            raise ConfigError("seed", "must be an integer")
        if r["trace"] not in TRACE_LEVELS:
            raise ConfigError("trace", f"must be one of {TRACE_LEVELS}")
        if r["engine"] not in ENGINES:
            raise ConfigError("engine", f"must be one of {ENGINES}")
        if not isinstance(r["workers"], int) or r["workers"] < 1:
            raise ConfigError("workers", "must be an integer >= 1")
        graph = r.get("graph")
        if not isinstance(graph, dict):
            raise ConfigError("graph", "required object with 'generator' or 'file'")
        if "file" in graph:
            f = self.resolve(graph["file"])
            if not f.exists():
                raise ConfigError("graph.file", f"no such file {f}")
        elif graph.get("generator") not in GENERATORS:
            raise ConfigError("graph.generator", f"must be one of {sorted(GENERATORS)}")
        params = r["params"]
        if not isinstance(params, dict) or "eps" not in params:
            raise ConfigError("params.eps", "required")
        try:
            self.params_for(max(1, params.get("delta_bound") or 1))
        except (TypeError, ValueError, AssertionError) as exc:
            raise ConfigError("params", str(exc)) from None
        if r["protocol"] == "beep-over-mac":
            mac = r.get("mac")
            if not isinstance(mac, dict) or "f_prog" not in mac:
                raise ConfigError("mac.f_prog", "required for beep-over-mac")
            if mac.get("mode", "adversarial") not in MODES:
                raise ConfigError("mac.mode", f"must be one of {MODES}")
            try:
                MacParams(mac["f_prog"], mac.get("f_ack"))
            except (TypeError, ValueError) as exc:
                raise ConfigError("mac", str(exc)) from None
        adv = r.get("adversary")
        if adv is not None:
            if not isinstance(adv, dict):
                raise ConfigError("adversary", "must be an object")
            if adv.get("script") not in ("min", "max"):
                raise ConfigError("adversary.script", "must be 'min' or 'max'")
            if ("nodes" in adv) == ("outside_2_hop_of" in adv):
                raise ConfigError("adversary", "give exactly one of 'nodes' or 'outside_2_hop_of'")

    def resolve(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path

    def params_for(self, delta: int) -> ProtocolParams:
        p = dict(self.raw["params"])
        p.setdefault("delta_bound", delta)
        if p["delta_bound"] is None:
            p["delta_bound"] = delta
        return ProtocolParams.from_dict(p)

    def graph_for(self, trial_seed: int) -> Graph:
        spec = dict(self.raw["graph"])
        if "file" in spec:
            return load_edge_list(self.resolve(spec["file"]).read_text())
        name = spec.pop("generator")
        if spec.get("seed") == "trial":
            spec["seed"] = trial_seed
        try:
            return generate(name, **spec)
        except TypeError as exc:
            raise ConfigError("graph", str(exc)) from None

    @property
    def output_dir(self) -> Path:
        return self.resolve(self.raw["output"]["dir"])


def apply_override(data: dict, item: str) -> None:
    """Apply ``a.b.c=value``; the value is parsed as JSON when possible."""
    if "=" not in item:
        raise ConfigError(item, "override must look like path=value")
    path, text = item.split("=", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    keys = path.split(".")
    node = data
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value


# -- single trial -------------------------------------------------------------------------

@dataclass
class TrialResult:
    trial: int
    seed: int
    n: int
    delta: int
    budget: int
    verdict: Verdict
    report: dict[str, Any]
    slots_run: int
    trace_text: str | None = None
    good: GoodNodeReport | None = None
    target: int | None = None
    error: str | None = None


def adversary_nodes(cfg: RunConfig, g: Graph) -> tuple[list[int], int | None]:
    adv = cfg.raw.get("adversary")
    if not adv:
        return [], None
    if "nodes" in adv:
        return sorted(int(v) for v in adv["nodes"]), adv.get("target")
    v = int(adv["outside_2_hop_of"])
    near = neighborhood(g, v, 2)
    return [u for u in range(g.n) if u not in near], v


def decisions_trace(g: Graph, verdict: Verdict, coins: CoinSource, params: dict,
                    slots_run: int, protocol: str, unit: str = "slot") -> Trace:
    """Decisions-only trace built from a verdict (same bytes as the engine's)."""
    by_slot: dict[int, list[tuple[int, Decision]]] = {}
    for v, (d, s) in enumerate(zip(verdict.decisions, verdict.slots)):
        if s is not None:
            by_slot.setdefault(s, []).append((v, d))
    # engine order within a slot: ascending node id
    records = [SlotRecord(slot=s, decisions=sorted(by_slot[s])) for s in sorted(by_slot)]
    header = {
        "schema": TRACE_SCHEMA, "unit": unit, "protocol": protocol, "n": g.n,
        "edges": [list(e) for e in g.edges()], "seed": coins.seed,
        "scripted": sorted(coins.scripts), "params": params, "verbosity": "decisions",
        "slots_run": slots_run,
        "truncated": any(d is Decision.UNDECIDED for d in verdict.decisions),
    }
    return Trace(header, records)


def run_trial(cfg: RunConfig, trial: int, seed: int | None = None) -> TrialResult:
    if seed is None:
        seed = derive_seed(cfg["seed"], trial)
    g = cfg.graph_for(seed)
    delta = g.max_degree()
    params = cfg.params_for(delta)
    coins = CoinSource(seed)
    scripted, target = adversary_nodes(cfg, g)
    if scripted:
        coins = script_adversary(coins, scripted, cfg["adversary"]["script"])
    level = cfg["trace"]
    protocol = cfg["protocol"]
    trace = None
    good = None

    if protocol == "local":
        budget = params.local_rounds
        cap = params.max_rounds or 10 * params.local_rounds
        trace = run_local_mis(g, coins, cap, verbosity="full" if level == "full" else "decisions",
                              params={**params.to_dict(), "local_rounds": budget})
        verdict = Verdict.from_trace(trace)
        slots_run = trace.slots_run
    elif protocol == "beep-over-mac":
        mac = cfg["mac"]
        budget = params.slot_budget
        trace, _ = run_beep_mis_over_mac(
            g, params, coins, MacParams(mac["f_prog"], mac.get("f_ack")),
            mac.get("mode", "adversarial"), mac.get("scheduler_seed", seed),
            verbosity="full" if level == "full" else "decisions")
        verdict = Verdict.from_trace(trace)
        slots_run = trace.slots_run
    elif level == "full" or cfg["engine"] == "reference":
        budget = params.slot_budget
        trace = run_beep_mis(g, params, coins, verbosity="full" if level == "full" else "decisions")
        verdict = Verdict.from_trace(trace)
        slots_run = trace.slots_run
        if level == "full":
            good = good_node_stats(g, interval_records(trace), params.interval)
    else:
        budget = params.slot_budget
        res = simulate_beep_mis(g, params, coins, record=level != "none",
                                backend=cfg.raw.get("backend"))
        verdict, slots_run = res.verdict, res.slots_run
        if level != "none":
            good = good_node_stats(g, res.records, params.interval)
            trace = decisions_trace(g, verdict, coins, params.to_dict(), slots_run, "beep")

    report = verify(g, trace if trace is not None else verdict).to_dict()
    text = trace.to_jsonl() if (trace is not None and level != "none") else None
    return TrialResult(trial, seed, g.n, delta, budget, verdict, report, slots_run, text, good, target)


def _safe_trial(args) -> TrialResult:
    cfg, trial = args
    try:
        return run_trial(cfg, trial)
    except Exception as exc:  # noqa: BLE001  (recorded per trial, batch continues)
        log.exception("trial %d failed", trial)
        seed = derive_seed(cfg["seed"], trial)
        return TrialResult(trial, seed, 0, 0, 0, Verdict([], []), {"ok": False}, 0,
                           error=f"{type(exc).__name__}: {exc}")


# -- batch ---------------------------------------------------------------------------------

@dataclass
class BatchResult:
    aggregate: dict[str, Any]
    csv_path: Path | None
    json_path: Path | None
    trials: list[TrialResult]

    @property
    def ok(self) -> bool:
        return self.aggregate["violation_trials"] == 0 and not self.aggregate["failures"]


def csv_rows(cfg: RunConfig, res: TrialResult) -> list[list[Any]]:
    h = cfg.config_hash
    if res.error:
        return [[SCHEMA_VERSION, h, res.trial, res.seed, -1, "ERROR", "", ""]]
    rows = []
    for v, (d, s) in enumerate(zip(res.verdict.decisions, res.verdict.slots)):
        rows.append([SCHEMA_VERSION, h, res.trial, res.seed, v, d.value,
                     "" if s is None else s, int(s is not None and s < res.budget)])
    return rows


def aggregate(cfg: RunConfig, results: list[TrialResult]) -> dict[str, Any]:
    ok = [r for r in results if not r.error]
    slots = [s for r in ok for s in r.verdict.slots if s is not None]
    nodes = sum(r.n for r in ok)
    within = sum(1 for r in ok for s in r.verdict.slots if s is not None and s < r.budget)
    delta = max((r.delta for r in ok), default=0)
    params = cfg.params_for(delta)
    local = cfg["protocol"] == "local"
    agg: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": cfg.config_hash,
        "protocol": cfg["protocol"],
        "unit": "round" if local else "slot",
        "eps": params.eps,
        "delta": delta,
        "interval": None if local else params.interval,
        "rounds": params.local_rounds if local else params.rounds,
        "budget": params.local_rounds if local else params.slot_budget,
        "trials": len(results),
        "nodes": nodes,
        "independence_violation_trials": sum(1 for r in ok if r.report["independence"]),
        "independence_violation_edges": sum(len(r.report["independence"]) for r in ok),
        "maximality_violations": sum(len(r.report["maximality"]) for r in ok),
        "temporal_violations": sum(len(r.report["temporal"]) for r in ok),
        "undecided_nodes": sum(len(r.report["undecided"]) for r in ok),
        "violation_trials": sum(1 for r in ok if not r.report["ok"]),
        "median_decision_slot": float(np.median(slots)) if slots else None,
        "p90_decision_slot": float(np.percentile(slots, 90)) if slots else None,
        "fraction_within_budget": within / nodes if nodes else None,
        "failures": [{"trial": r.trial, "seed": r.seed, "error": r.error}
                     for r in results if r.error],
        "trial_reports": [{"trial": r.trial, "seed": r.seed, **r.report} for r in ok],
    }
    agg["violation_rate"] = agg["independence_violation_trials"] / len(ok) if ok else None
    goods = [r.good for r in ok if r.good is not None]
    if goods:
        total = sum(g.total for g in goods)
        agg["good_node_frequency"] = sum(g.good for g in goods) / total if total else None
        agg["good_node_intervals"] = total
        agg["good_node_analytic_floor"] = goods[0].analytic_floor
    targets = [r for r in ok if r.target is not None]
    if targets:
        hits = sum(1 for r in targets
                   if r.verdict.slots[r.target] is not None and r.verdict.slots[r.target] < r.budget)
        agg["target"] = {"node": targets[0].target, "trials": len(targets),
                         "decided_within_budget_rate": hits / len(targets)}
    return agg


def run_batch(cfg: RunConfig, write: bool = True) -> BatchResult:
    jobs = [(cfg, t) for t in range(cfg["trials"])]
    if cfg["workers"] > 1:
        with ProcessPoolExecutor(cfg["workers"]) as pool:
            results = list(pool.map(_safe_trial, jobs))
    else:
        results = [_safe_trial(j) for j in jobs]
    agg = aggregate(cfg, results)
    csv_path = json_path = None
    if write:
        out = cfg.output_dir
        out.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = out / "results.csv", out / "aggregate.json"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in results:
            w.writerows(csv_rows(cfg, r))
        csv_path.write_text(buf.getvalue())
        json_path.write_text(json.dumps(agg, indent=2, sort_keys=True) + "\n")
        (out / "config.json").write_text(json.dumps(cfg.raw, indent=2, sort_keys=True) + "\n")
        if cfg["trace"] != "none":
            tdir = out / "traces"
            tdir.mkdir(exist_ok=True)
            for r in results:
                if r.trace_text is not None:
                    (tdir / f"trial_{r.trial:05d}.jsonl").write_text(r.trace_text)
    return BatchResult(agg, csv_path, json_path, results)


def replay(cfg: RunConfig, trial_seed: int, expect_hash: str | None = None) -> TrialResult:
    """Rerun one trial from its recorded seed."""
    if expect_hash is not None and expect_hash != cfg.config_hash:
        raise ConfigError("config_hash", f"config hashes to {cfg.config_hash}, "
                                         f"results were produced by {expect_hash}")
    return run_trial(cfg, -1, seed=trial_seed)


# -- summaries --------------------------------------------------------------------------------

SUMMARY_COLUMNS = ("protocol", "eps", "delta", "interval", "rounds", "violation_rate",
                   "median_decision_slot", "fraction_within_budget")


def summarize(paths: list[str | os.PathLike]) -> list[dict[str, Any]]:
    if not paths:
        raise ValueError("summarize needs at least one aggregate file")
    rows = []
    for p in paths:
        data = json.loads(Path(p).read_text())
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"{p}: schema version {data.get('schema_version')!r}, "
                             f"expected {SCHEMA_VERSION}")
        rows.append({c: data.get(c) for c in SUMMARY_COLUMNS} | {"file": str(p)})
    return rows


def format_table(rows: list[dict[str, Any]], columns=SUMMARY_COLUMNS) -> str:
    def cell(x):
        if isinstance(x, float):
            return f"{x:.4g}"
        return "-" if x is None else str(x)

    table = [list(columns)] + [[cell(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(columns))]
    lines = ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in table]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def graph_from_spec(name: str, kwargs: dict[str, Any]) -> Graph:
    try:
        return generate(name, **kwargs)
    except TypeError as exc:
        raise GraphError(str(exc)) from None
