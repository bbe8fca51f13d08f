"""Command-line entry point: ``orgsim {validate,run,compare,sweep,spof}``.

Exit status is 0 on success, 1 for domain or validation errors and 2 for
I/O or usage errors. All JSON and CSV output is byte-deterministic for a
given scenario file and set of flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .engine import RunConfig, run, trace_hash
from .metrics import (
    build_report,
    bubbles_csv,
    congestion_csv,
    controllability_profile,
    root_congestion,
    spof_analysis,
    spof_csv,
)
from .protocols import MODES
from .scenario import ScenarioError, parse_scenario

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2
DEFAULT_SEED = 0
COMPARE_COLUMNS = ("success_rate", "mean_latency", "mismatch_total", "max_concurrent_bubbles", "root_congestion")
SWEEP_METRICS = COMPARE_COLUMNS + ("conflict_count", "root_traceability", "qoe_total")


class CliError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return parse_scenario(text)
    except ScenarioError as exc:
        raise CliError(EXIT_DOMAIN, "\n".join(f"{path}: {issue}" for issue in exc.issues)) from None


def _modes(raw: str) -> list:
    modes = [m.strip() for m in raw.split(",") if m.strip()]
    bad = [m for m in modes if m not in MODES]
    if bad or not modes:
        raise CliError(EXIT_DOMAIN, f"unknown mode(s) {', '.join(bad) or '(none)'}; choose from {', '.join(MODES)}")
    return modes


def _config(spec, mode=None, seed=DEFAULT_SEED, horizon=None) -> RunConfig:
    try:
        return RunConfig.from_scenario(spec, mode=mode, seed=seed, horizon=horizon)
    except ValueError as exc:
        raise CliError(EXIT_DOMAIN, str(exc)) from None


def _write(out: Path, name: str, text: str) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {out / name}: {exc.strerror or exc}") from None


def simulate(spec, config: RunConfig) -> tuple:
    """Run once and return ``(trace, report)``."""
    trace = run(spec, config)
    report = build_report(spec.organizations, trace, spec.qoe_weights, spec.static_force_factors)
    return trace, report


def summary_row(spec, config: RunConfig) -> dict:
    _, report = simulate(spec, config)
    return {
        "mode": config.mode,
        "success_rate": report.success_rate,
        "mean_latency": report.mean_latency,
        "mismatch_total": report.mismatch_total,
        "max_concurrent_bubbles": report.max_concurrent_bubbles,
        "root_congestion": root_congestion(report, spec.organizations),
        "conflict_count": report.conflict_count,
        "root_traceability": report.root_traceability,
        "qoe_total": report.qoe.total,
    }


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def text_table(rows: list, columns) -> str:
    header = ["mode", *columns]
    body = [[r["mode"], *(_cell(r[c]) for c in columns)] for r in rows]
    widths = [max(len(str(x)) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(str(x).rjust(w) if i else str(x).ljust(w) for i, (x, w) in enumerate(zip(line, widths)))
             for line in [header, *body]]
    return "\n".join(lines) + "\n"


# -- subcommands ------------------------------------------------------------


def cmd_validate(args) -> int:
    spec = _load(args.scenario)
    n_nodes = sum(len(o.nodes) for o in spec.organizations)
    n_actors = sum(len(o.actors) for o in spec.organizations)
    print(f"{args.scenario}: ok ({len(spec.organizations)} organizations, {n_nodes} nodes, {n_actors} actors)",
          file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    spec = _load(args.scenario)
    config = _config(spec, args.mode, args.seed, args.horizon)
    trace, report = simulate(spec, config)
    digest = trace_hash(trace)
    _, timeline, _ = controllability_profile(trace)
    doc = {
        "run": {
            "mode": config.mode,
            "seed": config.seed,
            "horizon": config.horizon,
            "scenario_digest": trace.scenario_digest,
            "trace_hash": digest,
            "hash_algorithm": "sha256",
        },
        "metrics": report.as_dict(),
    }
    out = Path(args.out)
    _write(out, "trace.jsonl", trace.to_jsonl())
    _write(out, "report.json", json.dumps(doc, indent=2) + "\n")
    _write(out, "congestion.csv", congestion_csv(report.congestion, spec.organizations))
    _write(out, "bubbles.csv", bubbles_csv(timeline))
    if args.format == "json":
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        print(f"trace_hash {digest}")
        print(f"success_rate {_cell(report.success_rate)}  mean_latency {_cell(report.mean_latency)}  "
              f"max_concurrent_bubbles {report.max_concurrent_bubbles}")
    return EXIT_OK


def cmd_compare(args) -> int:
    spec = _load(args.scenario)
    modes = _modes(args.modes)
    rows = [summary_row(spec, _config(spec, m, args.seed, args.horizon)) for m in modes]
    doc = {"seed": args.seed, "rows": rows}
    if args.out:
        out = Path(args.out)
        _write(out, "compare.json", json.dumps(doc, indent=2) + "\n")
        _write(out, "compare.txt", text_table(rows, COMPARE_COLUMNS))
    if args.format == "json":
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        sys.stdout.write(text_table(rows, COMPARE_COLUMNS))
    return EXIT_OK


def _sweep_job(job) -> dict:
    spec, config = job
    return summary_row(spec, config)


def sweep(spec, modes, n_seeds: int, horizon=None, parallel=None) -> list:
    """Per-mode mean/min/max of the summary metrics over seeds 0..n_seeds-1."""
    if n_seeds < 1:
        raise CliError(EXIT_DOMAIN, "--seeds must be >= 1")
    jobs = [(spec, _config(spec, m, s, horizon)) for m in modes for s in range(n_seeds)]
    if parallel is None:
        parallel = os.environ.get("ORGSIM_NO_PARALLEL") != "1" and len(jobs) > 1
    if parallel:
        with ProcessPoolExecutor() as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(j) for j in jobs]
    out = []
    for m in modes:
        mine = [r for r in rows if r["mode"] == m]
        for metric in SWEEP_METRICS:
            vals = np.array([r[metric] for r in mine if r[metric] is not None], dtype=float)
            if vals.size:
                out.append((m, metric, float(vals.mean()), float(vals.min()), float(vals.max()), int(vals.size)))
            else:
                out.append((m, metric, None, None, None, 0))
    return out


def sweep_csv(rows: list) -> str:
    lines = ["mode,metric,mean,min,max,count"]
    for mode, metric, mean, lo, hi, n in rows:
        cells = ["" if v is None else repr(v) for v in (mean, lo, hi)]
        lines.append(",".join([mode, metric, *cells, str(n)]))
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> int:
    spec = _load(args.scenario)
    modes = _modes(args.modes)
    text = sweep_csv(sweep(spec, modes, args.seeds, args.horizon))
    if args.out:
        _write(Path(args.out), "sweep.csv", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_spof(args) -> int:
    spec = _load(args.scenario)
    reports = {org.id: spof_analysis(org) for org in spec.organizations}
    doc = {oid: reports[oid].as_dict()["criticality"] for oid in sorted(reports)}
    as_json = json.dumps({"criticality": doc}, indent=2) + "\n"
    as_csv = spof_csv(reports)
    if args.out:
        _write(Path(args.out), "spof.json", as_json)
        _write(Path(args.out), "spof.csv", as_csv)
    sys.stdout.write(as_csv if args.format == "csv" else as_json)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orgsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a scenario file")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="simulate one mode and write trace and reports")
    p.add_argument("scenario")
    p.add_argument("--mode", default=None, help="override the scenario's run.mode")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--out", default="out")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run several modes on the same condition stream")
    p.add_argument("scenario")
    p.add_argument("--modes", default=",".join(MODES))
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="aggregate metrics over seeds 0..N-1")
    p.add_argument("scenario")
    p.add_argument("--modes", default=",".join(MODES))
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv",), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spof", help="single-point-of-failure criticality per node")
    p.add_argument("scenario")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_spof)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "mode", None) is not None and args.mode not in MODES:
        print(f"orgsim: unknown mode {args.mode!r}; choose from {', '.join(MODES)}", file=sys.stderr)
        return EXIT_DOMAIN
    try:
        return args.func(args)
    except CliError as exc:
        print(f"orgsim: {exc}", file=sys.stderr)
        return exc.status


if __name__ == "__main__":
    sys.exit(main())
