"""Command line entrypoint.

Subcommands cover the whole workflow: `run` performs a search and persists a
run directory, `eval` re-scores a stored candidate on chosen instances, `auc`
recomputes fitness from trace files, `report` renders cross-run tables and
figures, `simmatrix` and `attn` export lineage and attribution CSVs, and
`bench list` shows the built-in algorithm set.

Exit codes: 0 success, 1 runtime failure, 2 usage error. A JSON config file
(`--config`) supplies defaults; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from statistics import fmean
from types import SimpleNamespace

from . import bench as benchmod
from .analysis import (
    aggregate_relevance,
    component_relevance,
    failure_rate,
    load_relevance,
    report_table,
    similarity_matrix,
)
from .evaluation import read_trace, score_trace
from .llm import HttpChatClient, ProviderConfig, ReplaySession
from .problems import ProblemId
from .sandbox import CandidateSource, fitness
from .search import SearchConfig, run_search


class UsageError(Exception):
    """Bad invocation detected after argparse (missing required input)."""


def tool_version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:
        return "0+unknown"


def _parse_instances(text: str) -> tuple[int, ...]:
    try:
        parts = tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise UsageError(f"--instances must be a comma list of integers, got {text!r}")
    if not parts:
        raise UsageError("--instances must name at least one instance")
    return parts


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


# --- manifest ----------------------------------------------------------------


def write_manifest(out_dir: Path, config: SearchConfig, provider: dict) -> Path:
    path = out_dir / "manifest.json"
    payload = {
        "tool_version": tool_version(),
        "created_at": _now(),
        "finished_at": None,
        "provider": provider,
        "config": config.as_dict(),
        "status": "running",
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def finalize_manifest(path: Path, status: str) -> None:
    data = json.loads(path.read_text(encoding="utf-8"))
    if data["status"] != "running":
        raise RuntimeError(f"manifest at {path} was already finalized")
    data["status"] = status
    data["finished_at"] = _now()
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# --- llm wiring --------------------------------------------------------------


def build_client(spec: str):
    """`replay:PATH` for a recorded session, otherwise a provider JSON path."""
    if spec.startswith("replay:"):
        path = spec[len("replay:") :]
        return ReplaySession.load(path), {"kind": "replay", "session": path}, None
    try:
        data = json.loads(Path(spec).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"--llm: no such provider file: {spec}")
    known = {f.name for f in dataclasses.fields(ProviderConfig)}
    provider = ProviderConfig(**{k: v for k, v in data.items() if k in known})
    info = {
        "kind": "http",
        "name": provider.name,
        "endpoint_url": provider.endpoint_url,
        "model": provider.model,
    }
    return HttpChatClient(provider), info, provider.model


# --- run ---------------------------------------------------------------------


def cmd_run(args) -> int:
    file_cfg = {}
    if args.config:
        file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    llm_spec = args.llm or file_cfg.get("llm")
    if not llm_spec:
        raise UsageError("--llm is required (flag or config file)")
    client, provider_info, provider_model = build_client(llm_spec)

    values = {k: v for k, v in file_cfg.items() if k != "llm"}
    overrides = {
        "suite": args.suite,
        "function": args.function,
        "dim": args.dim,
        "instances": _parse_instances(args.instances) if args.instances else None,
        "eval_budget": args.eval_budget,
        "strategy": args.strategy.replace("-", "_") if args.strategy else None,
        "query_budget": args.query_budget,
        "q": args.q,
        "rng_seed": args.seed,
        "model": args.model,
        "timeout_s": args.timeout,
        "total_cap_s": args.total_cap,
        "workers": args.workers,
        "candidate_language": args.language,
        "bench_dir": args.bench_dir,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    if provider_model and "model" not in values:
        values["model"] = provider_model
    if "suite" not in values or "function" not in values:
        raise UsageError("--suite and --function are required (flag or config file)")
    try:
        config = SearchConfig.from_dict(values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = write_manifest(out, config, provider_info)
    try:
        result = run_search(config, client, out_dir=out)
    except BaseException:
        # keep the partial run directory for inspection
        finalize_manifest(manifest, "failed")
        raise
    finalize_manifest(manifest, "completed")
    print(
        f"run complete: incumbent t={result.incumbent.t} "
        f"mean_auc={result.incumbent.fitness.mean_auc} out={out}"
    )
    return 0


# --- eval --------------------------------------------------------------------


def _load_generation(run_dir: Path, t: int) -> CandidateSource:
    record = json.loads(
        (run_dir / "generations" / f"{t:03d}.json").read_text(encoding="utf-8")
    )
    manifest = record["source"]
    if manifest is None:
        raise RuntimeError(f"generation {t} failed to parse and has no source")
    text = (run_dir / "generations" / manifest["file"]).read_text(encoding="utf-8")
    if text.endswith("\n"):
        text = text[:-1]
    return CandidateSource(
        language_tag=manifest["language_tag"],
        source_text=text,
        entry_name=manifest["entry_name"],
    )


def cmd_eval(args) -> int:
    run_dir = Path(args.run_dir)
    config = SearchConfig.from_dict(
        json.loads((run_dir / "config.json").read_text(encoding="utf-8"))
    )
    if args.generation is not None:
        t = args.generation
    else:
        result = json.loads((run_dir / "result.json").read_text(encoding="utf-8"))
        t = result["incumbent_t"]
    source = _load_generation(run_dir, t)
    instances = _parse_instances(args.instances) if args.instances else config.instances
    budget = args.eval_budget if args.eval_budget is not None else config.resolved_eval_budget
    timeout = args.timeout if args.timeout is not None else config.timeout_s
    id_base = ProblemId(
        suite=config.suite, function=config.function, instance=0, dim=config.resolved_dim
    )

    sink = None
    if args.traces_out:
        traces_dir = Path(args.traces_out)
        traces_dir.mkdir(parents=True, exist_ok=True)

        def sink(instance, trace, status):
            if trace is None:
                return
            from .evaluation import write_trace

            write_trace(traces_dir / f"{t:03d}_inst{instance}.jsonl", trace)

    report = fitness(
        source,
        id_base,
        instances=instances,
        budget=budget,
        timeout_s=timeout,
        total_cap_s=config.total_cap_s,
        workers=config.workers,
        trace_sink=sink,
    )
    lines = ["instance,auc,status"]
    for score in report.per_instance:
        lines.append(f"{score.problem.instance},{score.auc},{score.status}")
    lines.append(f"mean,{report.mean_auc},")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


# --- auc ---------------------------------------------------------------------


def cmd_auc(args) -> int:
    values = []
    lines = ["trace,auc"]
    for path in args.traces:
        value = score_trace(read_trace(path), grid_count=args.grid_count)
        values.append(value)
        lines.append(f"{path},{value}")
    # same mean as the fitness report: plain sum over the given order
    lines.append(f"mean,{sum(values) / len(values)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


# --- report ------------------------------------------------------------------


def _result_view(result_data: dict):
    records = [
        SimpleNamespace(
            failure=row["failure"],
            fitness=SimpleNamespace(
                per_instance=tuple(
                    SimpleNamespace(status=p["status"]) for p in row["per_instance"]
                )
            ),
        )
        for row in result_data["records"]
    ]
    return SimpleNamespace(records=records)


def cmd_report(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    runs = []
    for raw in args.run_dirs:
        run_dir = Path(raw)
        config = json.loads((run_dir / "config.json").read_text(encoding="utf-8"))
        result = json.loads((run_dir / "result.json").read_text(encoding="utf-8"))
        problem = f"{config['suite']}:f{config['function']}"
        runs.append((run_dir.name, config["strategy"], problem, result))

    # repeated runs of one approach on one problem average out
    grouped: dict[str, dict[str, list[float]]] = {}
    for _, strategy, problem, result in runs:
        grouped.setdefault(strategy, {}).setdefault(problem, []).append(
            result["incumbent_mean_auc"]
        )
    table = report_table(
        {
            strategy: {problem: fmean(vals) for problem, vals in problems.items()}
            for strategy, problems in grouped.items()
        }
    )
    (out / "table.csv").write_text(table.to_csv(), encoding="utf-8")

    with (out / "failures.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "strategy", "problem", "failure_rate"])
        for name, strategy, problem, result in runs:
            writer.writerow([name, strategy, problem, failure_rate(_result_view(result))])

    with (out / "convergence.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "t", "best_auc"])
        for name, _, _, result in runs:
            for t, value in enumerate(result["best_so_far_series"], start=1):
                writer.writerow([name, t, value])

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    for name, _, _, result in runs:
        series = result["best_so_far_series"]
        ax.plot(range(1, len(series) + 1), series, label=name)
    ax.set_xlabel("query")
    ax.set_ylabel("best AUC so far")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(out / "convergence.png", dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(table.approaches, [table.mean[a] for a in table.approaches])
    ax.set_ylabel("mean normalized AUC")
    fig.tight_layout()
    fig.savefig(out / "mean_auc.png", dpi=120)
    plt.close(fig)

    print(f"report written to {out}")
    return 0


# --- simmatrix ---------------------------------------------------------------


def cmd_simmatrix(args) -> int:
    gen_dir = Path(args.run_dir) / "generations"
    files = sorted(gen_dir.glob("*.src"))
    if len(files) < 2:
        raise RuntimeError(f"need at least two stored sources in {gen_dir}")
    labels = [f.stem for f in files]
    codes = [f.read_text(encoding="utf-8") for f in files]
    matrix = similarity_matrix(codes)
    with Path(args.out).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + labels)
        for i, row in enumerate(matrix.rows()):
            writer.writerow(
                [labels[i]] + ["" if v is None else f"{v:.6f}" for v in row]
            )
    print(f"similarity matrix ({matrix.size} codes) written to {args.out}")
    return 0


# --- attn --------------------------------------------------------------------


def cmd_attn(args) -> int:
    matrix = load_relevance(args.matrix)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scores = aggregate_relevance(matrix)
    with (out / "tokens.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "token", "relevance"])
        for i, (token, value) in enumerate(zip(matrix.input_tokens, scores)):
            writer.writerow([i, token, f"{value:.6f}"])
    if matrix.spans:
        components = component_relevance(matrix)
        with (out / "components.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["component", "mean_relevance"])
            for name, value in components.items():
                writer.writerow([name, f"{value:.6f}"])
    print(f"relevance tables written to {out}")
    return 0


# --- bench -------------------------------------------------------------------


def cmd_bench_list(args) -> int:
    suites = [args.suite] if args.suite else ["pbo", "bbob"]
    for suite in suites:
        for name in benchmod.bench_names(suite):
            print(f"{suite} {name}: {benchmod.BENCH_DESCRIPTIONS[name]}")
    return 0


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="benchevo",
        description="evolve and analyze black-box optimization algorithms",
    )
    parser.add_argument("--version", action="version", version=tool_version())
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one search and persist a run directory")
    run_p.add_argument("--suite", choices=("pbo", "bbob"))
    run_p.add_argument("--function", type=int, help="function id within the suite")
    run_p.add_argument("--dim", type=int)
    run_p.add_argument("--instances", help="comma list, e.g. 1,2,3,4,5")
    run_p.add_argument(
        "--strategy", choices=("bag", "refine-only", "create-only"), default=None
    )
    run_p.add_argument("--llm", help="replay:PATH or a provider JSON file")
    run_p.add_argument("--query-budget", dest="query_budget", type=int)
    run_p.add_argument("--q", type=int, help="benchmark injection period")
    run_p.add_argument("--seed", type=int, help="search rng seed")
    run_p.add_argument("--eval-budget", dest="eval_budget", type=int)
    run_p.add_argument("--model")
    run_p.add_argument("--timeout", type=float, help="per-instance seconds")
    run_p.add_argument("--total-cap", dest="total_cap", type=float)
    run_p.add_argument("--workers", type=int)
    run_p.add_argument("--language", help="candidate language tag")
    run_p.add_argument("--bench-dir", dest="bench_dir")
    run_p.add_argument("--config", help="JSON config file; flags override it")
    run_p.add_argument("--out", required=True)
    run_p.set_defaults(func=cmd_run)

    eval_p = sub.add_parser("eval", help="re-score a stored candidate")
    eval_p.add_argument("run_dir")
    eval_p.add_argument("--generation", type=int, help="iteration to load (default: incumbent)")
    eval_p.add_argument("--instances", help="comma list, e.g. 6,7,8,9,10")
    eval_p.add_argument("--eval-budget", dest="eval_budget", type=int)
    eval_p.add_argument("--timeout", type=float)
    eval_p.add_argument("--traces-out", dest="traces_out")
    eval_p.add_argument("--out", help="also write the CSV here")
    eval_p.set_defaults(func=cmd_eval)

    auc_p = sub.add_parser("auc", help="recompute AUC from trace files")
    auc_p.add_argument("traces", nargs="+")
    auc_p.add_argument("--grid-count", dest="grid_count", type=int, default=100)
    auc_p.add_argument("--out", help="also write the CSV here")
    auc_p.set_defaults(func=cmd_auc)

    report_p = sub.add_parser("report", help="tables, failure rates and figures")
    report_p.add_argument("run_dirs", nargs="+")
    report_p.add_argument("--out", required=True)
    report_p.set_defaults(func=cmd_report)

    sim_p = sub.add_parser("simmatrix", help="lineage similarity matrix as CSV")
    sim_p.add_argument("run_dir")
    sim_p.add_argument("--out", required=True)
    sim_p.set_defaults(func=cmd_simmatrix)

    attn_p = sub.add_parser("attn", help="aggregate an attribution matrix to CSV")
    attn_p.add_argument("matrix", help="JSON or CSV matrix file")
    attn_p.add_argument("--out", required=True)
    attn_p.set_defaults(func=cmd_attn)

    bench_p = sub.add_parser("bench", help="inspect the built-in algorithm set")
    bench_sub = bench_p.add_subparsers(dest="bench_command", required=True)
    list_p = bench_sub.add_parser("list")
    list_p.add_argument("--suite", choices=("pbo", "bbob"))
    list_p.set_defaults(func=cmd_bench_list)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
