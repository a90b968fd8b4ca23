"""Elitist (1+1) search over algorithm source code, driven by an LLM.

One engine runs three strategies. The full "bag" strategy evaluates a
preferred benchmark algorithm as the starting incumbent, asks the LLM to
refine it once, then iterates: every q-th query re-injects one benchmark
algorithm's code (cycling through the set without replacement), every other
query flips a fair coin between refining the incumbent and creating a fresh
algorithm. Candidates that outscore the incumbent replace it; everything else
is recorded and discarded. refine_only and create_only pin the action instead
of scheduling it.

Every run can be persisted to a directory that is byte-reproducible given the
same recorded LLM session and rng seed: config.json, per-iteration candidate
records and sources, per-instance trace files, the LLM exchange log, and a
result summary.
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from . import bench as benchmod
from . import prompts, sandbox
from .evaluation import RunTrace
from .llm import ChatRequest, ProviderRefusal, request_digest
from .problems import ProblemId
from .prompts import PromptContext, ResponseFormatError
from .sandbox import CandidateSource, FitnessReport

STRATEGIES = ("bag", "refine_only", "create_only")

# Per-suite defaults for the inner evaluation loop.
SUITE_EVAL_BUDGETS = {"pbo": 1_000_000, "bbob": 10_000}
SUITE_DEFAULT_DIMS = {"pbo": 100, "bbob": 5}

SEED_ITERATION = 0


@dataclass(frozen=True)
class Action:
    kind: str  # "refine_best" | "create" | "refine_bench" | "seed"
    bench_index: int | None = None

    def as_dict(self) -> dict:
        return {"kind": self.kind, "bench_index": self.bench_index}


@dataclass
class BenchCycle:
    """Uniform draws without replacement; refills with a fresh permutation."""

    size: int
    rng: random.Random
    remaining: list[int] = field(default_factory=list)

    def next(self) -> int:
        if self.size < 1:
            raise ValueError("empty bench set")
        if not self.remaining:
            self.remaining = self.rng.sample(range(self.size), self.size)
        return self.remaining.pop(0)


def next_action(t: int, q: int, rng: random.Random, cycle: BenchCycle) -> Action:
    """Schedule for the bag strategy, from the second query on."""
    if t % q == 0:
        return Action("refine_bench", cycle.next())
    if rng.random() < 0.5:
        return Action("refine_best")
    return Action("create")


def accept(challenger: FitnessReport, incumbent: FitnessReport) -> bool:
    return challenger.mean_auc > incumbent.mean_auc


@dataclass(frozen=True)
class SearchConfig:
    suite: str
    function: int
    dim: int | None = None
    instances: tuple[int, ...] = sandbox.DEFAULT_INSTANCES
    eval_budget: int | None = None
    strategy: str = "bag"
    query_budget: int = 100
    q: int = 10
    rng_seed: int = 0
    candidate_language: str = "python"
    model: str = "unset"
    timeout_s: float = sandbox.DEFAULT_TIMEOUT_S
    total_cap_s: float = sandbox.DEFAULT_TOTAL_CAP_S
    workers: int = 1
    bench_dir: str | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if self.query_budget < 1:
            raise ValueError("query_budget must be >= 1")
        if not self.instances:
            raise ValueError("instances must be non-empty")
        if self.suite not in SUITE_EVAL_BUDGETS:
            raise ValueError(f"unknown suite {self.suite!r}")

    @property
    def resolved_dim(self) -> int:
        return self.dim if self.dim is not None else SUITE_DEFAULT_DIMS[self.suite]

    @property
    def resolved_eval_budget(self) -> int:
        if self.eval_budget is not None:
            return self.eval_budget
        return SUITE_EVAL_BUDGETS[self.suite]

    @property
    def suite_task(self) -> str:
        return f"{self.suite}_task"

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["instances"] = list(self.instances)
        out["dim"] = self.resolved_dim
        out["eval_budget"] = self.resolved_eval_budget
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SearchConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        kwargs = {k: v for k, v in data.items() if k in known}
        if "instances" in kwargs:
            kwargs["instances"] = tuple(kwargs["instances"])
        return cls(**kwargs)


@dataclass
class CandidateRecord:
    t: int
    action: Action
    name: str
    description: str
    source: CandidateSource | None
    fitness: FitnessReport
    accepted: bool
    failure: str | None = None

    def summary_dict(self) -> dict:
        return {
            "t": self.t,
            "action": self.action.as_dict(),
            "name": self.name,
            "description": self.description,
            "accepted": self.accepted,
            "mean_auc": self.fitness.mean_auc,
            "per_instance": [
                {"problem": s.problem.as_dict(), "auc": s.auc, "status": s.status}
                for s in self.fitness.per_instance
            ],
            "failure": self.failure,
        }


@dataclass
class SearchResult:
    seed_record: CandidateRecord
    records: list[CandidateRecord]
    incumbent: CandidateRecord
    best_so_far_series: list[float]

    def as_dict(self) -> dict:
        return {
            "seed": self.seed_record.summary_dict(),
            "records": [r.summary_dict() for r in self.records],
            "incumbent_t": self.incumbent.t,
            "incumbent_mean_auc": self.incumbent.fitness.mean_auc,
            "best_so_far_series": self.best_so_far_series,
        }


class _RunDir:
    """Everything the audit trail needs, or a no-op when out_dir is None."""

    def __init__(self, out_dir: str | Path | None):
        self.root = Path(out_dir) if out_dir is not None else None
        if self.root is not None:
            (self.root / "generations").mkdir(parents=True, exist_ok=True)
            (self.root / "traces").mkdir(parents=True, exist_ok=True)

    def write_config(self, config: SearchConfig) -> None:
        if self.root is None:
            return
        text = json.dumps(config.as_dict(), indent=2, sort_keys=True) + "\n"
        (self.root / "config.json").write_text(text, encoding="utf-8")

    def write_record(self, record: CandidateRecord) -> None:
        if self.root is None:
            return
        payload = record.summary_dict()
        if record.source is not None:
            payload["source"] = {
                "language_tag": record.source.language_tag,
                "entry_name": record.source.entry_name,
                "file": f"{record.t:03d}.src",
            }
            src_path = self.root / "generations" / f"{record.t:03d}.src"
            src_path.write_text(record.source.source_text + "\n", encoding="utf-8")
        else:
            payload["source"] = None
        path = self.root / "generations" / f"{record.t:03d}.json"
        path.write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    def trace_sink(self, t: int, config: SearchConfig):
        if self.root is None:
            return None

        def sink(instance: int, trace: RunTrace | None, status: str) -> None:
            if trace is None:
                # failed before the first evaluation; keep an empty trace so
                # the directory still accounts for every instance run
                trace = RunTrace(
                    problem=ProblemId(
                        suite=config.suite,
                        function=config.function,
                        instance=instance,
                        dim=config.resolved_dim,
                    ),
                    run_seed=instance,
                    budget=config.resolved_eval_budget,
                    points=(),
                    total_evals=0,
                    status=status,
                )
            from .evaluation import write_trace

            write_trace(self.root / "traces" / f"{t:03d}_inst{instance}.jsonl", trace)

        return sink

    def log_exchange(self, request: ChatRequest, text: str, usage) -> None:
        if self.root is None:
            return
        row = {
            "request_digest": request_digest(request),
            "response_text": text,
            "usage": usage,
        }
        with (self.root / "session.jsonl").open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    def write_result(self, result: SearchResult) -> None:
        if self.root is None:
            return
        text = json.dumps(result.as_dict(), indent=2, sort_keys=True) + "\n"
        (self.root / "result.json").write_text(text, encoding="utf-8")


def _seed_for(config: SearchConfig, bench_set, seed):
    """Resolve the starting incumbent: (name, source, description)."""
    if seed is not None:
        name, source = seed
        description = benchmod.BENCH_DESCRIPTIONS.get(name, name.replace("_", " "))
        return name, source, description
    if config.strategy == "create_only":
        name, source = benchmod.load_plain_seed(config.suite, config.bench_dir)
    else:
        # "preferred" benchmark algorithm: first of the ordered set
        name, source = bench_set[0]
    return name, source, benchmod.BENCH_DESCRIPTIONS.get(name, name.replace("_", " "))


def run_search(
    config: SearchConfig,
    client,
    *,
    seed: tuple[str, CandidateSource] | None = None,
    bench_set: list[tuple[str, CandidateSource]] | None = None,
    runners: dict[str, list[str]] | None = None,
    out_dir: str | Path | None = None,
    templates: dict[str, str] | None = None,
) -> SearchResult:
    """Run one complete search; returns the audit trail and final incumbent.

    ``client`` is anything with ``chat(ChatRequest) -> ChatResponse``, either
    the HTTP client or a replay session. Candidate-level problems (unparsable
    responses, crashing candidates) become records with fitness 0;
    environment-level problems (spawn failures, auth, exhausted replay)
    propagate.
    """
    if bench_set is None:
        bench_set = benchmod.load_bench_set(config.suite, config.bench_dir)
    if config.strategy in ("bag", "refine_only") and not bench_set:
        raise ValueError("bench_set must be non-empty for bag/refine_only")

    rundir = _RunDir(out_dir)
    rundir.write_config(config)
    rng = random.Random(config.rng_seed)
    cycle = BenchCycle(size=len(bench_set), rng=rng)
    id_base = ProblemId(
        suite=config.suite,
        function=config.function,
        instance=0,
        dim=config.resolved_dim,
    )
    tmpl = templates if templates is not None else prompts.load_templates()

    def evaluate(source: CandidateSource, t: int) -> FitnessReport:
        return sandbox.fitness(
            source,
            id_base,
            instances=config.instances,
            budget=config.resolved_eval_budget,
            timeout_s=config.timeout_s,
            total_cap_s=config.total_cap_s,
            runners=runners,
            workers=config.workers,
            trace_sink=rundir.trace_sink(t, config),
        )

    seed_name, seed_source, seed_description = _seed_for(config, bench_set, seed)
    seed_fitness = evaluate(seed_source, SEED_ITERATION)
    seed_record = CandidateRecord(
        t=SEED_ITERATION,
        action=Action("seed"),
        name=seed_source.entry_name,
        description=seed_description,
        source=seed_source,
        fitness=seed_fitness,
        accepted=True,
        failure=None,
    )
    rundir.write_record(seed_record)

    incumbent = seed_record
    records: list[CandidateRecord] = []
    series: list[float] = []

    for t in range(1, config.query_budget + 1):
        if t == 1:
            action = Action("create" if config.strategy == "create_only" else "refine_best")
        elif config.strategy == "refine_only":
            action = Action("refine_best")
        elif config.strategy == "create_only":
            action = Action("create")
        else:
            action = next_action(t, config.q, rng, cycle)

        if t == 1:
            population = ()
            parent = (seed_description, None, seed_source.source_text)
        else:
            score = round(incumbent.fitness.mean_auc, 4)
            population = ((incumbent.name, incumbent.description, score),)
            if action.kind == "refine_bench":
                bench_name, bench_source = bench_set[action.bench_index]
                parent = (
                    benchmod.BENCH_DESCRIPTIONS.get(
                        bench_name, bench_name.replace("_", " ")
                    ),
                    None,
                    bench_source.source_text,
                )
            else:
                parent = (
                    incumbent.description,
                    score,
                    incumbent.source.source_text,
                )

        ctx = PromptContext(
            suite_task=config.suite_task,
            action=action,
            population_summary=population,
            selected_parent=parent,
        )
        prompt = prompts.render(ctx, templates=tmpl)
        request = ChatRequest(model=config.model, messages=(("user", prompt),))
        try:
            response = client.chat(request)
            response_text = response.text
            usage = response.usage
        except ProviderRefusal as exc:
            response_text = ""
            usage = None
            failure_detail = f"provider: {exc}"
        else:
            failure_detail = None
        rundir.log_exchange(request, response_text, usage)

        if failure_detail is None:
            try:
                parsed = prompts.parse_response(
                    response_text, language_tag=config.candidate_language
                )
            except ResponseFormatError as exc:
                failure_detail = f"parse: {type(exc).__name__}: {exc}"

        if failure_detail is not None:
            record = CandidateRecord(
                t=t,
                action=action,
                name=f"rejected_{t:03d}",
                description="",
                source=None,
                fitness=FitnessReport.zero(),
                accepted=False,
                failure=failure_detail,
            )
        else:
            report = evaluate(parsed.code, t)
            accepted = accept(report, incumbent.fitness)
            record = CandidateRecord(
                t=t,
                action=action,
                name=parsed.code.entry_name,
                description=parsed.description,
                source=parsed.code,
                fitness=report,
                accepted=accepted,
            )
            if accepted:
                incumbent = record

        records.append(record)
        series.append(incumbent.fitness.mean_auc)
        rundir.write_record(record)

    assert incumbent.fitness.mean_auc >= seed_fitness.mean_auc
    result = SearchResult(
        seed_record=seed_record,
        records=records,
        incumbent=incumbent,
        best_so_far_series=series,
    )
    rundir.write_result(result)
    return result


def run_bag(config: SearchConfig, client, **kwargs) -> SearchResult:
    if config.strategy != "bag":
        config = dataclasses.replace(config, strategy="bag")
    return run_search(config, client, **kwargs)


def run_refine_only(
    config: SearchConfig, client, seed: tuple[str, CandidateSource] | None = None, **kwargs
) -> SearchResult:
    if config.strategy != "refine_only":
        config = dataclasses.replace(config, strategy="refine_only")
    return run_search(config, client, seed=seed, **kwargs)


def run_create_only(
    config: SearchConfig, client, seed: tuple[str, CandidateSource] | None = None, **kwargs
) -> SearchResult:
    if config.strategy != "create_only":
        config = dataclasses.replace(config, strategy="create_only")
    return run_search(config, client, seed=seed, **kwargs)
