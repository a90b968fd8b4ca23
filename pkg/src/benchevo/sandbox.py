"""Isolated execution of candidate algorithms over a JSON-lines wire protocol.

Each run launches one child process. The harness sends an ``init`` line, the
child asks for evaluations with ``ask`` lines, the harness answers each with a
``tell`` (evaluating through a budget-enforcing monitor) and ends the run with
a ``stop``. Budget enforcement is server-side: a child can never obtain more
than ``budget`` tell responses, no matter what it sends.

Runner commands are looked up by the candidate's language tag in a registry of
argv templates, so new candidate languages plug in through configuration. The
"proto" runner executes the source directly (the source itself speaks the
protocol); a "python" runner is registered automatically when the
``benchevo_shim`` package is installed.
"""

from __future__ import annotations

import importlib.util
import json
import logging
import os
import queue
import resource
import signal
import subprocess
import sys
import tempfile
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from .evaluation import (
    STATUS_BUDGET,
    STATUS_CRASH,
    STATUS_PROTOCOL,
    STATUS_TARGET,
    STATUS_TIMEOUT,
    BudgetExhausted,
    Monitor,
    RunTrace,
    auc,
    log_time_grid,
)
from .problems import (
    DomainViolation,
    ProblemId,
    ProblemInstance,
    make_instance,
    target_set,
)

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT_S = 600.0
DEFAULT_TOTAL_CAP_S = 3000.0
DEFAULT_INSTANCES = (1, 2, 3, 4, 5)

FAILURE_CRASH = "crash"
FAILURE_TIMEOUT = "timeout"
FAILURE_PROTOCOL = "protocol_violation"

_FAILURE_TO_STATUS = {
    FAILURE_CRASH: STATUS_CRASH,
    FAILURE_TIMEOUT: STATUS_TIMEOUT,
    FAILURE_PROTOCOL: STATUS_PROTOCOL,
}

_STDERR_TAIL_CHARS = 4000
_STOP_GRACE_S = 1.0


class RunnerMissing(LookupError):
    """No launcher registered for the candidate's language tag."""


class SpawnFailure(RuntimeError):
    """The runner process could not be started (environment problem)."""


@dataclass(frozen=True)
class CandidateSource:
    language_tag: str
    source_text: str
    entry_name: str

    def __post_init__(self):
        if not self.source_text:
            raise ValueError("source_text must be non-empty")
        if not self.entry_name.isidentifier():
            raise ValueError(f"entry_name is not an identifier: {self.entry_name!r}")


@dataclass(frozen=True)
class RunFailure:
    kind: str  # crash | timeout | protocol_violation
    detail: str
    partial_trace: RunTrace | None = None


@dataclass(frozen=True)
class RunOutcome:
    trace: RunTrace | None = None
    failure: RunFailure | None = None

    def __post_init__(self):
        if (self.trace is None) == (self.failure is None):
            raise ValueError("exactly one of trace/failure must be set")

    @property
    def ok(self) -> bool:
        return self.trace is not None

    @property
    def status(self) -> str:
        if self.trace is not None:
            return self.trace.status
        return _FAILURE_TO_STATUS[self.failure.kind]


@dataclass(frozen=True)
class InstanceScore:
    problem: ProblemId
    auc: float
    status: str


@dataclass(frozen=True)
class FitnessReport:
    per_instance: tuple[InstanceScore, ...]
    mean_auc: float

    @classmethod
    def zero(cls) -> "FitnessReport":
        return cls(per_instance=(), mean_auc=0.0)


def default_runners() -> dict[str, list[str]]:
    """Built-in launcher templates by language tag.

    Placeholders: {python} the current interpreter, {source} the candidate
    file, {entry} the candidate's entry class name.
    """
    runners = {"proto": ["{python}", "-u", "{source}"]}
    if importlib.util.find_spec("benchevo_shim") is not None:
        runners["python"] = [
            "{python}",
            "-u",
            "-m",
            "benchevo_shim",
            "{source}",
            "{entry}",
        ]
    return runners


def build_command(template: list[str], source_path: Path, entry_name: str) -> list[str]:
    return [
        part.replace("{python}", sys.executable)
        .replace("{source}", str(source_path))
        .replace("{entry}", entry_name)
        for part in template
    ]


def _init_message(instance: ProblemInstance, budget: int, run_seed: int) -> dict:
    return {
        "type": "init",
        "dim": instance.id.dim,
        "budget": budget,
        "seed": run_seed,
        "domain": instance.domain,
        "lb": instance.lb,
        "ub": instance.ub,
        "y_opt": instance.y_opt,
        "orientation": instance.orientation,
    }


class _StderrTail(threading.Thread):
    def __init__(self, stream):
        super().__init__(daemon=True)
        self._stream = stream
        self._chunks: list[str] = []
        self._size = 0

    def run(self):
        try:
            for line in self._stream:
                self._chunks.append(line)
                self._size += len(line)
                while self._size > _STDERR_TAIL_CHARS and len(self._chunks) > 1:
                    self._size -= len(self._chunks.pop(0))
        except ValueError:
            pass

    def tail(self) -> str:
        return "".join(self._chunks)[-_STDERR_TAIL_CHARS:].strip()


class _LineReader(threading.Thread):
    _EOF = object()

    def __init__(self, stream):
        super().__init__(daemon=True)
        self._stream = stream
        self.lines: queue.Queue = queue.Queue()

    def run(self):
        try:
            for line in self._stream:
                self.lines.put(line)
        except ValueError:
            pass
        self.lines.put(self._EOF)


def _child_limits(timeout_s: float):
    cpu_cap = int(timeout_s) + 10

    def apply():
        try:
            resource.setrlimit(resource.RLIMIT_CPU, (cpu_cap, cpu_cap))
            resource.setrlimit(resource.RLIMIT_CORE, (0, 0))
        except (ValueError, OSError):
            pass

    return apply


def run_candidate(
    source: CandidateSource,
    instance: ProblemInstance,
    budget: int,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    *,
    run_seed: int = 0,
    runners: dict[str, list[str]] | None = None,
) -> RunOutcome:
    """Run one candidate on one instance under budget and timeout.

    Returns a RunOutcome holding either the finished trace or a failure
    record; environment-level launch problems raise SpawnFailure instead.
    """
    table = default_runners() if runners is None else runners
    if source.language_tag not in table:
        raise RunnerMissing(f"no runner for language tag {source.language_tag!r}")

    with tempfile.TemporaryDirectory(prefix="benchevo-run-") as tmp:
        source_path = Path(tmp) / "candidate.py"
        source_path.write_text(source.source_text, encoding="utf-8")
        argv = build_command(table[source.language_tag], source_path, source.entry_name)
        try:
            proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                bufsize=1,
                cwd=tmp,
                start_new_session=True,
                preexec_fn=_child_limits(timeout_s),
            )
        except OSError as exc:
            raise SpawnFailure(f"failed to launch {argv[0]}: {exc}") from exc
        try:
            return _drive_protocol(proc, source, instance, budget, timeout_s, run_seed)
        finally:
            _reap(proc)


def _send(proc, message: dict) -> bool:
    try:
        proc.stdin.write(json.dumps(message) + "\n")
        proc.stdin.flush()
        return True
    except (BrokenPipeError, OSError, ValueError):
        return False


def _drive_protocol(proc, source, instance, budget, timeout_s, run_seed) -> RunOutcome:
    mon = Monitor(instance, budget, run_seed=run_seed)
    stderr_tail = _StderrTail(proc.stderr)
    stderr_tail.start()
    reader = _LineReader(proc.stdout)
    reader.start()
    deadline = time.monotonic() + timeout_s

    def partial(status: str) -> RunTrace | None:
        return mon.finish(status) if mon.evals > 0 else None

    def failure(kind: str, detail: str) -> RunOutcome:
        status = _FAILURE_TO_STATUS[kind]
        extra = stderr_tail.tail()
        if extra and kind == FAILURE_CRASH:
            detail = f"{detail}\n{extra}" if detail else extra
        return RunOutcome(failure=RunFailure(kind, detail, partial(status)))

    def stop_and_trace(reason: str, status: str | None = None) -> RunOutcome:
        _send(proc, {"type": "stop", "reason": reason})
        _grace_wait(proc)
        return RunOutcome(trace=mon.finish(status))

    _send(proc, _init_message(instance, budget, run_seed))
    while True:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            return failure(FAILURE_TIMEOUT, f"no result within {timeout_s:g}s")
        try:
            item = reader.lines.get(timeout=remaining)
        except queue.Empty:
            return failure(FAILURE_TIMEOUT, f"no result within {timeout_s:g}s")
        if item is _LineReader._EOF:
            rc = proc.wait()
            if rc == 0:
                return RunOutcome(trace=mon.finish())
            return failure(FAILURE_CRASH, f"exit code {rc}")
        line = item.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            _send(proc, {"type": "stop", "reason": "protocol"})
            return failure(FAILURE_PROTOCOL, f"non-JSON line: {line[:200]!r}")
        if not isinstance(msg, dict) or msg.get("type") != "ask" or "x" not in msg:
            _send(proc, {"type": "stop", "reason": "protocol"})
            return failure(FAILURE_PROTOCOL, f"unexpected message: {line[:200]!r}")
        if mon.budget_left <= 0:
            return stop_and_trace("budget", STATUS_BUDGET)
        try:
            y = mon(msg["x"])
        except DomainViolation as exc:
            _send(proc, {"type": "stop", "reason": "protocol"})
            return failure(FAILURE_PROTOCOL, str(exc))
        except BudgetExhausted:
            return stop_and_trace("budget", STATUS_BUDGET)
        delivered = _send(
            proc,
            {"type": "tell", "y": y, "evals": mon.evals, "target_hit": mon.target_hit},
        )
        if mon.target_hit:
            return stop_and_trace("target", STATUS_TARGET)
        if not delivered:
            # child went away mid-tell; the EOF branch will classify it
            continue


def _grace_wait(proc) -> None:
    try:
        proc.stdin.close()
    except (BrokenPipeError, OSError, ValueError):
        pass
    try:
        proc.wait(timeout=_STOP_GRACE_S)
    except subprocess.TimeoutExpired:
        pass


def _reap(proc) -> None:
    """Terminate the child's whole process group; never leaves orphans."""
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        pass
    try:
        proc.wait(timeout=5)
    except subprocess.TimeoutExpired:  # pragma: no cover - kill-9 cannot hang
        pass
    for stream in (proc.stdin, proc.stdout, proc.stderr):
        if stream is not None:
            try:
                stream.close()
            except (BrokenPipeError, OSError):
                pass


class _TimeBank:
    """Thread-safe per-problem time budget: reserve, then refund the unused part."""

    def __init__(self, total_s: float):
        self._left = total_s
        self._lock = threading.Lock()

    def reserve(self, want: float) -> float:
        with self._lock:
            grant = min(want, self._left)
            if grant <= 0:
                return 0.0
            self._left -= grant
            return grant

    def refund(self, amount: float) -> None:
        with self._lock:
            self._left += max(0.0, amount)


TraceSink = Callable[[int, RunTrace | None, str], None]


def fitness(
    source: CandidateSource,
    id_base: ProblemId,
    instances: Iterable[int] = DEFAULT_INSTANCES,
    budget: int = 10_000,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    *,
    total_cap_s: float = DEFAULT_TOTAL_CAP_S,
    grid_count: int = 100,
    runners: dict[str, list[str]] | None = None,
    workers: int = 1,
    trace_sink: TraceSink | None = None,
) -> FitnessReport:
    """Mean AUC of one candidate over the given instances of one problem.

    One run per instance, seeded by the instance id. Any failure scores 0 for
    its instance. The summed run time over all instances is capped by
    total_cap_s; runs that would start past the cap report timeout.
    Only SpawnFailure propagates.
    """
    instance_ids = list(instances)
    if not instance_ids:
        raise ValueError("instances must be non-empty")
    bank = _TimeBank(total_cap_s)

    def one(k: int) -> InstanceScore:
        pid = ProblemId(
            suite=id_base.suite, function=id_base.function, instance=k, dim=id_base.dim
        )
        inst = make_instance(pid)
        grant = bank.reserve(timeout_s)
        if grant <= 0:
            outcome = RunOutcome(
                failure=RunFailure(FAILURE_TIMEOUT, "per-problem time cap exhausted")
            )
        else:
            started = time.monotonic()
            outcome = run_candidate(
                source, inst, budget, timeout_s=grant, run_seed=k, runners=runners
            )
            bank.refund(grant - (time.monotonic() - started))
        if outcome.ok:
            score = auc(
                [outcome.trace], target_set(inst), log_time_grid(budget, grid_count)
            ).auc
        else:
            score = 0.0
        if trace_sink is not None:
            trace = outcome.trace if outcome.ok else outcome.failure.partial_trace
            trace_sink(k, trace, outcome.status)
        return InstanceScore(problem=pid, auc=score, status=outcome.status)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(one, instance_ids))
    else:
        scores = [one(k) for k in instance_ids]
    mean = sum(s.auc for s in scores) / len(scores)
    return FitnessReport(per_instance=tuple(scores), mean_auc=mean)
