"""Budget-enforced evaluation monitoring and anytime performance (ECDF / AUC).

A :class:`Monitor` wraps one problem instance, counts evaluations against a
budget, and records the improvement breakpoints of the best-so-far value. The
resulting :class:`RunTrace` is enough to reconstruct the best-so-far step
function at any time, which is what the ECDF and its area (AUC over a log time
grid) are computed from.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .problems import (
    DomainViolation,
    ProblemId,
    ProblemInstance,
    TargetSet,
    evaluate,
    make_instance,
    target_set,
)

STATUS_BUDGET = "budget_exhausted"
STATUS_TARGET = "target_hit"
STATUS_CRASH = "crashed"
STATUS_TIMEOUT = "timeout"
STATUS_PROTOCOL = "protocol_violation"

RUN_STATUSES = (
    STATUS_BUDGET,
    STATUS_TARGET,
    STATUS_CRASH,
    STATUS_TIMEOUT,
    STATUS_PROTOCOL,
)

# Statuses that score 0 regardless of any partial progress.
FAILURE_STATUSES = frozenset({STATUS_CRASH, STATUS_TIMEOUT, STATUS_PROTOCOL})


class BudgetExhausted(RuntimeError):
    """The monitored handle was called more than ``budget`` times."""


class EmptyTargets(ValueError):
    pass


class EmptyTraces(ValueError):
    pass


@dataclass(frozen=True)
class TracePoint:
    evals: int
    best_y: float


@dataclass(frozen=True)
class RunTrace:
    """Improvement breakpoints of one run.

    ``status`` is one of RUN_STATUSES. A candidate that returns cleanly
    without using its whole budget is recorded as budget_exhausted: it walked
    away from the remaining budget and is scored identically.
    """

    problem: ProblemId
    run_seed: int
    budget: int
    points: tuple[TracePoint, ...]
    total_evals: int
    status: str


@dataclass(frozen=True)
class TimeGrid:
    points: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class AucReport:
    auc: float
    per_time_ecdf: tuple[float, ...]
    runs: int


class Monitor:
    """Budget-enforcing wrapper around one problem instance.

    The handle is callable; each call evaluates the instance, advances the
    counter, and extends the trace iff the best-so-far strictly improved.
    Calls beyond the budget raise BudgetExhausted without evaluating.
    Single-owner: not safe to share across threads.
    """

    def __init__(self, instance: ProblemInstance, budget: int, run_seed: int = 0):
        if budget < 1:
            raise ValueError(f"budget must be >= 1, got {budget}")
        self.instance = instance
        self.budget = budget
        self.run_seed = run_seed
        self._evals = 0
        self._best: float | None = None
        self._points: list[TracePoint] = []
        self._hit = False

    @property
    def evals(self) -> int:
        return self._evals

    @property
    def best_y(self) -> float | None:
        return self._best

    @property
    def target_hit(self) -> bool:
        return self._hit

    @property
    def budget_left(self) -> int:
        return self.budget - self._evals

    def __call__(self, x) -> float:
        if self._evals >= self.budget:
            raise BudgetExhausted(f"budget of {self.budget} evaluations used up")
        y = evaluate(self.instance, x)
        self._evals += 1
        if self._best is None or self._improves(y):
            self._best = y
            self._points.append(TracePoint(evals=self._evals, best_y=y))
            if not self._hit:
                self._hit = self._reaches(y, self.instance.y_opt)
        return y

    def _improves(self, y: float) -> bool:
        if self.instance.orientation == "max":
            return y > self._best
        return y < self._best

    def _reaches(self, y: float, target: float) -> bool:
        if self.instance.orientation == "max":
            return y >= target
        return y <= target

    def finish(self, status: str | None = None) -> RunTrace:
        """Close the handle and return the trace.

        With no explicit status, target_hit wins over budget_exhausted.
        """
        if status is None:
            status = STATUS_TARGET if self._hit else STATUS_BUDGET
        if status not in RUN_STATUSES:
            raise ValueError(f"unknown status {status!r}")
        return RunTrace(
            problem=self.instance.id,
            run_seed=self.run_seed,
            budget=self.budget,
            points=tuple(self._points),
            total_evals=self._evals,
            status=status,
        )


def log_time_grid(budget: int, count: int = 100) -> TimeGrid:
    """Geometric grid of integer times from 1 to budget.

    Rounded to integers and deduplicated, so the grid holds at most ``count``
    points; endpoints are always 1 and budget.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if count < 2:
        raise ValueError(f"count must be >= 2, got {count}")
    raw = np.power(10.0, np.linspace(0.0, np.log10(budget), num=count))
    points: list[int] = []
    for value in raw:
        t = int(round(float(value)))
        t = min(max(t, 1), budget)
        if not points or t > points[-1]:
            points.append(t)
    points[-1] = budget
    return TimeGrid(points=tuple(points))


def best_so_far(trace: RunTrace, t: int) -> float | None:
    """Best value after t evaluations: last breakpoint with evals <= t."""
    best = None
    for point in trace.points:
        if point.evals > t:
            break
        best = point.best_y
    return best


def _reached_count(best: float | None, targets: TargetSet) -> int:
    if best is None:
        return 0
    if targets.orientation == "max":
        return sum(1 for phi in targets.values if best >= phi)
    return sum(1 for phi in targets.values if best <= phi)


def ecdf_value(traces: list[RunTrace], targets: TargetSet, t: int) -> float:
    """Mean over runs of the fraction of targets reached by time t."""
    if not traces:
        raise EmptyTraces("need at least one trace")
    if not targets.values:
        raise EmptyTargets("need at least one target")
    m = len(targets.values)
    total = sum(_reached_count(best_so_far(trace, t), targets) for trace in traces)
    return total / (len(traces) * m)


def auc(traces: list[RunTrace], targets: TargetSet, grid: TimeGrid) -> AucReport:
    """Area under the ECDF curve, averaged over the time grid."""
    if not traces:
        raise EmptyTraces("need at least one trace")
    if not targets.values:
        raise EmptyTargets("need at least one target")
    per_time = tuple(ecdf_value(traces, targets, t) for t in grid.points)
    return AucReport(
        auc=sum(per_time) / len(per_time),
        per_time_ecdf=per_time,
        runs=len(traces),
    )


def score_trace(trace: RunTrace, grid_count: int = 100) -> float:
    """AUC of a single stored trace, using the problem's own target set.

    Traces whose status is a failure kind score 0, matching the fitness rule,
    so stored fitness values are reproducible from trace files alone.
    """
    if trace.status in FAILURE_STATUSES:
        return 0.0
    targets = target_set(trace.problem)
    grid = log_time_grid(trace.budget, grid_count)
    return auc([trace], targets, grid).auc


# --- trace files -------------------------------------------------------------
#
# JSON Lines: a header {"problem": …, "seed": …, "budget": …}, one object per
# improvement {"evals": int, "best_y": number}, a footer {"status": …,
# "total_evals": …}.


def write_trace(path: str | Path, trace: RunTrace) -> None:
    lines = [
        json.dumps(
            {
                "problem": trace.problem.as_dict(),
                "seed": trace.run_seed,
                "budget": trace.budget,
            },
            sort_keys=True,
        )
    ]
    for point in trace.points:
        lines.append(
            json.dumps({"evals": point.evals, "best_y": point.best_y}, sort_keys=True)
        )
    lines.append(
        json.dumps(
            {"status": trace.status, "total_evals": trace.total_evals}, sort_keys=True
        )
    )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_trace(path: str | Path) -> RunTrace:
    rows = [
        json.loads(line)
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if len(rows) < 2:
        raise ValueError(f"trace file {path} is truncated")
    header, footer = rows[0], rows[-1]
    points = tuple(
        TracePoint(evals=int(row["evals"]), best_y=float(row["best_y"]))
        for row in rows[1:-1]
    )
    return RunTrace(
        problem=ProblemId.from_dict(header["problem"]),
        run_seed=int(header["seed"]),
        budget=int(header["budget"]),
        points=points,
        total_evals=int(footer["total_evals"]),
        status=str(footer["status"]),
    )
