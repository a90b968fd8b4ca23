"""Monitoring, time grids, and the ECDF/AUC computation against a literal oracle."""

import math
import random

import pytest

from benchevo.evaluation import (
    AucReport,
    BudgetExhausted,
    Monitor,
    RunTrace,
    TimeGrid,
    TracePoint,
    auc,
    best_so_far,
    ecdf_value,
    log_time_grid,
    read_trace,
    score_trace,
    write_trace,
)
from benchevo.problems import ProblemId, TargetSet, make_instance, target_set

PID = ProblemId(suite="pbo", function=1, instance=1, dim=4)


def trace_of(points, budget=10, status="budget_exhausted", total=None):
    pts = tuple(TracePoint(evals=e, best_y=float(y)) for e, y in points)
    return RunTrace(
        problem=PID,
        run_seed=0,
        budget=budget,
        points=pts,
        total_evals=total if total is not None else budget,
        status=status,
    )


def auc_oracle(traces, targets, grid):
    """Literal triple-loop transcription of the definition: sum of indicator
    values over (run, target, grid time), divided by r*m*z."""
    r = len(traces)
    m = len(targets.values)
    z = len(grid.points)
    hits = 0
    for trace in traces:
        for phi in targets.values:
            for t in grid.points:
                best = None
                for point in trace.points:
                    if point.evals <= t:
                        best = point.best_y
                if best is None:
                    continue
                if targets.orientation == "max":
                    hits += 1 if best >= phi else 0
                else:
                    hits += 1 if best <= phi else 0
    return hits / (r * m * z)


# --- time grid ---------------------------------------------------------------


def test_grid_10_3():
    # round(10^(k/2)) for k = 0, 1, 2
    assert log_time_grid(10, 3).points == (1, 3, 10)


def test_grid_endpoints():
    grid = log_time_grid(10000, 100)
    assert grid.points[0] == 1
    assert grid.points[-1] == 10000


def test_grid_degenerate():
    assert log_time_grid(1, 2).points == (1,)


def test_grid_dedup_and_bounds():
    for budget in (1, 2, 7, 50, 1234, 10**6):
        grid = log_time_grid(budget, 100)
        assert len(grid) <= 100
        assert grid.points[0] == 1
        assert grid.points[-1] == budget
        assert all(a < b for a, b in zip(grid.points, grid.points[1:]))
        assert all(1 <= t <= budget for t in grid.points)


def test_grid_rejects_bad_count():
    with pytest.raises(ValueError):
        log_time_grid(100, 1)
    with pytest.raises(ValueError):
        log_time_grid(0, 10)


# --- monitor -----------------------------------------------------------------


def test_monitor_records_improvements_only():
    inst = make_instance(PID)
    mon = Monitor(inst, budget=3)
    mon([0, 0, 0, 0])
    mon([1, 0, 1, 0])
    mon([1, 0, 0, 0])
    trace = mon.finish()
    assert [(p.evals, p.best_y) for p in trace.points] == [(1, 0.0), (2, 2.0)]
    assert trace.total_evals == 3
    assert trace.status == "budget_exhausted"


def test_monitor_target_hit_on_first_query():
    inst = make_instance(PID)
    mon = Monitor(inst, budget=5)
    mon([1, 1, 1, 1])
    assert mon.target_hit
    trace = mon.finish()
    assert trace.status == "target_hit"
    assert trace.total_evals == 1


def test_monitor_budget_exhaustion():
    inst = make_instance(PID)
    mon = Monitor(inst, budget=2)
    mon([0, 0, 0, 0])
    mon([0, 1, 0, 0])
    with pytest.raises(BudgetExhausted):
        mon([1, 1, 0, 0])
    trace = mon.finish()
    assert trace.total_evals == 2
    assert len(trace.points) == 2


def test_monitor_trace_strictly_improving():
    inst = make_instance(ProblemId(suite="bbob", function=1, instance=2, dim=5))
    mon = Monitor(inst, budget=50)
    rng = random.Random(5)
    for _ in range(50):
        mon([rng.uniform(-5, 5) for _ in range(5)])
    trace = mon.finish()
    assert all(a.evals < b.evals for a, b in zip(trace.points, trace.points[1:]))
    assert all(a.best_y > b.best_y for a, b in zip(trace.points, trace.points[1:]))


# --- ecdf / auc --------------------------------------------------------------


def maximize_targets(*values):
    return TargetSet(values=tuple(float(v) for v in values), orientation="max")


def test_hand_auc_fixture():
    # targets {1,2,3}, grid {1,2}, best-so-far 1 at t=1 and 3 at t=2
    traces = [trace_of([(1, 1.0), (2, 3.0)], budget=2, total=2)]
    targets = maximize_targets(1, 2, 3)
    grid = TimeGrid(points=(1, 2))
    report = auc(traces, targets, grid)
    assert report.auc == pytest.approx((1 / 3 + 3 / 3) / 2)
    assert report.auc == pytest.approx(2 / 3)
    assert report.per_time_ecdf == (pytest.approx(1 / 3), pytest.approx(1.0))


def test_auc_one_when_best_target_hit_at_eval_one():
    traces = [trace_of([(1, 3.0)], budget=8, total=8)]
    report = auc(traces, maximize_targets(1, 2, 3), log_time_grid(8, 5))
    assert report.auc == 1.0


def test_auc_zero_when_no_target_reached():
    traces = [trace_of([(1, 0.5)], budget=8, total=8)]
    report = auc(traces, maximize_targets(1, 2, 3), log_time_grid(8, 5))
    assert report.auc == 0.0


def test_ecdf_hand_count():
    traces = [trace_of([(1, 5.0)])]
    targets = maximize_targets(2, 4, 6, 8)
    assert ecdf_value(traces, targets, 1) == 0.5


def test_ecdf_minimization_inclusive():
    trace = RunTrace(
        problem=ProblemId(suite="bbob", function=1, instance=1, dim=5),
        run_seed=0,
        budget=10,
        points=(TracePoint(1, 4.0), TracePoint(3, 2.0)),
        total_evals=10,
        status="budget_exhausted",
    )
    targets = TargetSet(values=(8.0, 4.0, 2.0, 1.0), orientation="min")
    assert ecdf_value([trace], targets, 1) == 0.5  # 8 and 4 reached, inclusive
    assert ecdf_value([trace], targets, 3) == 0.75
    assert ecdf_value([trace], targets, 10) == 0.75


def test_ecdf_non_decreasing_in_t():
    rng = random.Random(17)
    for _ in range(50):
        points, best, e = [], 0.0, 0
        for _ in range(rng.randint(1, 6)):
            e += rng.randint(1, 4)
            best += rng.uniform(0.1, 2.0)
            points.append((e, best))
        traces = [trace_of(points, budget=30, total=30)]
        targets = maximize_targets(*[rng.uniform(0, 8) for _ in range(5)])
        values = [ecdf_value(traces, targets, t) for t in range(1, 31)]
        assert all(a <= b for a, b in zip(values, values[1:]))


def test_auc_is_mean_of_ecdf_and_in_unit_range():
    traces = [trace_of([(1, 1.0), (4, 2.5)]), trace_of([(2, 3.0)])]
    targets = maximize_targets(1, 2, 3)
    grid = log_time_grid(10, 6)
    report = auc(traces, targets, grid)
    assert report.auc == pytest.approx(sum(report.per_time_ecdf) / len(report.per_time_ecdf))
    assert 0.0 <= report.auc <= 1.0
    assert report.runs == 2


def test_auc_invariant_to_duplicated_trace():
    t = trace_of([(1, 1.0), (3, 2.0)])
    targets = maximize_targets(1, 2, 3)
    grid = log_time_grid(10, 6)
    single = auc([t], targets, grid).auc
    doubled = auc([t, t], targets, grid).auc
    assert doubled == pytest.approx(single)


def random_case(rng):
    budget = rng.randint(2, 20)
    traces = []
    for _ in range(rng.randint(1, 3)):
        points, e, best = [], 0, None
        for _ in range(rng.randint(0, 5)):
            step = rng.randint(1, max(1, budget // 2))
            e = min(budget, e + step)
            value = best + rng.uniform(0.01, 3.0) if best is not None else rng.uniform(-2, 2)
            if points and e == points[-1][0]:
                break
            points.append((e, value))
            best = value
        traces.append(trace_of(points, budget=budget, total=budget))
    targets = maximize_targets(*[rng.uniform(-3, 6) for _ in range(rng.randint(1, 10))])
    grid = log_time_grid(budget, rng.randint(2, 10))
    return traces, targets, grid


def test_auc_matches_triple_loop_oracle_on_1000_cases():
    rng = random.Random(1234)
    for _ in range(1000):
        traces, targets, grid = random_case(rng)
        got = auc(traces, targets, grid).auc
        want = auc_oracle(traces, targets, grid)
        assert abs(got - want) <= 1e-12


def test_auc_monotone_under_improvement_and_budget_cut():
    rng = random.Random(99)
    for _ in range(100):
        traces, targets, grid = random_case(rng)
        base = auc(traces, targets, grid).auc
        # appending an improving point never decreases auc
        t0 = traces[0]
        last_e = t0.points[-1].evals if t0.points else 0
        last_y = t0.points[-1].best_y if t0.points else 0.0
        if last_e < t0.budget:
            improved = RunTrace(
                problem=t0.problem,
                run_seed=t0.run_seed,
                budget=t0.budget,
                points=t0.points + (TracePoint(last_e + 1, last_y + 1.0),),
                total_evals=t0.total_evals,
                status=t0.status,
            )
            up = auc([improved] + traces[1:], targets, grid).auc
            assert up >= base - 1e-15
        # truncating the budget never increases auc
        cut = max(1, grid.points[len(grid.points) // 2])
        cut_traces = [
            RunTrace(
                problem=tr.problem,
                run_seed=tr.run_seed,
                budget=cut,
                points=tuple(p for p in tr.points if p.evals <= cut),
                total_evals=min(tr.total_evals, cut),
                status=tr.status,
            )
            for tr in traces
        ]
        down = auc(cut_traces, targets, log_time_grid(cut, len(grid.points))).auc
        assert down <= base + 1e-15


def test_empty_inputs_rejected():
    targets = maximize_targets(1)
    grid = log_time_grid(4, 3)
    with pytest.raises(ValueError):
        auc([], targets, grid)
    with pytest.raises(ValueError):
        auc([trace_of([(1, 1.0)])], TargetSet(values=(), orientation="max"), grid)


def test_best_so_far_step_interpolation():
    t = trace_of([(2, 1.0), (5, 4.0)])
    assert best_so_far(t, 1) is None
    assert best_so_far(t, 2) == 1.0
    assert best_so_far(t, 4) == 1.0
    assert best_so_far(t, 5) == 4.0
    assert best_so_far(t, 9) == 4.0


# --- trace files -------------------------------------------------------------


def test_trace_file_roundtrip(tmp_path):
    trace = trace_of([(1, 0.0), (4, 2.0)], budget=8, status="target_hit", total=4)
    path = tmp_path / "run.jsonl"
    write_trace(path, trace)
    lines = path.read_text().splitlines()
    assert '"problem"' in lines[0] and '"budget"' in lines[0]
    assert '"status"' in lines[-1]
    assert read_trace(path) == trace


def test_score_trace_matches_auc_and_zeroes_failures(tmp_path):
    inst = make_instance(PID)
    mon = Monitor(inst, budget=6)
    for x in ([0, 0, 0, 0], [1, 0, 1, 0], [1, 1, 1, 0]):
        mon(x)
    trace = mon.finish()
    want = auc([trace], target_set(PID), log_time_grid(6, 100)).auc
    assert score_trace(trace) == want

    failed = trace_of([(1, 2.0)], budget=6, status="timeout", total=3)
    assert score_trace(failed) == 0.0
