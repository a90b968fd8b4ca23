import random
from types import SimpleNamespace

import pytest

from benchevo.analysis import EmptyResults, competition_ranks, failure_rate, report_table
from benchevo.sandbox import FitnessReport, InstanceScore
from benchevo.search import Action, CandidateRecord


def rank_by_sorting(values):
    """Oracle: walk the values sorted descending, groups of ties all take
    the position of the first member."""
    order = sorted(range(len(values)), key=lambda i: -values[i])
    ranks = [0] * len(values)
    pos = 0
    while pos < len(order):
        group = [order[pos]]
        while pos + len(group) < len(order) and values[order[pos + len(group)]] == values[group[0]]:
            group.append(order[pos + len(group)])
        for i in group:
            ranks[i] = pos + 1
        pos += len(group)
    return tuple(ranks)


class TestCompetitionRanks:
    def test_published_row_fixture(self):
        values = (0.991, 0.991, 0.765, 1.000, 0.991, 0.856)
        assert competition_ranks(values) == (2, 2, 6, 1, 2, 5)

    def test_two_values(self):
        assert competition_ranks((0.5, 1.0)) == (2, 1)

    def test_matches_sorting_oracle_on_random_inputs(self):
        rng = random.Random(5)
        for _ in range(200):
            values = [rng.randrange(0, 6) / 5 for _ in range(rng.randrange(1, 9))]
            assert competition_ranks(values) == rank_by_sorting(values)

    def test_all_tied(self):
        assert competition_ranks((0.3, 0.3, 0.3)) == (1, 1, 1)


def table_fixture():
    return {
        "alpha": {"P1": 1.0, "P2": 0.5},
        "beta": {"P1": 0.5, "P2": 1.0},
    }


class TestReportTable:
    def test_normalization_against_best(self):
        t = report_table(table_fixture())
        assert t.normalized["P1"] == {"alpha": 1.0, "beta": 0.5}
        assert t.normalized["P2"] == {"alpha": 0.5, "beta": 1.0}

    def test_best_is_exactly_one(self):
        t = report_table({"a": {"P": 0.123}, "b": {"P": 0.456}})
        assert t.normalized["P"]["b"] == 1.0

    def test_ranks_and_summary_rows(self):
        t = report_table(table_fixture())
        assert t.ranks["P1"] == {"alpha": 1, "beta": 2}
        assert t.mean["alpha"] == pytest.approx(0.75)
        assert t.std["alpha"] == pytest.approx(0.25)
        assert t.average_rank["alpha"] == pytest.approx(1.5)
        assert t.average_rank["beta"] == pytest.approx(1.5)

    def test_scaling_a_problem_leaves_table_unchanged(self):
        base = report_table(table_fixture())
        scaled_results = table_fixture()
        for scores in scaled_results.values():
            scores["P1"] *= 12.5
        scaled = report_table(scaled_results)
        assert scaled.ranks == base.ranks
        for p in base.problems:
            for a in base.approaches:
                assert scaled.normalized[p][a] == pytest.approx(base.normalized[p][a], rel=1e-12)

    def test_csv_shape(self):
        got = report_table(table_fixture()).to_csv()
        assert got == (
            "problem,alpha,beta\n"
            "P1,1.000 (1),0.500 (2)\n"
            "P2,0.500 (2),1.000 (1)\n"
            "mean,0.750,0.750\n"
            "std,0.250,0.250\n"
            "average rank,1.500,1.500\n"
        )

    def test_empty_results_rejected(self):
        with pytest.raises(EmptyResults):
            report_table({})
        with pytest.raises(EmptyResults):
            report_table({"a": {}})

    def test_mismatched_problem_sets_rejected(self):
        with pytest.raises(ValueError):
            report_table({"a": {"P1": 1.0}, "b": {"P2": 1.0}})

    def test_all_zero_problem_rejected(self):
        with pytest.raises(ValueError):
            report_table({"a": {"P1": 0.0}, "b": {"P1": 0.0}})


def record(failure=None, statuses=("budget_exhausted",)):
    scores = tuple(
        InstanceScore(problem=None, auc=0.0, status=s) for s in statuses
    )
    return CandidateRecord(
        t=1,
        action=Action("create"),
        name="c",
        description="d",
        source=None,
        fitness=FitnessReport(per_instance=scores, mean_auc=0.0),
        accepted=False,
        failure=failure,
    )


def result_of(records):
    return SimpleNamespace(records=records)


class TestFailureRate:
    def test_no_failures(self):
        assert failure_rate(result_of([record(), record()])) == 0.0

    def test_all_failures(self):
        assert failure_rate(result_of([record(failure="parse: x")] * 3)) == 1.0

    def test_seven_of_one_hundred(self):
        records = [record(failure="parse: x")] * 7 + [record()] * 93
        assert failure_rate(result_of(records)) == 0.07

    def test_all_instances_crashing_counts(self):
        bad = record(statuses=("crashed", "timeout"))
        assert failure_rate(result_of([bad, record()])) == 0.5

    def test_one_surviving_instance_is_not_a_failure(self):
        mixed = record(statuses=("crashed", "budget_exhausted"))
        assert failure_rate(result_of([mixed])) == 0.0

    def test_parse_failure_with_empty_instances_counts(self):
        bad = record(failure="parse: x", statuses=())
        assert failure_rate(result_of([bad])) == 1.0

    def test_empty_records(self):
        assert failure_rate(result_of([])) == 0.0
