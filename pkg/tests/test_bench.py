"""The shipped seed algorithms must load, compile, and actually optimize."""

import numpy as np
import pytest

from benchevo.bench import (
    BENCH_DESCRIPTIONS,
    BENCH_ORDER,
    bench_names,
    load_bench_set,
    load_plain_seed,
)
from benchevo.problems import registered_functions


class FakeState:
    def __init__(self):
        self.evaluations = 0


class FakeBounds:
    def __init__(self, lb, ub):
        self.lb = lb
        self.ub = ub


class FakeOptimum:
    def __init__(self, y):
        self.y = y


class FakeFunc:
    """In-process stand-in for the sandboxed function handle."""

    def __init__(self, kernel, dim, budget, lb, ub, y_opt):
        self.kernel = kernel
        self.budget = budget
        self.state = FakeState()
        self.bounds = FakeBounds(np.full(dim, lb, float), np.full(dim, ub, float))
        self.optimum = FakeOptimum(y_opt)

    def __call__(self, x):
        assert self.state.evaluations < self.budget, "budget overrun"
        self.state.evaluations += 1
        return self.kernel(np.asarray(x))


def instantiate(source, budget, dim, seed):
    ns = {}
    exec(compile(source.source_text, f"<{source.entry_name}>", "exec"), ns)
    return ns[source.entry_name](budget, dim, seed)


def count_ones(x):
    return float(np.sum(x))


def off_center_square(x):
    return float(np.sum((x - 0.3) ** 2))


class TestLoading:
    def test_each_suite_ships_five_ordered_seeds(self):
        for suite in ("pbo", "bbob"):
            seeds = load_bench_set(suite)
            assert [name for name, _ in seeds] == bench_names(suite)
            assert len(seeds) == 5

    def test_entry_is_first_class(self):
        for suite in BENCH_ORDER:
            for name, source in load_bench_set(suite):
                assert f"class {source.entry_name}" in source.source_text
                assert source.language_tag == "python"

    def test_sources_compile(self):
        for suite in BENCH_ORDER:
            for name, source in load_bench_set(suite):
                compile(source.source_text, name, "exec")

    def test_unknown_suite_rejected(self):
        with pytest.raises(ValueError):
            bench_names("tsp")

    def test_directory_override(self, tmp_path):
        (tmp_path / "umda.py").write_text("class Custom:\n    pass\n")
        seeds = dict(load_bench_set("pbo", directory=tmp_path))
        assert seeds["umda"].entry_name == "Custom"
        assert seeds["greedy_hill_climber"].entry_name == "GreedyHillClimber"

    def test_hygiene_no_benchmark_names_in_assets(self):
        forbidden = ["pbo", "bbob"] + [s.name.lower() for s in registered_functions()]
        for suite in BENCH_ORDER:
            seeds = load_bench_set(suite) + [load_plain_seed(suite)]
            for name, source in seeds:
                lowered = source.source_text.lower()
                for word in forbidden:
                    assert word not in lowered, (suite, name, word)

    def test_every_seed_has_a_description(self):
        for suite in BENCH_ORDER:
            for name in bench_names(suite):
                assert name in BENCH_DESCRIPTIONS
        assert "random_search" in BENCH_DESCRIPTIONS

    def test_plain_seed_outside_bench_set(self):
        for suite in BENCH_ORDER:
            name, source = load_plain_seed(suite)
            assert name == "random_search"
            assert source.entry_name == "RandomSearch"
            assert name not in bench_names(suite)


class TestPboSeedsRun:
    @pytest.mark.parametrize("name", bench_names("pbo"))
    def test_improves_bit_counting(self, name):
        source = dict(load_bench_set("pbo"))[name]
        dim, budget = 30, 600
        func = FakeFunc(count_ones, dim, budget, 0, 1, y_opt=float(dim))
        algo = instantiate(source, budget, dim, seed=7)
        f_best, x_best = algo(func)
        assert func.state.evaluations <= budget
        assert f_best > dim / 2  # random start averages dim/2
        assert x_best is not None and len(np.asarray(x_best)) == dim
        assert set(np.asarray(x_best).tolist()) <= {0, 1}

    @pytest.mark.parametrize("name", bench_names("pbo"))
    def test_stops_early_at_optimum(self, name):
        source = dict(load_bench_set("pbo"))[name]
        dim, budget = 4, 100_000
        func = FakeFunc(count_ones, dim, budget, 0, 1, y_opt=float(dim))
        algo = instantiate(source, budget, dim, seed=3)
        f_best, _ = algo(func)
        assert f_best == dim
        assert func.state.evaluations < budget

    @pytest.mark.parametrize("name", bench_names("pbo"))
    def test_seed_determinism(self, name):
        source = dict(load_bench_set("pbo"))[name]

        def run():
            func = FakeFunc(count_ones, 20, 200, 0, 1, y_opt=20.0)
            algo = instantiate(source, 200, 20, seed=11)
            f, x = algo(func)
            return f, list(np.asarray(x))

        assert run() == run()


class TestPlainSeedsRun:
    def test_bit_domain_random_search(self):
        _, source = load_plain_seed("pbo")
        func = FakeFunc(count_ones, 8, 500, 0, 1, y_opt=8.0)
        f_best, x_best = instantiate(source, 500, 8, seed=5)(func)
        assert func.state.evaluations <= 500
        assert f_best >= 4

    def test_continuous_random_search(self):
        _, source = load_plain_seed("bbob")
        func = FakeFunc(off_center_square, 3, 400, -5.0, 5.0, y_opt=0.0)
        f_best, _ = instantiate(source, 400, 3, seed=5)(func)
        assert func.state.evaluations == 400  # nothing to stop early for
        assert f_best < off_center_square(np.zeros(3)) * 3


class TestBbobSeedsRun:
    @pytest.mark.parametrize("name", bench_names("bbob"))
    def test_improves_offcenter_square(self, name):
        source = dict(load_bench_set("bbob"))[name]
        dim, budget = 5, 800
        func = FakeFunc(off_center_square, dim, budget, -5.0, 5.0, y_opt=0.0)
        algo = instantiate(source, budget, dim, seed=7)
        f_best, x_best = algo(func)
        assert func.state.evaluations <= budget
        assert f_best < 1.0  # random uniform points average far above this
        x = np.asarray(x_best, float)
        assert x.shape == (dim,)
        assert np.all(x >= -5.0) and np.all(x <= 5.0)

    @pytest.mark.parametrize("name", bench_names("bbob"))
    def test_respects_tiny_budget(self, name):
        source = dict(load_bench_set("bbob"))[name]
        dim, budget = 5, 7
        func = FakeFunc(off_center_square, dim, budget, -5.0, 5.0, y_opt=0.0)
        algo = instantiate(source, budget, dim, seed=1)
        algo(func)
        assert func.state.evaluations <= budget

    @pytest.mark.parametrize("name", bench_names("bbob"))
    def test_seed_determinism(self, name):
        source = dict(load_bench_set("bbob"))[name]

        def run():
            func = FakeFunc(off_center_square, 4, 150, -5.0, 5.0, y_opt=0.0)
            algo = instantiate(source, 150, 4, seed=11)
            f, x = algo(func)
            return f, list(np.asarray(x, float))

        assert run() == run()
