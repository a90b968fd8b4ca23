"""Loader for the shipped benchmark algorithm seed sets.

The seeds are plain Python source assets under benchcode/<suite>/. They follow
the candidate calling convention (``__init__(self, budget, dim, seed)`` plus
``__call__(self, func)``) and are ordered by preference: the first entry is
the one an elitist search seeds from. A directory override lets users swap in
per-problem seed sets without touching the package.
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

from .sandbox import CandidateSource

BENCH_ORDER = {
    "pbo": (
        "greedy_hill_climber",
        "one_plus_one_ea",
        "random_local_search",
        "simulated_annealing",
        "umda",
    ),
    "bbob": (
        "cma_es",
        "cholesky_cma_es",
        "csa_es",
        "differential_evolution",
        "particle_swarm",
    ),
}

BENCH_DESCRIPTIONS = {
    "random_search": "Uniform random sampling keeping the best point seen.",
    "greedy_hill_climber": "Deterministic single-bit hill climber that sweeps coordinates in order.",
    "one_plus_one_ea": "Elitist evolutionary algorithm flipping each bit with probability 1/n.",
    "random_local_search": "Local search flipping one uniformly chosen bit per step.",
    "simulated_annealing": "Single-bit-flip annealing with a geometric cooling schedule.",
    "umda": "Estimation-of-distribution algorithm updating per-bit marginals from the best half.",
    "cma_es": "Covariance matrix adaptation evolution strategy with rank-one and rank-mu updates.",
    "cholesky_cma_es": "Elitist (1+1) covariance adaptation working directly on the Cholesky factor.",
    "csa_es": "Isotropic evolution strategy with cumulative step-size adaptation.",
    "differential_evolution": "Classic rand/1/bin differential evolution.",
    "particle_swarm": "Global-best particle swarm with velocity clamping.",
}

_CLASS_RE = re.compile(r"^class\s+([A-Za-z_]\w*)", re.MULTILINE)


def bench_names(suite: str) -> list[str]:
    if suite not in BENCH_ORDER:
        raise ValueError(f"unknown suite {suite!r}; expected one of {sorted(BENCH_ORDER)}")
    return list(BENCH_ORDER[suite])


def _read_asset(suite: str, name: str, directory: str | Path | None) -> str:
    if directory is not None:
        override = Path(directory) / f"{name}.py"
        if override.exists():
            return override.read_text(encoding="utf-8")
    node = resources.files("benchevo") / "benchcode" / suite / f"{name}.py"
    return node.read_text(encoding="utf-8")


def _as_candidate(suite: str, name: str, directory: str | Path | None) -> CandidateSource:
    text = _read_asset(suite, name, directory)
    match = _CLASS_RE.search(text)
    if match is None:
        raise ValueError(f"bench asset {name} defines no top-level class")
    return CandidateSource(
        language_tag="python",
        source_text=text.rstrip("\n"),
        entry_name=match.group(1),
    )


def load_bench_set(
    suite: str, directory: str | Path | None = None
) -> list[tuple[str, CandidateSource]]:
    """Return the ordered (name, source) seed list for a suite."""
    return [(name, _as_candidate(suite, name, directory)) for name in bench_names(suite)]


def load_plain_seed(suite: str, directory: str | Path | None = None):
    """The simple random-search reference code, outside the bench set.

    Used to seed the refine-only and create-only strategies when the caller
    does not hand over a starting algorithm.
    """
    if suite not in BENCH_ORDER:
        raise ValueError(f"unknown suite {suite!r}; expected one of {sorted(BENCH_ORDER)}")
    return ("random_search", _as_candidate(suite, "random_search", directory))
