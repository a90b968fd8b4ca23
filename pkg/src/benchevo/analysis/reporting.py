"""Cross-approach score tables and run failure statistics."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from statistics import fmean, pstdev

from ..evaluation import FAILURE_STATUSES


class EmptyResults(ValueError):
    """No approaches or no problems to tabulate."""


def competition_ranks(values) -> tuple[int, ...]:
    """1-based ranks, higher value is better; ties share the smallest rank."""
    vals = [float(v) for v in values]
    return tuple(1 + sum(1 for other in vals if other > v) for v in vals)


@dataclass(frozen=True)
class ReportTable:
    approaches: tuple[str, ...]
    problems: tuple[str, ...]
    normalized: dict[str, dict[str, float]]  # problem -> approach -> value
    ranks: dict[str, dict[str, int]]
    mean: dict[str, float]
    std: dict[str, float]
    average_rank: dict[str, float]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("problem," + ",".join(self.approaches) + "\n")
        for problem in self.problems:
            cells = [
                f"{self.normalized[problem][a]:.3f} ({self.ranks[problem][a]})"
                for a in self.approaches
            ]
            out.write(f"{problem}," + ",".join(cells) + "\n")
        for label, row in (
            ("mean", self.mean),
            ("std", self.std),
            ("average rank", self.average_rank),
        ):
            out.write(label + "," + ",".join(f"{row[a]:.3f}" for a in self.approaches) + "\n")
        return out.getvalue()


def report_table(results: dict[str, dict[str, float]]) -> ReportTable:
    """Normalize per-problem scores to the best approach and rank them.

    ``results`` maps approach name to a problem -> mean AUC mapping; every
    approach must cover the same problem set.
    """
    if not results:
        raise EmptyResults("no approaches given")
    approaches = tuple(results)
    problems = tuple(results[approaches[0]])
    if not problems:
        raise EmptyResults("no problems given")
    expected = set(problems)
    for name, scores in results.items():
        if set(scores) != expected:
            raise ValueError(f"approach {name!r} covers a different problem set")

    normalized: dict[str, dict[str, float]] = {}
    ranks: dict[str, dict[str, int]] = {}
    for problem in problems:
        raw = [results[a][problem] for a in approaches]
        if any(not math.isfinite(v) or v < 0 for v in raw):
            raise ValueError(f"scores for {problem!r} must be finite and >= 0")
        best = max(raw)
        if best <= 0:
            raise ValueError(f"no approach scored above zero on {problem!r}")
        norm = [v / best for v in raw]
        rank = competition_ranks(norm)
        normalized[problem] = dict(zip(approaches, norm))
        ranks[problem] = dict(zip(approaches, rank))

    mean = {a: fmean(normalized[p][a] for p in problems) for a in approaches}
    std = {a: pstdev([normalized[p][a] for p in problems]) for a in approaches}
    average_rank = {a: fmean(ranks[p][a] for p in problems) for a in approaches}
    return ReportTable(
        approaches=approaches,
        problems=problems,
        normalized=normalized,
        ranks=ranks,
        mean=mean,
        std=std,
        average_rank=average_rank,
    )


def _record_failed(record) -> bool:
    if record.failure is not None:
        return True
    per_instance = record.fitness.per_instance
    return bool(per_instance) and all(
        score.status in FAILURE_STATUSES for score in per_instance
    )


def failure_rate(result) -> float:
    """Fraction of query records that produced no usable candidate."""
    records = result.records
    if not records:
        return 0.0
    return sum(1 for r in records if _record_failed(r)) / len(records)
