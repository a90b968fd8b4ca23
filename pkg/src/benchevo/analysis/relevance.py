"""Aggregation of signed token-attribution matrices.

The matrix itself comes from an external attribution tool; this module only
ingests it (JSON or CSV) and reduces it: column-normalize absolute values,
sum per input token, and average over labelled prompt components. Values are
signed and unbounded on input, so everything works on magnitudes.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class AllZeroMatrix(ValueError):
    """Every attribution value is zero; nothing to normalize."""


class EmptyComponent(ValueError):
    """A component span selects no input tokens."""


@dataclass(frozen=True)
class RelevanceMatrix:
    """Signed scores, one row per input token, one column per output token.

    ``spans`` labels half-open ``[start, end)`` runs of input tokens with
    component names; they must not overlap.
    """

    input_tokens: tuple[str, ...]
    output_tokens: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]
    spans: dict[str, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.values) != len(self.input_tokens):
            raise ValueError("one value row per input token required")
        for row in self.values:
            if len(row) != len(self.output_tokens):
                raise ValueError("one value column per output token required")
            for v in row:
                if not math.isfinite(v):
                    raise ValueError("attribution values must be finite")
        taken: list[tuple[int, int]] = []
        for name, (start, end) in self.spans.items():
            if not (0 <= start <= end <= len(self.input_tokens)):
                raise ValueError(f"span {name!r} out of bounds")
            for s, e in taken:
                if start < e and s < end:
                    raise ValueError(f"span {name!r} overlaps another span")
            taken.append((start, end))


def column_normalized(matrix: RelevanceMatrix) -> np.ndarray:
    """Absolute values scaled so every nonzero output column sums to 1.

    Zero columns stay zero (a truncated output token attributes nothing).
    """
    mags = np.abs(np.asarray(matrix.values, dtype=float))
    if mags.size == 0 or not mags.any():
        raise AllZeroMatrix("matrix has no nonzero attribution values")
    sums = mags.sum(axis=0)
    out = np.zeros_like(mags)
    nonzero = sums > 0
    out[:, nonzero] = mags[:, nonzero] / sums[nonzero]
    return out


def _token_mass(matrix: RelevanceMatrix) -> np.ndarray:
    return column_normalized(matrix).sum(axis=1)


def aggregate_relevance(matrix: RelevanceMatrix) -> tuple[float, ...]:
    """Per-input-token relevance in [0, 1]; the strongest token reads 1.0."""
    mass = _token_mass(matrix)
    peak = mass.max()
    return tuple(float(v / peak) for v in mass)


def component_relevance(matrix: RelevanceMatrix) -> dict[str, float]:
    """Mean per-token mass of each labelled component.

    Reported before the divide-by-max step, so the values weighted by
    component size sum to the number of nonzero output columns.
    """
    if not matrix.spans:
        raise EmptyComponent("matrix declares no component spans")
    covered = 0
    for name, (start, end) in matrix.spans.items():
        if start == end:
            raise EmptyComponent(f"component {name!r} selects no tokens")
        covered += end - start
    if covered != len(matrix.input_tokens):
        raise ValueError("component spans must cover every input token")
    mass = _token_mass(matrix)
    return {
        name: float(mass[start:end].mean())
        for name, (start, end) in matrix.spans.items()
    }


def _from_json(path: Path) -> RelevanceMatrix:
    data = json.loads(path.read_text())
    spans = {
        str(name): (int(pair[0]), int(pair[1]))
        for name, pair in data.get("spans", {}).items()
    }
    return RelevanceMatrix(
        input_tokens=tuple(str(t) for t in data["input_tokens"]),
        output_tokens=tuple(str(t) for t in data["output_tokens"]),
        values=tuple(tuple(float(v) for v in row) for row in data["values"]),
        spans=spans,
    )


def _from_csv(path: Path) -> RelevanceMatrix:
    # layout: header "component,token,<out_0>,<out_1>,..."; one row per
    # input token; spans recovered from contiguous runs of the label.
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) < 3:
        raise ValueError("csv needs component, token and value columns")
    output_tokens = tuple(rows[0][2:])
    labels: list[str] = []
    input_tokens: list[str] = []
    values: list[tuple[float, ...]] = []
    for row in rows[1:]:
        if len(row) != len(rows[0]):
            raise ValueError("ragged csv row")
        labels.append(row[0])
        input_tokens.append(row[1])
        values.append(tuple(float(v) for v in row[2:]))
    spans: dict[str, tuple[int, int]] = {}
    for i, label in enumerate(labels):
        if label in spans:
            start, end = spans[label]
            if end != i:
                raise ValueError(f"component {label!r} is not contiguous")
            spans[label] = (start, i + 1)
        else:
            spans[label] = (i, i + 1)
    return RelevanceMatrix(
        input_tokens=tuple(input_tokens),
        output_tokens=output_tokens,
        values=tuple(values),
        spans=spans,
    )


def load_relevance(path: str | Path) -> RelevanceMatrix:
    """Read a matrix written by an attribution tool; .json or .csv."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return _from_json(path)
    if path.suffix.lower() == ".csv":
        return _from_csv(path)
    raise ValueError(f"unsupported relevance file type: {path.suffix!r}")
