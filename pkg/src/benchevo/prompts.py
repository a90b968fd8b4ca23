"""Prompt assembly and response parsing.

Prompts are built from eight text assets (templates/*.txt), assembled in a
fixed order: role, task description, optionally a parent block listing the
already-evaluated population, the reference code in a fence, the strategy
sentence, and the expected-output block. Task texts deliberately never name a
benchmark suite or function: candidates must treat every problem as a black
box.

Any template can be overridden per file by pointing ``load_templates`` at a
directory; files missing there fall back to the packaged defaults.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .sandbox import CandidateSource

TEMPLATE_NAMES = (
    "role",
    "task_pbo",
    "task_bbob",
    "parent_block",
    "strategy_refine",
    "strategy_create",
    "strategy_refine_bench",
    "expected_output",
)

# Reference-code introductions; the bench-seed one is used whenever a known
# algorithm is handed over for refinement, the plain one for a fresh start.
GOOD_CODE_INTRO = "An example of such code for a good optimization algorithm is as follows:"
SIMPLE_CODE_INTRO = "An example of such code (a simple random search), is as follows:"

ACTION_REFINE_BEST = "refine_best"
ACTION_CREATE = "create"
ACTION_REFINE_BENCH = "refine_bench"

_ACTIONS = (ACTION_REFINE_BEST, ACTION_CREATE, ACTION_REFINE_BENCH)


class ResponseFormatError(ValueError):
    """The LLM response cannot be used as a candidate."""


class NoDescription(ResponseFormatError):
    pass


class NoCodeBlock(ResponseFormatError):
    pass


class EmptyCode(ResponseFormatError):
    pass


class MissingParent(ValueError):
    """The action needs parent code but the context carries none."""


@dataclass(frozen=True)
class PromptContext:
    """Everything needed to render one prompt.

    ``selected_parent`` is (description, score, source_text); score may be
    None when the parent was never evaluated (a bench seed).
    ``population_summary`` rows are (name, description, score); it is empty
    for initial prompts, which render without the parent block.
    ``action`` is an action kind string or any object with a ``kind`` field.
    """

    suite_task: str  # "pbo_task" | "bbob_task"
    action: object
    population_summary: tuple[tuple[str, str, float], ...] = ()
    selected_parent: tuple[str, float | None, str] | None = None


@dataclass(frozen=True)
class ParsedResponse:
    description: str
    code: CandidateSource


def load_templates(directory: str | Path | None = None) -> dict[str, str]:
    """Read all templates, preferring per-file overrides from ``directory``."""
    packaged = resources.files("benchevo") / "templates"
    out = {}
    for name in TEMPLATE_NAMES:
        override = Path(directory) / f"{name}.txt" if directory else None
        if override is not None and override.exists():
            out[name] = override.read_text(encoding="utf-8").rstrip("\n")
        else:
            out[name] = (packaged / f"{name}.txt").read_text(encoding="utf-8").rstrip("\n")
    return out


def action_kind(action) -> str:
    kind = getattr(action, "kind", action)
    if kind not in _ACTIONS:
        raise ValueError(f"unknown action kind {kind!r}")
    return kind


def _fence(code: str) -> str:
    return f"```python\n{code}\n```"


def render(ctx: PromptContext, templates: dict[str, str] | None = None) -> str:
    """Assemble the prompt text for one query. Deterministic."""
    t = templates if templates is not None else load_templates()
    kind = action_kind(ctx.action)
    if ctx.selected_parent is None:
        raise MissingParent(f"action {kind} needs parent code to embed")
    description, score, source_text = ctx.selected_parent
    if ctx.suite_task == "pbo_task":
        task = t["task_pbo"]
    elif ctx.suite_task == "bbob_task":
        task = t["task_bbob"]
    else:
        raise ValueError(f"unknown suite_task {ctx.suite_task!r}")

    blocks = [t["role"], task]
    if ctx.population_summary:
        population = "\n".join(
            f"{name}: {desc} (Score: {value})"
            for name, desc, value in ctx.population_summary
        )
        blocks.append(
            t["parent_block"].format(
                population=population, selected_description=description
            )
        )
    elif kind == ACTION_CREATE:
        blocks.append(SIMPLE_CODE_INTRO)
    else:
        blocks.append(GOOD_CODE_INTRO)
    blocks.append(_fence(source_text))

    if kind == ACTION_CREATE:
        blocks.append(t["strategy_create"])
    elif kind == ACTION_REFINE_BENCH or not ctx.population_summary:
        blocks.append(t["strategy_refine_bench"])
    else:
        blocks.append(t["strategy_refine"])
    blocks.append(t["expected_output"])
    return "\n\n".join(blocks)


_DESCRIPTION_RE = re.compile(r"^#\s*Description\s*:[ \t]*(.*)$", re.MULTILINE)
_FENCE_RE = re.compile(r"```([^\n`]*)\n(.*?)```", re.DOTALL)
_CLASS_RE = re.compile(r"^\s*class\s+([A-Za-z_]\w*)", re.MULTILINE)
_DEF_RE = re.compile(r"^\s*def\s+([A-Za-z_]\w*)", re.MULTILINE)


def parse_response(text: str, language_tag: str = "python") -> ParsedResponse:
    """Extract (description, code) from a model response.

    Takes the first "# Description:" line and the first fenced code block.
    Providers annotate fences inconsistently, so the annotation is accepted
    but ignored; the runner dispatch tag comes from the caller. The entry
    name is the first class defined in the code, or the first function when
    there is no class.
    """
    normalized = text.replace("\r\n", "\n")
    desc_match = _DESCRIPTION_RE.search(normalized)
    if desc_match is None or not desc_match.group(1).strip():
        raise NoDescription("no '# Description:' line found")
    description = desc_match.group(1).strip()

    fence_match = _FENCE_RE.search(normalized)
    if fence_match is None:
        raise NoCodeBlock("no fenced code block found")
    code = fence_match.group(2)
    if code.endswith("\n"):
        code = code[:-1]
    if not code.strip():
        raise EmptyCode("fenced code block is empty")

    class_match = _CLASS_RE.search(code)
    if class_match is not None:
        entry = class_match.group(1)
    else:
        def_match = _DEF_RE.search(code)
        if def_match is None:
            raise EmptyCode("code defines no class or function")
        entry = def_match.group(1)

    return ParsedResponse(
        description=description,
        code=CandidateSource(
            language_tag=language_tag, source_text=code, entry_name=entry
        ),
    )
