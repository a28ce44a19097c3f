"""Prompt assembly and completion parsing.

A prompt has three stages: a task description, the few-shot demonstrations
collected from the annotator so far, and the target pair with an answer
instruction. Rendering is deterministic so identical state always produces
byte-identical prompts, which keeps committee votes attributable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .core import EntityPair, MATCH, validate_label
from .errors import TemplateError, ValidationError

LABEL_WORDS = {MATCH: "yes", 0: "no"}

# Negative phrases must come before the bare affirmative "match" so that
# "not a match" / "non-match" never read as positive.
_DECISION_RE = re.compile(
    r"\b(not\s+a\s+match|non-match|yes|no|match)\b",
    re.IGNORECASE,
)
_NEGATIVE_STARTS = ("not", "non", "no")


def load_default_template(name: str) -> str:
    """Read one of the packaged template assets."""
    return resources.files("promptloop.templates").joinpath(f"{name}.txt").read_text(encoding="utf-8")


@dataclass(frozen=True)
class Demonstration:
    """An annotated pair embedded in the prompt as a few-shot example."""

    pair: EntityPair
    label: int
    explanation: str | None = None
    annotated_at_iteration: int = 1

    def __post_init__(self):
        validate_label(self.label)
        if self.explanation is not None and not self.explanation.strip():
            raise ValidationError(f"explanation for pair {self.pair.id!r} is empty")
        if self.annotated_at_iteration < 1:
            raise ValidationError(
                f"annotated_at_iteration must be >= 1, got {self.annotated_at_iteration}"
            )

    @property
    def sort_key(self) -> tuple[int, str]:
        return (self.annotated_at_iteration, self.pair.id)


@dataclass(frozen=True)
class PromptSpec:
    """Everything needed to render a prompt for any target pair.

    Demonstrations are kept in (annotation iteration, pair id) order so the
    rendered prompt is reproducible and earlier demonstrations are a stable
    prefix of later prompts.
    """

    task_description: str
    demonstrations: tuple[Demonstration, ...]
    input_template: str
    answer_instruction: str

    def __post_init__(self):
        if not self.task_description.strip():
            raise ValidationError("task description must be nonempty")
        keys = [demo.sort_key for demo in self.demonstrations]
        if keys != sorted(keys):
            raise ValidationError("demonstrations must be ordered by (iteration, pair id)")


def render_pair(template: str, pair: EntityPair) -> str:
    """Expand the input template with both records' ``name: value`` lines."""
    for placeholder in ("{left}", "{right}"):
        if placeholder not in template:
            raise TemplateError(f"input template missing placeholder: {placeholder}")
    left = "\n".join(pair.left.lines())
    right = "\n".join(pair.right.lines())
    return template.replace("{left}", left).replace("{right}", right).strip("\n")


def render_prompt(spec: PromptSpec, target: EntityPair) -> str:
    """Render the full prompt for one target pair.

    Emits, in order: the task description, each demonstration (pair, optional
    explanation, label word), the target pair, and the answer instruction.
    """
    blocks = [spec.task_description.strip("\n")]
    for demo in spec.demonstrations:
        lines = [render_pair(spec.input_template, demo.pair)]
        if demo.explanation is not None:
            lines.append(f"Explanation: {demo.explanation.strip()}")
        lines.append(f"Answer: {LABEL_WORDS[demo.label]}")
        blocks.append("\n".join(lines))
    blocks.append(render_pair(spec.input_template, target))
    blocks.append(spec.answer_instruction.strip("\n"))
    return "\n\n".join(blocks)


def parse_label(completion_text: str) -> int | None:
    """Extract a binary decision from a completion, or None if there is none.

    Scans for the first standalone decision token; negative phrases take
    precedence over the bare "match" they contain. None means the completion
    was unparseable, which callers treat as evidence of confusion rather
    than as an error.
    """
    found = _DECISION_RE.search(completion_text)
    if found is None:
        return None
    token = found.group(1).lower()
    return 0 if token.startswith(_NEGATIVE_STARTS) else MATCH
