"""Schema validation and statistics for fine-tuning dialogue corpora.

The interchange format is JSONL, one dialogue record per line:
{"category": ..., "turns": [{"role": "user"|"assistant", "text": ...}], "source": ...}
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field

from .errors import IoError, UsageError

CATEGORIES = (
    "legal_term_explanation",
    "legal_judgment",
    "judicial_interpretation",
    "scenario_qa",
    "single_turn",
    "judicial_exam",
    "multi_turn",
)

MULTI_TURN_MIN = 4


@dataclass(frozen=True)
class LineResult:
    line_number: int
    ok: bool
    reasons: tuple = ()
    category: str | None = None
    turn_count: int = 0


@dataclass
class FileValidation:
    path: str
    lines: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(line.ok for line in self.lines)

    @property
    def passed(self) -> int:
        return sum(1 for line in self.lines if line.ok)

    @property
    def failed(self) -> int:
        return len(self.lines) - self.passed


def _check_record(record) -> tuple[list[str], str | None, int]:
    reasons = []
    category = record.get("category")
    if category not in CATEGORIES:
        reasons.append(f"unknown category {category!r}")
    turns = record.get("turns")
    if not isinstance(turns, list) or len(turns) < 2:
        reasons.append("at least 2 turns required")
        return reasons, category, len(turns) if isinstance(turns, list) else 0
    for i, turn in enumerate(turns):
        expected = "user" if i % 2 == 0 else "assistant"
        if not isinstance(turn, dict) or turn.get("role") != expected:
            reasons.append(f"role order: turn {i + 1} must be {expected}")
            break
        if not str(turn.get("text", "")).strip():
            reasons.append(f"turn {i + 1} text empty")
            break
    if category == "multi_turn" and len(turns) < MULTI_TURN_MIN:
        reasons.append(f"multi_turn requires >= {MULTI_TURN_MIN} turns")
    return reasons, category, len(turns)


def validate_dialogue_file(path) -> FileValidation:
    """Per-line pass/fail with reasons; only unreadable files raise."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw_lines = fh.readlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    report = FileValidation(path=str(path))
    for lineno, line in enumerate(raw_lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            report.lines.append(LineResult(lineno, False, (f"invalid JSON: {exc}",)))
            continue
        reasons, category, turn_count = _check_record(record)
        report.lines.append(
            LineResult(lineno, not reasons, tuple(reasons), category, turn_count)
        )
    return report


def corpus_stats(paths) -> dict:
    """Per-category counts and turn statistics; refuses invalid corpora."""
    validations = [validate_dialogue_file(p) for p in paths]
    failures = [
        f"{v.path}:{line.line_number}: {'; '.join(line.reasons)}"
        for v in validations
        for line in v.lines
        if not line.ok
    ]
    if failures:
        raise UsageError("corpus has invalid records:\n" + "\n".join(failures))
    counts = {category: 0 for category in CATEGORIES}
    turn_counts = []
    for v in validations:
        for line in v.lines:
            counts[line.category] += 1
            turn_counts.append(line.turn_count)
    return {
        "counts": counts,
        "total": sum(counts.values()),
        "mean_turns": statistics.mean(turn_counts) if turn_counts else 0.0,
        "max_turns": max(turn_counts) if turn_counts else 0,
    }
