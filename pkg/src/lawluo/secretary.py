"""Consultation report compilation and validation.

The finished dialogue is compiled into a nine-section report via in-context
demonstrations (four fixed sample reports).  Section headers in the
generation prompt are bilingual markers (ASCII tag + Chinese label) so the
parser stays robust across output languages.
"""

from __future__ import annotations

import datetime
import json
import re
from dataclasses import dataclass
from importlib import resources

from .backends import ChatRequest, chat_message
from .core import Session, Speaker
from .errors import ReportFormatError, UsageError

GENERATION_RETRIES = 3

# (field, ASCII tag, Chinese label) in canonical report order
SECTIONS = [
    ("report_number", "[REPORT_NUMBER]", "报告编号"),
    ("consultation_date", "[CONSULTATION_DATE]", "咨询日期"),
    ("client", "[CLIENT]", "委托人"),
    ("subject", "[SUBJECT]", "咨询事项"),
    ("purpose", "[PURPOSE]", "咨询目的"),
    ("facts_and_background", "[FACTS_AND_BACKGROUND]", "事实与背景"),
    ("legal_analysis", "[LEGAL_ANALYSIS]", "法律分析"),
    ("legal_advice", "[LEGAL_ADVICE]", "法律建议"),
    ("risk_warnings", "[RISK_WARNINGS]", "风险提示"),
]

FIELD_NAMES = [f for f, _, _ in SECTIONS]
_TAG_RE = re.compile(r"^\[(?P<tag>[A-Z_]+)\]\s*(?P<rest>.*)$")


@dataclass(frozen=True)
class ConsultationReport:
    report_number: str
    consultation_date: str  # ISO-8601 date
    client: str
    subject: str
    purpose: str
    facts_and_background: str
    legal_analysis: str
    legal_advice: str
    risk_warnings: str

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in FIELD_NAMES}

    @classmethod
    def from_dict(cls, d: dict) -> "ConsultationReport":
        return cls(**{f: d.get(f, "") for f in FIELD_NAMES})


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple = ()


def validate_report(report: ConsultationReport) -> ValidationResult:
    """All nine sections non-empty and the date parseable; never raises."""
    violations = []
    for name in FIELD_NAMES:
        if not str(getattr(report, name, "")).strip():
            violations.append(f"{name} empty")
    if report.consultation_date.strip():
        try:
            datetime.date.fromisoformat(report.consultation_date)
        except ValueError:
            violations.append("consultation_date invalid")
    return ValidationResult(ok=not violations, violations=tuple(violations))


def render_text(report: ConsultationReport) -> str:
    """Plain-text rendering with the nine bilingual headers."""
    lines = []
    for name, tag, zh in SECTIONS:
        lines.append(f"{tag} {zh}")
        lines.append(getattr(report, name))
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def parse_report_text(text: str) -> ConsultationReport:
    """Inverse of render_text for validated reports; also parses raw backend
    output that uses the ASCII section tags."""
    fields = {name: [] for name in FIELD_NAMES}
    tag_to_field = {tag.strip("[]"): name for name, tag, _ in SECTIONS}
    current = None
    for line in text.splitlines():
        m = _TAG_RE.match(line.strip())
        if m and m.group("tag") in tag_to_field:
            current = tag_to_field[m.group("tag")]
            rest = m.group("rest")
            # strip a trailing bilingual label emitted by render_text
            for name, _, zh in SECTIONS:
                if name == current and rest.strip() == zh:
                    rest = ""
            if rest.strip():
                fields[current].append(rest.strip())
        elif current is not None and line.strip():
            fields[current].append(line.strip())
    return ConsultationReport.from_dict({k: "\n".join(v) for k, v in fields.items()})


def load_demo_reports() -> list[ConsultationReport]:
    raw = resources.files("lawluo.fixtures").joinpath("report_demos.json").read_text("utf-8")
    return [ConsultationReport.from_dict(d) for d in json.loads(raw)]


def _report_prompt(session: Session, demos) -> str:
    parts = ["You are the secretary of a law firm. Example consultation reports:"]
    for i, demo in enumerate(demos, start=1):
        parts.append(f"--- Example {i} ---")
        parts.append(render_text(demo))
    parts.append("--- Transcript of the consultation to report on ---")
    for turn in session.transcript:
        speaker = "User" if turn.speaker is Speaker.USER else "Lawyer"
        parts.append(f"{speaker}: {turn.text}")
    tags = ", ".join(tag for _, tag, _ in SECTIONS)
    parts.append(
        "Compile this dialogue into a consultation report with exactly these "
        f"nine sections, each started by its tag on its own line: {tags}. "
        "Every section must be non-empty."
    )
    return "\n".join(parts)


def generate_report(
    session: Session,
    demos,
    backend,
    report_number: str,
    seed: int = 0,
) -> ConsultationReport:
    """ICL report generation; the number comes from the deployment counter and
    the date from the session start date."""
    if len(demos) != 4:
        raise UsageError(f"exactly 4 demonstration reports are required, got {len(demos)}")
    if not session.transcript:
        raise UsageError("cannot report on an empty transcript")
    prompt = _report_prompt(session, demos)
    missing = FIELD_NAMES
    parsed = None
    for attempt in range(GENERATION_RETRIES):
        request = ChatRequest(
            messages=(chat_message("user", prompt),), temperature=0.2, seed=seed + attempt
        )
        raw = backend.chat(request)
        parsed = parse_report_text(raw)
        data = parsed.to_dict()
        data["report_number"] = report_number
        data["consultation_date"] = session.created_date or datetime.date.today().isoformat()
        parsed = ConsultationReport.from_dict(data)
        missing = [f for f in FIELD_NAMES if not getattr(parsed, f).strip()]
        if not missing:
            break
        prompt += f"\nYour previous draft was missing sections: {', '.join(missing)}. Include all nine."
    if missing:
        raise ReportFormatError(missing)
    result = validate_report(parsed)
    if not result.ok:
        raise ReportFormatError(list(result.violations))
    return parsed
