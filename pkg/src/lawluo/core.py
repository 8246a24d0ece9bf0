"""Domain types and the session state machine shared by every agent.

Sessions are immutable values evolved by events.  The transition relation is
the consultation SOP:

    Reception --DomainAssigned--> Consultation
    Consultation --ClarificationRequested--> AwaitingMarks
    AwaitingMarks --MarksSubmitted--> Consultation
    Consultation --CloseRequested--> ReportGeneration
    ReportGeneration --ReportReady--> BossReview
    BossReview --Approved--> Closed

plus user/lawyer turn events that self-loop on Consultation.  Replaying the
full event log of any session reconstructs it exactly.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources

from .errors import ConfigError, PhaseError

DOMAIN_COUNT = 16
OTHERS_DOMAIN_ID = 16


class Phase(str, Enum):
    RECEPTION = "Reception"
    CONSULTATION = "Consultation"
    AWAITING_MARKS = "AwaitingMarks"
    REPORT_GENERATION = "ReportGeneration"
    BOSS_REVIEW = "BossReview"
    CLOSED = "Closed"


class Speaker(str, Enum):
    USER = "user"
    LAWYER = "lawyer"


@dataclass(frozen=True)
class DomainLabel:
    """One of the 16 consultation domains; id 16 is always "Others"."""

    id: int
    name: str


def load_domains(path=None) -> tuple[DomainLabel, ...]:
    """Load the deployment's domain taxonomy (default: packaged fixture)."""
    if path is None:
        raw = resources.files("lawluo.fixtures").joinpath("domains.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    entries = json.loads(raw)
    labels = tuple(DomainLabel(id=e["id"], name=e["name"]) for e in entries)
    if len(labels) != DOMAIN_COUNT:
        raise ConfigError(f"expected {DOMAIN_COUNT} domains, got {len(labels)}")
    if [d.id for d in labels] != list(range(1, DOMAIN_COUNT + 1)):
        raise ConfigError("domain ids must be unique and contiguous 1..16")
    if labels[-1].name != "Others":
        raise ConfigError('domain 16 must be named "Others"')
    return labels


def others_domain() -> DomainLabel:
    return DomainLabel(id=OTHERS_DOMAIN_ID, name="Others")


@dataclass(frozen=True)
class Turn:
    index: int
    speaker: Speaker
    text: str
    clarification_used: bool = False


@dataclass(frozen=True)
class TolcTrigger:
    """When clarification fires: always, never, or on short queries."""

    mode: str = "short_query"  # always | never | short_query
    threshold: int = 12  # token count for short_query

    def fires(self, text: str) -> bool:
        if self.mode == "always":
            return True
        if self.mode == "never":
            return False
        return len(text.split()) < self.threshold


@dataclass(frozen=True)
class AblationConfig:
    receptionist_enabled: bool = True
    role_enhancement_enabled: bool = True
    tolc_enabled: bool = True
    boss_enabled: bool = True
    tolc_trigger: TolcTrigger = TolcTrigger()
    n_candidates: int = 3

    def validate(self) -> None:
        if self.n_candidates < 1:
            raise ConfigError(f"n_candidates must be >= 1, got {self.n_candidates}")
        if self.tolc_trigger.mode not in ("always", "never", "short_query"):
            raise ConfigError(f"unknown tolc_trigger mode {self.tolc_trigger.mode!r}")

    def to_dict(self) -> dict:
        return {
            "receptionist_enabled": self.receptionist_enabled,
            "role_enhancement_enabled": self.role_enhancement_enabled,
            "tolc_enabled": self.tolc_enabled,
            "boss_enabled": self.boss_enabled,
            "tolc_trigger": {"mode": self.tolc_trigger.mode, "threshold": self.tolc_trigger.threshold},
            "n_candidates": self.n_candidates,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AblationConfig":
        trig = d.get("tolc_trigger", {})
        return cls(
            receptionist_enabled=d.get("receptionist_enabled", True),
            role_enhancement_enabled=d.get("role_enhancement_enabled", True),
            tolc_enabled=d.get("tolc_enabled", True),
            boss_enabled=d.get("boss_enabled", True),
            tolc_trigger=TolcTrigger(trig.get("mode", "short_query"), trig.get("threshold", 12)),
            n_candidates=d.get("n_candidates", 3),
        )


# --- events -----------------------------------------------------------------


@dataclass(frozen=True)
class SessionEvent:
    @property
    def event_type(self) -> str:
        return type(self).__name__

    def payload(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class DomainAssigned(SessionEvent):
    domain_id: int
    domain_name: str


@dataclass(frozen=True)
class UserTurnAdded(SessionEvent):
    text: str
    clarification_used: bool = False


@dataclass(frozen=True)
class LawyerTurnAdded(SessionEvent):
    text: str
    clarification_used: bool = False


@dataclass(frozen=True)
class ClarificationRequested(SessionEvent):
    tree: dict


@dataclass(frozen=True)
class MarksSubmitted(SessionEvent):
    marks: dict
    affirmed_indices: tuple = ()
    negated_indices: tuple = ()


@dataclass(frozen=True)
class CloseRequested(SessionEvent):
    pass


@dataclass(frozen=True)
class ReportReady(SessionEvent):
    report: dict


@dataclass(frozen=True)
class Approved(SessionEvent):
    score: float | None = None
    flagged: bool = False


EVENT_TYPES = {
    cls.__name__: cls
    for cls in (
        DomainAssigned,
        UserTurnAdded,
        LawyerTurnAdded,
        ClarificationRequested,
        MarksSubmitted,
        CloseRequested,
        ReportReady,
        Approved,
    )
}


@dataclass(frozen=True)
class Session:
    session_id: str
    phase: Phase
    config: AblationConfig
    seed: int
    initial_state: str = ""
    created_date: str = ""
    domain: DomainLabel | None = None
    transcript: tuple[Turn, ...] = ()
    pending_tree: dict | None = None
    report: dict | None = None
    boss_score: float | None = None
    boss_flagged: bool = False


def new_session(
    config: AblationConfig,
    initial_state: str = "",
    seed: int = 0,
    session_id: str | None = None,
    created_date: str = "",
) -> Session:
    """Open a fresh session; skips reception when the receptionist is ablated."""
    config.validate()
    if session_id is None:
        session_id = uuid.uuid4().hex
    if config.receptionist_enabled:
        phase, domain = Phase.RECEPTION, None
    else:
        phase, domain = Phase.CONSULTATION, others_domain()
    return Session(
        session_id=session_id,
        phase=phase,
        config=config,
        seed=seed,
        initial_state=initial_state,
        created_date=created_date,
        domain=domain,
    )


def _append_turn(session: Session, speaker: Speaker, text: str, clarification_used: bool) -> Session:
    if session.transcript:
        last = session.transcript[-1].speaker
        expected = Speaker.LAWYER if last == Speaker.USER else Speaker.USER
    else:
        expected = Speaker.USER
    if speaker != expected:
        raise PhaseError(session.phase.value, f"{speaker.value} turn (expected {expected.value})")
    turn = Turn(len(session.transcript) + 1, speaker, text, clarification_used)
    return replace(session, transcript=session.transcript + (turn,))


def apply_event(session: Session, event: SessionEvent) -> Session:
    """Evolve a session by one event; illegal edges raise PhaseError."""
    phase = session.phase
    if isinstance(event, DomainAssigned):
        if phase is not Phase.RECEPTION:
            raise PhaseError(phase.value, event.event_type)
        return replace(
            session,
            phase=Phase.CONSULTATION,
            domain=DomainLabel(event.domain_id, event.domain_name),
        )
    if isinstance(event, UserTurnAdded):
        if phase is not Phase.CONSULTATION:
            raise PhaseError(phase.value, event.event_type)
        return _append_turn(session, Speaker.USER, event.text, event.clarification_used)
    if isinstance(event, LawyerTurnAdded):
        if phase is not Phase.CONSULTATION:
            raise PhaseError(phase.value, event.event_type)
        return _append_turn(session, Speaker.LAWYER, event.text, event.clarification_used)
    if isinstance(event, ClarificationRequested):
        if phase is not Phase.CONSULTATION:
            raise PhaseError(phase.value, event.event_type)
        return replace(session, phase=Phase.AWAITING_MARKS, pending_tree=event.tree)
    if isinstance(event, MarksSubmitted):
        if phase is not Phase.AWAITING_MARKS:
            raise PhaseError(phase.value, event.event_type)
        return replace(session, phase=Phase.CONSULTATION, pending_tree=None)
    if isinstance(event, CloseRequested):
        if phase is not Phase.CONSULTATION:
            raise PhaseError(phase.value, event.event_type)
        return replace(session, phase=Phase.REPORT_GENERATION)
    if isinstance(event, ReportReady):
        if phase is not Phase.REPORT_GENERATION:
            raise PhaseError(phase.value, event.event_type)
        return replace(session, phase=Phase.BOSS_REVIEW, report=event.report)
    if isinstance(event, Approved):
        if phase is not Phase.BOSS_REVIEW:
            raise PhaseError(phase.value, event.event_type)
        return replace(session, phase=Phase.CLOSED, boss_score=event.score, boss_flagged=event.flagged)
    raise PhaseError(phase.value, type(event).__name__)


def replay(initial: Session, events) -> Session:
    """Fold a log over apply_event; pure function of (initial, events)."""
    session = initial
    for event in events:
        session = apply_event(session, event)
    return session


# --- event log serialization (one JSON object per line) ---------------------


def event_to_record(seq: int, timestamp: str, event: SessionEvent) -> dict:
    payload = event.payload()
    if isinstance(event, MarksSubmitted):
        payload["affirmed_indices"] = list(event.affirmed_indices)
        payload["negated_indices"] = list(event.negated_indices)
        payload["marks"] = {str(k): v for k, v in event.marks.items()}
    return {"seq": seq, "timestamp": timestamp, "event_type": event.event_type, "payload": payload}


def record_to_event(record: dict) -> SessionEvent:
    cls = EVENT_TYPES[record["event_type"]]
    payload = dict(record["payload"])
    if cls is MarksSubmitted:
        payload["marks"] = {int(k): v for k, v in payload["marks"].items()}
        payload["affirmed_indices"] = tuple(payload.get("affirmed_indices", ()))
        payload["negated_indices"] = tuple(payload.get("negated_indices", ()))
    return cls(**payload)


def dump_record(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True)
