"""Domain-specialized response generation.

A persona template (one system prompt with {domain_name} placeholders)
specializes the base model per consultation domain; responses for boss
re-ranking are sampled as n candidates along a temperature schedule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from importlib import resources

from .backends import ChatRequest, chat_message
from .core import OTHERS_DOMAIN_ID, DomainLabel, Session, Speaker
from .errors import BackendUnavailable, UsageError
from .tolc import VerifiedSet, compose_clarified_prompt

TEMPERATURE_BASE = 0.2
TEMPERATURE_STEP = 0.3
HISTORY_CHAR_BUDGET = 24000
TRUNCATION_SENTINEL = "[earlier turns omitted: {n} turns truncated from history]"

GENERALIST_NAME = "general practice"


@dataclass(frozen=True)
class LawyerPersona:
    domain: DomainLabel
    system_prompt: str
    style_directives: tuple = ()


def default_persona_template() -> str:
    return resources.files("lawluo.fixtures").joinpath("persona_template.txt").read_text("utf-8")


def role_enhance(domain: DomainLabel, template: str | None = None) -> LawyerPersona:
    """Deterministic persona from the template; domain 16 gets a generalist
    persona with no specialty claim."""
    if template is None:
        template = default_persona_template()
    name = GENERALIST_NAME if domain.id == OTHERS_DOMAIN_ID else domain.name
    return LawyerPersona(
        domain=domain,
        system_prompt=template.format(domain_name=name),
        style_directives=(
            "maintain a lawyer-like register",
            "answer only from provided facts and retrieved law",
        ),
    )


def generic_persona() -> LawyerPersona:
    """Unspecialized persona used when role enhancement is ablated."""
    return LawyerPersona(
        domain=DomainLabel(OTHERS_DOMAIN_ID, "Others"),
        system_prompt=(
            "You are a lawyer conducting a consultation. Answer the client's "
            "questions carefully, grounded only in the facts they provide."
        ),
    )


def _history_messages(session: Session, user_message: str) -> list:
    turns = list(session.transcript)
    # the latest user turn is resent as the final prompt, not as history
    if turns and turns[-1].speaker is Speaker.USER and turns[-1].text == user_message:
        turns = turns[:-1]
    total = sum(len(t.text) for t in turns)
    dropped = 0
    while turns and total > HISTORY_CHAR_BUDGET:
        total -= len(turns[0].text)
        turns = turns[1:]
        dropped += 1
    messages = []
    if dropped:
        messages.append(chat_message("user", TRUNCATION_SENTINEL.format(n=dropped)))
    for turn in turns:
        role = "user" if turn.speaker is Speaker.USER else "assistant"
        messages.append(chat_message(role, turn.text))
    return messages


def respond(
    persona: LawyerPersona,
    session: Session,
    user_message: str,
    verified: VerifiedSet | None,
    backend,
    n_candidates: int = 1,
    seed: int = 0,
) -> list[str]:
    """Generate n candidate responses; temperature schedule 0.2 + 0.3*j.

    Partial backend failures are tolerated while at least one candidate
    succeeds; total failure raises BackendUnavailable.
    """
    if n_candidates < 1:
        raise UsageError("n_candidates must be >= 1")
    final_prompt = compose_clarified_prompt(verified) if verified is not None else user_message
    messages = (
        [chat_message("system", persona.system_prompt)]
        + _history_messages(session, user_message)
        + [chat_message("user", final_prompt)]
    )
    candidates, failures = [], []
    for j in range(n_candidates):
        request = ChatRequest(
            messages=tuple(messages),
            temperature=TEMPERATURE_BASE + TEMPERATURE_STEP * j,
            seed=seed,
        )
        try:
            candidates.append(backend.chat(request))
        except BackendUnavailable as exc:
            failures.append(exc)
    if not candidates:
        raise BackendUnavailable(f"all {n_candidates} candidate calls failed: {failures[-1]}")
    if failures:
        warnings.warn(f"{len(failures)} of {n_candidates} candidate calls failed")
    return candidates
