"""Evaluation protocols: forced-choice pairwise judging, per-turn 1-10
scoring, and win-rate aggregation.

Pairwise judging evaluates both orderings to control position bias; the two
verdicts must agree on the underlying response, otherwise a seeded coin
decides and the disagreement is recorded.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass

from .backends import ChatRequest, chat_message
from .core import Speaker
from .errors import JudgeError, UsageError

JUDGE_CRITERIA = "lawyer-like language style, usefulness of legal advice, and accuracy of legal knowledge"
JUDGE_RETRIES = 3

_VERDICT_RE = re.compile(r"\b([AB])\b")
_INT_RE = re.compile(r"-?\d+")


@dataclass(frozen=True)
class PairwiseResult:
    question: str
    response_a: str
    response_b: str
    winner: str  # "A" | "B"
    judge_tag: str
    disagreement: bool = False


@dataclass(frozen=True)
class TurnScore:
    turn_index: int
    score: int


def _pairwise_prompt(question: str, first: str, second: str) -> str:
    return "\n".join(
        [
            "You are judging two candidate answers to a legal question on these "
            f"criteria: {JUDGE_CRITERIA}.",
            f"Question: {question}",
            "[RESPONSE A]",
            first,
            "[RESPONSE B]",
            second,
            "[VERDICT] Reply with exactly one letter, A or B, for the better response.",
        ]
    )


def _ask_verdict(judge_backend, prompt: str, seed: int) -> str:
    for attempt in range(JUDGE_RETRIES):
        reply = judge_backend.chat(
            ChatRequest(messages=(chat_message("user", prompt),), temperature=0.0, seed=seed + attempt)
        )
        m = _VERDICT_RE.search(reply.strip())
        if m:
            return m.group(1)
    raise JudgeError(f"unparsable verdict after {JUDGE_RETRIES} attempts: {reply!r}")


def pairwise_judge(
    judge_backend, question: str, response_a: str, response_b: str, seed: int = 0, judge_tag: str = ""
) -> PairwiseResult:
    if not (question and response_a and response_b):
        raise UsageError("question and both responses must be non-empty")
    v1 = _ask_verdict(judge_backend, _pairwise_prompt(question, response_a, response_b), seed)
    v2 = _ask_verdict(judge_backend, _pairwise_prompt(question, response_b, response_a), seed)
    v2_mapped = "A" if v2 == "B" else "B"  # map swapped-order verdict back
    if v1 == v2_mapped:
        winner, disagreement = v1, False
    else:
        winner = random.Random(seed).choice(["A", "B"])
        disagreement = True
    tag = judge_tag or getattr(judge_backend, "tag", "judge")
    return PairwiseResult(question, response_a, response_b, winner, tag, disagreement)


def win_rate(results, subject: str) -> float:
    """Fraction of forced-choice wins for subject A or B."""
    if not results:
        raise UsageError("no results to aggregate")
    if subject not in ("A", "B"):
        raise UsageError("subject must be A or B")
    wins = sum(1 for r in results if r.winner == subject)
    return wins / len(results)


def _score_prompt(context_lines, response: str) -> str:
    return "\n".join(
        [
            "You are scoring a lawyer's response in a legal consultation on these "
            f"criteria: {JUDGE_CRITERIA}.",
            "Dialogue so far:",
            *context_lines,
            "Response to score:",
            response,
            "Give a single integer score from 1 to 10. Reply with the number only.",
        ]
    )


def turn_scores(judge_backend, transcript, seed: int = 0) -> list[TurnScore]:
    """One 1-10 score per lawyer turn, in turn order."""
    lawyer_turns = [t for t in transcript if t.speaker is Speaker.LAWYER]
    if not lawyer_turns:
        raise UsageError("transcript has no lawyer turns")
    scores = []
    for turn in lawyer_turns:
        context = [
            f"{t.speaker.value}: {t.text}" for t in transcript if t.index < turn.index
        ]
        prompt = _score_prompt(context, turn.text)
        value = None
        for attempt in range(JUDGE_RETRIES):
            reply = judge_backend.chat(
                ChatRequest(
                    messages=(chat_message("user", prompt),), temperature=0.0, seed=seed + attempt
                )
            )
            m = _INT_RE.search(reply)
            if m and 1 <= int(m.group()) <= 10:
                value = int(m.group())
                break
        if value is None:
            raise JudgeError(f"no in-range score for turn {turn.index} after {JUDGE_RETRIES} attempts")
        scores.append(TurnScore(turn_index=turn.index, score=value))
    return scores


# --- file runners -----------------------------------------------------------


def run_pairwise_file(path, judge_backend, seed: int = 0):
    """Judge a JSONL file of {question, response_a, response_b}; returns
    (results, summary) where summary = {n, wins, win_rate} for subject A."""
    results = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            rec = json.loads(line)
            results.append(
                pairwise_judge(
                    judge_backend, rec["question"], rec["response_a"], rec["response_b"], seed=seed + i
                )
            )
    wins = sum(1 for r in results if r.winner == "A")
    summary = {"n": len(results), "wins": wins, "win_rate": win_rate(results, "A") if results else 0.0}
    return results, summary
