"""Tree of legal clarifications.

An ambiguous query becomes the root of a complete K-ary tree.  Each node up
to layer H-1 is expanded by retrieving related precedent cases and asking the
chat backend for exactly K grounded clarification questions.  The user then
marks nodes Yes/No; the marked partition plus the root query forms the
clarified context handed to the lawyer.

Node texts are never invented by the engine: every node carries provenance,
either the user's query (root) or parsed backend output (children).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import GenerationError, UsageError

DEFAULT_K = 3
DEFAULT_H = 3
GENERATION_RETRIES = 3

_NUMBERED_LINE = re.compile(r"^\s*(\d+)[.)]\s*(.+?)\s*$")


class Mark(str, Enum):
    YES = "Yes"
    NO = "No"
    UNMARKED = "Unmarked"


@dataclass(frozen=True)
class ClarificationNode:
    index: int  # BFS numbering, root = 1
    layer: int
    text: str
    provenance: str  # "user" | "backend"
    retrieved_case_ids: tuple = ()
    mark: Mark = Mark.UNMARKED


@dataclass(frozen=True)
class ClarificationTree:
    K: int
    H: int
    nodes: dict  # index -> ClarificationNode
    origin_turn: int = 0

    def node_count(self) -> int:
        return len(self.nodes)

    def layer_size(self, h: int) -> int:
        return sum(1 for n in self.nodes.values() if n.layer == h)

    def to_json(self) -> dict:
        return {
            "K": self.K,
            "H": self.H,
            "origin_turn": self.origin_turn,
            "nodes": [
                {
                    "index": n.index,
                    "layer": n.layer,
                    "parent_index": parent_index(n.index, self.K),
                    "text": n.text,
                    "mark": n.mark.value,
                    "retrieved_case_ids": list(n.retrieved_case_ids),
                }
                for n in sorted(self.nodes.values(), key=lambda n: n.index)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ClarificationTree":
        nodes = {}
        for entry in data["nodes"]:
            nodes[entry["index"]] = ClarificationNode(
                index=entry["index"],
                layer=entry["layer"],
                text=entry["text"],
                provenance="user" if entry["index"] == 1 else "backend",
                retrieved_case_ids=tuple(entry.get("retrieved_case_ids", ())),
                mark=Mark(entry.get("mark", "Unmarked")),
            )
        return cls(K=data["K"], H=data["H"], nodes=nodes, origin_turn=data.get("origin_turn", 0))


def node_index(h: int, k: int, K: int) -> int:
    """BFS index of the k-th node on layer h of a complete K-ary tree:
    (K^(h-1) - 1) / (K - 1) + k."""
    if h < 1:
        raise UsageError("layer must be >= 1")
    layer_width = K ** (h - 1)
    if not 1 <= k <= layer_width:
        raise UsageError(f"position {k} out of range 1..{layer_width} on layer {h}")
    return (layer_width - 1) // (K - 1) + k


def parent_index(index: int, K: int) -> int | None:
    if index <= 1:
        return None
    return (index - 2) // K + 1


def _clarify_prompt(node_text: str, case_snippets: list[str], K: int) -> str:
    parts = [
        "A client raised the following point during a legal consultation:",
        f"  {node_text}",
    ]
    if case_snippets:
        parts.append("Related precedent cases:")
        parts.extend(f"  - {snippet}" for snippet in case_snippets)
    parts.append(
        f"Produce a numbered list of exactly {K} clarification questions "
        "(yes/no answerable) that would pin down the legally relevant facts, "
        "grounded in the cases above. Output only the list, one question per line."
    )
    return "\n".join(parts)


def _parse_numbered(text: str, K: int) -> list[str] | None:
    items = []
    for line in text.splitlines():
        m = _NUMBERED_LINE.match(line)
        if m:
            items.append(m.group(2))
    return items if len(items) == K else None


def build_tree(
    query: str,
    chat_backend,
    retriever,
    K: int = DEFAULT_K,
    H: int = DEFAULT_H,
    seed: int = 0,
    retrieval_k: int = 3,
) -> ClarificationTree:
    """Retrieve-generate expansion of every node on layers 1..H-1.

    `retriever` is a callable (query_text, k) -> [(case_id, snippet)].
    Exactly sum_{h=1}^{H-1} K^(h-1) chat calls and as many retrieval calls
    are made; H=1 yields the root-only tree with zero backend calls.
    """
    from .backends import ChatRequest, chat_message

    if K < 2:
        raise UsageError("branching factor K must be >= 2")
    if H < 1:
        raise UsageError("height H must be >= 1")

    nodes = {1: ClarificationNode(index=1, layer=1, text=query, provenance="user")}
    for h in range(1, H):
        for k in range(1, K ** (h - 1) + 1):
            i = node_index(h, k, K)
            node = nodes[i]
            retrieved = retriever(node.text, retrieval_k)
            case_ids = tuple(cid for cid, _ in retrieved)
            snippets = [snippet for _, snippet in retrieved]
            nodes[i] = ClarificationNode(
                index=node.index,
                layer=node.layer,
                text=node.text,
                provenance=node.provenance,
                retrieved_case_ids=case_ids,
            )

            prompt = _clarify_prompt(node.text, snippets, K)
            questions = None
            raw = ""
            for attempt in range(GENERATION_RETRIES):
                request = ChatRequest(
                    messages=(chat_message("user", prompt),),
                    temperature=0.2,
                    seed=seed + attempt,
                )
                raw = chat_backend.chat(request)
                questions = _parse_numbered(raw, K)
                if questions is not None:
                    break
                prompt += f"\nFormat reminder: reply with exactly {K} lines, numbered 1. to {K}."
            if questions is None:
                raise GenerationError(
                    f"could not parse {K} clarification questions after "
                    f"{GENERATION_RETRIES} attempts",
                    raw_text=raw,
                )
            for j, question in enumerate(questions, start=1):
                child = node_index(h + 1, (k - 1) * K + j, K)
                nodes[child] = ClarificationNode(
                    index=child, layer=h + 1, text=question, provenance="backend"
                )
    return ClarificationTree(K=K, H=H, nodes=nodes)


@dataclass(frozen=True)
class VerifiedSet:
    """Root query plus the user's Yes/No partition of clarification facts."""

    root_query: str
    affirmed: tuple = ()  # node texts, ordered by node index
    negated: tuple = ()


def apply_marks(tree: ClarificationTree, marks: dict) -> VerifiedSet:
    """Partition marked nodes; unmarked nodes are omitted entirely."""
    affirmed, negated = [], []
    for index in sorted(marks):
        if index == 1:
            raise UsageError("the root node cannot be marked")
        if index not in tree.nodes:
            raise UsageError(f"unknown node index {index}")
        value = marks[index]
        mark = Mark(value.capitalize()) if isinstance(value, str) else Mark(value)
        if mark is Mark.YES:
            affirmed.append(tree.nodes[index].text)
        elif mark is Mark.NO:
            negated.append(tree.nodes[index].text)
        else:
            raise UsageError(f"mark for node {index} must be yes or no")
    return VerifiedSet(
        root_query=tree.nodes[1].text, affirmed=tuple(affirmed), negated=tuple(negated)
    )


def compose_clarified_prompt(verified: VerifiedSet) -> str:
    """Deterministic clarified context for the lawyer; empty sections omitted."""
    parts = [f"The client's question: {verified.root_query}"]
    if verified.affirmed:
        parts.append("")
        parts.append("Facts the client has affirmed:")
        parts.extend(f"- {fact}" for fact in verified.affirmed)
    if verified.negated:
        parts.append("")
        parts.append("Facts that do NOT apply:")
        parts.extend(f"- {fact}" for fact in verified.negated)
    return "\n".join(parts)
