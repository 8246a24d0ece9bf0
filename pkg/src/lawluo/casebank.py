"""Legal precedent corpus and exact top-k cosine retrieval.

The index is a plain matrix scan: bank sizes here are modest and exactness is
a tested contract, so no approximate structure is used.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ClampWarning, IoError, ParseError, UsageError

BODY_EMBED_CHARS = 2000
DEFAULT_RETRIEVAL_K = 3


@dataclass(frozen=True)
class Case:
    case_id: str
    title: str
    body: str
    domain_id: int | None = None
    source: str = ""


@dataclass
class CaseBank:
    cases: dict = field(default_factory=dict)  # case_id -> Case, insertion order
    warnings: list = field(default_factory=list)

    def __len__(self):
        return len(self.cases)


def ingest(path) -> CaseBank:
    """Read a JSONL case corpus; duplicate case_id keeps the last record."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IoError(f"cannot read case file {path}: {exc}") from exc
    bank = CaseBank()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            case = Case(
                case_id=record["case_id"],
                title=record.get("title", ""),
                body=record["body"],
                domain_id=record.get("domain_id"),
                source=record.get("source", ""),
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ParseError(f"line {lineno}: {exc}", line_number=lineno) from exc
        if not case.body:
            raise ParseError(f"line {lineno}: empty body", line_number=lineno)
        if case.case_id in bank.cases:
            bank.warnings.append(f"duplicate case_id {case.case_id!r} at line {lineno}; last wins")
            del bank.cases[case.case_id]  # reinsert so the newest record wins
        bank.cases[case.case_id] = case
    return bank


@dataclass
class VectorIndex:
    dimension: int
    case_ids: list
    matrix: np.ndarray  # rows are unit vectors, aligned with case_ids
    backend_tag: str = ""


def build_index(bank: CaseBank, backend) -> VectorIndex:
    """Embed title + leading body text per case and L2-normalize."""
    if not bank.cases:
        raise UsageError("cannot index an empty case bank")
    case_ids = list(bank.cases)
    texts = [
        bank.cases[cid].title + "\n" + bank.cases[cid].body[:BODY_EMBED_CHARS] for cid in case_ids
    ]
    matrix = np.array(backend.embed(texts), dtype=float)
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    matrix = matrix / norms
    return VectorIndex(
        dimension=matrix.shape[1],
        case_ids=case_ids,
        matrix=matrix,
        backend_tag=getattr(backend, "tag", ""),
    )


def retrieve(index: VectorIndex, query: str, k: int, backend):
    """Top-k cases by cosine, descending; ties break by case_id ascending."""
    if k < 1:
        raise UsageError("k must be >= 1")
    if not index.case_ids:
        raise UsageError("index is empty")
    qvec = np.asarray(backend.embed([query])[0], dtype=float)
    qnorm = np.linalg.norm(qvec)
    if qnorm > 0:
        qvec = qvec / qnorm
    scores = index.matrix @ qvec
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], index.case_ids[i]))
    if k > len(order):
        warnings.warn(f"k={k} exceeds index size {len(order)}; clamped", ClampWarning)
        k = len(order)
    return [(index.case_ids[i], float(scores[i])) for i in order[:k]]


# --- persistence ------------------------------------------------------------


def save_index(index: VectorIndex, path) -> None:
    record = {
        "dimension": index.dimension,
        "backend_tag": index.backend_tag,
        "entries": [
            {"case_id": cid, "vector": row.tolist()}
            for cid, row in zip(index.case_ids, index.matrix)
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh)


def load_index(path) -> VectorIndex:
    with open(path, encoding="utf-8") as fh:
        record = json.load(fh)
    entries = record["entries"]
    return VectorIndex(
        dimension=record["dimension"],
        case_ids=[e["case_id"] for e in entries],
        matrix=np.array([e["vector"] for e in entries], dtype=float),
        backend_tag=record.get("backend_tag", ""),
    )
