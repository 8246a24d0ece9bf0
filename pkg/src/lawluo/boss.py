"""Binary reward model over agent outputs, deployed as best-of-n selection.

The model is logistic regression on backend embeddings: score(text) =
sigmoid(w . embed(text) + b), trained with binary cross-entropy.  Candidate
re-ranking takes the argmax score; ties break to the lowest index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError, UsageError

PROB_CLAMP = 1e-12


@dataclass
class RewardModel:
    weight: np.ndarray  # (D,)
    bias: float
    train_log: list = field(default_factory=list)  # (epoch, loss)


def zero_model(dim: int) -> RewardModel:
    return RewardModel(weight=np.zeros(dim), bias=0.0)


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def rm_loss(outputs, labels, model: RewardModel):
    """Binary cross-entropy and analytic gradients (weight, bias).

    Predicted probabilities are clamped to [1e-12, 1 - 1e-12] inside the log
    for numerical stability; gradients use the unclamped sigmoid.
    """
    outputs = np.atleast_2d(np.asarray(outputs, dtype=float))
    labels = np.asarray(labels, dtype=float)
    if outputs.shape[0] != labels.shape[0]:
        raise ShapeError(f"{outputs.shape[0]} outputs vs {labels.shape[0]} labels")
    if outputs.shape[1] != model.weight.shape[0]:
        raise ShapeError(f"embedding dim {outputs.shape[1]} != weight dim {model.weight.shape[0]}")
    n = outputs.shape[0]
    yhat = _sigmoid(outputs @ model.weight + model.bias)
    clamped = np.clip(yhat, PROB_CLAMP, 1.0 - PROB_CLAMP)
    loss = float(-np.mean(labels * np.log(clamped) + (1 - labels) * np.log(1 - clamped)))
    residual = yhat - labels
    grad_w = outputs.T @ residual / n
    grad_b = float(np.mean(residual))
    return loss, (grad_w, grad_b)


def train_rm(labeled_outputs, backend, lr: float = 0.5, epochs: int = 200, seed: int = 0) -> RewardModel:
    """Full-batch gradient descent from the zero model; deterministic given seed."""
    if not labeled_outputs:
        raise UsageError("no labeled outputs")
    labels = np.array([label for _, label in labeled_outputs], dtype=float)
    if len(set(labels.tolist())) < 2:
        raise UsageError("training data must contain both labels")
    outputs = np.array(backend.embed([text for text, _ in labeled_outputs]))
    model = zero_model(outputs.shape[1])
    for epoch in range(epochs):
        loss, (grad_w, grad_b) = rm_loss(outputs, labels, model)
        model.train_log.append((epoch, loss))
        model.weight = model.weight - lr * grad_w
        model.bias = model.bias - lr * grad_b
    return model


def score(model: RewardModel, output_text: str, backend) -> float:
    """Probability in (0, 1) that the output is 'better'."""
    vec = np.asarray(backend.embed([output_text])[0], dtype=float)
    if vec.shape[0] != model.weight.shape[0]:
        raise ShapeError(f"embedding dim {vec.shape[0]} != weight dim {model.weight.shape[0]}")
    return float(_sigmoid(vec @ model.weight + model.bias))


def select_best(model: RewardModel, candidates, backend, enabled: bool = True):
    """Argmax-score candidate; ties and disabled boss both resolve to index 0."""
    if not candidates:
        raise UsageError("no candidates to select from")
    if not enabled or len(candidates) == 1:
        return 0, (score(model, candidates[0], backend) if enabled else None)
    scores = [score(model, text, backend) for text in candidates]
    best = max(range(len(scores)), key=lambda i: (scores[i], -i))
    return best, scores[best]


# --- persistence ------------------------------------------------------------


def save_rm(model: RewardModel, path) -> None:
    record = {
        "dims": int(model.weight.shape[0]),
        "weight": model.weight.tolist(),
        "bias": model.bias,
        "train_log": [[e, l] for e, l in model.train_log],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh)


def load_rm(path) -> RewardModel:
    with open(path, encoding="utf-8") as fh:
        record = json.load(fh)
    return RewardModel(
        weight=np.array(record["weight"], dtype=float),
        bias=float(record["bias"]),
        train_log=[(e, l) for e, l in record["train_log"]],
    )
