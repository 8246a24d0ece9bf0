"""Domain routing: contrastive linear projection over frozen backend embeddings
plus nearest-centroid inference.

The trainable part is a single D x D' matrix.  Training minimizes, over
triplets (anchor, positive, negative),

    L = (1/N) * sum_i [ ||a_i - p_i||^2 + max(0, alpha - ||a_i - n_i||)^2 ]

with a_i = e(anchor_i) W and so on.  Inference projects the query, compares
cosine similarity against per-domain centroids, and falls back to "Others"
below a confidence threshold tau.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import DomainLabel, OTHERS_DOMAIN_ID, others_domain
from .errors import MissingClassError, ShapeError, UsageError

DEFAULT_ALPHA = 1.0
DEFAULT_TAU = 0.3
MAX_LR_HALVINGS = 20


@dataclass
class ProjectionModel:
    weight: np.ndarray  # D x D'
    margin_alpha: float
    train_log: list = field(default_factory=list)  # (epoch, loss)

    def project(self, vectors: np.ndarray) -> np.ndarray:
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        if vectors.shape[1] != self.weight.shape[0]:
            raise ShapeError(
                f"embedding dim {vectors.shape[1]} != projection input dim {self.weight.shape[0]}"
            )
        return vectors @ self.weight


def identity_projection(dim: int, out_dim: int | None = None, alpha: float = DEFAULT_ALPHA) -> ProjectionModel:
    """Identity initialization, padded/truncated to D x D'."""
    out_dim = dim if out_dim is None else out_dim
    weight = np.eye(dim, out_dim)
    return ProjectionModel(weight=weight, margin_alpha=alpha)


def triplet_loss(anchors, positives, negatives, alpha: float, weight: np.ndarray):
    """Loss and analytic gradient wrt the projection weight.

    Inputs are raw embeddings (N x D); the loss is evaluated on the projected
    vectors.  At ||a - n|| = 0 the distance is non-differentiable; the zero
    subgradient is used there.
    """
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    positives = np.atleast_2d(np.asarray(positives, dtype=float))
    negatives = np.atleast_2d(np.asarray(negatives, dtype=float))
    if not (anchors.shape == positives.shape == negatives.shape):
        raise ShapeError("anchors, positives, negatives must have equal shapes")
    if anchors.shape[1] != weight.shape[0]:
        raise ShapeError(f"embedding dim {anchors.shape[1]} != weight rows {weight.shape[0]}")
    if alpha <= 0:
        raise UsageError("alpha must be > 0")

    n = anchors.shape[0]
    proj_a = anchors @ weight
    proj_p = positives @ weight
    proj_n = negatives @ weight

    diff_p = proj_a - proj_p
    diff_n = proj_a - proj_n
    pos_term = np.sum(diff_p**2, axis=1)
    neg_dist = np.linalg.norm(diff_n, axis=1)
    hinge = np.maximum(0.0, alpha - neg_dist)
    loss = float(np.mean(pos_term + hinge**2))

    # d/dW ||(x_a - x_p) W||^2 = 2 (x_a - x_p)^T (a - p)
    grad = 2.0 * (anchors - positives).T @ diff_p
    active = (hinge > 0) & (neg_dist > 0)
    if np.any(active):
        coef = (-2.0 * hinge[active] / neg_dist[active])[:, None]
        grad += (anchors - negatives)[active].T @ (coef * diff_n[active])
    return loss, grad / n


def train_projection(
    triplets,
    backend,
    alpha: float = DEFAULT_ALPHA,
    lr: float = 0.05,
    epochs: int = 50,
    seed: int = 0,
    out_dim: int | None = None,
) -> ProjectionModel:
    """Full-batch gradient descent with backtracking (halve lr on any loss
    increase, at most 20 halvings per step).  Deterministic given seed."""
    if not triplets:
        raise UsageError("at least one training triplet is required")
    texts = [t for triple in triplets for t in triple]
    embedded = np.array(backend.embed(texts))
    anchors = embedded[0::3]
    positives = embedded[1::3]
    negatives = embedded[2::3]

    dim = anchors.shape[1]
    model = identity_projection(dim, out_dim, alpha)
    weight = model.weight
    loss, grad = triplet_loss(anchors, positives, negatives, alpha, weight)
    for epoch in range(epochs):
        model.train_log.append((epoch, loss))
        step = lr
        for _ in range(MAX_LR_HALVINGS):
            candidate = weight - step * grad
            new_loss, new_grad = triplet_loss(anchors, positives, negatives, alpha, candidate)
            if new_loss <= loss + 1e-12:
                weight, loss, grad = candidate, new_loss, new_grad
                break
            step /= 2.0
        else:
            break  # no descent step found; converged
    model.weight = weight
    model.train_log.append((epochs, loss))
    return model


@dataclass
class DomainCentroids:
    centroids: dict  # domain_id -> vector in R^{D'}
    support_counts: dict  # domain_id -> int
    domains: dict  # domain_id -> DomainLabel


def build_centroids(labeled_questions, model: ProjectionModel, backend, required_domains=None) -> DomainCentroids:
    """Mean of projected embeddings per domain label (non-"Others" only)."""
    if not labeled_questions:
        raise UsageError("no labeled questions")
    texts = [text for text, _ in labeled_questions]
    projected = model.project(np.array(backend.embed(texts)))

    groups: dict[int, list] = {}
    domains: dict[int, DomainLabel] = {}
    for (text, label), vec in zip(labeled_questions, projected):
        if label.id == OTHERS_DOMAIN_ID:
            continue
        groups.setdefault(label.id, []).append(vec)
        domains[label.id] = label
    if required_domains is not None:
        for label in required_domains:
            if label.id != OTHERS_DOMAIN_ID and label.id not in groups:
                raise MissingClassError(f"domain {label.id} ({label.name}) has no questions")
    centroids = {did: np.mean(np.array(vecs), axis=0) for did, vecs in groups.items()}
    counts = {did: len(vecs) for did, vecs in groups.items()}
    return DomainCentroids(centroids=centroids, support_counts=counts, domains=domains)


def classify(query: str, model: ProjectionModel, centroids: DomainCentroids, tau: float, backend) -> DomainLabel:
    """Nearest centroid by cosine; below-threshold confidence routes to "Others".

    Ties break toward the smallest domain id; the result is invariant under
    positive scaling of the projected query.
    """
    if not 0 <= tau <= 1:
        raise UsageError("tau must lie in [0, 1]")
    if not centroids.centroids:
        raise UsageError("centroids not built")
    projected = model.project(np.array(backend.embed([query])))[0]
    qnorm = np.linalg.norm(projected)
    best_id, best_cos = None, -np.inf
    for did in sorted(centroids.centroids):
        c = centroids.centroids[did]
        denom = qnorm * np.linalg.norm(c)
        cos = float(projected @ c / denom) if denom > 0 else 0.0
        if cos > best_cos:
            best_id, best_cos = did, cos
    if best_cos < tau:
        return others_domain()
    return centroids.domains[best_id]


# --- persistence ------------------------------------------------------------


def save_projection(model: ProjectionModel, path) -> None:
    record = {
        "dims": list(model.weight.shape),
        "alpha": model.margin_alpha,
        "weight": model.weight.ravel().tolist(),  # row-major
        "train_log": [[e, l] for e, l in model.train_log],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh)


def load_projection(path) -> ProjectionModel:
    with open(path, encoding="utf-8") as fh:
        record = json.load(fh)
    weight = np.array(record["weight"], dtype=float).reshape(record["dims"])
    return ProjectionModel(
        weight=weight,
        margin_alpha=record["alpha"],
        train_log=[(e, l) for e, l in record["train_log"]],
    )


@dataclass
class Receptionist:
    """Trained routing bundle used by the orchestrator."""

    model: ProjectionModel
    centroids: DomainCentroids
    backend: object
    tau: float = DEFAULT_TAU

    def classify(self, query: str) -> DomainLabel:
        return classify(query, self.model, self.centroids, self.tau, self.backend)
