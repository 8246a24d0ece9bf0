"""Train the contrastive projection on toy data and route some queries.

The receptionist projects backend embeddings through a learned linear map
(triplet loss pulls same-domain questions together) and classifies by nearest
domain centroid under cosine similarity; low-confidence queries fall back to
the catch-all domain.
"""

from lawluo.backends import MockBackend
from lawluo.core import DomainLabel
from lawluo.receptionist import build_centroids, classify, train_projection

MARRIAGE = DomainLabel(1, "Marriage and Family")
LABOR = DomainLabel(3, "Labor Dispute")

QUESTIONS = {
    MARRIAGE: [
        "how do I file for divorce",
        "who keeps the apartment after a divorce",
        "is a prenuptial agreement binding",
    ],
    LABOR: [
        "my employer has not paid my wages",
        "can I be dismissed without notice",
        "how much severance am I owed",
    ],
}


def main() -> None:
    backend = MockBackend()

    triplets = []
    for domain, questions in QUESTIONS.items():
        other = LABOR if domain is MARRIAGE else MARRIAGE
        for i, anchor in enumerate(questions):
            positive = questions[(i + 1) % len(questions)]
            negative = QUESTIONS[other][i]
            triplets.append((anchor, positive, negative))

    model = train_projection(triplets, backend, alpha=1.0, lr=0.05, epochs=30, seed=0)
    first_loss, last_loss = model.train_log[0][1], model.train_log[-1][1]
    print(f"triplet loss {first_loss:.4f} -> {last_loss:.4f} over {len(model.train_log)} steps")

    labeled = [(q, d) for d, qs in QUESTIONS.items() for q in qs]
    centroids = build_centroids(labeled, model, backend)

    # the mock embedding is character-trigram based, so routing here is
    # lexical; a live embedding backend makes this semantic
    for query in [
        "how do I file for divorce papers",
        "my employer has not paid wages for months",
        "completely unrelated question about the weather",
    ]:
        domain = classify(query, model, centroids, tau=0.4, backend=backend)
        print(f"  {query!r} -> {domain.name}")


if __name__ == "__main__":
    main()
