"""The fast track: pick the hypothesis whose embedding is closest to the
combined observations, by cosine similarity.

Instances are independent, so evaluation is a single read-only pass;
repeated evaluation of the same store is bit-deterministic. Wall time is
measured around the scoring loop only, excluding file I/O, which mirrors
how the seconds-scale similarity runtimes are reported.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .data import (
    SIMILARITY_ROLES,
    EmbeddingRole,
    EmbeddingStore,
    Hypothesis,
    StoreKind,
    check_roles,
)
from .errors import DomainError
from .kernels import cosine


@dataclass(frozen=True)
class SimPrediction:
    """Choice plus both cosine scores. Exact ties resolve to H1."""

    choice: Hypothesis
    score_h1: float
    score_h2: float


@dataclass
class TrackResult:
    """Outcome of one track over one split: accuracy = correct / n."""

    accuracy: float
    n: int
    wall_seconds: float
    per_instance: list | None = None

    def to_record(self, model_id: str, track: str) -> dict:
        return {
            "model_id": model_id,
            "track": track,
            "accuracy": self.accuracy,
            "n": self.n,
            "wall_seconds": self.wall_seconds,
        }


def predict_sim(obs, h1, h2) -> SimPrediction:
    """Score both hypotheses against the observation embedding.

    H1 wins ties so the outcome never depends on evaluation order.
    """
    s1 = cosine(obs, h1)
    s2 = cosine(obs, h2)
    choice = Hypothesis.H1 if s1 >= s2 else Hypothesis.H2
    return SimPrediction(choice=choice, score_h1=s1, score_h2=s2)


def evaluate_sim(store: EmbeddingStore, labels, keep_predictions: bool = False) -> TrackResult:
    """Run the similarity track over instances 0..len(labels)-1.

    The store must be POOLED and carry OBS_PAIR, H1 and H2 for every
    labeled instance. Set ``keep_predictions`` to retain per-instance
    predictions; by default only the tally is kept so full-split
    evaluation stays memory-light.
    """
    if store.kind is not StoreKind.POOLED:
        raise DomainError(f"similarity track requires a POOLED store, got {store.kind.value}")
    n = len(labels)
    check_roles(store, n, SIMILARITY_ROLES)

    triples = [
        (
            store.records[(i, EmbeddingRole.OBS_PAIR)],
            store.records[(i, EmbeddingRole.H1)],
            store.records[(i, EmbeddingRole.H2)],
        )
        for i in range(n)
    ]

    correct = 0
    kept = [] if keep_predictions else None
    start = time.perf_counter()
    for i, (obs, e1, e2) in enumerate(triples):
        pred = predict_sim(obs, e1, e2)
        if pred.choice == labels[i]:
            correct += 1
        if kept is not None:
            kept.append(pred)
    wall = time.perf_counter() - start

    return TrackResult(accuracy=correct / n if n else 0.0, n=n,
                       wall_seconds=wall, per_instance=kept)
