"""The slow track: a 2-class linear + softmax head trained on frozen
(observations + hypothesis) embeddings.

Each labeled instance contributes two training examples: the embedding
of (o1 o2 h1) labeled plausible iff the gold answer is H1, and the
embedding of (o1 o2 h2) labeled plausible iff the gold answer is H2.
The optimizer is plain mini-batch gradient descent with decoupled weight
decay (decay shrinks W directly and never touches b), which keeps the
whole training loop dependency-free and bit-deterministic for a fixed
seed. The encoder that produced the embeddings is never updated.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np

from . import jsonutil
from .data import (
    CLASSIFICATION_ROLES,
    EmbeddingRole,
    EmbeddingStore,
    Hypothesis,
    StoreKind,
    check_roles,
)
from .errors import DataError, DomainError
from .kernels import linear_forward, softmax
from .similarity import TrackResult


class Plausibility(IntEnum):
    IMPLAUSIBLE = 0
    PLAUSIBLE = 1


@dataclass
class HeadParams:
    """The classification head: a (2, d) weight matrix and a 2-vector bias.

    Class index 1 is "plausible". Parameters are float64; the float32
    storage convention applies to embedding stores, not to the head.
    """

    W: np.ndarray
    b: np.ndarray

    @property
    def d(self) -> int:
        return self.W.shape[1]

    def copy(self) -> "HeadParams":
        return HeadParams(W=self.W.copy(), b=self.b.copy())


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    batch_size: int
    epochs: int = 3
    weight_decay: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise DomainError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise DomainError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise DomainError(f"epochs must be >= 1, got {self.epochs}")
        if self.weight_decay < 0:
            raise DomainError(f"weight_decay must be >= 0, got {self.weight_decay}")

    def to_record(self) -> dict:
        return {
            "learning_rate": float(self.learning_rate),
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "weight_decay": float(self.weight_decay),
            "seed": self.seed,
        }


@dataclass
class TrainHistory:
    epoch_losses: list = field(default_factory=list)
    wall_seconds: float = 0.0


def init_head(d: int, seed: int) -> HeadParams:
    """Fan-in-scaled init: W ~ U[-1/sqrt(d), 1/sqrt(d)] from a seeded
    PCG64 generator, b = 0. Same (d, seed) gives bit-identical params."""
    if d < 1:
        raise DomainError(f"head dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(d)
    W = rng.uniform(-bound, bound, size=(2, d))
    return HeadParams(W=W, b=np.zeros(2))


def head_prob(head: HeadParams, x) -> float:
    """Probability the head assigns to the "plausible" class for one input."""
    return float(softmax(linear_forward(head.W, head.b, x))[Plausibility.PLAUSIBLE])


def loss_and_grad(head: HeadParams, X, y):
    """Mean cross-entropy over a batch, with exact analytic gradients.

    X is (m, d), y is (m,) with entries 0 (implausible) / 1 (plausible).
    Returns (loss, grad_W, grad_b). Weight decay is not part of the loss;
    the optimizer applies it directly to W.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DomainError(f"batch must be a non-empty (m, d) matrix, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise DomainError(f"labels shape {y.shape} does not match batch of {X.shape[0]}")
    if X.shape[1] != head.d:
        raise DomainError(f"batch dim {X.shape[1]} does not match head dim {head.d}")

    m = X.shape[0]
    Z = X @ head.W.T + head.b  # (m, 2)
    Zs = Z - Z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(Zs).sum(axis=1, keepdims=True))
    log_p = Zs - log_norm
    loss = float(-log_p[np.arange(m), y].mean())

    P = np.exp(log_p)
    dZ = P
    dZ[np.arange(m), y] -= 1.0
    dZ /= m
    grad_W = dZ.T @ X
    grad_b = dZ.sum(axis=0)
    return loss, grad_W, grad_b


def train_head(store: EmbeddingStore, labels, cfg: TrainConfig):
    """Train a head on a POOLED store holding OBS_H1/OBS_H2 records.

    Examples are reshuffled every epoch by a generator seeded from
    cfg.seed; each optimizer step applies
    ``W <- (1 - lr*decay) * W - lr*grad_W`` and ``b <- b - lr*grad_b``
    (decay never touches b). The last short batch of an epoch is used
    as-is. Returns (HeadParams, TrainHistory) with per-epoch mean
    training loss; identical inputs and config reproduce both
    bit-identically.
    """
    if store.kind is not StoreKind.POOLED:
        raise DomainError(f"training requires a POOLED store, got {store.kind.value}")
    n = len(labels)
    if n == 0:
        raise DomainError("cannot train on zero labeled instances")
    check_roles(store, n, CLASSIFICATION_ROLES)

    X = np.empty((2 * n, store.dim), dtype=np.float64)
    y = np.empty(2 * n, dtype=np.intp)
    for i, gold in enumerate(labels):
        X[2 * i] = store.records[(i, EmbeddingRole.OBS_H1)]
        X[2 * i + 1] = store.records[(i, EmbeddingRole.OBS_H2)]
        y[2 * i] = Plausibility.PLAUSIBLE if gold == Hypothesis.H1 else Plausibility.IMPLAUSIBLE
        y[2 * i + 1] = Plausibility.PLAUSIBLE if gold == Hypothesis.H2 else Plausibility.IMPLAUSIBLE

    head = init_head(store.dim, cfg.seed)
    shuffle_rng = np.random.default_rng(cfg.seed)
    decay_factor = 1.0 - cfg.learning_rate * cfg.weight_decay
    history = TrainHistory()

    start = time.perf_counter()
    total = 2 * n
    for _ in range(cfg.epochs):
        order = shuffle_rng.permutation(total)
        loss_sum = 0.0
        for lo in range(0, total, cfg.batch_size):
            batch = order[lo : lo + cfg.batch_size]
            loss, gW, gb = loss_and_grad(head, X[batch], y[batch])
            loss_sum += loss * batch.size
            head.W = head.W * decay_factor - cfg.learning_rate * gW
            head.b = head.b - cfg.learning_rate * gb
        history.epoch_losses.append(loss_sum / total)
    history.wall_seconds = time.perf_counter() - start
    return head, history


def predict_clf(head: HeadParams, emb_oh1, emb_oh2) -> Hypothesis:
    """Choose the hypothesis whose (obs + hypothesis) input the head
    scores as more plausible; exact ties resolve to H1."""
    p1 = head_prob(head, emb_oh1)
    p2 = head_prob(head, emb_oh2)
    return Hypothesis.H1 if p1 >= p2 else Hypothesis.H2


def evaluate_clf(head: HeadParams, store: EmbeddingStore, labels,
                 keep_predictions: bool = False) -> TrackResult:
    """Run the classification track over instances 0..len(labels)-1.

    Wall time covers the scoring loop only; callers reporting whole-track
    cost add the training wall time from TrainHistory.
    """
    if store.kind is not StoreKind.POOLED:
        raise DomainError(f"classification track requires a POOLED store, got {store.kind.value}")
    if store.dim != head.d:
        raise DomainError(f"store dim {store.dim} does not match head dim {head.d}")
    n = len(labels)
    check_roles(store, n, CLASSIFICATION_ROLES)

    pairs = [
        (store.records[(i, EmbeddingRole.OBS_H1)], store.records[(i, EmbeddingRole.OBS_H2)])
        for i in range(n)
    ]

    correct = 0
    kept = [] if keep_predictions else None
    start = time.perf_counter()
    for i, (e1, e2) in enumerate(pairs):
        choice = predict_clf(head, e1, e2)
        if choice == labels[i]:
            correct += 1
        if kept is not None:
            kept.append(choice)
    wall = time.perf_counter() - start

    return TrackResult(accuracy=correct / n if n else 0.0, n=n,
                       wall_seconds=wall, per_instance=kept)


def save_head(path, head: HeadParams, model_id: str, cfg: TrainConfig,
              history: TrainHistory) -> None:
    """Serialize a trained head as JSON with 17-significant-digit floats
    so the parameters roundtrip exactly."""
    record = {
        "model_id": model_id,
        "d": head.d,
        "W": [float(v) for v in head.W.reshape(-1)],
        "b": [float(v) for v in head.b],
        "train_config": cfg.to_record(),
        "epoch_losses": [float(v) for v in history.epoch_losses],
    }
    jsonutil.dump(record, path)


def load_head(path):
    """Read a head file back; returns (HeadParams, full record dict)."""
    try:
        record = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"corrupt head file {path}: {exc.msg}") from exc
    for key in ("model_id", "d", "W", "b"):
        if key not in record:
            raise DataError(f"head file {path} missing field {key!r}")
    d = int(record["d"])
    W = np.asarray(record["W"], dtype=np.float64)
    if W.size != 2 * d:
        raise DataError(f"head file {path}: W has {W.size} entries, expected {2 * d}")
    b = np.asarray(record["b"], dtype=np.float64)
    if b.shape != (2,):
        raise DataError(f"head file {path}: b must have 2 entries")
    head = HeadParams(W=W.reshape(2, d), b=b)
    if not (np.all(np.isfinite(head.W)) and np.all(np.isfinite(head.b))):
        raise DataError(f"head file {path}: non-finite parameter")
    return head, record
