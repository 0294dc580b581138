"""Deterministic vector/matrix kernels used by every other module.

Embeddings are stored as float32, but every reduction here (sum, dot,
norm, matvec) accumulates in float64 so results are stable across
platforms. All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def _as64(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 0:
        raise DomainError(f"{name} must be at least 1-dimensional")
    return arr


def mean_pool(tokens) -> np.ndarray:
    """Average an (n, d) matrix of token vectors into a single d-vector.

    Accumulates in float64 regardless of input dtype. Raises DomainError
    on an empty matrix.
    """
    mat = _as64(tokens, "tokens")
    if mat.ndim != 2:
        raise DomainError(f"expected a 2-d token matrix, got shape {mat.shape}")
    if mat.shape[0] < 1 or mat.shape[1] < 1:
        raise DomainError(f"token matrix must be non-empty, got shape {mat.shape}")
    return mat.mean(axis=0)


def cosine(u, v) -> float:
    """Cosine similarity of two vectors, clamped to [-1, 1].

    The clamp absorbs rounding so downstream argmax and reports never see
    values like 1.0000000002. Zero-norm inputs are a hard error: a zero
    embedding means something upstream went wrong, and silently returning
    0 would corrupt rankings.
    """
    a = _as64(u, "u")
    b = _as64(v, "v")
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.sqrt(np.dot(a, a)))
    nb = float(np.sqrt(np.dot(b, b)))
    if na == 0.0 or nb == 0.0:
        raise DomainError("cosine is undefined for a zero-norm vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def softmax(logits) -> np.ndarray:
    """Numerically safe softmax: subtracts the max before exponentiating.

    Output entries are positive and sum to 1 within 1e-12; adding a
    constant to all logits does not change the result.
    """
    z = _as64(logits, "logits")
    if z.ndim != 1 or z.size < 1:
        raise DomainError(f"expected a non-empty 1-d logit vector, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise DomainError("softmax requires finite logits")
    e = np.exp(z - z.max())
    return e / e.sum()


def linear_forward(W, b, x) -> np.ndarray:
    """Affine map W @ x + b with float64 accumulation.

    W is (k, d), b is (k,), x is (d,); returns the k logits.
    """
    Wm = _as64(W, "W")
    bv = _as64(b, "b")
    xv = _as64(x, "x")
    if Wm.ndim != 2 or bv.ndim != 1 or xv.ndim != 1:
        raise DomainError(
            f"expected W (k,d), b (k,), x (d,); got {Wm.shape}, {bv.shape}, {xv.shape}"
        )
    if Wm.shape[0] != bv.shape[0] or Wm.shape[1] != xv.shape[0]:
        raise DomainError(
            f"dimension mismatch: W {Wm.shape}, b {bv.shape}, x {xv.shape}"
        )
    return Wm @ xv + bv
