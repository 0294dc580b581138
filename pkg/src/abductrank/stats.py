"""Correlation analysis between the two tracks across models.

Pearson runs two-pass (means first) in float64 because accuracy columns
cluster tightly and one-pass formulas lose precision there. Spearman is
Pearson over fractional (average) ranks -- the tie-correct formulation;
the shipped 17-model fixture has a four-way tie in its similarity
column, so the no-ties shortcut would silently give a different rho.
p-values are two-tailed via the Student-t approximation with df = n - 2,
evaluated through a continued-fraction regularized incomplete beta.

All functions are pure and thread-safe.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataError, DomainError, StatsError

RUNS_CSV_COLUMNS = ("model_id", "sim_accuracy", "clf_accuracy", "sim_seconds", "clf_seconds")


@dataclass(frozen=True)
class ModelRun:
    """One encoder's outcome row: accuracies in percent, times in seconds."""

    model_id: str
    sim_accuracy: float
    clf_accuracy: float
    sim_seconds: float
    clf_seconds: float

    def __post_init__(self):
        for name in ("sim_accuracy", "clf_accuracy"):
            v = getattr(self, name)
            if not 0.0 <= v <= 100.0:
                raise DataError(f"{self.model_id}: {name} must be in [0, 100], got {v}")
        for name in ("sim_seconds", "clf_seconds"):
            v = getattr(self, name)
            if v < 0.0:
                raise DataError(f"{self.model_id}: {name} must be >= 0, got {v}")


@dataclass(frozen=True)
class CorrelationReport:
    n: int
    pearson_r: float
    pearson_p: float
    spearman_rho: float
    spearman_p: float
    mean_speedup: float

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "pearson_r": self.pearson_r,
            "pearson_p": self.pearson_p,
            "spearman_rho": self.spearman_rho,
            "spearman_p": self.spearman_p,
            "mean_speedup": self.mean_speedup,
        }


def _column(xs, name: str) -> np.ndarray:
    arr = np.asarray(xs, dtype=np.float64)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    return arr


def pearson(xs, ys) -> float:
    """Product-moment correlation, two-pass, clamped to [-1, 1]."""
    x = _column(xs, "xs")
    y = _column(ys, "ys")
    if x.shape != y.shape:
        raise StatsError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    n = x.shape[0]
    if n < 3:
        raise StatsError(f"need at least 3 pairs, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    vx = float(np.dot(dx, dx))
    vy = float(np.dot(dy, dy))
    if vx == 0.0:
        raise StatsError("zero variance in xs")
    if vy == 0.0:
        raise StatsError("zero variance in ys")
    r = float(np.dot(dx, dy)) / math.sqrt(vx * vy)
    return max(-1.0, min(1.0, r))


def fractional_ranks(xs) -> np.ndarray:
    """Ranks 1..n where tied values share the mean of their positions."""
    x = _column(xs, "xs")
    n = x.shape[0]
    if n < 1:
        raise DomainError("cannot rank an empty sequence")
    order = np.argsort(x, kind="stable")
    ranks = np.empty(n, dtype=np.float64)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and x[order[j + 1]] == x[order[i]]:
            j += 1
        # positions i..j (0-based) share the average of ranks i+1..j+1
        ranks[order[i : j + 1]] = (i + j + 2) / 2.0
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Rank correlation: Pearson over fractional ranks of both columns."""
    return pearson(fractional_ranks(xs), fractional_ranks(ys))


def _beta_cont_frac(a: float, b: float, x: float) -> float:
    # Modified Lentz evaluation of the incomplete-beta continued fraction.
    tiny = 1e-300
    eps = 3e-16
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 301):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise StatsError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) by continued fraction."""
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"shape parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # The continued fraction converges fast only on one side of the mean;
    # use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) for the other side.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


def t_p_value(r: float, n: int) -> float:
    """Two-tailed p-value for a correlation r over n pairs.

    Uses t = r * sqrt((n-2) / (1-r^2)) with df = n - 2, so
    p = I_{df/(df+t^2)}(df/2, 1/2). |r| = 1 returns p = 0 by convention
    rather than dividing by zero. Symmetric in the sign of r.
    """
    if n < 3:
        raise StatsError(f"need at least 3 pairs for a p-value, got {n}")
    if not -1.0 <= r <= 1.0:
        raise DomainError(f"correlation must be in [-1, 1], got {r}")
    if abs(r) == 1.0:
        return 0.0
    df = float(n - 2)
    t_sq = r * r * df / (1.0 - r * r)
    return reg_inc_beta(df / 2.0, 0.5, df / (df + t_sq))


def correlate_runs(runs) -> CorrelationReport:
    """Correlate the two accuracy columns across model runs and report the
    mean per-model speedup (classification seconds / similarity seconds)."""
    runs = list(runs)
    n = len(runs)
    if n < 3:
        raise StatsError(f"need at least 3 runs to correlate, got {n}")
    sim = np.array([run.sim_accuracy for run in runs], dtype=np.float64)
    clf = np.array([run.clf_accuracy for run in runs], dtype=np.float64)
    for name, col in (("sim_accuracy", sim), ("clf_accuracy", clf)):
        if np.all(col == col[0]):
            raise StatsError(f"zero variance in {name} column")
    for run in runs:
        if run.sim_seconds == 0.0:
            raise StatsError(f"{run.model_id}: sim_seconds must be > 0 to compute speedup")

    r = pearson(sim, clf)
    rho = spearman(sim, clf)
    speedups = np.array([run.clf_seconds / run.sim_seconds for run in runs])
    return CorrelationReport(
        n=n,
        pearson_r=r,
        pearson_p=t_p_value(r, n),
        spearman_rho=rho,
        spearman_p=t_p_value(rho, n),
        mean_speedup=float(speedups.mean()),
    )


def read_runs_csv(path) -> list:
    """Read model runs from a CSV with the standard five-column header."""
    runs = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty runs CSV")
        missing = [c for c in RUNS_CSV_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise DataError(f"{path}: runs CSV missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            try:
                runs.append(
                    ModelRun(
                        model_id=row["model_id"],
                        sim_accuracy=float(row["sim_accuracy"]),
                        clf_accuracy=float(row["clf_accuracy"]),
                        sim_seconds=float(row["sim_seconds"]),
                        clf_seconds=float(row["clf_seconds"]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise DataError(f"{path}: bad value at line {lineno}: {exc}") from exc
    return runs


def write_runs_csv(path, runs) -> None:
    """Write runs in the standard format with deterministic bytes."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RUNS_CSV_COLUMNS)
        for run in runs:
            writer.writerow(
                [
                    run.model_id,
                    run.sim_accuracy,
                    run.clf_accuracy,
                    run.sim_seconds,
                    run.clf_seconds,
                ]
            )


def table1_fixture_path() -> Path:
    """Path of the bundled 17-model benchmark fixture."""
    return Path(resources.files("abductrank") / "fixtures" / "table1.csv")
