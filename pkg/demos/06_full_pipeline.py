"""
End-to-end: synthetic encoders through the CLI pipeline
=======================================================

Builds embedding stores for ten synthetic "encoders" whose quality is
controlled by a noise knob, runs the grid and correlation subcommands on
them, and checks that the fast track predicted the slow track's ranking.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from abductrank import EmbeddingRole, EmbeddingStore, Hypothesis, StoreKind, write_embedding_store
from abductrank.cli import main


def make_store(model_id, n, dim, noise, seed):
    """All five roles for n instances; higher noise means a worse encoder."""
    rng = np.random.default_rng(seed)
    plaus = np.zeros(dim)
    plaus[0] = 1.0
    records = {}
    labels = []
    for i in range(n):
        o = rng.normal(size=dim)
        o /= np.linalg.norm(o)
        t = rng.normal(size=dim)
        t -= np.dot(t, o) * o
        t /= np.linalg.norm(t)
        correct = np.cos(0.5) * o + np.sin(0.5) * t + noise * rng.normal(size=dim)
        wrong = rng.normal(size=dim)
        gold = Hypothesis.H1 if rng.random() < 0.5 else Hypothesis.H2
        h1, h2 = (correct, wrong) if gold == Hypothesis.H1 else (wrong, correct)
        good_in = plaus + noise * rng.normal(size=dim)
        bad_in = -plaus + noise * rng.normal(size=dim)
        oh1, oh2 = (good_in, bad_in) if gold == Hypothesis.H1 else (bad_in, good_in)
        for role, vec in (
            (EmbeddingRole.OBS_PAIR, o), (EmbeddingRole.H1, h1), (EmbeddingRole.H2, h2),
            (EmbeddingRole.OBS_H1, oh1), (EmbeddingRole.OBS_H2, oh2),
        ):
            records[(i, role)] = vec.astype(np.float32)
        labels.append(gold)
    return EmbeddingStore(model_id, dim, StoreKind.POOLED, records), labels


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    entries = []
    for k, noise in enumerate(np.geomspace(0.15, 4.0, 10)):
        name = f"synth-{k:02d}"
        for split, n, seed in (("train", 120, 10 + k), ("dev", 100, 510 + k)):
            store, labels = make_store(name, n, 16, float(noise), seed)
            write_embedding_store(store, tmp / f"{name}.{split}.emb")
            (tmp / f"{name}.{split}.lst").write_text(
                "".join(f"{int(g)}\n" for g in labels)
            )
        entries.append({
            "model_id": name,
            "train_embeddings": f"{name}.train.emb",
            "train_labels": f"{name}.train.lst",
            "dev_embeddings": f"{name}.dev.emb",
            "dev_labels": f"{name}.dev.lst",
            "grid": [
                {"learning_rate": 5e-2, "batch_size": 32},
                {"learning_rate": 1e-2, "batch_size": 32},
            ],
        })
    manifest = tmp / "manifest.json"
    manifest.write_text(json.dumps({"models": entries, "defaults": {"seed": 0}}))

    print("== grid: train every point, keep the best per model ==")
    main(["grid", "--manifest", str(manifest), "--out", str(tmp / "out")])

    print("\n== correlate the two tracks across models ==")
    main(["correlate", "--runs", str(tmp / "out" / "runs.csv"),
          "--out", str(tmp / "report.json")])

    report = json.loads((tmp / "report.json").read_text())
    print(f"\nfast track predicts slow track: r = {report['pearson_r']:.3f}, "
          f"rho = {report['spearman_rho']:.3f}")
