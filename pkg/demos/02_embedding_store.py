"""
The binary embedding store
==========================

One file per encoder holds every embedding the harness needs, tagged by
instance index and role. Writing is deterministic; reading validates.
"""

import tempfile
from pathlib import Path

import numpy as np

from abductrank import (
    EmbeddingRole,
    EmbeddingStore,
    StoreKind,
    pool_store,
    read_embedding_store,
    write_embedding_store,
)

rng = np.random.default_rng(0)
dim = 4

# A TOKEN store keeps one (n_tokens, dim) matrix per record; the token
# counts can differ record to record.
records = {}
for i in range(2):
    for role in (EmbeddingRole.OBS_PAIR, EmbeddingRole.H1, EmbeddingRole.H2):
        n_tokens = int(rng.integers(3, 7))
        records[(i, role)] = rng.normal(size=(n_tokens, dim)).astype(np.float32)

store = EmbeddingStore(
    model_id="demo-encoder",
    dim=dim,
    kind=StoreKind.TOKEN,
    records=records,
    separator=" ",
    extra={"truncated": 0},  # extra header fields survive roundtrips
)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "demo.emb"
    write_embedding_store(store, path)
    print(f"wrote {path.stat().st_size} bytes for {len(records)} records")

    back = read_embedding_store(path)
    print("model_id:", back.model_id)
    print("kind:", back.kind.value, " dim:", back.dim)
    print("extra header fields:", back.extra)
    same = all(np.array_equal(back.records[k], records[k]) for k in records)
    print("bit-identical roundtrip:", same)

# Mean-pooling the TOKEN store gives the POOLED store the tracks consume.
pooled = pool_store(store)
print("pooled kind:", pooled.kind.value)
print("one pooled vector:", pooled.records[(0, EmbeddingRole.OBS_PAIR)])
