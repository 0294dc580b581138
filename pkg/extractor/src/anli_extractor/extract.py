"""Run a frozen encoder over instance texts and build a store.

The encoder is used in evaluation mode under no_grad, so outputs are
deterministic for a fixed checkpoint: two runs of the same job produce
byte-identical stores. Pooling averages the final-layer vectors of all
non-padding positions (sequence-delimiter tokens included, padding
masked out), accumulating in float64 and storing float32; a TOKEN store
keeps exactly those non-padding vectors, so pooling it downstream
reproduces the POOLED export up to float32 rounding.
"""

from __future__ import annotations

import numpy as np
import torch

from .dataset import load_instances, role_text
from .errors import ExtractorError
from .job import ExtractionJob
from .storefmt import ExtractedStore, write_store

_MAX_LENGTH_CAP = 512
_SENTINEL_LIMIT = 100_000  # tokenizers report huge sentinels for "no limit"


def resolve_model(job: ExtractionJob):
    """Load tokenizer and frozen encoder for a job; errors are data errors."""
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(job.model_id, revision=job.revision)
        model = AutoModel.from_pretrained(job.model_id, revision=job.revision)
    except (OSError, ValueError, EnvironmentError) as exc:
        raise ExtractorError(f"cannot resolve model {job.model_id!r}: {exc}") from exc
    model.eval()
    model.to(torch.device(job.device))
    return tokenizer, model


def effective_max_length(job: ExtractionJob, tokenizer) -> int:
    if job.max_length is not None:
        return job.max_length
    limit = int(getattr(tokenizer, "model_max_length", _MAX_LENGTH_CAP))
    if limit > _SENTINEL_LIMIT:
        return _MAX_LENGTH_CAP
    return min(limit, _MAX_LENGTH_CAP)


def extract_store(job: ExtractionJob) -> ExtractedStore:
    """Embed every (instance, role) text and return the in-memory store."""
    instances = load_instances(job.instances)
    if not instances:
        raise ExtractorError(f"no instances in {job.instances}")
    tokenizer, model = resolve_model(job)
    device = torch.device(job.device)
    max_length = effective_max_length(job, tokenizer)
    dim = int(model.config.hidden_size)

    keys = []
    texts = []
    for i, instance in enumerate(instances):
        for role in job.roles:
            keys.append((i, role))
            texts.append(role_text(instance, role, job.separator))

    # Count sequences the length limit will clip, before padding them.
    truncated = sum(
        1
        for ids in tokenizer(texts, truncation=False)["input_ids"]
        if len(ids) > max_length
    )

    records = {}
    for lo in range(0, len(texts), job.batch_size):
        batch_texts = texts[lo : lo + job.batch_size]
        enc = tokenizer(
            batch_texts,
            padding=True,
            truncation=True,
            max_length=max_length,
            return_tensors="pt",
        ).to(device)
        with torch.no_grad():
            hidden = model(**enc).last_hidden_state  # (b, seq, dim)
        mask = enc["attention_mask"].bool()
        for row in range(hidden.shape[0]):
            tokens = hidden[row][mask[row]].cpu().numpy().astype(np.float32)
            if job.kind == "POOLED":
                arr = tokens.astype(np.float64).mean(axis=0).astype(np.float32)
            else:
                arr = tokens
            records[keys[lo + row]] = arr

    extra = {"max_length": max_length, "truncated": truncated}
    if job.revision is not None:
        extra["revision"] = job.revision
    return ExtractedStore(
        model_id=job.model_id,
        dim=dim,
        kind=job.kind,
        records=records,
        separator=job.separator,
        created_by="anli-extract",
        extra=extra,
    )


def run_extraction(job: ExtractionJob, out_path) -> dict:
    """Extract and write; returns a small summary for reporting."""
    store = extract_store(job)
    write_store(store, out_path)
    return {
        "model_id": store.model_id,
        "dim": store.dim,
        "kind": store.kind,
        "records": len(store.records),
        "instances": len({i for i, _ in store.records}),
        "truncated": store.extra["truncated"],
    }


def verify_store(store_path, instances_path, roles=None, expect_dim=None) -> list:
    """Check a store against the dataset it claims to cover.

    Returns a list of violation strings (empty means the store is sound):
    parse failures, instance-count mismatches, missing (instance, role)
    records, per-record shape drift from the header dim, and an optional
    external dimension expectation.
    """
    from .storefmt import read_store

    violations = []
    try:
        store = read_store(store_path)
    except ExtractorError as exc:
        return [f"unreadable store: {exc}"]
    instances = load_instances(instances_path)
    roles = tuple(roles) if roles else tuple(sorted(
        {role for _, role in store.records},
        key=lambda r: ["OBS_PAIR", "H1", "H2", "OBS_H1", "OBS_H2"].index(r),
    ))
    if not roles:
        violations.append("store holds no records")
        return violations

    if expect_dim is not None and store.dim != expect_dim:
        violations.append(f"dim mismatch: header declares {store.dim}, expected {expect_dim}")
    indices = {i for i, _ in store.records}
    if indices and max(indices) >= len(instances):
        violations.append(
            f"store indexes instance {max(indices)} but dataset has {len(instances)}"
        )
    for i in range(len(instances)):
        for role in roles:
            if (i, role) not in store.records:
                violations.append(f"missing instance {i} role {role}")
    for (i, role), arr in sorted(store.records.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        width = arr.shape[0] if store.kind == "POOLED" else arr.shape[1]
        if width != store.dim:
            violations.append(
                f"instance {i} role {role}: width {width} != header dim {store.dim}"
            )
        if not np.all(np.isfinite(arr)):
            violations.append(f"instance {i} role {role}: non-finite values")
    return violations
