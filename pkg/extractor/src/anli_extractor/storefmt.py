"""Writer and reader for the binary embedding store format.

This is an independent implementation of the consumer side's container:
magic ``EMB1``, u16 LE version (=1), u32 LE header length, a UTF-8 JSON
header ``{model_id, dim, kind, count, separator, created_by, ...}``,
then ``count`` records sorted by (instance index, role tag). A record
is a u32 LE instance index plus a u8 role tag; POOLED payloads are
``dim`` float32 LE values, TOKEN payloads a u32 LE token count followed
by ``count * dim`` float32 LE values. Header keys are emitted in the
fixed core order with extra keys sorted after, so two writers given the
same logical store produce identical bytes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import ROLE_TAGS
from .errors import ExtractorError

MAGIC = b"EMB1"
FORMAT_VERSION = 1
_TAG_ROLES = {tag: name for name, tag in ROLE_TAGS.items()}


@dataclass
class ExtractedStore:
    """In-memory store: ``records`` maps (instance_index, role_name) to a
    float32 array, shape (dim,) for POOLED and (n_tokens, dim) for TOKEN."""

    model_id: str
    dim: int
    kind: str
    records: dict
    separator: str = " "
    created_by: str = "anli-extract"
    extra: dict = field(default_factory=dict)


def _validate(store: ExtractedStore) -> None:
    if store.kind not in ("POOLED", "TOKEN"):
        raise ExtractorError(f"unknown store kind {store.kind!r}")
    if store.dim < 1:
        raise ExtractorError(f"store dim must be >= 1, got {store.dim}")
    for (index, role), arr in store.records.items():
        if role not in ROLE_TAGS:
            raise ExtractorError(f"unknown role {role!r} for instance {index}")
        where = f"instance {index} role {role}"
        if store.kind == "POOLED":
            if arr.ndim != 1 or arr.shape[0] != store.dim:
                raise ExtractorError(f"bad record shape {arr.shape} for {where}")
        else:
            if arr.ndim != 2 or arr.shape[1] != store.dim or arr.shape[0] < 1:
                raise ExtractorError(f"bad record shape {arr.shape} for {where}")
        if not np.all(np.isfinite(arr)):
            raise ExtractorError(f"non-finite value in record for {where}")


def write_store(store: ExtractedStore, path) -> None:
    _validate(store)
    keys = sorted(store.records, key=lambda k: (k[0], ROLE_TAGS[k[1]]))
    header = {
        "model_id": store.model_id,
        "dim": store.dim,
        "kind": store.kind,
        "count": len(keys),
        "separator": store.separator,
        "created_by": store.created_by,
    }
    for key in sorted(store.extra):
        if key in header:
            raise ExtractorError(f"extra header field {key!r} shadows a core field")
        header[key] = store.extra[key]
    raw = json.dumps(header, ensure_ascii=False, separators=(",", ":")).encode("utf-8")

    chunks = [MAGIC, struct.pack("<HI", FORMAT_VERSION, len(raw)), raw]
    for index, role in keys:
        arr = np.ascontiguousarray(store.records[(index, role)], dtype="<f4")
        chunks.append(struct.pack("<IB", index, ROLE_TAGS[role]))
        if store.kind == "TOKEN":
            chunks.append(struct.pack("<I", arr.shape[0]))
        chunks.append(arr.tobytes())
    Path(path).write_bytes(b"".join(chunks))


def read_store(path) -> ExtractedStore:
    blob = Path(path).read_bytes()
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise ExtractorError("bad magic: not an embedding store")
    if len(blob) < 10:
        raise ExtractorError("truncated store: header fields missing")
    version, header_len = struct.unpack_from("<HI", blob, 4)
    if version != FORMAT_VERSION:
        raise ExtractorError(f"unsupported store version {version}")
    offset = 10
    if len(blob) < offset + header_len:
        raise ExtractorError("truncated store: header shorter than declared")
    try:
        header = json.loads(blob[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ExtractorError(f"corrupt store header: {exc}") from exc
    offset += header_len

    core = ("model_id", "dim", "kind", "count", "separator", "created_by")
    missing = [k for k in core if k not in header]
    if missing:
        raise ExtractorError(f"store header missing fields: {missing}")
    kind = header["kind"]
    if kind not in ("POOLED", "TOKEN"):
        raise ExtractorError(f"unknown store kind {kind!r}")
    dim = int(header["dim"])
    count = int(header["count"])

    records = {}
    for k in range(count):
        if len(blob) < offset + 5:
            raise ExtractorError(f"truncated record at index {k}")
        index, tag = struct.unpack_from("<IB", blob, offset)
        offset += 5
        if tag not in _TAG_ROLES:
            raise ExtractorError(f"unknown role tag {tag} in record at index {k}")
        if kind == "TOKEN":
            if len(blob) < offset + 4:
                raise ExtractorError(f"truncated record at index {k}")
            (n_tokens,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            shape = (n_tokens, dim)
        else:
            shape = (dim,)
        n_values = int(np.prod(shape))
        if len(blob) < offset + 4 * n_values:
            raise ExtractorError(f"truncated record at index {k}")
        arr = np.frombuffer(blob, dtype="<f4", count=n_values, offset=offset)
        offset += 4 * n_values
        key = (index, _TAG_ROLES[tag])
        if key in records:
            raise ExtractorError(f"duplicate record for instance {index} role {key[1]}")
        records[key] = arr.reshape(shape).copy()

    if offset != len(blob):
        raise ExtractorError(
            f"record count mismatch: {len(blob) - offset} trailing bytes"
        )
    extra = {k: v for k, v in header.items() if k not in core}
    return ExtractedStore(
        model_id=str(header["model_id"]),
        dim=dim,
        kind=kind,
        records=records,
        separator=str(header["separator"]),
        created_by=str(header["created_by"]),
        extra=extra,
    )
