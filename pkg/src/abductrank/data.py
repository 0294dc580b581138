"""Dataset loading and the binary embedding store.

Three file formats live here:

* instance files: JSON-lines, one object per task item (two observations,
  two hypotheses, an id), field names configurable;
* label files: plain text, one of ``1``/``2`` per line, aligned by line
  index with the instance file;
* embedding stores: a binary container that decouples the harness from
  any encoder runtime. Layout: magic ``EMB1``, u16 LE version (=1),
  u32 LE header length, a UTF-8 JSON header
  ``{model_id, dim, kind, count, separator, created_by}``, then ``count``
  records. Each record is a u32 LE instance index and a u8 role tag;
  POOLED records carry ``dim`` float32 LE values, TOKEN records carry a
  u32 LE token count followed by ``count*dim`` float32 LE values.

Instance ``i`` in the instance file aligns with label line ``i`` and
store index ``i``. Stores are immutable after load and safe to share
across threads.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path

import numpy as np

from .errors import DataError, DomainError
from .kernels import mean_pool

MAGIC = b"EMB1"
FORMAT_VERSION = 1
DEFAULT_SEPARATOR = " "
DEFAULT_CREATED_BY = "abductrank"

# Source-file field names the default mapping expects.
DEFAULT_FIELD_MAP = {
    "instance_id": "story_id",
    "o1": "obs1",
    "o2": "obs2",
    "h1": "hyp1",
    "h2": "hyp2",
}


class Hypothesis(IntEnum):
    """Which of the two candidate hypotheses is chosen (or gold)."""

    H1 = 1
    H2 = 2

    def flipped(self) -> "Hypothesis":
        return Hypothesis.H2 if self is Hypothesis.H1 else Hypothesis.H1


class EmbeddingRole(IntEnum):
    """What text a stored embedding encodes. Values are the on-disk tags."""

    OBS_PAIR = 0  # o1 + o2
    H1 = 1
    H2 = 2
    OBS_H1 = 3  # o1 + o2 + h1
    OBS_H2 = 4  # o1 + o2 + h2


SIMILARITY_ROLES = (EmbeddingRole.OBS_PAIR, EmbeddingRole.H1, EmbeddingRole.H2)
CLASSIFICATION_ROLES = (EmbeddingRole.OBS_H1, EmbeddingRole.OBS_H2)


class StoreKind(str, Enum):
    POOLED = "POOLED"
    TOKEN = "TOKEN"


@dataclass(frozen=True)
class AnliInstance:
    instance_id: str
    o1: str
    o2: str
    h1: str
    h2: str


@dataclass
class EmbeddingStore:
    """Immutable per-model collection of role-tagged embedding records.

    ``records`` maps ``(instance_index, role)`` to a float32 array:
    shape ``(dim,)`` for POOLED stores, ``(n_tokens, dim)`` for TOKEN
    stores. ``extra`` holds any additional header fields (for example a
    truncation count recorded by an extractor) and survives roundtrips.
    """

    model_id: str
    dim: int
    kind: StoreKind
    records: dict
    separator: str = DEFAULT_SEPARATOR
    created_by: str = DEFAULT_CREATED_BY
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.dim < 1:
            raise DataError(f"store dim must be >= 1, got {self.dim}")
        for (index, role), arr in self.records.items():
            where = f"instance {index} role {EmbeddingRole(role).name}"
            if self.kind is StoreKind.POOLED:
                if arr.ndim != 1 or arr.shape[0] != self.dim:
                    raise DataError(
                        f"bad record shape {arr.shape} for {where} (dim {self.dim})"
                    )
            else:
                if arr.ndim != 2 or arr.shape[1] != self.dim or arr.shape[0] < 1:
                    raise DataError(
                        f"bad record shape {arr.shape} for {where} (dim {self.dim})"
                    )
            if not np.all(np.isfinite(arr)):
                raise DataError(f"non-finite value in record for {where}")

    def vector(self, index: int, role: EmbeddingRole) -> np.ndarray:
        try:
            return self.records[(index, role)]
        except KeyError:
            raise DataError(
                f"store for {self.model_id!r} has no record for instance "
                f"{index} role {role.name}"
            ) from None

    def instance_indices(self) -> list:
        return sorted({index for index, _ in self.records})


def check_roles(store: EmbeddingStore, n: int, roles) -> None:
    """Verify instances 0..n-1 all carry the given roles."""
    for index in range(n):
        for role in roles:
            if (index, role) not in store.records:
                raise DataError(
                    f"store for {store.model_id!r} is missing instance "
                    f"{index} role {role.name}"
                )


def load_instances(path, field_map=None, require_unique_ids: bool = True):
    """Read a JSON-lines instance file, preserving file order.

    ``field_map`` maps the canonical names (instance_id, o1, o2, h1, h2)
    to the field names used in the file; by default
    story_id/obs1/obs2/hyp1/hyp2. Errors carry 1-based line numbers.
    """
    mapping = dict(DEFAULT_FIELD_MAP)
    if field_map:
        unknown = set(field_map) - set(mapping)
        if unknown:
            raise DataError(f"unknown field_map keys: {sorted(unknown)}")
        mapping.update(field_map)

    instances = []
    seen_ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"malformed JSON at line {lineno}: {exc.msg}") from exc
            values = {}
            for canon, source in mapping.items():
                if source not in obj:
                    raise DataError(f"missing field {source} at line {lineno}")
                values[canon] = str(obj[source])
            for canon in ("o1", "o2", "h1", "h2"):
                if not values[canon]:
                    raise DataError(
                        f"empty text field {mapping[canon]} at line {lineno}"
                    )
            if require_unique_ids:
                if values["instance_id"] in seen_ids:
                    raise DataError(
                        f"duplicate instance id {values['instance_id']!r} "
                        f"at line {lineno}"
                    )
                seen_ids.add(values["instance_id"])
            instances.append(AnliInstance(**values))
    return instances


def load_labels(path, n_expected=None):
    """Read a label file: one ``1`` or ``2`` per line, one per instance.

    Pass ``n_expected`` to enforce alignment with an instance file;
    ``None`` accepts any count. Trailing blank lines are tolerated,
    interior ones are not.
    """
    lines = Path(path).read_text(encoding="utf-8").split("\n")
    while lines and not lines[-1].strip():
        lines.pop()
    labels = []
    for lineno, raw in enumerate(lines, start=1):
        token = raw.strip()
        if token == "1":
            labels.append(Hypothesis.H1)
        elif token == "2":
            labels.append(Hypothesis.H2)
        else:
            raise DataError(
                f'invalid label {token!r} at line {lineno} (expected "1" or "2")'
            )
    if n_expected is not None and len(labels) != n_expected:
        raise DataError(
            f"label count {len(labels)} does not match expected {n_expected}"
        )
    return labels


def _header_bytes(store: EmbeddingStore, count: int) -> bytes:
    header = {
        "model_id": store.model_id,
        "dim": store.dim,
        "kind": store.kind.value,
        "count": count,
        "separator": store.separator,
        "created_by": store.created_by,
    }
    for key in sorted(store.extra):
        if key in header:
            raise DataError(f"extra header field {key!r} shadows a core field")
        header[key] = store.extra[key]
    return json.dumps(header, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def write_embedding_store(store: EmbeddingStore, path) -> None:
    """Write a store to ``path`` (or a binary file object).

    Records go out sorted by (instance index, role tag), so the bytes are
    deterministic for a given store. The store is validated first; a
    NaN/Inf coordinate or a bad shape refuses to serialize.
    """
    store.validate()
    keys = sorted(store.records, key=lambda k: (k[0], int(k[1])))
    header = _header_bytes(store, len(keys))

    chunks = [MAGIC, struct.pack("<HI", FORMAT_VERSION, len(header)), header]
    for index, role in keys:
        arr = np.ascontiguousarray(store.records[(index, role)], dtype="<f4")
        chunks.append(struct.pack("<IB", index, int(role)))
        if store.kind is StoreKind.TOKEN:
            chunks.append(struct.pack("<I", arr.shape[0]))
        chunks.append(arr.tobytes())
    blob = b"".join(chunks)

    if hasattr(path, "write"):
        path.write(blob)
    else:
        Path(path).write_bytes(blob)


def read_embedding_store(path) -> EmbeddingStore:
    """Read a store written by :func:`write_embedding_store`.

    Distinct failure modes get distinct messages: bad magic, unsupported
    version, truncated header or record, record count mismatch, and
    non-finite payload values (reported with instance index and role).
    """
    if hasattr(path, "read"):
        blob = path.read()
    else:
        blob = Path(path).read_bytes()

    if len(blob) < 4 or blob[:4] != MAGIC:
        raise DataError(f"bad magic: not an embedding store (expected {MAGIC!r})")
    if len(blob) < 10:
        raise DataError("truncated store: header fields missing")
    version, header_len = struct.unpack_from("<HI", blob, 4)
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported store version {version} (expected {FORMAT_VERSION})")
    offset = 10
    if len(blob) < offset + header_len:
        raise DataError("truncated store: header shorter than declared length")
    try:
        header = json.loads(blob[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"corrupt store header: {exc}") from exc
    offset += header_len

    core = ("model_id", "dim", "kind", "count", "separator", "created_by")
    missing = [k for k in core if k not in header]
    if missing:
        raise DataError(f"store header missing fields: {missing}")
    try:
        kind = StoreKind(header["kind"])
    except ValueError:
        raise DataError(f"unknown store kind {header['kind']!r}") from None
    dim = int(header["dim"])
    count = int(header["count"])
    if dim < 1:
        raise DataError(f"store dim must be >= 1, got {dim}")
    extra = {k: v for k, v in header.items() if k not in core}

    records = {}
    for k in range(count):
        if len(blob) < offset + 5:
            raise DataError(f"truncated record at index {k}")
        index, tag = struct.unpack_from("<IB", blob, offset)
        offset += 5
        try:
            role = EmbeddingRole(tag)
        except ValueError:
            raise DataError(f"unknown role tag {tag} in record at index {k}") from None
        if kind is StoreKind.TOKEN:
            if len(blob) < offset + 4:
                raise DataError(f"truncated record at index {k}")
            (n_tokens,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            if n_tokens < 1:
                raise DataError(f"empty token matrix in record at index {k}")
            shape = (n_tokens, dim)
        else:
            shape = (dim,)
        n_bytes = int(np.prod(shape)) * 4
        if len(blob) < offset + n_bytes:
            raise DataError(f"truncated record at index {k}")
        arr = np.frombuffer(blob, dtype="<f4", count=int(np.prod(shape)), offset=offset)
        offset += n_bytes
        arr = arr.reshape(shape).copy()
        if not np.all(np.isfinite(arr)):
            raise DataError(
                f"non-finite value in record for instance {index} role {role.name}"
            )
        if (index, role) in records:
            raise DataError(
                f"duplicate record for instance {index} role {role.name}"
            )
        records[(index, role)] = arr

    if offset != len(blob):
        raise DataError(
            f"record count mismatch: header declares {count} records but "
            f"{len(blob) - offset} trailing bytes remain"
        )
    return EmbeddingStore(
        model_id=str(header["model_id"]),
        dim=dim,
        kind=kind,
        records=records,
        separator=str(header["separator"]),
        created_by=str(header["created_by"]),
        extra=extra,
    )


def pool_store(token_store: EmbeddingStore) -> EmbeddingStore:
    """Mean-pool every record of a TOKEN store into a POOLED store.

    Pooling accumulates in float64 and the result is stored back at
    float32, the same path an extractor-side pooled export takes.
    """
    if token_store.kind is not StoreKind.TOKEN:
        raise DomainError(f"pool_store requires a TOKEN store, got {token_store.kind.value}")
    pooled = {
        key: mean_pool(arr).astype(np.float32)
        for key, arr in token_store.records.items()
    }
    return EmbeddingStore(
        model_id=token_store.model_id,
        dim=token_store.dim,
        kind=StoreKind.POOLED,
        records=pooled,
        separator=token_store.separator,
        created_by=token_store.created_by,
        extra=dict(token_store.extra),
    )
