"""Extraction jobs: everything that determines a store, in one JSON file.

Pinning the model revision in the job (rather than on the command line)
keeps extraction reproducible when hub checkpoints move.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .dataset import ROLE_NAMES, TRACK_ROLES
from .errors import ExtractorError


@dataclass(frozen=True)
class ExtractionJob:
    model_id: str
    instances: str
    roles: tuple = ROLE_NAMES
    kind: str = "POOLED"
    separator: str = " "
    batch_size: int = 16
    device: str = "cpu"
    max_length: int | None = None
    revision: str | None = None
    tracks: tuple = ()

    def __post_init__(self):
        unknown = [r for r in self.roles if r not in ROLE_NAMES]
        if unknown:
            raise ExtractorError(f"unknown roles {unknown} (expected from {ROLE_NAMES})")
        if not self.roles:
            raise ExtractorError("job must request at least one role")
        if self.kind not in ("POOLED", "TOKEN"):
            raise ExtractorError(f"kind must be POOLED or TOKEN, got {self.kind!r}")
        if self.batch_size < 1:
            raise ExtractorError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_length is not None and self.max_length < 8:
            raise ExtractorError(f"max_length must be >= 8, got {self.max_length}")
        for track in self.tracks:
            needed = TRACK_ROLES.get(track)
            if needed is None:
                raise ExtractorError(
                    f"unknown track {track!r} (expected {sorted(TRACK_ROLES)})"
                )
            missing = [r for r in needed if r not in self.roles]
            if missing:
                raise ExtractorError(
                    f"track {track!r} needs roles {missing} which the job omits"
                )


def load_job(path) -> ExtractionJob:
    """Read a job JSON; relative paths resolve against the job file."""
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ExtractorError(f"malformed job file {path}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ExtractorError(f"job file {path} must hold a JSON object")
    for key in ("model_id", "instances"):
        if key not in obj:
            raise ExtractorError(f"job file {path} missing key {key!r}")
    known = {
        "model_id", "instances", "roles", "kind", "separator",
        "batch_size", "device", "max_length", "revision", "tracks",
    }
    unknown = sorted(set(obj) - known)
    if unknown:
        raise ExtractorError(f"job file {path}: unknown keys {unknown}")
    base = Path(path).parent
    return ExtractionJob(
        model_id=str(obj["model_id"]),
        instances=str((base / obj["instances"]).resolve()),
        roles=tuple(obj.get("roles", ROLE_NAMES)),
        kind=str(obj.get("kind", "POOLED")),
        separator=str(obj.get("separator", " ")),
        batch_size=int(obj.get("batch_size", 16)),
        device=str(obj.get("device", "cpu")),
        max_length=None if obj.get("max_length") is None else int(obj["max_length"]),
        revision=None if obj.get("revision") is None else str(obj["revision"]),
        tracks=tuple(obj.get("tracks", ())),
    )
