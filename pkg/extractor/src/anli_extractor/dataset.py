"""Instance loading and per-role text construction.

A role names which text a record embeds: the observation pair on its
own, either hypothesis on its own, or the observations concatenated
with one hypothesis. The separator used to join segments is recorded in
the store header so downstream consumers know how texts were built.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ExtractorError

FIELD_NAMES = {
    "instance_id": "story_id",
    "o1": "obs1",
    "o2": "obs2",
    "h1": "hyp1",
    "h2": "hyp2",
}

# Role name -> on-disk record tag. Must agree with every store consumer.
ROLE_TAGS = {"OBS_PAIR": 0, "H1": 1, "H2": 2, "OBS_H1": 3, "OBS_H2": 4}
ROLE_NAMES = tuple(ROLE_TAGS)

TRACK_ROLES = {
    "similarity": ("OBS_PAIR", "H1", "H2"),
    "classification": ("OBS_H1", "OBS_H2"),
}


@dataclass(frozen=True)
class Instance:
    instance_id: str
    o1: str
    o2: str
    h1: str
    h2: str


def load_instances(path) -> list:
    """Read a JSON-lines instance file in order; errors carry line numbers."""
    instances = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExtractorError(f"malformed JSON at line {lineno}: {exc.msg}") from exc
            values = {}
            for canon, source in FIELD_NAMES.items():
                if source not in obj:
                    raise ExtractorError(f"missing field {source} at line {lineno}")
                values[canon] = str(obj[source])
            for canon in ("o1", "o2", "h1", "h2"):
                if not values[canon]:
                    raise ExtractorError(
                        f"empty text field {FIELD_NAMES[canon]} at line {lineno}"
                    )
            instances.append(Instance(**values))
    return instances


def role_text(instance: Instance, role: str, separator: str) -> str:
    """The text an encoder sees for one (instance, role) record."""
    if role == "OBS_PAIR":
        return instance.o1 + separator + instance.o2
    if role == "H1":
        return instance.h1
    if role == "H2":
        return instance.h2
    if role == "OBS_H1":
        return instance.o1 + separator + instance.o2 + separator + instance.h1
    if role == "OBS_H2":
        return instance.o1 + separator + instance.o2 + separator + instance.h2
    raise ExtractorError(f"unknown role {role!r} (expected one of {ROLE_NAMES})")
