"""Frozen-encoder embedding extraction to binary stores."""

from .dataset import (
    FIELD_NAMES,
    ROLE_NAMES,
    ROLE_TAGS,
    TRACK_ROLES,
    Instance,
    load_instances,
    role_text,
)
from .errors import ExtractorError
from .extract import extract_store, run_extraction, verify_store
from .job import ExtractionJob, load_job
from .storefmt import ExtractedStore, read_store, write_store

__version__ = "0.1.0"

__all__ = [
    "ExtractedStore",
    "ExtractionJob",
    "ExtractorError",
    "FIELD_NAMES",
    "Instance",
    "ROLE_NAMES",
    "ROLE_TAGS",
    "TRACK_ROLES",
    "extract_store",
    "load_instances",
    "load_job",
    "read_store",
    "role_text",
    "run_extraction",
    "verify_store",
    "write_store",
]
