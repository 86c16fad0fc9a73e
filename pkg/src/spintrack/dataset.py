"""Binary dataset persistence: a human-readable JSON metadata document plus a
raw little-endian float64 array file with an index.

Layout: ``<stem>.json`` holds all parameters, seeds, units and an array index
(name, shape, byte offset, byte length, sha256); ``<stem>.bin`` holds the
C-order arrays concatenated. The format is trivial to read from any language.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IntegrityError

FORMAT_VERSION = 1


@dataclass
class Dataset:
    """In-memory view of a persisted dataset."""

    metadata: dict
    arrays: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    @property
    def b(self) -> np.ndarray:
        return self.arrays["fields"]

    @property
    def y(self) -> np.ndarray:
        return self.arrays["records"]

    @property
    def train_indices(self) -> np.ndarray:
        return self.arrays["train_indices"].astype(np.int64)

    @property
    def test_indices(self) -> np.ndarray:
        return self.arrays["test_indices"].astype(np.int64)


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_dataset(stem, metadata: dict, arrays: dict) -> Path:
    """Persist ``arrays`` (name -> ndarray) with ``metadata``; returns the json path."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    index = []
    offset = 0
    blobs = []
    for name, arr in arrays.items():
        data = np.ascontiguousarray(arr, dtype="<f8").tobytes()
        index.append(
            {
                "name": name,
                "dtype": "<f8",
                "shape": list(np.asarray(arr).shape),
                "offset": offset,
                "nbytes": len(data),
                "sha256": hashlib.sha256(data).hexdigest(),
            }
        )
        blobs.append(data)
        offset += len(data)
    doc = {
        "format_version": FORMAT_VERSION,
        "metadata": metadata,
        "arrays": index,
    }
    bin_path = stem.with_suffix(".bin")
    json_path = stem.with_suffix(".json")
    with open(bin_path, "wb") as fh:
        for blob in blobs:
            fh.write(blob)
    with open(json_path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return json_path


def read_dataset(path) -> Dataset:
    """Load a dataset, verifying array checksums and sizes."""
    path = Path(path)
    if path.suffix == ".bin":
        path = path.with_suffix(".json")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise IntegrityError(f"cannot read dataset metadata {path}: {exc}") from exc
    if doc.get("format_version") != FORMAT_VERSION:
        raise IntegrityError(f"unsupported dataset format version {doc.get('format_version')}")
    bin_path = path.with_suffix(".bin")
    try:
        blob = bin_path.read_bytes()
    except OSError as exc:
        raise IntegrityError(f"cannot read dataset payload {bin_path}: {exc}") from exc
    arrays = {}
    for entry in doc["arrays"]:
        lo, hi = entry["offset"], entry["offset"] + entry["nbytes"]
        if hi > len(blob):
            raise IntegrityError(
                f"dataset payload truncated: array {entry['name']!r} needs bytes up to {hi}, "
                f"file has {len(blob)}"
            )
        chunk = blob[lo:hi]
        digest = hashlib.sha256(chunk).hexdigest()
        if digest != entry["sha256"]:
            raise IntegrityError(f"checksum mismatch for array {entry['name']!r}")
        arrays[entry["name"]] = np.frombuffer(chunk, dtype=entry["dtype"]).reshape(entry["shape"]).copy()
    return Dataset(metadata=doc["metadata"], arrays=arrays)


def metadata_hash(metadata: dict) -> str:
    return hashlib.sha256(_canonical_json(metadata).encode()).hexdigest()
