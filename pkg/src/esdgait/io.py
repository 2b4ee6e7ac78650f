"""File formats shared by the toolkit.

One signal record is a two-file pair: `<name>.sig.csv` holds one decimal
sample per line (no header) and `<name>.meta.json` holds the labels. A
batch of records is listed in a `dataset.json` manifest. Feature tables
are `features.csv` (header + one row per record, trailing label column)
with a `features.meta.json` sidecar recording the extraction settings.

All writers go through a temp file in the target directory followed by an
atomic rename, so readers never observe partial files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np

from .dsp import MfccConfig
from .errors import ValidationError
from .simkit import SignalRecord

META_KEYS = (
    "sample_rate",
    "person_id",
    "mood",
    "plant_type",
    "location",
    "activity",
    "seed",
    "generator_params",
)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def atomic_write_json(path, obj) -> None:
    atomic_write_text(path, dump_json(obj))


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def mfcc_fingerprint(config: MfccConfig) -> str:
    """Stable digest of the feature-extraction settings, stored alongside
    features and inside trained models so mismatches fail loudly."""
    blob = json.dumps(config.to_dict(), sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def write_record(record: SignalRecord, signal_path, meta_path) -> None:
    body = "\n".join("%.8e" % v for v in record.samples) + "\n"
    atomic_write_text(signal_path, body)
    meta = {key: None for key in META_KEYS}
    meta.update(record.labels)
    meta["sample_rate"] = record.sample_rate
    atomic_write_json(meta_path, meta)


def read_record(signal_path, meta_path) -> SignalRecord:
    samples = np.atleast_1d(np.loadtxt(signal_path, dtype=float))
    meta = read_json(meta_path)
    if "sample_rate" not in meta:
        raise ValidationError(f"{meta_path}: missing sample_rate")
    labels = {k: v for k, v in meta.items() if k != "sample_rate"}
    return SignalRecord(samples=samples, sample_rate=float(meta["sample_rate"]), labels=labels)


def write_manifest(path, entries: list[dict]) -> None:
    """entries: [{"signal_path": ..., "meta_path": ...}] with paths relative
    to the manifest's directory."""
    for entry in entries:
        if set(entry) != {"signal_path", "meta_path"}:
            raise ValidationError(f"bad manifest entry keys: {sorted(entry)}")
    atomic_write_json(path, entries)


def read_manifest(path) -> list[dict]:
    """Returns entries with paths resolved against the manifest location."""
    base = Path(path).parent
    entries = read_json(path)
    if not isinstance(entries, list):
        raise ValidationError(f"{path}: manifest must be a list")
    resolved = []
    for entry in entries:
        if not isinstance(entry, dict) or "signal_path" not in entry or "meta_path" not in entry:
            raise ValidationError(f"{path}: each entry needs signal_path and meta_path")
        resolved.append(
            {
                "signal_path": str(base / entry["signal_path"]),
                "meta_path": str(base / entry["meta_path"]),
            }
        )
    return resolved


def write_features(path, matrix: np.ndarray, feature_names, labels) -> None:
    """features.csv: header of feature names plus "label"; float cells are
    written with repr() so they round-trip exactly."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] != len(feature_names):
        raise ValidationError("feature matrix must be (records, names)")
    if matrix.shape[0] != len(labels):
        raise ValidationError("one label per feature row required")
    buf = StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*feature_names, "label"])
    for row, label in zip(matrix, labels):
        writer.writerow([*(repr(float(v)) for v in row), str(label)])
    atomic_write_text(path, buf.getvalue())


def read_features(path) -> tuple[np.ndarray, tuple[str, ...], list[str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty features file") from None
        if not header or header[-1] != "label":
            raise ValidationError(f"{path}: last column must be 'label'")
        names = tuple(header[:-1])
        rows, labels = [], []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValidationError(f"{path}:{line_no}: expected {len(header)} cells")
            rows.append([float(v) for v in row[:-1]])
            labels.append(row[-1])
    if not rows:
        raise ValidationError(f"{path}: no feature rows")
    return np.asarray(rows, dtype=float), names, labels
