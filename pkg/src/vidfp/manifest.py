"""Labeled-corpus manifests: JSON lines natively, CSV as an import shim."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import ManifestError


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    split: Optional[str] = None


def load_manifest(path) -> list[ManifestEntry]:
    """Read `{"path":..., "label":..., "split":...}` JSON lines, or a CSV
    with `path,label[,split]` columns.  Paths are resolved relative to the
    manifest's directory; duplicates and empty labels are rejected."""
    location = Path(path)
    try:
        text = location.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError("cannot read manifest %s: %s" % (path, exc)) from exc

    if location.suffix.lower() == ".csv":
        entries = _parse_csv(text)
    else:
        entries = _parse_jsonl(text)

    seen = set()
    resolved = []
    for entry in entries:
        if not entry.label:
            raise ManifestError("manifest entry %r has an empty label" % entry.path)
        full = str((location.parent / entry.path).resolve()) if not Path(entry.path).is_absolute() else entry.path
        if full in seen:
            raise ManifestError("duplicate manifest path %r" % entry.path)
        seen.add(full)
        resolved.append(ManifestEntry(path=full, label=entry.label, split=entry.split))
    if not resolved:
        raise ManifestError("manifest %s is empty" % path)
    return resolved


def _parse_jsonl(text: str) -> list[ManifestEntry]:
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError("manifest line %d is not valid JSON: %s" % (lineno, exc)) from exc
        if "path" not in record or "label" not in record:
            raise ManifestError("manifest line %d needs 'path' and 'label'" % lineno)
        entries.append(ManifestEntry(path=str(record["path"]), label=str(record["label"]),
                                     split=record.get("split")))
    return entries


def _parse_csv(text: str) -> list[ManifestEntry]:
    reader = csv.reader(text.splitlines())
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        return []
    start = 0
    if [cell.strip().lower() for cell in rows[0][:2]] == ["path", "label"]:
        start = 1
    entries = []
    for row in rows[start:]:
        if len(row) < 2:
            raise ManifestError("CSV manifest rows need at least path,label: %r" % row)
        split = row[2].strip() if len(row) > 2 and row[2].strip() else None
        entries.append(ManifestEntry(path=row[0].strip(), label=row[1].strip(), split=split))
    return entries


def write_manifest(entries, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            record = {"path": entry.path, "label": entry.label}
            if entry.split:
                record["split"] = entry.split
            fh.write(json.dumps(record, sort_keys=True) + "\n")
