#!/usr/bin/env python3
"""
File utilities for writing and reading reports: atomic JSON, CSV
projections, and the run manifest every report embeds.
"""

import csv
import json
import os
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from config import TOOL_VERSION
from errors import InputError


@dataclass
class RunManifest:
    """Everything needed to re-run the invocation that produced a report."""
    subcommand: str
    argv: List[str]
    config: Dict[str, Any] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    version: str = TOOL_VERSION
    created: str = ""

    def __post_init__(self):
        if not self.created:
            self.created = datetime.now(timezone.utc).isoformat(timespec="seconds")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "argv": list(self.argv),
            "config": self.config,
            "outputs": dict(self.outputs),
            "version": self.version,
            "created": self.created,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        try:
            return cls(
                subcommand=data["subcommand"],
                argv=list(data["argv"]),
                config=dict(data.get("config", {})),
                outputs=dict(data.get("outputs", {})),
                version=data.get("version", ""),
                created=data.get("created", ""),
            )
        except (KeyError, TypeError) as e:
            raise InputError(f"Malformed run manifest: {e}") from e


def atomic_write_json(target_path: str, document: Dict[str, Any]) -> bool:
    """
    Write a JSON document atomically: temp file in the target directory,
    then os.replace.

    Args:
        target_path: Full path where the file should be written
        document: JSON-serializable document

    Returns:
        True on success

    Raises:
        OSError: If the write fails
    """
    target_dir = os.path.dirname(os.path.abspath(target_path))
    os.makedirs(target_dir, exist_ok=True)

    temp_path = os.path.join(target_dir, f".{uuid.uuid4().hex}.tmp")
    try:
        with open(temp_path, 'w', encoding='utf-8') as f:
            json.dump(document, f, indent=2, allow_nan=False)
            f.write('\n')
        os.replace(temp_path, target_path)
    finally:
        if os.path.exists(temp_path):
            os.remove(temp_path)

    return True


def _csv_value(value: Any) -> Any:
    if isinstance(value, (list, dict)):
        return json.dumps(value)
    return value


def write_csv_rows(target_path: str, rows: List[Dict[str, Any]]) -> bool:
    """
    Write report rows as CSV, one column per key (first-seen order).

    Nested values are written as JSON strings.
    """
    fieldnames: List[str] = []
    for row in rows:
        for key in row:
            if key not in fieldnames:
                fieldnames.append(key)

    target_dir = os.path.dirname(os.path.abspath(target_path))
    os.makedirs(target_dir, exist_ok=True)
    with open(target_path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _csv_value(value) for key, value in row.items()})

    return True


def load_json(filepath: str) -> Dict[str, Any]:
    """
    Read a JSON report or sequence file.

    Raises:
        InputError: If the file is missing or not a JSON object
    """
    if not os.path.exists(filepath):
        raise InputError(f"File not found: {filepath}")
    try:
        with open(filepath, 'r', encoding='utf-8') as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise InputError(f"Malformed JSON in {filepath}: {e}") from e
    if not isinstance(document, dict):
        raise InputError(f"{filepath} does not hold a JSON object")
    return document


def attach_manifest(document: Dict[str, Any], manifest: RunManifest) -> Dict[str, Any]:
    """Return a copy of the document with the manifest embedded."""
    result = dict(document)
    result["manifest"] = manifest.to_dict()
    return result


def rows_identical(first: Dict[str, Any], second: Dict[str, Any]) -> bool:
    """Compare the "rows" content of two reports (timestamps live elsewhere)."""
    return json.dumps(first.get("rows"), sort_keys=True) == json.dumps(second.get("rows"), sort_keys=True)


def manifest_of(document: Dict[str, Any]) -> Optional[RunManifest]:
    data = document.get("manifest")
    return RunManifest.from_dict(data) if data else None
