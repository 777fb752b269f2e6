"""Output directory writer: JSON/CSV artifacts with sha256 hashes and a manifest."""

import csv
import hashlib
import io
import json
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

from pydantic import BaseModel

from app.core.logger import logger

MANIFEST_NAME = "manifest.json"
# settings that change where or how loudly a run reports, not what it computes
OUTPUT_ONLY_FIELDS = {"out_dir", "log_level"}


def _calculate_sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_json(payload: Any) -> str:
    """Sorted-key JSON with a trailing newline; pydantic models are dumped in JSON mode first."""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    elif isinstance(payload, list):
        payload = [item.model_dump(mode="json") if isinstance(item, BaseModel) else item for item in payload]
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def config_hash(config: BaseModel, exclude: set[str] | None = None) -> str:
    canonical = json.dumps(config.model_dump(mode="json", exclude=exclude), sort_keys=True, separators=(",", ":"))
    return _calculate_sha256(canonical.encode())


class ArtifactWriter:
    """Writes every artifact under ``root`` and remembers its hash for the manifest."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.hashes: dict[str, str] = {}

    def _write(self, name: str, data: bytes) -> Path:
        path = self.root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        self.hashes[name] = _calculate_sha256(data)
        logger.info("artifact_written", path=str(path), sha256=self.hashes[name])
        return path

    def write_text(self, name: str, text: str) -> Path:
        return self._write(name, text.encode())

    def write_json(self, name: str, payload: Any) -> Path:
        return self.write_text(name, canonical_json(payload))

    def write_csv(self, name: str, rows: Sequence[Mapping[str, Any]], fieldnames: Sequence[str] | None = None) -> Path:
        columns = list(fieldnames) if fieldnames is not None else (list(rows[0]) if rows else [])
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _csv_cell(row.get(key)) for key in columns})
        return self.write_text(name, buffer.getvalue())

    def write_manifest(self, config: BaseModel, command: str) -> Path:
        manifest = {
            "command": command,
            "config_sha256": config_hash(config, OUTPUT_ONLY_FIELDS),
            "artifacts": dict(sorted(self.hashes.items())),
        }
        path = self.root / MANIFEST_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(canonical_json(manifest))
        return path


def _csv_cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return str(value).lower()
    return "" if value is None else value
