"""Run directory storage for CSV tables, JSON documents and the run manifest"""

import csv
import json
from pathlib import Path
from typing import Iterable, Optional, Sequence

from src.errors import ManifestError

MANIFEST_NAME = "run_manifest.json"


class RunStore:
    """Plain-file store rooted at one run directory"""

    def __init__(self, run_dir):
        """
        Args:
            run_dir: Directory holding every output of a single run
        """
        self.run_dir = Path(run_dir)
        self.written: list[str] = []

    def ensure_dir(self):
        """Create the run directory if it doesn't exist"""
        self.run_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.run_dir / name

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[dict]) -> Path:
        """Write rows with a fixed column order and "\\n" line endings"""
        self.ensure_dir()
        target = self.path(name)
        with open(target, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(header), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
        self._record(name)
        return target

    def write_json(self, name: str, data: dict) -> Path:
        self.ensure_dir()
        target = self.path(name)
        with open(target, "w") as f:
            json.dump(data, f, indent=2)
            f.write("\n")
        self._record(name)
        return target

    def read_json(self, name: str) -> dict:
        with open(self.path(name)) as f:
            return json.load(f)

    def read_csv(self, name: str) -> list[dict]:
        with open(self.path(name), newline="") as f:
            return list(csv.DictReader(f))

    def read_manifest(self) -> dict:
        """Load and sanity-check run_manifest.json

        Raises:
            ManifestError: directory or manifest missing, unreadable or incomplete
        """
        if not self.run_dir.is_dir():
            raise ManifestError("run directory not found", file=str(self.run_dir))
        target = self.path(MANIFEST_NAME)
        if not target.is_file():
            raise ManifestError("run manifest not found", file=str(target))
        try:
            manifest = self.read_json(MANIFEST_NAME)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ManifestError(f"corrupt run manifest: {e}", file=str(target)) from e
        if not isinstance(manifest, dict):
            raise ManifestError("run manifest must be a JSON object", file=str(target))
        for key in ("artifact", "version", "mode", "config", "outputs"):
            if key not in manifest:
                raise ManifestError("run manifest is incomplete", file=str(target), key=key)
        return manifest

    def write_manifest(self, manifest: dict) -> Path:
        return self.write_json(MANIFEST_NAME, manifest)

    def _record(self, name: str):
        if name != MANIFEST_NAME and name not in self.written:
            self.written.append(name)

    def outputs(self, extra: Optional[Iterable[str]] = None) -> list[str]:
        return sorted({*self.written, *(extra or ())})
