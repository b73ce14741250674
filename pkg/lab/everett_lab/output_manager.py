"""
everett_lab/output_manager.py
Generated: 2026-10-17.1420
Purpose: Atomic writing of experiment outputs with content digests

Features:
- Temp file in the target directory + os.replace, so readers never see partial files
- SHA-256 digest recorded for every emitted file
- Manifest of all files written in a run, sorted by relative path
- Digest verification of a finished output directory
"""

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Union

logger = logging.getLogger("everett_lab.output_manager")

PathLike = Union[str, Path]


def sha256_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def atomic_write_text(path: PathLike, text: str) -> Dict[str, Any]:
    """Write `text` (UTF-8, '\\n' line endings) to `path` via a sibling temp file"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = text.encode("utf-8")
    fd, temp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(temp_name, path)
    except OSError:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return {'path': str(path), 'sha256': sha256_digest(data), 'size_bytes': len(data)}


def canonical_json(payload: Any) -> str:
    """Sorted keys and fixed indentation so equal payloads give equal bytes"""
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=True) + "\n"


class OutputManager:
    """
    Writes the files of one run below `output_dir` and keeps the manifest.

    Manifest entries carry the path relative to output_dir, so two runs into
    different directories produce identical manifests.
    """

    def __init__(self, output_dir: PathLike):
        self.output_dir = Path(output_dir)
        self._entries: Dict[str, Dict[str, Any]] = {}

    def _ensure_output_directory(self):
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _record(self, relative: str, written: Dict[str, Any]) -> Dict[str, Any]:
        entry = {'path': relative, 'sha256': written['sha256'], 'size_bytes': written['size_bytes']}
        self._entries[relative] = entry
        logger.info(f"Wrote {written['path']} ({written['size_bytes']} bytes)")
        return entry

    def write_text(self, relative: str, text: str) -> Dict[str, Any]:
        self._ensure_output_directory()
        return self._record(relative, atomic_write_text(self.output_dir / relative, text))

    def write_json(self, relative: str, payload: Any) -> Dict[str, Any]:
        return self.write_text(relative, canonical_json(payload))

    @property
    def manifest(self) -> List[Dict[str, Any]]:
        return [self._entries[key] for key in sorted(self._entries)]

    def verify_outputs(self, manifest: List[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Recompute digests of manifest files; lists missing and mismatched paths"""
        manifest = self.manifest if manifest is None else manifest
        results = {'verified': [], 'missing': [], 'mismatched': []}
        for entry in manifest:
            file_path = self.output_dir / entry['path']
            if not file_path.exists():
                results['missing'].append(entry['path'])
                continue
            if sha256_digest(file_path.read_bytes()) == entry['sha256']:
                results['verified'].append(entry['path'])
            else:
                results['mismatched'].append(entry['path'])
        results['status'] = 'success' if not (results['missing'] or results['mismatched']) else 'error'
        if results['status'] == 'error':
            logger.warning(f"Output verification failed in {self.output_dir}: "
                           f"{len(results['missing'])} missing, {len(results['mismatched'])} mismatched")
        return results
