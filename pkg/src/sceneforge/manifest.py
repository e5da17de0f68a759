"""Run manifests: config echo plus content hashes of every output file.

Manifests contain no timestamps or host details, so a rerun with the same
inputs and seed produces a byte-identical manifest; comparing manifests is
how reruns are verified.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Mapping

__all__ = ["sha256_file", "write_manifest", "verify_manifest"]

MANIFEST_NAME = "manifest.json"


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: str | Path, config: Mapping[str, Any],
                   status: str = "ok", failed_stage: str | None = None) -> Path:
    """Hash every file under out_dir (except the manifest itself)."""
    out = Path(out_dir)
    hashes = {
        str(p.relative_to(out)).replace("\\", "/"): sha256_file(p)
        for p in sorted(out.rglob("*"))
        if p.is_file() and p.name != MANIFEST_NAME
    }
    doc: dict[str, Any] = {
        "config": dict(config),
        "outputs": hashes,
        "status": status,
    }
    if failed_stage is not None:
        doc["failed_stage"] = failed_stage
    path = out / MANIFEST_NAME
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def verify_manifest(out_dir: str | Path) -> list[str]:
    """Paths whose current hash differs from the recorded one (or are gone)."""
    out = Path(out_dir)
    doc = json.loads((out / MANIFEST_NAME).read_text(encoding="utf-8"))
    bad = []
    for rel, digest in doc.get("outputs", {}).items():
        p = out / rel
        if not p.is_file() or sha256_file(p) != digest:
            bad.append(rel)
    return bad
