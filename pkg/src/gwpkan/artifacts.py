"""Stage artifacts: atomic writes, content digests, and the manifest chain.

Each stage records the digests of everything it consumed and produced, so a
re-run can verify the chain and identical configs yield byte-identical
artifacts. Wall-clock data never lands in a digested artifact.
"""

from __future__ import annotations

import hashlib
import json
import os

__all__ = ["MissingArtifactError", "atomic_write_text", "file_digest",
           "write_json", "read_json", "Manifest", "require"]


class MissingArtifactError(FileNotFoundError):
    pass


def atomic_write_text(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(path: str, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def require(path: str, produced_by: str) -> str:
    """Assert an upstream artifact exists; error names the producing stage."""
    if not os.path.exists(path):
        raise MissingArtifactError(
            f"missing upstream artifact {path!r}; run '{produced_by}' first")
    return path


class Manifest:
    """Per-run record of stage inputs/outputs, keyed by stage name."""

    def __init__(self, out_dir: str):
        self.path = os.path.join(out_dir, "manifest.json")
        self.stages: dict = {}
        if os.path.exists(self.path):
            self.stages = read_json(self.path).get("stages", {})

    def record(self, stage: str, config_digest: str,
               inputs: list[str], outputs: list[str]) -> None:
        self.stages[stage] = {
            "config_digest": config_digest,
            "inputs": {os.path.basename(p): file_digest(p) for p in inputs},
            "outputs": {os.path.basename(p): file_digest(p) for p in outputs},
        }
        write_json(self.path, {"stages": self.stages})
