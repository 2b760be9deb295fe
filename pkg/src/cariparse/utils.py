"""Shared helpers: hashing, deterministic serialization, seed derivation."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    return sha256_bytes(Path(path).read_bytes())


def param_fingerprint(state_dict) -> str:
    """Hash of a model's parameters, independent of file serialization.

    Covers parameter names, dtypes, shapes and raw little-endian bytes in
    sorted name order, so two checkpoints with identical tensors always
    fingerprint the same.
    """
    h = hashlib.sha256()
    for name in sorted(state_dict.keys()):
        t = state_dict[name].detach().cpu().contiguous()
        h.update(name.encode())
        h.update(str(t.dtype).encode())
        h.update(str(tuple(t.shape)).encode())
        h.update(t.numpy().tobytes())
    return h.hexdigest()


def stable_json_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": "))


def derive_seed(base_seed: int, tag: str) -> int:
    """Stable per-stage sub-seed so stages draw from independent streams."""
    h = hashlib.sha256(f"{base_seed}:{tag}".encode()).digest()
    return int.from_bytes(h[:4], "little")


def tree_fingerprint(root) -> str:
    """Hash every file under a directory (sorted relative paths + bytes)."""
    root = Path(root)
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(str(p.relative_to(root)).encode())
            h.update(p.read_bytes())
    return h.hexdigest()
