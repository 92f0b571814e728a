"""Deterministic versioned weight checkpoints.

Layout: 8-byte magic, 8-byte little-endian header length, JSON header
(sorted keys) describing each array's dtype/shape/offset, then the raw
little-endian buffers in header order. Identical state always serializes to
identical bytes. A JSON sidecar (written by the pipeline) records the model
spec, training config hash, and the blob's content hash.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
import torch

MAGIC = b"MKCKPT1\n"
VERSION = 1


def state_dict_to_arrays(state_dict: dict) -> dict[str, np.ndarray]:
    return {name: tensor.detach().cpu().numpy() for name, tensor in state_dict.items()}


def save_checkpoint(path: str | Path, arrays: dict[str, np.ndarray]) -> str:
    """Write the blob; returns its sha256 hex digest."""
    entries = {}
    offset = 0
    payloads = []
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        if arr.dtype.byteorder == ">":
            arr = arr.astype(arr.dtype.newbyteorder("<"))
        buf = arr.tobytes()
        entries[name] = {"dtype": arr.dtype.str, "shape": list(arr.shape),
                         "offset": offset, "nbytes": len(buf)}
        payloads.append(buf)
        offset += len(buf)
    header = json.dumps({"version": VERSION, "arrays": entries},
                        sort_keys=True, separators=(",", ":")).encode("utf-8")
    blob = MAGIC + len(header).to_bytes(8, "little") + header + b"".join(payloads)
    Path(path).write_bytes(blob)
    return hashlib.sha256(blob).hexdigest()


def load_checkpoint(path: str | Path) -> dict[str, np.ndarray]:
    blob = Path(path).read_bytes()
    if blob[:len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a moodkit checkpoint (bad magic)")
    header_len = int.from_bytes(blob[len(MAGIC):len(MAGIC) + 8], "little")
    header_start = len(MAGIC) + 8
    header = json.loads(blob[header_start:header_start + header_len])
    if header.get("version") != VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {header.get('version')}")
    base = header_start + header_len
    arrays = {}
    for name, entry in header["arrays"].items():
        start = base + entry["offset"]
        raw = blob[start:start + entry["nbytes"]]
        arrays[name] = np.frombuffer(raw, dtype=np.dtype(entry["dtype"])) \
            .reshape(entry["shape"]).copy()
    return arrays


def save_model(path: str | Path, model: torch.nn.Module, sidecar: dict) -> str:
    """Blob + JSON sidecar (same stem, .json suffix); returns the blob hash,
    which is also recorded in the sidecar as content_sha256."""
    digest = save_checkpoint(path, state_dict_to_arrays(model.state_dict()))
    sidecar = dict(sidecar)
    sidecar["content_sha256"] = digest
    sidecar_path = Path(path).with_suffix(".json")
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return digest


def load_sidecar(path: str | Path) -> dict:
    with open(Path(path).with_suffix(".json"), encoding="utf-8") as fh:
        return json.load(fh)


def restore_model(path: str | Path, model: torch.nn.Module) -> torch.nn.Module:
    """Load blob arrays into an already-constructed module."""
    arrays = load_checkpoint(path)
    state = {name: torch.from_numpy(arr) for name, arr in arrays.items()}
    model.load_state_dict(state)
    return model
