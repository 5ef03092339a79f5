"""Writer and verifier for the PFM feature-file format.

Independent implementation of the consumer toolkit's documented wire
format; format conformance of the exported bytes is this package's core
contract, so the checks here mirror the consumer's loader semantics.

Layout (little-endian): magic "PFM1", u32 version (1), u64 n_samples,
u32 dim, u8 dtype code (0 = float32), 11 reserved zero bytes, then
n_samples * dim float32 values row-major. Identity sidecar
``<stem>.manifest.json``: {"samples": [{"id": ..., "source": ...}]}.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ManifestError

MAGIC = b"PFM1"
VERSION = 1
DTYPE_FLOAT32 = 0
HEADER = struct.Struct("<4sIQIB11s")


def manifest_path_for(path: Path | str) -> Path:
    return Path(path).with_suffix(".manifest.json")


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_pfm(path: Path | str, values: np.ndarray, ids, sources) -> None:
    """Write features plus manifest sidecar; rows follow dataset order."""
    path = Path(path)
    values = np.ascontiguousarray(values, dtype="<f4")
    if values.ndim != 2:
        raise FormatError("feature array must be 2-D")
    n, dim = values.shape
    if n < 1 or dim < 2:
        raise FormatError(f"cannot write a {n}x{dim} feature file")
    if not np.all(np.isfinite(values)):
        raise FormatError("refusing to write NaN/Inf features")
    ids = [str(i) for i in ids]
    sources = [str(s) for s in sources]
    if len(ids) != n or len(sources) != n:
        raise ManifestError("ids/sources length must match the row count")
    if len(set(ids)) != n:
        raise ManifestError("sample ids must be unique")
    header = HEADER.pack(MAGIC, VERSION, n, dim, DTYPE_FLOAT32, b"\x00" * 11)
    _atomic_write(path, header + values.tobytes())
    doc = {"samples": [{"id": i, "source": s} for i, s in zip(ids, sources)]}
    _atomic_write(manifest_path_for(path), json.dumps(doc, indent=2).encode() + b"\n")


@dataclass(frozen=True)
class PfmInfo:
    n_samples: int
    dim: int
    manifest_entries: int


def verify_pfm(path: Path | str) -> PfmInfo:
    """Validate header, payload, and manifest; return the file's shape."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if len(raw) < HEADER.size or raw[:4] != MAGIC:
        raise FormatError(f"{path}: not a PFM file")
    magic, version, n, dim, dtype_code, reserved = HEADER.unpack(raw[: HEADER.size])
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dtype_code != DTYPE_FLOAT32 or reserved != b"\x00" * 11:
        raise FormatError(f"{path}: malformed header")
    if n < 1 or dim < 2:
        raise FormatError(f"{path}: header declares {n}x{dim}")
    expected = n * dim * 4
    payload = raw[HEADER.size :]
    if len(payload) < expected:
        raise FormatError(
            f"{path}: truncated payload ({len(payload)} bytes, need {expected})"
        )
    if len(payload) > expected:
        raise FormatError(f"{path}: trailing bytes after payload")
    values = np.frombuffer(payload, dtype="<f4")
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{path}: payload contains NaN or Inf")

    mpath = manifest_path_for(path)
    if not mpath.exists():
        raise ManifestError(f"manifest sidecar not found: {mpath}")
    try:
        doc = json.loads(mpath.read_text("utf-8"))
    except ValueError as exc:
        raise ManifestError(f"cannot parse {mpath}: {exc}") from exc
    samples = doc.get("samples") if isinstance(doc, dict) else None
    if not isinstance(samples, list):
        raise ManifestError(f"{mpath}: missing 'samples' list")
    if len(samples) != n:
        raise ManifestError(f"{mpath}: {len(samples)} entries for {n} rows")
    seen = set()
    for row in samples:
        if not isinstance(row, dict) or "id" not in row or "source" not in row:
            raise ManifestError(f"{mpath}: entries need 'id' and 'source'")
        if row["id"] in seen:
            raise ManifestError(f"{mpath}: duplicate id {row['id']!r}")
        seen.add(row["id"])
    return PfmInfo(n_samples=n, dim=dim, manifest_entries=len(samples))
