"""On-disk and in-memory representation of sample embeddings.

Wire format (PFM, little-endian throughout)::

    bytes 0-3    magic "PFM1"
    bytes 4-7    format version, u32, currently 1
    bytes 8-15   n_samples, u64
    bytes 16-19  dim, u32
    byte  20     dtype code (0 = IEEE float32)
    bytes 21-31  reserved, must be zero
    bytes 32-    n_samples * dim float32 values, row-major

Sample identity lives in a JSON sidecar ``<stem>.manifest.json`` shaped
``{"samples": [{"id": "...", "source": "..."}]}`` so the binary payload
stays reusable across manifest edits.

Values are stored as float32: embedding dumps are large and downstream
scores tolerate it. Every reduction over them (means, norms, dot
products) must accumulate in float64 or better; in-memory matrices may
therefore also be float64 when produced programmatically.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError, DataError, FormatError, ManifestError, TruncationError

MAGIC = b"PFM1"
FORMAT_VERSION = 1
DTYPE_FLOAT32 = 0
HEADER_SIZE = 32
_HEADER_STRUCT = struct.Struct("<4sIQIB11s")

_ALLOWED_DTYPES = (np.float32, np.float64)


@dataclass(frozen=True)
class ManifestEntry:
    sample_id: str
    source_tag: str


@dataclass(frozen=True)
class SampleManifest:
    """Ordered sample identities; ids must be unique."""

    entries: tuple[ManifestEntry, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for entry in self.entries:
            if entry.sample_id in seen:
                raise ContractError(f"duplicate sample id {entry.sample_id!r} in manifest")
            seen.add(entry.sample_id)

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> tuple[str, ...]:
        return tuple(e.sample_id for e in self.entries)

    def id_to_index(self) -> dict[str, int]:
        return {e.sample_id: i for i, e in enumerate(self.entries)}

    def id_to_source(self) -> dict[str, str]:
        return {e.sample_id: e.source_tag for e in self.entries}

    @classmethod
    def from_pairs(cls, pairs) -> "SampleManifest":
        return cls(tuple(ManifestEntry(str(i), str(s)) for i, s in pairs))


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense N x d sample embeddings, treated as immutable after creation."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = self.values
        if not isinstance(arr, np.ndarray) or arr.ndim != 2:
            raise ContractError("feature matrix must be a 2-D ndarray")
        if arr.dtype not in [np.dtype(d) for d in _ALLOWED_DTYPES]:
            raise ContractError(f"unsupported dtype {arr.dtype}; use float32 or float64")
        n, d = arr.shape
        if n < 1:
            raise ContractError("feature matrix needs at least one sample")
        if d < 2:
            raise ContractError("feature dimension must be >= 2")
        if not np.all(np.isfinite(arr)):
            raise ContractError("feature matrix contains NaN or Inf")
        if not arr.flags.c_contiguous:
            object.__setattr__(self, "values", np.ascontiguousarray(arr))

    @property
    def n_samples(self) -> int:
        return int(self.values.shape[0])

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True)
class DatasetHandle:
    """A feature matrix paired with its identity manifest.

    Immutable after load; safe to share read-only across workers.
    """

    matrix: FeatureMatrix
    manifest: SampleManifest

    def __post_init__(self) -> None:
        if len(self.manifest) != self.matrix.n_samples:
            raise ContractError(
                f"manifest has {len(self.manifest)} entries for "
                f"{self.matrix.n_samples} matrix rows"
            )

    @property
    def n_samples(self) -> int:
        return self.matrix.n_samples

    @property
    def dim(self) -> int:
        return self.matrix.dim


def manifest_path_for(path: Path | str) -> Path:
    return Path(path).with_suffix(".manifest.json")


def atomic_write_bytes(path: Path | str, data: bytes) -> None:
    """Write via a temp file in the target directory plus rename."""
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(prefix=path.name + ".", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def write_features(handle: DatasetHandle, path: Path | str) -> None:
    """Serialize a handle to ``path`` (PFM) and its manifest sidecar.

    The payload is always written as float32; reading it back inverts the
    write bit-exactly for float32 handles.
    """
    if not isinstance(handle, DatasetHandle):
        raise ContractError("write_features expects a DatasetHandle")
    path = Path(path)
    values = handle.matrix.values
    payload = np.ascontiguousarray(values, dtype="<f4")
    header = _HEADER_STRUCT.pack(
        MAGIC,
        FORMAT_VERSION,
        handle.matrix.n_samples,
        handle.matrix.dim,
        DTYPE_FLOAT32,
        b"\x00" * 11,
    )
    atomic_write_bytes(path, header + payload.tobytes())
    manifest_doc = {
        "samples": [
            {"id": e.sample_id, "source": e.source_tag} for e in handle.manifest.entries
        ]
    }
    atomic_write_bytes(
        manifest_path_for(path),
        json.dumps(manifest_doc, indent=2).encode("utf-8") + b"\n",
    )


def _read_manifest(path: Path, expected_n: int) -> SampleManifest:
    if not path.exists():
        raise ManifestError(f"manifest sidecar not found: {path}")
    try:
        doc = json.loads(path.read_text("utf-8"))
    except (OSError, ValueError) as exc:
        raise ManifestError(f"cannot parse manifest {path}: {exc}") from exc
    samples = doc.get("samples") if isinstance(doc, dict) else None
    if not isinstance(samples, list):
        raise ManifestError(f"manifest {path} lacks a 'samples' list")
    entries = []
    seen: set[str] = set()
    for i, row in enumerate(samples):
        if not isinstance(row, dict) or "id" not in row or "source" not in row:
            raise ManifestError(f"manifest {path} entry {i} needs 'id' and 'source'")
        sid = str(row["id"])
        if sid in seen:
            raise ManifestError(f"manifest {path} has duplicate id {sid!r}")
        seen.add(sid)
        entries.append(ManifestEntry(sid, str(row["source"])))
    if len(entries) != expected_n:
        raise ManifestError(
            f"manifest {path} has {len(entries)} entries, matrix has {expected_n} rows"
        )
    return SampleManifest(tuple(entries))


def read_features(path: Path | str) -> DatasetHandle:
    """Load a PFM file and its manifest into a fully materialized handle.

    Row i of the matrix corresponds to manifest entry i.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic, not a PFM file")
    if len(raw) < HEADER_SIZE:
        raise FormatError(f"{path}: header truncated ({len(raw)} bytes)")
    magic, version, n_samples, dim, dtype_code, reserved = _HEADER_STRUCT.unpack(
        raw[:HEADER_SIZE]
    )
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    if dtype_code != DTYPE_FLOAT32:
        raise FormatError(f"{path}: unknown dtype code {dtype_code}")
    if reserved != b"\x00" * 11:
        raise FormatError(f"{path}: reserved header bytes are not zero")
    if n_samples < 1:
        raise FormatError(f"{path}: header declares zero samples")
    if dim < 2:
        raise FormatError(f"{path}: header declares dim {dim}, need >= 2")
    expected = n_samples * dim * 4
    payload = raw[HEADER_SIZE:]
    if len(payload) < expected:
        raise TruncationError(
            f"{path}: payload holds {len(payload)} bytes, header requires {expected}"
        )
    if len(payload) > expected:
        raise FormatError(f"{path}: {len(payload) - expected} trailing bytes after payload")
    values = np.frombuffer(payload, dtype="<f4").reshape(n_samples, dim).copy()
    if not np.all(np.isfinite(values)):
        raise DataError(f"{path}: payload contains NaN or Inf")
    manifest = _read_manifest(manifest_path_for(path), n_samples)
    return DatasetHandle(FeatureMatrix(values), manifest)
