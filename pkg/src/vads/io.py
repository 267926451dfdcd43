"""Readers and writers for dataset and graph files.

Supported dataset formats:

* ``fvecs`` / ``ivecs`` — little-endian; per vector a 32-bit int dimension
  followed by that many float32 / int32 values (texmex / SIFT convention).
* ``bin`` — flat little-endian: int32 n, int32 dim, then n*dim float32.
* native ``VADS`` — lossless: magic ``VADS``, u32 version, u32 n, u32 dim,
  u8 metric code, then n*dim little-endian float64.

Graph format ``VAPG``: magic, u32 version, u32 n, u32 R (0 = no limit), then
per vertex a u32 out-degree followed by that many u32 neighbor ids.
"""

from __future__ import annotations

import struct
import warnings
from pathlib import Path

import numpy as np

from .dataset import Dataset, Metric
from .graph import ProximityGraph

__all__ = [
    "read_fvecs",
    "write_fvecs",
    "read_ivecs",
    "write_ivecs",
    "read_bin",
    "write_bin",
    "read_native",
    "write_native",
    "read_graph",
    "write_graph",
    "write_adjacency_csv",
]

_VADS_MAGIC = b"VADS"
_VAPG_MAGIC = b"VAPG"
_VERSION = 1


class DowncastWarning(UserWarning):
    """Raised when writing float64 data to a float32 format loses precision."""


def _check_downcast(arr: np.ndarray, path, warn: bool) -> None:
    as32 = arr.astype(np.float32)
    if warn and not np.array_equal(as32.astype(np.float64), arr):
        warnings.warn(
            f"writing {path}: float64 coordinates are not exactly representable "
            "as float32; values were rounded",
            DowncastWarning,
            stacklevel=3,
        )


def read_fvecs(path) -> np.ndarray:
    raw = np.fromfile(path, dtype="<f4")
    if raw.size == 0:
        raise ValueError(f"{path}: empty fvecs file")
    dim = int(raw[:1].view("<i4")[0])
    if dim < 1 or raw.size % (dim + 1) != 0:
        raise ValueError(f"{path}: malformed fvecs file (dim={dim}, {raw.size} words)")
    mat = raw.reshape(-1, dim + 1)
    dims = mat[:, 0].view("<i4")
    if not np.all(dims == dim):
        raise ValueError(f"{path}: inconsistent per-vector dimensions")
    return mat[:, 1:].astype(np.float64)


def write_fvecs(path, vectors: np.ndarray, warn_downcast: bool = True) -> None:
    arr = np.ascontiguousarray(vectors, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("fvecs writer expects a 2-D array")
    _check_downcast(arr, path, warn_downcast)
    n, dim = arr.shape
    out = np.empty((n, dim + 1), dtype="<f4")
    out[:, 0] = np.full(n, dim, dtype="<i4").view("<f4")
    out[:, 1:] = arr.astype("<f4")
    out.tofile(path)


def read_ivecs(path) -> np.ndarray:
    raw = np.fromfile(path, dtype="<i4")
    if raw.size == 0:
        raise ValueError(f"{path}: empty ivecs file")
    dim = int(raw[0])
    if dim < 1 or raw.size % (dim + 1) != 0:
        raise ValueError(f"{path}: malformed ivecs file (dim={dim}, {raw.size} words)")
    mat = raw.reshape(-1, dim + 1)
    if not np.all(mat[:, 0] == dim):
        raise ValueError(f"{path}: inconsistent per-vector dimensions")
    return mat[:, 1:].astype(np.int64)


def write_ivecs(path, vectors: np.ndarray) -> None:
    arr = np.ascontiguousarray(vectors, dtype=np.int64)
    if arr.ndim != 2:
        raise ValueError("ivecs writer expects a 2-D array")
    n, dim = arr.shape
    out = np.empty((n, dim + 1), dtype="<i4")
    out[:, 0] = dim
    out[:, 1:] = arr.astype("<i4")
    out.tofile(path)


def read_bin(path) -> np.ndarray:
    with open(path, "rb") as f:
        header = f.read(8)
        if len(header) != 8:
            raise ValueError(f"{path}: truncated bin header")
        n, dim = struct.unpack("<ii", header)
        if n < 1 or dim < 1:
            raise ValueError(f"{path}: malformed bin header (n={n}, dim={dim})")
        data = np.fromfile(f, dtype="<f4")
    if data.size != n * dim:
        raise ValueError(f"{path}: expected {n * dim} floats, found {data.size}")
    return data.reshape(n, dim).astype(np.float64)


def write_bin(path, vectors: np.ndarray, warn_downcast: bool = True) -> None:
    arr = np.ascontiguousarray(vectors, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("bin writer expects a 2-D array")
    _check_downcast(arr, path, warn_downcast)
    with open(path, "wb") as f:
        f.write(struct.pack("<ii", arr.shape[0], arr.shape[1]))
        arr.astype("<f4").tofile(f)


def write_native(path, ds: Dataset) -> None:
    with open(path, "wb") as f:
        f.write(_VADS_MAGIC)
        f.write(struct.pack("<IIIB", _VERSION, ds.n, ds.dim, ds.metric.code))
        f.write(ds.points.astype("<f8").tobytes())


def read_native(path) -> Dataset:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != _VADS_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, not a native dataset file")
        version, n, dim, mcode = struct.unpack("<IIIB", f.read(13))
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        data = np.frombuffer(f.read(8 * n * dim), dtype="<f8")
    if data.size != n * dim:
        raise ValueError(f"{path}: truncated payload")
    return Dataset(data.reshape(n, dim).copy(), Metric.from_code(mcode))


def write_graph(path, g: ProximityGraph) -> None:
    adj, deg = g.raw()
    parts = [_VAPG_MAGIC, struct.pack("<III", _VERSION, g.n, g.degree_limit or 0)]
    for v in range(g.n):
        d = int(deg[v])
        parts.append(struct.pack("<I", d))
        parts.append(adj[v, :d].astype("<u4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_graph(path) -> ProximityGraph:
    buf = Path(path).read_bytes()
    if buf[:4] != _VAPG_MAGIC:
        raise ValueError(f"{path}: bad magic {buf[:4]!r}, not a graph file")
    version, n, r = struct.unpack("<III", buf[4:16])
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    limit = r if r > 0 else None
    out_lists = []
    off = 16
    for _ in range(n):
        if off + 4 > len(buf):
            raise ValueError(f"{path}: truncated graph file")
        (d,) = struct.unpack_from("<I", buf, off)
        off += 4
        nbrs = np.frombuffer(buf, dtype="<u4", count=d, offset=off).astype(np.int64)
        off += 4 * d
        out_lists.append(nbrs)
    if off != len(buf):
        raise ValueError(f"{path}: trailing bytes in graph file")
    return ProximityGraph.from_out_lists(out_lists, degree_limit=limit)


def write_adjacency_csv(path, g: ProximityGraph) -> None:
    """One edge per row; debugging aid, not a round-trip format."""
    adj, deg = g.raw()
    lines = ["source,target"]
    for v in range(g.n):
        lines.extend(f"{v},{int(t)}" for t in adj[v, : deg[v]])
    Path(path).write_text("\n".join(lines) + "\n")
