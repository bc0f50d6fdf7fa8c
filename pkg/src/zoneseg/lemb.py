"""Binary line-embedding files and their sidecar row index.

Layout (all integers little-endian)::

    magic   4 bytes  b"LEMB"
    version u32      1
    dim     u32      columns per row
    count   u64      number of rows
    data    count * dim * float32, row-major

The sidecar index lives at ``<path>.idx.jsonl``: one JSON object per
email, ``{"id": str, "start": int, "n": int}``, with in-order,
non-overlapping ranges that together cover rows [0, count) exactly.

Writers are atomic (temp file + rename) so a crashed export never leaves
a half-written file behind.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import (
    LembIndexError,
    LembMagicError,
    LembTruncatedError,
    LembVersionError,
    ValidationError,
)

MAGIC = b"LEMB"
VERSION = 1
_HEADER = struct.Struct("<4sIIQ")


def index_path(path: str | Path) -> Path:
    return Path(str(path) + ".idx.jsonl")


def write_embedding_file(
    path: str | Path, entries: Sequence[tuple[str, np.ndarray]]
) -> None:
    """Write rows for each (email_id, matrix) pair plus the sidecar index.

    Every matrix must be 2-D with the same column count; payload is stored
    as float32. Both files are replaced atomically.
    """
    if not entries:
        raise ValidationError("refusing to write an embedding file with no entries")
    dim = None
    for email_id, rows in entries:
        rows = np.asarray(rows)
        if rows.ndim != 2:
            raise ValidationError(f"embedding block for {email_id!r} is not 2-D")
        if dim is None:
            dim = rows.shape[1]
        elif rows.shape[1] != dim:
            raise ValidationError(
                f"embedding block for {email_id!r} has dim {rows.shape[1]}, "
                f"expected {dim}"
            )
    count = sum(np.asarray(rows).shape[0] for _, rows in entries)

    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    idx_fd, idx_tmp = tempfile.mkstemp(
        dir=path.parent or Path("."), prefix=index_path(path).name + "."
    )
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, VERSION, dim, count))
            for _, rows in entries:
                fh.write(np.ascontiguousarray(rows, dtype="<f4").tobytes())
        with os.fdopen(idx_fd, "w", encoding="utf-8") as fh:
            start = 0
            for email_id, rows in entries:
                n = np.asarray(rows).shape[0]
                fh.write(
                    json.dumps(
                        {"id": email_id, "start": start, "n": n},
                        ensure_ascii=False,
                        separators=(",", ":"),
                    )
                    + "\n"
                )
                start += n
        os.replace(tmp, path)
        os.replace(idx_tmp, index_path(path))
    except BaseException:
        for leftover in (tmp, idx_tmp):
            if os.path.exists(leftover):
                os.unlink(leftover)
        raise


class EmbeddingFile:
    """Loaded embedding matrix plus the email-id -> row-range index."""

    def __init__(self, dim: int, matrix: np.ndarray, index: dict[str, tuple[int, int]]):
        self.dim = dim
        self.matrix = matrix
        self.index = index

    @property
    def count(self) -> int:
        return self.matrix.shape[0]

    def row(self, i: int) -> np.ndarray:
        return self.matrix[i]

    def rows(self, start: int, n: int) -> np.ndarray:
        return self.matrix[start : start + n]

    def email_rows(self, email_id: str) -> np.ndarray:
        if email_id not in self.index:
            raise LembIndexError(f"email id {email_id!r} is not in the embedding index")
        start, n = self.index[email_id]
        return self.rows(start, n)


def load_embedding_file(path: str | Path) -> EmbeddingFile:
    """Load an embedding file and validate it against its sidecar index."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise LembTruncatedError(f"{path}: shorter than the fixed header")
    magic, version, dim, count = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise LembMagicError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise LembVersionError(f"{path}: unsupported version {version}")
    if dim == 0:
        raise LembTruncatedError(f"{path}: dim must be positive")
    expected = _HEADER.size + count * dim * 4
    if len(blob) < expected:
        raise LembTruncatedError(
            f"{path}: payload truncated ({len(blob)} bytes, expected {expected})"
        )
    if len(blob) > expected:
        raise LembTruncatedError(
            f"{path}: {len(blob) - expected} trailing bytes after declared payload"
        )
    matrix = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(count, dim)

    idx_file = index_path(path)
    if not idx_file.exists():
        raise LembIndexError(f"{idx_file}: sidecar index is missing")
    index: dict[str, tuple[int, int]] = {}
    cursor = 0
    for line_no, raw in enumerate(
        idx_file.read_text(encoding="utf-8").splitlines(), start=1
    ):
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as e:
            raise LembIndexError(f"{idx_file} line {line_no}: bad record ({e})") from e
        email_id, start, n = rec.get("id"), rec.get("start"), rec.get("n")
        if email_id is None or start is None or n is None:
            raise LembIndexError(f"{idx_file} line {line_no}: missing id/start/n")
        if email_id in index:
            raise LembIndexError(f"{idx_file} line {line_no}: duplicate id {email_id!r}")
        if start != cursor:
            raise LembIndexError(
                f"{idx_file} line {line_no}: range starts at {start}, expected {cursor}"
            )
        if n < 0 or start + n > count:
            raise LembIndexError(
                f"{idx_file} line {line_no}: range [{start}, {start + n}) exceeds "
                f"row count {count}"
            )
        index[email_id] = (start, n)
        cursor = start + n
    if cursor != count:
        raise LembIndexError(
            f"{idx_file}: index covers {cursor} rows but the file declares {count}"
        )
    return EmbeddingFile(dim=dim, matrix=matrix, index=index)


def iter_index(path: str | Path) -> Iterable[tuple[str, int, int]]:
    for email_id, (start, n) in load_embedding_file(path).index.items():
        yield email_id, start, n
