"""Batch export: embed every line of a corpus into an embedding file.

Reads the corpus JSONL format (header line ``{"format":
"zoneseg-corpus", "version": 1, "taxonomy": ...}`` followed by one
email object per line) and writes the binary embedding format::

    "LEMB" | version u32 LE = 1 | dim u32 LE | count u64 LE |
    count x dim float32 LE rows

plus the sidecar index ``<out>.idx.jsonl`` with one ``{"id", "start",
"n"}`` record per email, ranges in order and covering every row exactly
once. Outputs are written to temp files and renamed, and removed on
failure, so a crashed export never leaves partial files. Because the
embedder is frozen and deterministic, re-running an export reproduces
the files byte for byte.
"""

from __future__ import annotations

import json
import logging
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoder import LineEmbedder

log = logging.getLogger("zoneseg_exporter")

MAGIC = b"LEMB"
VERSION = 1


@dataclass(frozen=True)
class CorpusEmail:
    id: str
    lines: tuple[str, ...]


def read_corpus_emails(path: str | Path) -> list[CorpusEmail]:
    """Load (id, lines) pairs from a corpus file; annotations are ignored."""
    raw_lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not raw_lines:
        raise ValueError(f"{path}: empty corpus file")
    header = json.loads(raw_lines[0])
    if header.get("format") != "zoneseg-corpus" or header.get("version") != 1:
        raise ValueError(f"{path}: not a zoneseg-corpus v1 file")
    emails = []
    seen: set[str] = set()
    for line_no, raw in enumerate(raw_lines[1:], start=2):
        doc = json.loads(raw)
        email_id = doc["id"]
        if email_id in seen:
            raise ValueError(f"{path} line {line_no}: duplicate email id {email_id!r}")
        seen.add(email_id)
        emails.append(CorpusEmail(id=email_id, lines=tuple(doc["lines"])))
    return emails


def write_lemb(path: str | Path, entries: list[tuple[str, np.ndarray]]) -> None:
    if not entries:
        raise ValueError("nothing to write")
    dim = entries[0][1].shape[1]
    count = sum(rows.shape[0] for _, rows in entries)
    path = Path(path)
    index_file = Path(str(path) + ".idx.jsonl")
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    idx_fd, idx_tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=index_file.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(struct.pack("<4sIIQ", MAGIC, VERSION, dim, count))
            for _, rows in entries:
                fh.write(np.ascontiguousarray(rows, dtype="<f4").tobytes())
        with os.fdopen(idx_fd, "w", encoding="utf-8") as fh:
            start = 0
            for email_id, rows in entries:
                record = {"id": email_id, "start": start, "n": int(rows.shape[0])}
                fh.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")
                start += rows.shape[0]
        os.replace(tmp, path)
        os.replace(idx_tmp, index_file)
    except BaseException:
        for leftover in (tmp, idx_tmp):
            if os.path.exists(leftover):
                os.unlink(leftover)
        raise


def export_file(
    corpus_path: str | Path, out_path: str | Path, embedder: LineEmbedder
) -> dict:
    """Embed a whole corpus to disk; returns summary statistics."""
    emails = read_corpus_emails(corpus_path)
    if not emails:
        raise ValueError(f"{corpus_path}: corpus has no emails to embed")
    truncated_before = embedder.truncated_lines
    entries = [(email.id, embedder.embed_lines(list(email.lines))) for email in emails]
    write_lemb(out_path, entries)
    stats = {
        "emails": len(entries),
        "rows": sum(rows.shape[0] for _, rows in entries),
        "dim": embedder.dim,
        "truncated_lines": embedder.truncated_lines - truncated_before,
    }
    log.info(
        "exported %(rows)d rows (dim %(dim)d) for %(emails)d emails; "
        "%(truncated_lines)d lines truncated",
        stats,
    )
    return stats
