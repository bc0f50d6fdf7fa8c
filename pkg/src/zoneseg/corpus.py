"""Read, write, and split annotated email corpora.

The on-disk format is JSONL, UTF-8, LF-terminated. The first line is a
header object::

    {"format": "zoneseg-corpus", "version": 1, "taxonomy": <name>}

and every following line is one annotated email::

    {"id": str, "lang": str, "lines": [str, ...], "zones": [str, ...],
     "annotator": str | null}

A corpus's display name is not part of the format; readers name the
corpus after the file stem.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .emails import AnnotatedEmail, Email, Taxonomy, TaxonomyMapping, builtin_taxonomy, map_annotation
from .exceptions import CorpusParseError, ValidationError

FORMAT_NAME = "zoneseg-corpus"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class Corpus:
    """A named collection of annotated emails under one taxonomy."""

    name: str
    taxonomy: Taxonomy
    emails: tuple[AnnotatedEmail, ...]

    def __post_init__(self):
        object.__setattr__(self, "emails", tuple(self.emails))
        seen: set[str] = set()
        zone_set = self.taxonomy.zone_set
        for a in self.emails:
            if a.email.id in seen:
                raise ValidationError(f"duplicate email id {a.email.id!r} in corpus")
            seen.add(a.email.id)
            for i, z in enumerate(a.zones):
                if z not in zone_set:
                    raise ValidationError(
                        f"email {a.email.id!r} line {i}: zone {z!r} is not in "
                        f"taxonomy {self.taxonomy.name!r}"
                    )

    def __len__(self) -> int:
        return len(self.emails)

    @property
    def n_lines(self) -> int:
        return sum(len(a.email.lines) for a in self.emails)

    def by_id(self) -> dict[str, AnnotatedEmail]:
        return {a.email.id: a for a in self.emails}


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic train/dev/test partition sizes and shuffle seed."""

    train_fraction: float
    dev_fraction: float
    test_fraction: float
    seed: int

    def __post_init__(self):
        fractions = (self.train_fraction, self.dev_fraction, self.test_fraction)
        for f in fractions:
            if not (0.0 <= f <= 1.0):
                raise ValidationError(f"split fraction {f} outside [0, 1]")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ValidationError(f"split fractions {fractions} do not sum to 1")
        if self.seed < 0:
            raise ValidationError("split seed must be non-negative")


def _record_to_email(doc: dict, line_no: int) -> AnnotatedEmail:
    for key in ("id", "lang", "lines", "zones"):
        if key not in doc:
            raise CorpusParseError(line_no, f"record is missing {key!r}")
    email = Email(id=doc["id"], lang=doc["lang"], lines=tuple(doc["lines"]))
    return AnnotatedEmail(
        email=email, zones=tuple(doc["zones"]), annotator=doc.get("annotator")
    )


def read_corpus(path: str | Path, taxonomy: Taxonomy | None = None) -> Corpus:
    """Load a corpus file, validating every record against its taxonomy.

    When ``taxonomy`` is omitted it is resolved from the header's taxonomy
    name among the builtin taxonomies. Parse failures raise
    ``CorpusParseError`` with the offending line number; invariant
    violations raise ``ValidationError`` naming the email id.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        raw_lines = fh.read().split("\n")
    if raw_lines and raw_lines[-1] == "":
        raw_lines.pop()
    if not raw_lines:
        raise CorpusParseError(1, "empty file (missing header line)")

    try:
        header = json.loads(raw_lines[0])
    except json.JSONDecodeError as e:
        raise CorpusParseError(1, f"bad header: {e}") from e
    if not isinstance(header, dict) or header.get("format") != FORMAT_NAME:
        raise CorpusParseError(1, f"not a {FORMAT_NAME} file")
    if header.get("version") != FORMAT_VERSION:
        raise CorpusParseError(1, f"unsupported version {header.get('version')!r}")
    taxonomy_name = header.get("taxonomy")
    if taxonomy is None:
        taxonomy = builtin_taxonomy(taxonomy_name)
    elif taxonomy.name != taxonomy_name:
        raise ValidationError(
            f"{path}: header declares taxonomy {taxonomy_name!r}, caller supplied "
            f"{taxonomy.name!r}"
        )

    emails = []
    for offset, raw in enumerate(raw_lines[1:], start=2):
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as e:
            raise CorpusParseError(offset, f"bad record: {e}") from e
        emails.append(_record_to_email(doc, offset))
    return Corpus(name=path.stem, taxonomy=taxonomy, emails=tuple(emails))


def _email_record(a: AnnotatedEmail) -> str:
    return json.dumps(
        {
            "id": a.email.id,
            "lang": a.email.lang,
            "lines": list(a.email.lines),
            "zones": list(a.zones),
            "annotator": a.annotator,
        },
        ensure_ascii=False,
        separators=(",", ":"),
    )


def corpus_bytes(corpus: Corpus) -> bytes:
    header = json.dumps(
        {"format": FORMAT_NAME, "version": FORMAT_VERSION, "taxonomy": corpus.taxonomy.name},
        ensure_ascii=False,
        separators=(",", ":"),
    )
    lines = [header] + [_email_record(a) for a in corpus.emails]
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus file atomically (temp file in place, then rename)."""
    path = Path(path)
    data = corpus_bytes(corpus)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def split_corpus(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus, Corpus]:
    """Partition a corpus into train/dev/test at email granularity.

    The emails are shuffled deterministically by ``spec.seed``; dev and
    test sizes are floor-rounded and the remainder goes to train. The
    splits are disjoint and exhaustive.
    """
    if len(corpus) == 0:
        raise ValidationError("cannot split an empty corpus")
    n = len(corpus)
    n_dev = math.floor(n * spec.dev_fraction)
    n_test = math.floor(n * spec.test_fraction)
    n_train = n - n_dev - n_test
    order = np.random.default_rng(spec.seed).permutation(n)
    shuffled = [corpus.emails[i] for i in order]

    def part(emails: list[AnnotatedEmail], suffix: str) -> Corpus:
        return Corpus(
            name=f"{corpus.name}-{suffix}", taxonomy=corpus.taxonomy, emails=tuple(emails)
        )

    return (
        part(shuffled[:n_train], "train"),
        part(shuffled[n_train : n_train + n_dev], "dev"),
        part(shuffled[n_train + n_dev :], "test"),
    )


def map_corpus(corpus: Corpus, mapping: TaxonomyMapping) -> Corpus:
    """Project every annotation onto the mapping's target taxonomy."""
    if mapping.source.name != corpus.taxonomy.name:
        raise ValidationError(
            f"corpus taxonomy {corpus.taxonomy.name!r} does not match mapping source "
            f"{mapping.source.name!r}"
        )
    return Corpus(
        name=corpus.name,
        taxonomy=mapping.target,
        emails=tuple(map_annotation(a, mapping) for a in corpus.emails),
    )


def concat_corpora(name: str, parts: Iterable[Corpus]) -> Corpus:
    parts = list(parts)
    if not parts:
        raise ValidationError("no corpora to concatenate")
    taxonomy = parts[0].taxonomy
    for p in parts[1:]:
        if p.taxonomy.name != taxonomy.name:
            raise ValidationError(
                f"cannot concatenate corpora with taxonomies "
                f"{taxonomy.name!r} and {p.taxonomy.name!r}"
            )
    emails: list[AnnotatedEmail] = []
    for p in parts:
        emails.extend(p.emails)
    return Corpus(name=name, taxonomy=taxonomy, emails=tuple(emails))
