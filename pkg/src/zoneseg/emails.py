"""Core value objects: emails, line zones, and zone taxonomies.

An email body is modeled as an ordered sequence of lines; an annotation
assigns one zone name per line. Zone names come from a closed taxonomy,
and taxonomies may ship mapping tables that project their zones onto a
coarser taxonomy (e.g. the 15-zone schema onto 5- or 2-zone schemas).

All types are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .exceptions import ValidationError

ZoneName = str

_LANG_RE = re.compile(r"[a-z]{2}")

BUILTIN_TAXONOMY_NAMES = ("gmane15", "two5", "two2")


def split_lines(body: str) -> list[str]:
    """Split an email body into lines.

    CRLF and lone CR are normalized to LF first, then the body is split on
    LF. Interior empty lines are preserved; one trailing newline does not
    produce a final empty line. ``split_lines("")`` returns ``[""]``.
    """
    normalized = body.replace("\r\n", "\n").replace("\r", "\n")
    if normalized.endswith("\n"):
        normalized = normalized[:-1]
    return normalized.split("\n")


@dataclass(frozen=True)
class Email:
    """One email body: a unique id, a language tag, and its raw lines.

    Lines are kept verbatim (no trimming, no case folding); indentation and
    markers like ``>`` are zoning signals and must survive intact.
    """

    id: str
    lang: str
    lines: tuple[str, ...]

    def __post_init__(self):
        if not self.id:
            raise ValidationError("email id must be non-empty")
        if not _LANG_RE.fullmatch(self.lang):
            raise ValidationError(
                f"email {self.id!r}: lang {self.lang!r} is not a two-letter ISO 639-1 code"
            )
        object.__setattr__(self, "lines", tuple(self.lines))
        if len(self.lines) == 0:
            raise ValidationError(f"email {self.id!r}: lines must be non-empty")
        for i, line in enumerate(self.lines):
            if "\n" in line or "\r" in line:
                raise ValidationError(
                    f"email {self.id!r}: line {i} contains a newline character"
                )

    @classmethod
    def from_body(cls, id: str, lang: str, body: str) -> "Email":
        return cls(id=id, lang=lang, lines=tuple(split_lines(body)))


@dataclass(frozen=True)
class Taxonomy:
    """A closed, ordered vocabulary of zone names.

    ``mappings`` optionally holds total functions from this taxonomy's
    zones onto the zones of another taxonomy, keyed by the target
    taxonomy's name. Totality is checked here; target membership is
    checked when the mapping is resolved against a concrete target.
    """

    name: str
    zones: tuple[ZoneName, ...]
    mappings: Mapping[str, Mapping[ZoneName, ZoneName]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.name:
            raise ValidationError("taxonomy name must be non-empty")
        object.__setattr__(self, "zones", tuple(self.zones))
        if len(self.zones) == 0:
            raise ValidationError(f"taxonomy {self.name!r}: zones must be non-empty")
        if len(set(self.zones)) != len(self.zones):
            raise ValidationError(f"taxonomy {self.name!r}: zone names must be unique")
        for target, table in self.mappings.items():
            missing = [z for z in self.zones if z not in table]
            if missing:
                raise ValidationError(
                    f"taxonomy {self.name!r}: mapping onto {target!r} does not cover "
                    f"zones {missing}"
                )
            unknown = [z for z in table if z not in self.zones]
            if unknown:
                raise ValidationError(
                    f"taxonomy {self.name!r}: mapping onto {target!r} lists unknown "
                    f"zones {unknown}"
                )

    @property
    def zone_set(self) -> frozenset[ZoneName]:
        return frozenset(self.zones)

    def index(self, zone: ZoneName) -> int:
        """Label index of a zone (position in the declared zone order)."""
        try:
            return self.zones.index(zone)
        except ValueError:
            raise ValidationError(
                f"zone {zone!r} is not in taxonomy {self.name!r}"
            ) from None

    def mapping_to(self, target: "Taxonomy") -> "TaxonomyMapping":
        """Resolve the stored mapping table onto a concrete target taxonomy."""
        table = self.mappings.get(target.name)
        if table is None:
            raise ValidationError(
                f"taxonomy {self.name!r} has no mapping onto {target.name!r}"
            )
        return TaxonomyMapping(source=self, target=target, table=dict(table))

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "zones": list(self.zones),
            "mappings": {t: dict(m) for t, m in self.mappings.items()},
        }


@dataclass(frozen=True)
class TaxonomyMapping:
    """A validated total function from source zones onto target zones."""

    source: Taxonomy
    target: Taxonomy
    table: Mapping[ZoneName, ZoneName]

    def __post_init__(self):
        missing = [z for z in self.source.zones if z not in self.table]
        if missing:
            raise ValidationError(
                f"mapping {self.source.name!r}->{self.target.name!r} does not cover "
                f"zones {missing}"
            )
        bad = sorted(
            {t for t in self.table.values() if t not in self.target.zone_set}
        )
        if bad:
            raise ValidationError(
                f"mapping {self.source.name!r}->{self.target.name!r} targets unknown "
                f"zones {bad}"
            )

    def apply(self, zone: ZoneName) -> ZoneName:
        try:
            return self.table[zone]
        except KeyError:
            raise ValidationError(
                f"zone {zone!r} is not in the domain of mapping "
                f"{self.source.name!r}->{self.target.name!r}"
            ) from None


@dataclass(frozen=True)
class AnnotatedEmail:
    """An email plus one zone label per line, optionally tagged by annotator."""

    email: Email
    zones: tuple[ZoneName, ...]
    annotator: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "zones", tuple(self.zones))
        if len(self.zones) != len(self.email.lines):
            raise ValidationError(
                f"email {self.email.id!r}: {len(self.zones)} zones for "
                f"{len(self.email.lines)} lines"
            )

    @property
    def id(self) -> str:
        return self.email.id


def map_annotation(a: AnnotatedEmail, mapping: TaxonomyMapping) -> AnnotatedEmail:
    """Project an annotation onto the mapping's target taxonomy.

    The email itself is unchanged; each zone is replaced elementwise.
    Raises ``ValidationError`` naming the offending zone and line index if a
    zone falls outside the mapping's domain.
    """
    mapped = []
    for i, zone in enumerate(a.zones):
        if zone not in mapping.table:
            raise ValidationError(
                f"email {a.email.id!r} line {i}: zone {zone!r} is not in the domain "
                f"of mapping {mapping.source.name!r}->{mapping.target.name!r}"
            )
        mapped.append(mapping.table[zone])
    return AnnotatedEmail(email=a.email, zones=tuple(mapped), annotator=a.annotator)


def _taxonomy_from_dict(doc: dict, origin: str) -> Taxonomy:
    for key in ("name", "zones"):
        if key not in doc:
            raise ValidationError(f"{origin}: taxonomy file is missing {key!r}")
    return Taxonomy(
        name=doc["name"],
        zones=tuple(doc["zones"]),
        mappings={t: dict(m) for t, m in doc.get("mappings", {}).items()},
    )


def load_taxonomy(path: str | Path) -> Taxonomy:
    """Load a taxonomy from its JSON file format."""
    raw = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: not valid JSON ({e})") from e
    return _taxonomy_from_dict(doc, str(path))


def builtin_taxonomies() -> list[Taxonomy]:
    """The taxonomies shipped with the package, in registry order.

    ``gmane15`` is the fine-grained 15-zone schema; ``two5`` and ``two2``
    are the coarse 5- and 2-zone schemas. ``gmane15`` carries default
    mapping tables onto both coarse schemas; the tables live in editable
    data files, so deployments can override them without code changes.
    """
    taxonomies = []
    for name in BUILTIN_TAXONOMY_NAMES:
        raw = resources.files("zoneseg.data").joinpath(f"{name}.json").read_text("utf-8")
        taxonomies.append(_taxonomy_from_dict(json.loads(raw), f"builtin {name}"))
    by_name = {t.name: t for t in taxonomies}
    for t in taxonomies:
        for target_name in t.mappings:
            target = by_name.get(target_name)
            if target is None:
                raise ValidationError(
                    f"builtin taxonomy {t.name!r} maps onto unknown taxonomy "
                    f"{target_name!r}"
                )
            t.mapping_to(target)  # validates totality and target membership
    return taxonomies


def builtin_taxonomy(name: str) -> Taxonomy:
    for t in builtin_taxonomies():
        if t.name == name:
            return t
    raise ValidationError(
        f"unknown taxonomy {name!r}; builtins are {', '.join(BUILTIN_TAXONOMY_NAMES)}"
    )


def zones_to_indices(zones: Iterable[ZoneName], taxonomy: Taxonomy) -> list[int]:
    lookup = {z: i for i, z in enumerate(taxonomy.zones)}
    return [lookup[z] for z in zones]
