"""Dataset catalog: load, validate, query, and join on a declared primary key.

The catalog file is JSON Lines, one dataset record per line, UTF-8. A loaded
Catalog is immutable; reloads produce a new Catalog with a bumped version.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import NotFoundError, ParseError, SchemaError, ValidationError

log = logging.getLogger(__name__)


class AccessTier(str, Enum):
    OPEN = "open"
    RESTRICTED = "restricted"
    CREDENTIALED = "credentialed"

    @classmethod
    def parse(cls, text: str) -> "AccessTier":
        try:
            return cls(text)
        except ValueError:
            valid = ", ".join(t.value for t in cls)
            raise ValidationError(f"unknown tier {text!r} (expected one of: {valid})") from None


COUNT_UNITS = ("patients", "exams", "stays", "files")
SOURCES = ("snuh", "physionet")


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    name: str
    description: str
    tier: AccessTier
    modality_tags: frozenset[str]
    record_count: int
    count_unit: str
    source: str
    join_key: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ValidationError("dataset id must be nonempty")
        if self.record_count < 0:
            raise ValidationError(f"dataset {self.id!r}: record_count must be >= 0")
        if self.count_unit not in COUNT_UNITS:
            raise ValidationError(f"dataset {self.id!r}: unknown count_unit {self.count_unit!r}")
        if self.source not in SOURCES:
            raise ValidationError(f"dataset {self.id!r}: unknown source {self.source!r}")

    @classmethod
    def from_dict(cls, obj: dict) -> "DatasetRecord":
        try:
            return cls(
                id=obj["id"],
                name=obj["name"],
                description=obj["description"],
                tier=AccessTier.parse(obj["tier"]),
                modality_tags=frozenset(obj.get("modality_tags", [])),
                record_count=int(obj["record_count"]),
                count_unit=obj["count_unit"],
                source=obj["source"],
                join_key=obj.get("join_key"),
            )
        except KeyError as exc:
            raise ValidationError(f"dataset record missing field {exc.args[0]!r}") from None

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "tier": self.tier.value,
            "modality_tags": sorted(self.modality_tags),
            "record_count": self.record_count,
            "count_unit": self.count_unit,
            "source": self.source,
        }
        if self.join_key is not None:
            out["join_key"] = self.join_key
        return out


@dataclass(frozen=True)
class Catalog:
    records: tuple[DatasetRecord, ...]
    version: int = 1

    def __post_init__(self):
        seen = set()
        for rec in self.records:
            if rec.id in seen:
                raise ValidationError(f"duplicate dataset id {rec.id!r}")
            seen.add(rec.id)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def load_catalog(path, version: int = 1) -> Catalog:
    """Parse a JSON-Lines catalog file, preserving line order."""
    path = Path(path)
    records = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from None
            if not isinstance(obj, dict):
                raise ParseError("record must be a JSON object", line=lineno)
            records.append(DatasetRecord.from_dict(obj))
    return Catalog(records=tuple(records), version=version)


def save_catalog(catalog: Catalog, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in catalog.records:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")


def list_by_tier(catalog: Catalog, tier: AccessTier) -> list[DatasetRecord]:
    """All and only records with the given tier, in catalog order."""
    return [rec for rec in catalog.records if rec.tier is tier]


def get_dataset(catalog: Catalog, dataset_id: str) -> DatasetRecord:
    for rec in catalog.records:
        if rec.id == dataset_id:
            return rec
    raise NotFoundError(f"no dataset with id {dataset_id!r}")


def join_rows(left: list[dict], right: list[dict], key: str) -> list[dict]:
    """Inner join on `key`; left fields win on non-key collisions.

    Output rows are ordered by (left index, right index). Every input row must
    carry the key field.
    """
    for side, rows in (("left", left), ("right", right)):
        for i, row in enumerate(rows):
            if key not in row:
                raise SchemaError(f"{side} row {i} is missing join key {key!r}")
    out = []
    for lrow in left:
        for rrow in right:
            if lrow[key] != rrow[key]:
                continue
            merged = dict(rrow)
            for name in rrow:
                if name != key and name in lrow:
                    log.warning("join collision on field %r: left value kept", name)
            merged.update(lrow)
            out.append(merged)
    return out
