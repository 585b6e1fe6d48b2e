"""Drug search over names, ingredients, and contraindications, classified by
the five-level ATC hierarchy (levels encoded as code prefixes of lengths
1, 3, 4, 5, 7).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ArgumentError, NotFoundError, ParseError, ValidationError

LEVEL_LENGTHS = (1, 3, 4, 5, 7)
# character class per position of a full code: letter, digit, digit, letter,
# letter, digit, digit
_POSITION_IS_LETTER = (True, False, False, True, True, False, False)


class AtcFormatError(ValidationError):
    """ATC string violating the level-length or character-class grammar."""


@dataclass(frozen=True)
class AtcCode:
    code: str

    def __post_init__(self):
        code = self.code
        if len(code) not in LEVEL_LENGTHS:
            raise AtcFormatError(
                f"ATC code {code!r} has length {len(code)}; allowed lengths are {LEVEL_LENGTHS}"
            )
        for pos, ch in enumerate(code):
            want_letter = _POSITION_IS_LETTER[pos]
            if want_letter and not ("A" <= ch <= "Z"):
                raise AtcFormatError(f"ATC code {code!r}: expected a letter at position {pos}")
            if not want_letter and not ("0" <= ch <= "9"):
                raise AtcFormatError(f"ATC code {code!r}: expected a digit at position {pos}")

    @property
    def levels(self) -> tuple[str, ...]:
        """Prefixes for every hierarchy level the code reaches."""
        return tuple(self.code[:n] for n in LEVEL_LENGTHS if n <= len(self.code))

    @property
    def is_full(self) -> bool:
        return len(self.code) == 7

    def __str__(self):
        return self.code


def parse_atc(text: str) -> AtcCode:
    return AtcCode(code=text.upper())


def atc_relation(a: AtcCode, b: AtcCode) -> int:
    """Deepest hierarchy level (0..5) at which the two codes share a prefix."""
    depth = 0
    for level, length in enumerate(LEVEL_LENGTHS, start=1):
        if len(a.code) < length or len(b.code) < length:
            break
        if a.code[:length] != b.code[:length]:
            break
        depth = level
    return depth


@dataclass(frozen=True)
class DrugRecord:
    drug_id: str
    name: str
    main_ingredients: tuple[str, ...]
    atc_codes: tuple[AtcCode, ...]
    contraindications: tuple[str, ...]

    def __post_init__(self):
        if not self.name:
            raise ValidationError(f"drug {self.drug_id!r}: name must be nonempty")
        if not self.main_ingredients:
            raise ValidationError(f"drug {self.drug_id!r}: main_ingredients must be nonempty")
        if not self.atc_codes:
            raise ValidationError(f"drug {self.drug_id!r}: atc_codes must be nonempty")
        for code in self.atc_codes:
            if not code.is_full:
                raise ValidationError(
                    f"drug {self.drug_id!r}: ATC code {code.code!r} is not a full 7-char code"
                )

    @classmethod
    def from_dict(cls, obj: dict) -> "DrugRecord":
        try:
            return cls(
                drug_id=obj["drug_id"],
                name=obj["name"],
                main_ingredients=tuple(obj["main_ingredients"]),
                atc_codes=tuple(parse_atc(c) for c in obj["atc_codes"]),
                contraindications=tuple(obj.get("contraindications", [])),
            )
        except KeyError as exc:
            raise ValidationError(f"drug record missing field {exc.args[0]!r}") from None

    def to_dict(self) -> dict:
        return {
            "drug_id": self.drug_id,
            "name": self.name,
            "main_ingredients": list(self.main_ingredients),
            "atc_codes": [c.code for c in self.atc_codes],
            "contraindications": list(self.contraindications),
        }


class DrugStore:
    """Immutable after load; lookups by id, lexical search, neighbor queries."""

    def __init__(self, records: list[DrugRecord]):
        self._by_id: dict[str, DrugRecord] = {}
        for rec in records:
            if rec.drug_id in self._by_id:
                raise ValidationError(f"duplicate drug_id {rec.drug_id!r}")
            self._by_id[rec.drug_id] = rec

    def __len__(self):
        return len(self._by_id)

    def __iter__(self):
        return iter(self._by_id.values())

    def get(self, drug_id: str) -> DrugRecord:
        try:
            return self._by_id[drug_id]
        except KeyError:
            raise NotFoundError(f"no drug with id {drug_id!r}") from None


def load_drugs(path) -> DrugStore:
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from None
            records.append(DrugRecord.from_dict(obj))
    return DrugStore(records)


# ranking bands for search_drugs, best first
_BAND_NAME_EXACT = 0
_BAND_NAME_PREFIX = 1
_BAND_NAME_SUBSTRING = 2
_BAND_INGREDIENT = 3


def search_drugs(store: DrugStore, query: str) -> list[DrugRecord]:
    """Case-insensitive match over name and main_ingredients.

    Band order: exact name, name prefix, name substring, ingredient
    substring; ascending drug_id within a band.
    """
    if not query.strip():
        raise ArgumentError("query must be nonempty")
    needle = query.lower()
    banded = []
    for rec in store:
        name = rec.name.lower()
        if name == needle:
            band = _BAND_NAME_EXACT
        elif name.startswith(needle):
            band = _BAND_NAME_PREFIX
        elif needle in name:
            band = _BAND_NAME_SUBSTRING
        elif any(needle in ing.lower() for ing in rec.main_ingredients):
            band = _BAND_INGREDIENT
        else:
            continue
        banded.append((band, rec.drug_id, rec))
    banded.sort(key=lambda t: (t[0], t[1]))
    return [rec for _, _, rec in banded]


def therapeutic_neighbors(store: DrugStore, drug_id: str, level: int) -> list[DrugRecord]:
    """Other drugs sharing an ATC prefix with the subject at >= `level`."""
    if not 1 <= level <= 5:
        raise ArgumentError(f"level must be in 1..5, got {level}")
    subject = store.get(drug_id)
    neighbors = []
    for rec in store:
        if rec.drug_id == drug_id:
            continue
        related = any(
            atc_relation(a, b) >= level for a in subject.atc_codes for b in rec.atc_codes
        )
        if related:
            neighbors.append(rec)
    neighbors.sort(key=lambda r: r.drug_id)
    return neighbors


def contraindications_for(store: DrugStore, drug_id: str) -> list[str]:
    return list(store.get(drug_id).contraindications)
