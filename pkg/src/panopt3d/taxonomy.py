"""Class taxonomy: the registry of semantic classes used throughout the toolkit.

A taxonomy partitions class ids into *things* (countable objects that carry
instance ids) and *stuff* (amorphous regions), plus a single *ignore* id that
is excluded from supervision and evaluation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal

import numpy as np

from .errors import TaxonomyError

__all__ = ["ClassEntry", "ClassTaxonomy", "KIND_STUFF", "KIND_THINGS"]

KIND_STUFF: Literal["stuff"] = "stuff"
KIND_THINGS: Literal["things"] = "things"

# internal kind codes for the vectorized lookup table
_CODE_UNKNOWN = np.uint8(0)
_CODE_IGNORE = np.uint8(1)
_CODE_STUFF = np.uint8(2)
_CODE_THINGS = np.uint8(3)


@dataclass(frozen=True)
class ClassEntry:
    """One semantic class: numeric id, human-readable name, and kind."""

    id: int
    name: str
    kind: str

    def __post_init__(self):
        if self.id < 0:
            raise TaxonomyError(f"class id must be non-negative, got {self.id}")
        if self.kind not in (KIND_STUFF, KIND_THINGS):
            raise TaxonomyError(f"kind must be 'stuff' or 'things', got {self.kind!r}")


@dataclass(frozen=True)
class ClassTaxonomy:
    """Immutable registry of semantic classes.

    Invariants enforced at construction: ids are unique, the ignore id is not
    listed among the entries, and at least one things class and one stuff
    class are present.
    """

    entries: tuple[ClassEntry, ...]
    ignore_id: int = 0
    _lut: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        ids = [e.id for e in entries]
        if len(set(ids)) != len(ids):
            raise TaxonomyError("class ids must be unique")
        if self.ignore_id in ids:
            raise TaxonomyError(f"ignore id {self.ignore_id} must not appear in entries")
        if self.ignore_id < 0:
            raise TaxonomyError("ignore id must be non-negative")
        kinds = {e.kind for e in entries}
        if KIND_THINGS not in kinds or KIND_STUFF not in kinds:
            raise TaxonomyError("taxonomy needs at least one things and one stuff class")
        lut = np.full(max(ids + [self.ignore_id]) + 1, _CODE_UNKNOWN, dtype=np.uint8)
        lut[self.ignore_id] = _CODE_IGNORE
        for e in entries:
            lut[e.id] = _CODE_THINGS if e.kind == KIND_THINGS else _CODE_STUFF
        lut.setflags(write=False)
        object.__setattr__(self, "_lut", lut)

    # -- id sets ---------------------------------------------------------

    @property
    def class_ids(self) -> tuple[int, ...]:
        """All non-ignore class ids, in entry order."""
        return tuple(e.id for e in self.entries)

    @property
    def things_ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.entries if e.kind == KIND_THINGS)

    @property
    def stuff_ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.entries if e.kind == KIND_STUFF)

    def __contains__(self, class_id: int) -> bool:
        return class_id == self.ignore_id or any(e.id == class_id for e in self.entries)

    # -- scalar lookups --------------------------------------------------

    def entry(self, class_id: int) -> ClassEntry:
        for e in self.entries:
            if e.id == class_id:
                return e
        raise TaxonomyError(f"unknown class id {class_id}")

    def name_of(self, class_id: int) -> str:
        if class_id == self.ignore_id:
            return "ignore"
        return self.entry(class_id).name

    def is_things(self, class_id: int) -> bool:
        return self.entry(class_id).kind == KIND_THINGS if class_id != self.ignore_id else False

    def is_stuff(self, class_id: int) -> bool:
        return self.entry(class_id).kind == KIND_STUFF if class_id != self.ignore_id else False

    # -- vectorized lookups ----------------------------------------------

    def _codes(self, semantic: np.ndarray, *, strict: bool = True) -> np.ndarray:
        sem = np.asarray(semantic)
        codes = np.where(sem < self._lut.shape[0], self._lut[np.minimum(sem, self._lut.shape[0] - 1)], _CODE_UNKNOWN)
        if strict and codes.size and (codes == _CODE_UNKNOWN).any():
            bad = np.unique(sem[codes == _CODE_UNKNOWN])
            raise TaxonomyError(f"unknown class ids: {bad.tolist()}")
        return codes

    def things_mask(self, semantic: np.ndarray, *, strict: bool = True) -> np.ndarray:
        """Boolean mask of points whose class is a things class."""
        return self._codes(semantic, strict=strict) == _CODE_THINGS

    def stuff_mask(self, semantic: np.ndarray, *, strict: bool = True) -> np.ndarray:
        return self._codes(semantic, strict=strict) == _CODE_STUFF

    def ignore_mask(self, semantic: np.ndarray) -> np.ndarray:
        return np.asarray(semantic) == self.ignore_id

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "ignore_id": int(self.ignore_id),
            "entries": [{"id": int(e.id), "name": e.name, "kind": e.kind} for e in self.entries],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ClassTaxonomy":
        try:
            entries = tuple(
                ClassEntry(int(e["id"]), str(e["name"]), str(e["kind"])) for e in data["entries"]
            )
            ignore_id = int(data.get("ignore_id", 0))
        except (KeyError, TypeError) as exc:
            raise TaxonomyError(f"malformed taxonomy JSON: {exc}") from exc
        return cls(entries=entries, ignore_id=ignore_id)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ClassTaxonomy":
        return cls.from_json_dict(json.loads(Path(path).read_text()))

    @classmethod
    def from_pairs(cls, things: Iterable[tuple[int, str]], stuff: Iterable[tuple[int, str]],
                   ignore_id: int = 0) -> "ClassTaxonomy":
        entries = tuple(
            [ClassEntry(i, n, KIND_STUFF) for i, n in stuff]
            + [ClassEntry(i, n, KIND_THINGS) for i, n in things]
        )
        return cls(entries=entries, ignore_id=ignore_id)
