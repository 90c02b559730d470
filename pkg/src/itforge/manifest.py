"""Source and corpus manifest records plus their JSONL serialization.

Source manifests are neutral: one JSON object per line describing an image
with its texts, category path, story/concept grouping, and tags. Corpus
manifests hold the generated, auto-labeled image-text pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .taxonomy import (
    MetricTriple,
    RelationClass,
    class_from_name,
    classify_triple,
    label_name,
)


class ManifestError(ValueError):
    """Raised for malformed manifest files; message names the line."""


@dataclass(frozen=True)
class SourceItem:
    """One record of a source manifest."""

    id: str
    image_ref: str
    texts: tuple[str, ...] = ()
    category_path: tuple[str, ...] = ()
    story_id: str | None = None
    concept: str | None = None
    concept_tags: tuple[str, ...] = ()

    @classmethod
    def from_json(cls, obj: dict) -> "SourceItem":
        if not isinstance(obj, dict):
            raise ManifestError("record is not a JSON object")
        item_id = obj.get("id")
        if not item_id or not isinstance(item_id, str):
            raise ManifestError("missing or empty 'id'")
        image_ref = obj.get("image_ref")
        if not image_ref or not isinstance(image_ref, str):
            raise ManifestError("missing or empty 'image_ref'")
        texts = tuple(obj.get("texts", ()))
        if any(not isinstance(t, str) or not t for t in texts):
            raise ManifestError("'texts' must contain non-empty strings")
        return cls(
            id=item_id,
            image_ref=image_ref,
            texts=texts,
            category_path=tuple(obj.get("category_path", ())),
            story_id=obj.get("story_id"),
            concept=obj.get("concept"),
            concept_tags=tuple(obj.get("concept_tags", ())),
        )

    def to_json(self) -> dict:
        obj: dict = {"id": self.id, "image_ref": self.image_ref}
        if self.texts:
            obj["texts"] = list(self.texts)
        if self.category_path:
            obj["category_path"] = list(self.category_path)
        if self.story_id is not None:
            obj["story_id"] = self.story_id
        if self.concept is not None:
            obj["concept"] = self.concept
        if self.concept_tags:
            obj["concept_tags"] = list(self.concept_tags)
        return obj


@dataclass(frozen=True)
class Provenance:
    """How a generated pair came to be."""

    generator: str
    seed: int
    parent_ids: tuple[str, ...]
    replacements: int = 0

    def to_json(self) -> dict:
        obj: dict = {
            "generator": self.generator,
            "seed": self.seed,
            "parent_ids": list(self.parent_ids),
        }
        if self.replacements:
            obj["replacements"] = self.replacements
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "Provenance":
        return cls(
            generator=obj["generator"],
            seed=int(obj["seed"]),
            parent_ids=tuple(obj["parent_ids"]),
            replacements=int(obj.get("replacements", 0)),
        )


@dataclass(frozen=True)
class ImageTextPair:
    """A generated image-text pair with its automatic metric labels."""

    id: str
    image_ref: str
    text: str
    concept_tags: tuple[str, ...]
    auto_triple: MetricTriple
    auto_class: RelationClass
    provenance: Provenance

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError(f"pair {self.id!r} has empty text")
        derived = classify_triple(self.auto_triple)
        if derived != self.auto_class:
            raise ValueError(
                f"pair {self.id!r}: auto_class {label_name(self.auto_class)!r} "
                f"does not match its triple ({label_name(derived)!r})"
            )

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "image_ref": self.image_ref,
            "text": self.text,
            "concept_tags": list(self.concept_tags),
            "auto_triple": self.auto_triple.to_json(),
            "auto_class": self.auto_class.value,
            "provenance": self.provenance.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ImageTextPair":
        return cls(
            id=obj["id"],
            image_ref=obj["image_ref"],
            text=obj["text"],
            concept_tags=tuple(obj.get("concept_tags", ())),
            auto_triple=MetricTriple.from_json(obj["auto_triple"]),
            auto_class=class_from_name(obj["auto_class"]),
            provenance=Provenance.from_json(obj["provenance"]),
        )


@dataclass
class CorpusManifest:
    """A full generated corpus plus its bookkeeping."""

    pairs: list[ImageTextPair]
    created_with: dict = field(default_factory=dict)

    @property
    def per_class_counts(self) -> dict[RelationClass, int]:
        counts = {c: 0 for c in RelationClass}
        for p in self.pairs:
            counts[p.auto_class] += 1
        return counts


def _iter_jsonl(path: Path):
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            yield lineno, obj


def load_manifest(path: str | Path) -> list[SourceItem]:
    """Read a source manifest (one JSON object per line).

    Malformed lines and duplicate ids raise :class:`ManifestError` naming
    the offending line number.
    """
    path = Path(path)
    items: list[SourceItem] = []
    seen: dict[str, int] = {}
    for lineno, obj in _iter_jsonl(path):
        try:
            item = SourceItem.from_json(obj)
        except ManifestError as exc:
            raise ManifestError(f"{path}:{lineno}: {exc}") from None
        if item.id in seen:
            raise ManifestError(
                f"{path}:{lineno}: duplicate id {item.id!r} (first seen on line {seen[item.id]})"
            )
        seen[item.id] = lineno
        items.append(item)
    return items


def load_pairs(path: str | Path) -> list[ImageTextPair]:
    """Read a corpus manifest of generated pairs."""
    path = Path(path)
    pairs: list[ImageTextPair] = []
    for lineno, obj in _iter_jsonl(path):
        try:
            pairs.append(ImageTextPair.from_json(obj))
        except (KeyError, ValueError) as exc:
            raise ManifestError(f"{path}:{lineno}: {exc}") from None
    return pairs


def dump_json_line(obj: dict) -> str:
    """Canonical single-line JSON used for all written artifacts."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def write_pairs(pairs: list[ImageTextPair], path: str | Path) -> None:
    """Write pairs as JSONL atomically (temp file + rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(dump_json_line(pair.to_json()) + "\n")
    tmp.replace(path)
