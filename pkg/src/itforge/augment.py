"""Antonym-substitution negatives: turn positive-SC pairs into their
contradiction-flavored counterparts by swapping keywords for opposites.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .manifest import ImageTextPair, Provenance
from .taxonomy import Cmi, MetricTriple, RelationClass, Sc, classify_triple

_WORD_RE = re.compile(r"\w+")

#: Positive class -> negative class created by corrupting its text.
NEGATION_MAP = {
    RelationClass.COMPLEMENTARY: RelationClass.CONTRASTING,
    RelationClass.ILLUSTRATION: RelationClass.BAD_ILLUSTRATION,
    RelationClass.ANCHORAGE: RelationClass.BAD_ANCHORAGE,
}


class LexiconError(ValueError):
    """Raised for malformed lexicon files; message names the line."""


class NoReplacementsError(ValueError):
    """Raised when a pair has no corruptible keyword, so a negative label
    would not be justified."""


@dataclass(frozen=True)
class AntonymLexicon:
    """Ordered keyword -> replacement table with longest-match-first lookup.

    Keywords may span several words; matching is whole-word and
    case-insensitive. ``entries`` preserves file order.
    """

    entries: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        index: dict[int, dict[tuple[str, ...], str]] = {}
        for keyword, replacement in self.entries:
            tokens = tuple(keyword.lower().split())
            if not tokens:
                raise LexiconError("empty keyword")
            key = " ".join(tokens)
            if key in seen:
                raise LexiconError(f"duplicate keyword {keyword!r}")
            seen.add(key)
            index.setdefault(len(tokens), {})[tokens] = replacement
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_lengths", tuple(sorted(index, reverse=True)))

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def keywords(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.entries)

    @property
    def replacements(self) -> tuple[str, ...]:
        return tuple(r for _, r in self.entries)

    def lookup(self, tokens: tuple[str, ...]) -> str | None:
        return self._index.get(len(tokens), {}).get(tokens)  # type: ignore[attr-defined]

    def match_lengths(self) -> tuple[int, ...]:
        """Keyword lengths in tokens, longest first."""
        return self._lengths  # type: ignore[attr-defined]


def load_lexicon(path: str | Path) -> AntonymLexicon:
    """Read a two-column TSV lexicon; '#'-prefixed lines are comments."""
    path = Path(path)
    entries: list[tuple[str, str]] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            cols = line.rstrip("\n").split("\t")
            if len(cols) != 2 or not cols[0].strip() or not cols[1].strip():
                raise LexiconError(
                    f"{path}:{lineno}: expected 'keyword<TAB>replacement'"
                )
            entries.append((cols[0].strip(), cols[1].strip()))
    try:
        return AntonymLexicon(tuple(entries))
    except LexiconError as exc:
        raise LexiconError(f"{path}: {exc}") from None


def bundled_lexicon_path() -> Path:
    """Path to the starter lexicon shipped with the package."""
    return Path(resources.files("itforge").joinpath("data/antonyms.tsv"))  # type: ignore[arg-type]


def load_bundled_lexicon() -> AntonymLexicon:
    return load_lexicon(bundled_lexicon_path())


def _match_caps(original: str, replacement: str) -> str:
    if original[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def substitute_antonyms(text: str, lex: AntonymLexicon) -> tuple[str, int]:
    """Replace every lexicon keyword in ``text``; return (new text, count).

    Scans word tokens left to right, trying longer keywords before shorter
    ones at each position. Multiword keywords only match tokens separated by
    exactly one space. Replaced spans are not rescanned. Leading
    capitalization of the matched span carries over to the replacement. Text
    without any match comes back byte-identical.
    """
    if not text:
        raise ValueError("empty text")
    tokens = list(_WORD_RE.finditer(text))
    lowered = [m.group().lower() for m in tokens]
    out: list[str] = []
    cursor = 0  # position in the original string
    count = 0
    i = 0
    while i < len(tokens):
        matched = False
        for length in lex.match_lengths():
            if i + length > len(tokens):
                continue
            # multiword keywords require single-space joints
            if any(
                text[tokens[j].end() : tokens[j + 1].start()] != " "
                for j in range(i, i + length - 1)
            ):
                continue
            replacement = lex.lookup(tuple(lowered[i : i + length]))
            if replacement is None:
                continue
            start, end = tokens[i].start(), tokens[i + length - 1].end()
            out.append(text[cursor:start])
            out.append(_match_caps(text[start:end], replacement))
            cursor = end
            count += 1
            i += length
            matched = True
            break
        if not matched:
            i += 1
    out.append(text[cursor:])
    return "".join(out), count


def count_keyword_hits(text: str, keywords: tuple[str, ...]) -> int:
    """How many longest-first, whole-word keyword matches ``text`` contains.

    Same scanning rules as :func:`substitute_antonyms`, without rewriting.
    """
    if not keywords or not text:
        return 0
    unique = tuple(dict.fromkeys(k.lower() for k in keywords))
    probe = AntonymLexicon(tuple((k, k) for k in unique))
    return substitute_antonyms(text, probe)[1]


def derive_negative(
    pair: ImageTextPair, lex: AntonymLexicon, generator: str = "antonym-negate"
) -> ImageTextPair:
    """Corrupt a positive pair's text and flip its semantic correlation.

    Only Complementary, Illustration, and Anchorage pairs qualify; the image
    reference, CMI, and STAT stay untouched. A pair whose text contains no
    lexicon keyword is rejected: without at least one corruption the
    negative label would be unearned.
    """
    if pair.auto_class not in NEGATION_MAP:
        raise ValueError(
            f"pair {pair.id!r} has class {pair.auto_class.value!r}; "
            "only Complementary, Illustration, and Anchorage pairs can be negated"
        )
    new_text, replacements = substitute_antonyms(pair.text, lex)
    if replacements == 0:
        raise NoReplacementsError(
            f"pair {pair.id!r}: no lexicon keyword found, refusing to relabel"
        )
    triple = MetricTriple(Cmi(pair.auto_triple.cmi), Sc.NEG, pair.auto_triple.stat)
    new_class = NEGATION_MAP[pair.auto_class]
    assert classify_triple(triple) == new_class
    return ImageTextPair(
        id=f"{pair.id}-neg",
        image_ref=pair.image_ref,
        text=new_text,
        concept_tags=pair.concept_tags,
        auto_triple=triple,
        auto_class=new_class,
        provenance=Provenance(
            generator=generator,
            seed=pair.provenance.seed,
            parent_ids=(pair.id,),
            replacements=replacements,
        ),
    )
