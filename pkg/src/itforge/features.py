"""Deterministic lexical/tag features standing in for learned embeddings.

A pair becomes: a hashed bag of text tokens, a hashed bag of concept tags,
and six scalar cues (concept overlap, lexicon keyword/replacement hits,
sentence shape, tag count). Everything is reproducible bit for bit: token
hashing uses FNV-1a, never Python's salted ``hash``.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass

import numpy as np

from .augment import AntonymLexicon, count_keyword_hits
from .corpus import split_sentences
from .manifest import ImageTextPair

_WORD_RE = re.compile(r"\w+")

SCALAR_FEATURES = (
    "overlap_ratio",
    "lexicon_keyword_hits",
    "lexicon_replacement_hits",
    "sentence_count",
    "mean_sentence_length",
    "tag_count",
)


@dataclass(frozen=True)
class FeatureSchema:
    hashed_text_dims: int = 1024
    hashed_tag_dims: int = 256

    @property
    def dim(self) -> int:
        return self.hashed_text_dims + self.hashed_tag_dims + len(SCALAR_FEATURES)

    def content_hash(self) -> str:
        """Stable identity of the feature layout, embedded in model files."""
        payload = json.dumps(
            {
                "hashed_text_dims": self.hashed_text_dims,
                "hashed_tag_dims": self.hashed_tag_dims,
                "scalars": SCALAR_FEATURES,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _fnv1a64(s: str) -> int:
    h = 0xCBF29CE484222325
    for b in s.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def _hashed_bag(tokens: list[str], dims: int) -> np.ndarray:
    vec = np.zeros(dims)
    for tok in tokens:
        vec[_fnv1a64(tok) % dims] += 1.0
    norm = np.linalg.norm(vec)
    if norm > 0.0:
        vec /= norm
    return vec


def text_tokens(text: str) -> list[str]:
    return [t.casefold() for t in _WORD_RE.findall(text)]


def _tag_matches(tag: str, token_set: set[str]) -> bool:
    parts = [t.casefold() for t in _WORD_RE.findall(tag)]
    return bool(parts) and all(p in token_set for p in parts)


def overlap_ratio(text: str, tags: tuple[str, ...]) -> float:
    """Fraction of tags whose tokens all occur in the text."""
    if not tags:
        return 0.0
    token_set = set(text_tokens(text))
    hits = sum(1 for tag in tags if _tag_matches(tag, token_set))
    return hits / max(1, len(tags))


def extract_features(
    pair: ImageTextPair, schema: FeatureSchema, lex: AntonymLexicon
) -> np.ndarray:
    """Feature vector for one pair; length ``schema.dim``, all finite."""
    if not pair.text:
        raise ValueError("pair has empty text")
    tokens = text_tokens(pair.text)
    tag_tokens = [t.casefold() for t in pair.concept_tags]
    sentences = split_sentences(pair.text)
    sentence_lengths = [len(s.split()) for s in sentences] or [0]
    keyword_hits = count_keyword_hits(pair.text, lex.keywords)
    replacement_hits = count_keyword_hits(pair.text, lex.replacements)
    scalars = np.array(
        [
            overlap_ratio(pair.text, pair.concept_tags),
            float(keyword_hits),
            float(replacement_hits),
            float(len(sentences)),
            float(np.mean(sentence_lengths)),
            float(len(pair.concept_tags)),
        ]
    )
    vec = np.concatenate(
        [
            _hashed_bag(tokens, schema.hashed_text_dims),
            _hashed_bag(tag_tokens, schema.hashed_tag_dims),
            scalars,
        ]
    )
    assert vec.shape == (schema.dim,) and np.all(np.isfinite(vec))
    return vec
