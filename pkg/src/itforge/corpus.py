"""Corpus synthesis: turn neutral source manifests into labeled image-text
pairs.

Five generators cover the five directly constructible classes; the three
negative classes are derived afterwards by antonym substitution (see
:mod:`itforge.augment`). Every generator is deterministic given its seed,
and each output pair draws from its own derived sub-seed so results do not
depend on generation order.
"""

from __future__ import annotations

import random
import re
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

from . import augment as _augment
from .manifest import (
    CorpusManifest,
    ImageTextPair,
    Provenance,
    SourceItem,
    dump_json_line,
    load_manifest,
    write_pairs,
)
from .taxonomy import Cmi, MetricTriple, RelationClass, Sc, Stat, classify_triple

_WORD_RE = re.compile(r"\w+")

# Sentences end at a run of '.', '!', '?' followed by whitespace or
# end-of-text; the trailing run is the sentence's terminal punctuation.
_SENTENCE_RE = re.compile(r"[^.!?]*(?:[.!?]+(?=\s|$)|[.!?]*$)")

DEFAULT_PARTNER_DRAWS = 1000


class CorpusError(RuntimeError):
    """Raised when a generator cannot satisfy its contract."""


def mix_seed(seed: int, *salts: int | str) -> int:
    """Derive a stable sub-seed from a master seed and salts.

    splitmix64-style finalizer; deterministic across platforms and runs, so
    per-item generation can be reordered or parallelized without changing
    the corpus.
    """
    state = seed & 0xFFFFFFFFFFFFFFFF
    for salt in salts:
        if isinstance(salt, str):
            salt = _fnv1a64(salt)
        state = (state + 0x9E3779B97F4A7C15 + (salt & 0xFFFFFFFFFFFFFFFF)) & 0xFFFFFFFFFFFFFFFF
        state = ((state ^ (state >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
        state = ((state ^ (state >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
        state ^= state >> 31
    return state


def _fnv1a64(s: str) -> int:
    h = 0xCBF29CE484222325
    for b in s.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def _rng(seed: int, *salts: int | str) -> random.Random:
    return random.Random(mix_seed(seed, *salts))


def split_sentences(text: str) -> list[str]:
    """Split into sentences, keeping terminal punctuation attached."""
    out = []
    for m in _SENTENCE_RE.finditer(text):
        piece = m.group().strip()
        if piece:
            out.append(piece)
    return out


def _terminal_punct(sentence: str) -> str:
    i = len(sentence)
    while i > 0 and sentence[i - 1] in ".!?":
        i -= 1
    return sentence[i:]


def truncate_text(
    text: str, max_sentences: int, max_words_per_sentence: int | None = None
) -> str:
    """Cap text at ``max_sentences`` sentences of at most
    ``max_words_per_sentence`` whitespace tokens each.

    Terminal punctuation of kept sentences survives word truncation. Text
    already within both caps is returned unchanged, byte for byte.
    """
    if not text:
        raise ValueError("empty text")
    sentences = split_sentences(text)
    within_words = max_words_per_sentence is None or all(
        len(s.split()) <= max_words_per_sentence for s in sentences
    )
    if len(sentences) <= max_sentences and within_words:
        return text
    kept = []
    for sentence in sentences[:max_sentences]:
        words = sentence.split()
        if max_words_per_sentence is not None and len(words) > max_words_per_sentence:
            punct = _terminal_punct(sentence)
            sentence = " ".join(words[:max_words_per_sentence])
            if punct and not sentence.endswith(punct):
                sentence += punct
        kept.append(sentence)
    return " ".join(kept)


def _disjoint(a: SourceItem, b: SourceItem) -> bool:
    return not set(a.category_path) & set(b.category_path)


def gen_uncorrelated(
    items: list[SourceItem],
    n: int,
    seed: int,
    max_draws: int = DEFAULT_PARTNER_DRAWS,
) -> list[ImageTextPair]:
    """Join images with captions of category-disjoint items.

    Two items qualify as partners when their category paths share no
    element. Draws are bounded; an unpartnerable image aborts the build with
    the achieved count in the error.
    """
    eligible = [it for it in items if it.category_path and it.texts]
    if n > 0 and len(eligible) < 2:
        raise CorpusError("need at least two categorized items with texts")
    pairs: list[ImageTextPair] = []
    for i in range(n):
        rng = _rng(seed, "uncorrelated", i)
        image_item = rng.choice(eligible)
        partner = None
        for _ in range(max_draws):
            candidate = rng.choice(eligible)
            if candidate.id != image_item.id and _disjoint(image_item, candidate):
                partner = candidate
                break
        if partner is None:
            raise CorpusError(
                f"no category-disjoint partner for {image_item.id!r} within "
                f"{max_draws} draws; built {len(pairs)} of {n} pairs"
            )
        triple = MetricTriple(Cmi.ZERO, Sc.ZERO, Stat.EQUAL)
        pairs.append(
            ImageTextPair(
                id=f"unc-{i:06d}",
                image_ref=image_item.image_ref,
                text=rng.choice(partner.texts),
                concept_tags=image_item.concept_tags,
                auto_triple=triple,
                auto_class=RelationClass.UNCORRELATED,
                provenance=Provenance(
                    "uncorrelated", seed, (image_item.id, partner.id)
                ),
            )
        )
    return pairs


def gen_anchorage(items: list[SourceItem], n: int, seed: int) -> list[ImageTextPair]:
    """Pair each image with one of its own isolation-style descriptions."""
    eligible = [it for it in items if it.texts]
    if n > len(eligible):
        raise CorpusError(
            f"requested {n} pairs but only {len(eligible)} described items available"
        )
    order = _rng(seed, "anchorage").sample(range(len(eligible)), n)
    pairs = []
    for i, idx in enumerate(order):
        item = eligible[idx]
        rng = _rng(seed, "anchorage", i)
        triple = MetricTriple(Cmi.ONE, Sc.POS, Stat.I)
        pairs.append(
            ImageTextPair(
                id=f"anc-{i:06d}",
                image_ref=item.image_ref,
                text=rng.choice(item.texts),
                concept_tags=item.concept_tags,
                auto_triple=triple,
                auto_class=RelationClass.ANCHORAGE,
                provenance=Provenance("anchorage", seed, (item.id,)),
            )
        )
    return pairs


def _stories(items: list[SourceItem]) -> "OrderedDict[str, list[SourceItem]]":
    stories: OrderedDict[str, list[SourceItem]] = OrderedDict()
    for item in items:
        if item.story_id is not None:
            stories.setdefault(item.story_id, []).append(item)
    return stories


def gen_complementary(
    items: list[SourceItem], n: int, seed: int
) -> tuple[list[ImageTextPair], int]:
    """Concatenate a story's captions and pair them with one of its images.

    Captions join in manifest order with single spaces. Returns the pairs
    plus the number of stories skipped for having no usable image or text.
    """
    stories = _stories(items)
    usable: list[tuple[str, str, list[SourceItem]]] = []
    skipped = 0
    for story_id, members in stories.items():
        captions = [t for m in members for t in m.texts]
        with_images = [m for m in members if m.image_ref]
        if not captions or not with_images:
            skipped += 1
            continue
        usable.append((story_id, " ".join(captions), with_images))
    if n > len(usable):
        raise CorpusError(
            f"requested {n} pairs but only {len(usable)} usable stories available"
        )
    order = _rng(seed, "complementary").sample(range(len(usable)), n)
    pairs = []
    for i, idx in enumerate(order):
        story_id, text, with_images = usable[idx]
        rng = _rng(seed, "complementary", i)
        image_item = rng.choice(with_images)
        tags = tuple(dict.fromkeys(t for m in with_images for t in m.concept_tags))
        triple = MetricTriple(Cmi.ONE, Sc.POS, Stat.EQUAL)
        pairs.append(
            ImageTextPair(
                id=f"com-{i:06d}",
                image_ref=image_item.image_ref,
                text=text,
                concept_tags=tags,
                auto_triple=triple,
                auto_class=RelationClass.COMPLEMENTARY,
                provenance=Provenance("complementary", seed, (story_id,)),
            )
        )
    return pairs, skipped


def gen_illustration(
    concept_images: list[SourceItem],
    concept_summaries: list[SourceItem],
    seed: int,
) -> tuple[list[ImageTextPair], int]:
    """Join one random image per concept with that concept's summary text.

    Inner join on case-folded concept name; unmatched concepts on either
    side are dropped and counted.
    """
    images: OrderedDict[str, list[SourceItem]] = OrderedDict()
    for item in concept_images:
        if item.concept:
            images.setdefault(item.concept.casefold(), []).append(item)
    summaries: dict[str, SourceItem] = {}
    for item in concept_summaries:
        if item.concept and item.texts and item.concept.casefold() not in summaries:
            summaries[item.concept.casefold()] = item
    matched = [c for c in images if c in summaries]
    dropped = (len(images) - len(matched)) + sum(
        1 for c in summaries if c not in images
    )
    pairs = []
    for i, concept in enumerate(matched):
        rng = _rng(seed, "illustration", concept)
        image_item = rng.choice(images[concept])
        summary = summaries[concept]
        triple = MetricTriple(Cmi.ONE, Sc.POS, Stat.T)
        pairs.append(
            ImageTextPair(
                id=f"ill-{i:06d}",
                image_ref=image_item.image_ref,
                text=summary.texts[0],
                concept_tags=image_item.concept_tags or (concept,),
                auto_triple=triple,
                auto_class=RelationClass.ILLUSTRATION,
                provenance=Provenance("illustration", seed, (image_item.id, summary.id)),
            )
        )
    return pairs, dropped


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Stopword list for the shared-concept filter; bundled list by default."""
    if path is None:
        from importlib import resources

        path = Path(resources.files("itforge").joinpath("data/stopwords.txt"))  # type: ignore[arg-type]
    words = Path(path).read_text(encoding="utf-8").split()
    return frozenset(w.casefold() for w in words if not w.startswith("#"))


def gen_interdependent(
    items: list[SourceItem], stopwords: frozenset[str] | None = None
) -> tuple[list[ImageTextPair], int]:
    """Import pre-labeled slogan items, rejecting any whose text shares a
    content token with its concept tags (those would have nonzero concept
    overlap and so cannot carry this label).

    Returns (accepted pairs, rejected count).
    """
    if stopwords is None:
        stopwords = load_stopwords()
    pairs = []
    rejected = 0
    i = 0
    for item in items:
        if not item.texts:
            rejected += 1
            continue
        text = item.texts[0]
        tokens = {
            t.casefold() for t in _WORD_RE.findall(text)
        } - stopwords
        tag_tokens = {
            t.casefold() for tag in item.concept_tags for t in _WORD_RE.findall(tag)
        }
        if tokens & tag_tokens:
            rejected += 1
            continue
        triple = MetricTriple(Cmi.ZERO, Sc.POS, Stat.EQUAL)
        pairs.append(
            ImageTextPair(
                id=f"int-{i:06d}",
                image_ref=item.image_ref,
                text=text,
                concept_tags=item.concept_tags,
                auto_triple=triple,
                auto_class=RelationClass.INTERDEPENDENT,
                provenance=Provenance("interdependent", 0, (item.id,)),
            )
        )
        i += 1
    return pairs, rejected


@dataclass
class BuildConfig:
    """Everything a corpus build needs; serializable into the manifest."""

    captions_path: str
    stories_path: str
    concept_images_path: str
    concept_summaries_path: str
    slogans_path: str
    targets: dict[str, int]  # canonical class name -> count
    seed: int = 0
    lexicon_path: str | None = None  # None -> bundled starter lexicon
    stopwords_path: str | None = None
    max_sentences: int = 10
    max_words_per_sentence: int | None = None
    max_partner_draws: int = DEFAULT_PARTNER_DRAWS

    def to_json(self) -> dict:
        return {
            "captions_path": self.captions_path,
            "stories_path": self.stories_path,
            "concept_images_path": self.concept_images_path,
            "concept_summaries_path": self.concept_summaries_path,
            "slogans_path": self.slogans_path,
            "targets": dict(sorted(self.targets.items())),
            "seed": self.seed,
            "lexicon_path": self.lexicon_path,
            "stopwords_path": self.stopwords_path,
            "max_sentences": self.max_sentences,
            "max_words_per_sentence": self.max_words_per_sentence,
            "max_partner_draws": self.max_partner_draws,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BuildConfig":
        return cls(**obj)


@dataclass
class BuildReport:
    """Side counts accumulated during a build."""

    skipped_stories: int = 0
    rejected_slogans: int = 0
    dropped_concepts: int = 0
    negation_rejects: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "skipped_stories": self.skipped_stories,
            "rejected_slogans": self.rejected_slogans,
            "dropped_concepts": self.dropped_concepts,
            "negation_rejects": dict(sorted(self.negation_rejects.items())),
        }


def _subsample(pairs: list[ImageTextPair], target: int, seed: int, what: str) -> list[ImageTextPair]:
    if target > len(pairs):
        raise CorpusError(
            f"{what}: target {target} exceeds the {len(pairs)} available pairs"
        )
    if target == len(pairs):
        return pairs
    idx = sorted(_rng(seed, what, "subsample").sample(range(len(pairs)), target))
    return [pairs[i] for i in idx]


def _negate_some(
    positives: list[ImageTextPair],
    n_keep: int,
    n_negate: int,
    lex: _augment.AntonymLexicon,
    seed: int,
    report: BuildReport,
) -> tuple[list[ImageTextPair], list[ImageTextPair]]:
    """Convert ``n_negate`` of ``positives`` into negatives, keep ``n_keep``.

    Candidates are taken in seeded order; pairs without a corruptible
    keyword stay positive and are counted. Fails hard when the pool cannot
    cover both targets.
    """
    if n_keep + n_negate > len(positives):
        raise CorpusError(
            f"need {n_keep}+{n_negate} pairs but generated only {len(positives)}"
        )
    cls = positives[0].auto_class.value if positives else "?"
    order = list(range(len(positives)))
    _rng(seed, "negate", cls).shuffle(order)
    negatives: list[ImageTextPair] = []
    negated_idx: set[int] = set()
    for idx in order:
        if len(negatives) == n_negate:
            break
        try:
            negatives.append(_augment.derive_negative(positives[idx], lex))
            negated_idx.add(idx)
        except _augment.NoReplacementsError:
            report.negation_rejects[cls] = report.negation_rejects.get(cls, 0) + 1
    if len(negatives) < n_negate:
        raise CorpusError(
            f"{cls}: only {len(negatives)} of {n_negate} pairs had a corruptible keyword"
        )
    kept = [p for i, p in enumerate(positives) if i not in negated_idx]
    if len(kept) < n_keep:
        raise CorpusError(f"{cls}: not enough positives left after negation")
    return kept[:n_keep], negatives


def build_corpus(config: BuildConfig) -> tuple[CorpusManifest, BuildReport]:
    """Run all generators and the negation pass per the configured targets.

    The resulting manifest holds exactly the configured per-class counts
    (anything else is a hard error), with every text capped at the
    configured sentence limit.
    """
    targets = {c: config.targets.get(c.value, 0) for c in RelationClass}
    seed = config.seed
    lex = (
        _augment.load_lexicon(config.lexicon_path)
        if config.lexicon_path
        else _augment.load_bundled_lexicon()
    )
    stopwords = load_stopwords(config.stopwords_path)
    report = BuildReport()

    captions = load_manifest(config.captions_path)
    stories = load_manifest(config.stories_path)
    concept_images = load_manifest(config.concept_images_path)
    concept_summaries = load_manifest(config.concept_summaries_path)
    slogans = load_manifest(config.slogans_path)

    uncorrelated = gen_uncorrelated(
        captions,
        targets[RelationClass.UNCORRELATED],
        mix_seed(seed, "uncorrelated"),
        max_draws=config.max_partner_draws,
    )

    interdependent, report.rejected_slogans = gen_interdependent(slogans, stopwords)
    interdependent = _subsample(
        interdependent, targets[RelationClass.INTERDEPENDENT], seed, "interdependent"
    )

    n_compl = targets[RelationClass.COMPLEMENTARY]
    n_contr = targets[RelationClass.CONTRASTING]
    compl_pool, report.skipped_stories = gen_complementary(
        stories, n_compl + n_contr, mix_seed(seed, "complementary")
    )
    complementary, contrasting = _negate_some(
        compl_pool, n_compl, n_contr, lex, seed, report
    )

    n_illu = targets[RelationClass.ILLUSTRATION]
    n_bad_illu = targets[RelationClass.BAD_ILLUSTRATION]
    illu_pool, report.dropped_concepts = gen_illustration(
        concept_images, concept_summaries, mix_seed(seed, "illustration")
    )
    illu_pool = _subsample(illu_pool, n_illu + n_bad_illu, seed, "illustration")
    illustration, bad_illustration = _negate_some(
        illu_pool, n_illu, n_bad_illu, lex, seed, report
    )

    n_anch = targets[RelationClass.ANCHORAGE]
    n_bad_anch = targets[RelationClass.BAD_ANCHORAGE]
    anch_pool = gen_anchorage(captions, n_anch + n_bad_anch, mix_seed(seed, "anchorage"))
    anchorage, bad_anchorage = _negate_some(
        anch_pool, n_anch, n_bad_anch, lex, seed, report
    )

    by_class = {
        RelationClass.UNCORRELATED: uncorrelated,
        RelationClass.INTERDEPENDENT: interdependent,
        RelationClass.COMPLEMENTARY: complementary,
        RelationClass.ILLUSTRATION: illustration,
        RelationClass.ANCHORAGE: anchorage,
        RelationClass.CONTRASTING: contrasting,
        RelationClass.BAD_ILLUSTRATION: bad_illustration,
        RelationClass.BAD_ANCHORAGE: bad_anchorage,
    }
    pairs: list[ImageTextPair] = []
    for cls in RelationClass:
        got = by_class[cls]
        if len(got) != targets[cls]:
            raise CorpusError(
                f"{cls.value}: produced {len(got)} pairs, configured target {targets[cls]}"
            )
        for p in got:
            text = truncate_text(p.text, config.max_sentences, config.max_words_per_sentence)
            if text != p.text:
                p = ImageTextPair(
                    id=p.id,
                    image_ref=p.image_ref,
                    text=text,
                    concept_tags=p.concept_tags,
                    auto_triple=p.auto_triple,
                    auto_class=p.auto_class,
                    provenance=p.provenance,
                )
            pairs.append(p)
    manifest = CorpusManifest(pairs=pairs, created_with=config.to_json())
    return manifest, report


def write_corpus(
    manifest: CorpusManifest,
    report: BuildReport,
    out_dir: str | Path,
    summary_extra: dict | None = None,
) -> tuple[Path, Path]:
    """Write corpus JSONL plus a summary file; both atomically.

    The summary carries the per-class distribution and the derived
    per-metric distribution, so corpus audits do not need a full rescan.
    """
    from .evaluation import metric_counts_from_class_counts

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pairs_path = out_dir / "corpus.jsonl"
    summary_path = out_dir / "corpus.summary.json"
    write_pairs(manifest.pairs, pairs_path)
    class_counts = manifest.per_class_counts
    metric_counts = metric_counts_from_class_counts(class_counts)
    summary = {
        "total": len(manifest.pairs),
        "class_counts": {c.value: class_counts[c] for c in RelationClass},
        "metric_counts": metric_counts.to_json(),
        "build_report": report.to_json(),
        "created_with": manifest.created_with,
    }
    if summary_extra:
        summary.update(summary_extra)
    tmp = summary_path.with_name(summary_path.name + ".tmp")
    tmp.write_text(dump_json_line(summary) + "\n", encoding="utf-8")
    tmp.replace(summary_path)
    return pairs_path, summary_path
