"""Lexicon handling and antonym substitution."""

import random
import re

import pytest

from itforge.augment import (
    AntonymLexicon,
    LexiconError,
    NoReplacementsError,
    count_keyword_hits,
    derive_negative,
    load_bundled_lexicon,
    load_lexicon,
    substitute_antonyms,
)
from itforge.manifest import ImageTextPair, Provenance
from itforge.taxonomy import (
    Cmi,
    MetricTriple,
    RelationClass,
    Sc,
    Stat,
    triple_of_class,
)

EXAMPLE_ENTRIES = AntonymLexicon(
    (
        ("tall", "small"),
        ("man", "woman"),
        ("in front of", "behind"),
        ("green", "red"),
    )
)


def make_pair(cls, text, pair_id="p0", tags=("car",)):
    return ImageTextPair(
        id=pair_id,
        image_ref="img.jpg",
        text=text,
        concept_tags=tuple(tags),
        auto_triple=triple_of_class(cls),
        auto_class=cls,
        provenance=Provenance("test", 0, ()),
    )


# ---------------------------------------------------------------- lexicon


def test_load_single_entry(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("tall\tsmall\n")
    lex = load_lexicon(path)
    assert len(lex) == 1
    assert lex.entries == (("tall", "small"),)


def test_load_skips_comments_and_blank_lines(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("# comment\n\ntall\tsmall\n")
    assert len(load_lexicon(path)) == 1


def test_duplicate_keyword_rejected(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("tall\tsmall\nTall\tshort\n")
    with pytest.raises(LexiconError, match="duplicate"):
        load_lexicon(path)


def test_malformed_row_names_line(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("tall\tsmall\nbroken-row\n")
    with pytest.raises(LexiconError, match=":2:"):
        load_lexicon(path)


def test_bundled_lexicon_size_and_required_entries():
    lex = load_bundled_lexicon()
    assert len(lex) >= 100
    as_dict = {k.lower(): v for k, v in lex.entries}
    assert as_dict["tall"] == "small"
    assert as_dict["man"] == "woman"
    assert as_dict["in front of"] == "behind"
    assert as_dict["green"] == "red"


# ----------------------------------------------------- substitute_antonyms


def test_reference_sentence_transforms_exactly():
    text = "tall man standing in front of a green car"
    out, count = substitute_antonyms(text, EXAMPLE_ENTRIES)
    assert out == "small woman standing behind a red car"
    assert count == 4


def test_untouched_text_is_byte_identical():
    text = "the sky at night"
    out, count = substitute_antonyms(text, EXAMPLE_ENTRIES)
    assert out == text and count == 0


def test_leading_capitalization_is_preserved():
    out, count = substitute_antonyms("Tall man. In front of us.", EXAMPLE_ENTRIES)
    assert out == "Small woman. Behind us."
    assert count == 3


def test_longest_match_wins():
    lex = AntonymLexicon((("front", "back"), ("in front of", "behind")))
    out, count = substitute_antonyms("standing in front of the door", lex)
    assert out == "standing behind the door"
    assert count == 1


def test_multiword_requires_single_spaces():
    out, count = substitute_antonyms("in  front of the car", EXAMPLE_ENTRIES)
    assert count == 0 and out == "in  front of the car"


def test_whole_word_matching():
    out, count = substitute_antonyms("mango mantra craftsman", EXAMPLE_ENTRIES)
    assert count == 0 and out == "mango mantra craftsman"


def test_replacement_not_rescanned():
    lex = AntonymLexicon((("tall", "small"), ("small", "tall")))
    out, count = substitute_antonyms("tall and small", lex)
    assert out == "small and tall"
    assert count == 2


def test_punctuation_adjacent_words_match():
    out, count = substitute_antonyms("A green, tall man!", EXAMPLE_ENTRIES)
    assert out == "A red, small woman!"
    assert count == 3


def test_empty_text_rejected():
    with pytest.raises(ValueError):
        substitute_antonyms("", EXAMPLE_ENTRIES)


# Independent naive oracle: character-level scan with regexes, longest first.
def naive_scan_count(text: str, entries) -> int:
    ordered = sorted(entries, key=lambda kv: -len(kv[0].split()))
    count = 0
    i = 0

    def word_char(c):
        return c.isalnum() or c == "_"

    while i < len(text):
        at_word_start = word_char(text[i]) and (i == 0 or not word_char(text[i - 1]))
        if at_word_start:
            for keyword, _ in ordered:
                pattern = re.escape(keyword).replace(r"\ ", " ")
                m = re.match(pattern + r"(?!\w)", text[i:], re.IGNORECASE)
                if m:
                    count += 1
                    i += m.end()
                    break
            else:
                i += 1
        else:
            i += 1
    return count


def test_count_matches_naive_scan_oracle_on_random_texts():
    lex = load_bundled_lexicon()
    vocab = (
        [k for k, _ in lex.entries[:60]]
        + [r for _, r in lex.entries[:60]]
        + ["car", "door", "the", "a", "sky", "house", "tree", "frontier", "manly"]
        + ["in", "front", "of", "on", "top"]
    )
    rng = random.Random(2024)
    for _ in range(1000):
        words = [rng.choice(vocab) for _ in range(rng.randint(1, 18))]
        words = [w.capitalize() if rng.random() < 0.2 else w for w in words]
        glue = [rng.choice([" ", " ", " ", ", ", ". ", "  "]) for _ in words]
        text = "".join(w + g for w, g in zip(words, glue)).strip()
        if not text:
            continue
        _, count = substitute_antonyms(text, lex)
        assert count == naive_scan_count(text, lex.entries), text


def test_count_keyword_hits_helper():
    assert count_keyword_hits("tall tall man", ("tall", "man")) == 3
    assert count_keyword_hits("nothing here", ("tall",)) == 0
    assert count_keyword_hits("anything", ()) == 0


# ----------------------------------------------------------- derive_negative


def test_negation_maps_all_three_classes_to_taxonomy_triples():
    mapping = {
        RelationClass.COMPLEMENTARY: RelationClass.CONTRASTING,
        RelationClass.ILLUSTRATION: RelationClass.BAD_ILLUSTRATION,
        RelationClass.ANCHORAGE: RelationClass.BAD_ANCHORAGE,
    }
    for positive, negative in mapping.items():
        pair = make_pair(positive, "a tall man in front of a green car")
        out = derive_negative(pair, EXAMPLE_ENTRIES)
        assert out.auto_class is negative
        expected = triple_of_class(positive)
        assert out.auto_triple == MetricTriple(expected.cmi, Sc.NEG, expected.stat)
        # cross-check against the taxonomy's defining triple for the target
        assert out.auto_triple == triple_of_class(negative)


def test_negative_keeps_image_cmi_stat_and_tags():
    pair = make_pair(RelationClass.ANCHORAGE, "a green car in front of a tall man")
    out = derive_negative(pair, EXAMPLE_ENTRIES)
    assert out.image_ref == pair.image_ref
    assert out.concept_tags == pair.concept_tags
    assert out.auto_triple.cmi == pair.auto_triple.cmi
    assert out.auto_triple.stat == pair.auto_triple.stat
    assert out.auto_triple.sc == Sc.NEG
    assert out.provenance.parent_ids == (pair.id,)
    assert out.provenance.replacements == 4  # green, in front of, tall, man


def test_zero_replacements_rejected():
    pair = make_pair(RelationClass.ANCHORAGE, "nothing to corrupt here")
    with pytest.raises(NoReplacementsError):
        derive_negative(pair, EXAMPLE_ENTRIES)


def test_ineligible_class_rejected():
    pair = make_pair(RelationClass.UNCORRELATED, "a tall man")
    with pytest.raises(ValueError, match="Uncorrelated"):
        derive_negative(pair, EXAMPLE_ENTRIES)


def test_single_word_substitutions_preserve_word_count(lexicon):
    text = "A tall man waits beside a green car in the cold morning."
    out, count = substitute_antonyms(text, lexicon)
    assert count >= 3
    # every bundled replacement for these keywords is single-word except the
    # multiword direction entries, which this text avoids
    assert len(out.split()) == len(text.split())


def test_generated_positives_negate_cleanly(small_corpus, lexicon):
    eligible = [
        p
        for p in small_corpus.pairs
        if p.auto_class
        in (RelationClass.COMPLEMENTARY, RelationClass.ILLUSTRATION, RelationClass.ANCHORAGE)
    ]
    assert eligible
    for pair in eligible:
        out = derive_negative(pair, lexicon)
        assert out.image_ref == pair.image_ref
        assert out.auto_triple.cmi == pair.auto_triple.cmi
        assert out.auto_triple.stat == pair.auto_triple.stat
        assert out.provenance.replacements >= 1
        assert out.text != pair.text
