#!/usr/bin/env python3
"""Regenerate the bundled mini source manifests under src/itforge/data/mini/.

The manifests are committed; this script only exists so they can be
rebuilt or rescaled deliberately. Texts are templated but follow the
structural contracts the generators rely on:

  * category paths are disjoint across roots and share the root within one
  * captions mention their own concept tags (nonzero concept overlap)
  * slogans never mention their tags (zero overlap, on purpose)
  * positive texts use only the keyword side of the bundled lexicon, so
    antonym corruption always finds something to corrupt
"""

from __future__ import annotations

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "itforge" / "data" / "mini"

ADJ = [
    "tall", "big", "large", "long", "wide", "thick", "deep", "high", "new",
    "young", "hot", "warm", "wet", "clean", "bright", "shiny", "fast",
    "quick", "happy", "calm", "open", "soft", "smooth", "quiet", "busy",
    "modern", "strong", "sharp", "fresh", "straight", "sunny", "green",
    "blue", "yellow", "pink", "brown", "golden",
]

ROOTS = {
    "animal": {
        "leaves": ["cat", "dog", "horse", "bird", "fish", "rabbit"],
        "places": ["meadow", "barn", "forest", "riverbank"],
        "verbs": ["rests", "grazes", "wanders", "naps"],
    },
    "vehicle": {
        "leaves": ["car", "truck", "bicycle", "bus", "boat", "tram"],
        "places": ["garage", "highway", "harbor", "depot"],
        "verbs": ["parks", "waits", "idles", "turns"],
    },
    "food": {
        "leaves": ["bread", "cheese", "apple", "soup", "cake", "salad"],
        "places": ["kitchen", "bakery", "market", "pantry"],
        "verbs": ["sits", "cools", "rests", "steams"],
    },
    "furniture": {
        "leaves": ["chair", "table", "lamp", "sofa", "shelf", "bench"],
        "places": ["studio", "hallway", "attic", "workshop"],
        "verbs": ["stands", "leans", "waits", "rests"],
    },
    "instrument": {
        "leaves": ["guitar", "piano", "drum", "violin", "flute", "trumpet"],
        "places": ["stage", "rehearsal", "parlor", "auditorium"],
        "verbs": ["gleams", "waits", "rests", "shines"],
    },
}

CONCEPT_FIRST = [
    "copper", "cedar", "marble", "willow", "amber", "granite", "velvet",
    "juniper", "cobalt", "maple", "ivory",
]
CONCEPT_SECOND = [
    "kettle", "lantern", "compass", "anvil", "loom", "telescope", "sundial",
    "bellows", "chisel", "plough",
]

SLOGAN_TEMPLATES = [
    "Where wonder meets the everyday.",
    "Because every journey deserves a spark.",
    "Taste the moment, keep the memory.",
    "Crafted for those who notice.",
    "Your story starts beyond the ordinary.",
    "Less noise, more meaning.",
    "Believe in better beginnings.",
    "For the dreamers who build.",
    "Turn the everyday into an adventure.",
    "Made to move what matters.",
    "Great ideas travel quietly.",
]


def caption(rng: random.Random, noun: str, place: str, verbs: list[str]) -> str:
    a1, a2, a3, a4 = rng.sample(ADJ, 4)
    verb = rng.choice(verbs)
    return (
        f"A {a1} {a2} {noun} {verb} in the {place}. "
        f"The {noun} looks {a3} and {a4} this {rng.choice(['morning', 'day', 'summer', 'spring'])}."
    )


def write(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    print(f"wrote {len(rows):4d} rows -> {path}")


def gen_captions(rng: random.Random) -> list[dict]:
    rows = []
    i = 0
    for _round in range(4):
        for root, spec in ROOTS.items():
            for leaf in spec["leaves"]:
                place = rng.choice(spec["places"])
                rows.append(
                    {
                        "id": f"cap-{i:04d}",
                        "image_ref": f"images/{root}/{leaf}_{i:04d}.jpg",
                        "texts": [
                            caption(rng, leaf, place, spec["verbs"]),
                            caption(rng, leaf, place, spec["verbs"]),
                        ],
                        "category_path": [root, leaf],
                        "concept_tags": [leaf, place],
                    }
                )
                i += 1
    return rows


def gen_stories(rng: random.Random, n_stories: int = 110) -> list[dict]:
    rows = []
    roots = list(ROOTS)
    for s in range(n_stories):
        root = roots[s % len(roots)]
        spec = ROOTS[root]
        leaf = rng.choice(spec["leaves"])
        place = rng.choice(spec["places"])
        for k in range(5):
            rows.append(
                {
                    "id": f"sto-{s:04d}-{k}",
                    "image_ref": f"images/stories/{s:04d}_{k}.jpg",
                    "texts": [caption(rng, leaf, place, spec["verbs"]).split(". ")[0] + "."],
                    "story_id": f"story-{s:04d}",
                    "concept_tags": [leaf] if k == 0 else [place] if k == 1 else [],
                }
            )
    return rows


def gen_concepts(rng: random.Random) -> tuple[list[dict], list[dict]]:
    concepts = [f"{a} {b}" for a in CONCEPT_FIRST for b in CONCEPT_SECOND]
    images, summaries = [], []
    i = 0
    for concept in concepts:
        for k in range(2):
            images.append(
                {
                    "id": f"cim-{i:04d}",
                    "image_ref": f"images/concepts/{concept.replace(' ', '_')}_{k}.jpg",
                    "concept": concept,
                    "concept_tags": [concept],
                }
            )
            i += 1
        n_sent = rng.randint(7, 9)
        sentences = [
            f"The {concept} is a {rng.choice(ADJ)} tool known across the {rng.choice(['valley', 'coast', 'plateau', 'province'])}."
        ]
        for _ in range(n_sent - 1):
            a1, a2 = rng.sample(ADJ, 2)
            sentences.append(
                rng.choice(
                    [
                        f"Most examples remain {a1} even after {a2} seasons of use.",
                        f"Its {a1} frame is prized by {a2} workshops.",
                        f"Collectors describe it as {a1} and surprisingly {a2}.",
                        f"A {a1} variant appears in {a2} records of the craft.",
                        f"Makers keep the surface {a1} and the edges {a2}.",
                    ]
                )
            )
        summaries.append(
            {
                "id": f"csm-{len(summaries):04d}",
                "image_ref": f"images/articles/{concept.replace(' ', '_')}.png",
                "texts": [" ".join(sentences)],
                "concept": concept,
            }
        )
    return images, summaries


def gen_slogans(rng: random.Random) -> list[dict]:
    products = [
        "lemonade", "sneakers", "headphones", "backpack", "notebook",
        "umbrella", "granola", "kayak", "teapot", "sunscreen", "lantern",
    ]
    rows = []
    i = 0
    for _round in range(5):
        for product in products:
            slogan = rng.choice(SLOGAN_TEMPLATES)
            rows.append(
                {
                    "id": f"slo-{i:04d}",
                    "image_ref": f"images/ads/{product}_{i:04d}.jpg",
                    "texts": [slogan],
                    "concept_tags": [product],
                }
            )
            i += 1
    # a few slogans that name their product, to exercise the overlap filter
    for k, product in enumerate(products[:3]):
        rows.append(
            {
                "id": f"slo-bad-{k}",
                "image_ref": f"images/ads/{product}_bad.jpg",
                "texts": [f"Nothing beats a {product} at sunrise."],
                "concept_tags": [product],
            }
        )
    return rows


def main() -> None:
    rng = random.Random(20240817)
    write(OUT / "captions.jsonl", gen_captions(rng))
    write(OUT / "stories.jsonl", gen_stories(rng))
    images, summaries = gen_concepts(rng)
    write(OUT / "concept_images.jsonl", images)
    write(OUT / "concept_summaries.jsonl", summaries)
    write(OUT / "slogans.jsonl", gen_slogans(rng))


if __name__ == "__main__":
    main()
