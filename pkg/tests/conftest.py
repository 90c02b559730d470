from importlib import resources
from pathlib import Path

import pytest

from itforge.augment import load_bundled_lexicon
from itforge.corpus import BuildConfig, build_corpus
from itforge.taxonomy import CLASSES


def mini_path(name: str) -> str:
    return str(Path(resources.files("itforge").joinpath("data/mini")) / name)


def desk_build_config(per_class: int = 50, seed: int = 7) -> BuildConfig:
    return BuildConfig(
        captions_path=mini_path("captions.jsonl"),
        stories_path=mini_path("stories.jsonl"),
        concept_images_path=mini_path("concept_images.jsonl"),
        concept_summaries_path=mini_path("concept_summaries.jsonl"),
        slogans_path=mini_path("slogans.jsonl"),
        targets={c.value: per_class for c in CLASSES},
        seed=seed,
    )


@pytest.fixture(scope="session")
def lexicon():
    return load_bundled_lexicon()


@pytest.fixture(scope="session")
def small_corpus():
    """8x6 corpus shared by tests that just need realistic pairs."""
    manifest, _report = build_corpus(desk_build_config(per_class=6))
    return manifest
