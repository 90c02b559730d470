"""The three relation metrics, their 18-point combination space, and the
eight image-text relation classes.

Every function here is a pure, total mapping over small closed enums; the
rest of the package builds on top of these rules.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Cmi(enum.IntEnum):
    """Cross-modal mutual information: do image and text share concepts?"""

    ZERO = 0
    ONE = 1


class Sc(enum.IntEnum):
    """Semantic correlation: do the intended meanings cohere (+1), stay
    independent (0), or contradict (-1)?"""

    NEG = -1
    ZERO = 0
    POS = 1


class Stat(enum.Enum):
    """Status: which modality is subordinate to the other, if any.

    ``T`` means the image is subordinate to the text, ``I`` means the text
    is subordinate to the image, ``EQUAL`` means neither dominates.
    """

    T = "T"
    EQUAL = "0"
    I = "I"  # noqa: E741 - canonical single-letter level name


# Canonical within-metric orders, also used for argmax tie-breaking.
CMI_LEVELS = (Cmi.ZERO, Cmi.ONE)
SC_LEVELS = (Sc.NEG, Sc.ZERO, Sc.POS)
STAT_LEVELS = (Stat.T, Stat.EQUAL, Stat.I)


@dataclass(frozen=True)
class MetricTriple:
    """One coordinate in the 2x3x3 metric space."""

    cmi: Cmi
    sc: Sc
    stat: Stat

    def to_json(self) -> dict:
        return {"cmi": int(self.cmi), "sc": int(self.sc), "stat": self.stat.value}

    @classmethod
    def from_json(cls, obj: dict) -> "MetricTriple":
        return cls(Cmi(obj["cmi"]), Sc(obj["sc"]), Stat(str(obj["stat"])))


#: All 18 triples in canonical (cmi, sc, stat) order.
ALL_TRIPLES = tuple(
    MetricTriple(cmi, sc, stat)
    for cmi in CMI_LEVELS
    for sc in SC_LEVELS
    for stat in STAT_LEVELS
)


class RelationClass(enum.Enum):
    """The eight valid image-text relation classes, in canonical order."""

    UNCORRELATED = "Uncorrelated"
    INTERDEPENDENT = "Interdependent"
    COMPLEMENTARY = "Complementary"
    ILLUSTRATION = "Illustration"
    ANCHORAGE = "Anchorage"
    CONTRASTING = "Contrasting"
    BAD_ILLUSTRATION = "Bad Illustration"
    BAD_ANCHORAGE = "Bad Anchorage"


#: Canonical class order (index 0..7), used for serialization, report rows,
#: classifier output heads, and keyboard shortcuts.
CLASSES = tuple(RelationClass)


class InvalidReason(enum.Enum):
    """Why a metric triple does not describe a realizable image-text pair."""

    CASE_A = "A"  # no shared concepts, yet a contradiction
    CASE_B = "B"  # uncorrelated, yet one modality subordinate
    CASE_C = "C"  # interdependent, yet one modality subordinate
    CASE_D = "D"  # shared concepts, yet zero semantic correlation


@dataclass(frozen=True)
class Undefined:
    """Rejection outcome for the 10 invalid metric combinations."""

    reason: InvalidReason

    @property
    def name(self) -> str:
        return UNDEFINED_NAME

    def __str__(self) -> str:
        return f"{UNDEFINED_NAME}({self.reason.value})"


#: A classification outcome: one of the eight classes, or a reasoned rejection.
Label = RelationClass | Undefined

UNDEFINED_NAME = "Undefined"

_CLASS_TO_TRIPLE: dict[RelationClass, MetricTriple] = {
    RelationClass.UNCORRELATED: MetricTriple(Cmi.ZERO, Sc.ZERO, Stat.EQUAL),
    RelationClass.INTERDEPENDENT: MetricTriple(Cmi.ZERO, Sc.POS, Stat.EQUAL),
    RelationClass.COMPLEMENTARY: MetricTriple(Cmi.ONE, Sc.POS, Stat.EQUAL),
    RelationClass.ILLUSTRATION: MetricTriple(Cmi.ONE, Sc.POS, Stat.T),
    RelationClass.ANCHORAGE: MetricTriple(Cmi.ONE, Sc.POS, Stat.I),
    RelationClass.CONTRASTING: MetricTriple(Cmi.ONE, Sc.NEG, Stat.EQUAL),
    RelationClass.BAD_ILLUSTRATION: MetricTriple(Cmi.ONE, Sc.NEG, Stat.T),
    RelationClass.BAD_ANCHORAGE: MetricTriple(Cmi.ONE, Sc.NEG, Stat.I),
}

_TRIPLE_TO_CLASS = {t: c for c, t in _CLASS_TO_TRIPLE.items()}


def validity_reason(t: MetricTriple) -> InvalidReason | None:
    """Return why ``t`` is invalid, or ``None`` if it names a class.

    The four rejection rules partition the 10 invalid triples:
      A: cmi=0, sc=-1 (any stat)      -> 3 triples
      B: cmi=0, sc=0, stat in {T, I}  -> 2 triples
      C: cmi=0, sc=1, stat in {T, I}  -> 2 triples
      D: cmi=1, sc=0 (any stat)       -> 3 triples
    """
    if t.cmi == Cmi.ZERO and t.sc == Sc.NEG:
        return InvalidReason.CASE_A
    if t.cmi == Cmi.ZERO and t.sc == Sc.ZERO and t.stat != Stat.EQUAL:
        return InvalidReason.CASE_B
    if t.cmi == Cmi.ZERO and t.sc == Sc.POS and t.stat != Stat.EQUAL:
        return InvalidReason.CASE_C
    if t.cmi == Cmi.ONE and t.sc == Sc.ZERO:
        return InvalidReason.CASE_D
    return None


def classify_triple(t: MetricTriple) -> Label:
    """Map a metric triple to its class, or to a reasoned ``Undefined``."""
    reason = validity_reason(t)
    if reason is not None:
        return Undefined(reason)
    return _TRIPLE_TO_CLASS[t]


def triple_of_class(c: RelationClass) -> MetricTriple:
    """Return the defining metric triple of a valid class.

    Inverse of :func:`classify_triple` on the eight valid classes. Rejects
    anything that is not a :class:`RelationClass` (notably ``Undefined``,
    which has no defining triple).
    """
    if not isinstance(c, RelationClass):
        raise ValueError(f"no defining metric triple for {c!r}")
    return _CLASS_TO_TRIPLE[c]


def class_index(c: RelationClass) -> int:
    """Position of ``c`` in the canonical class order."""
    return CLASSES.index(c)


def label_name(label: Label) -> str:
    """Canonical serialization name of a classification outcome."""
    if isinstance(label, RelationClass):
        return label.value
    return UNDEFINED_NAME


def class_from_name(name: str) -> RelationClass:
    """Parse a canonical class name; rejects 'Undefined' and unknown names."""
    for c in CLASSES:
        if c.value == name:
            return c
    raise ValueError(
        f"unknown class name {name!r}; expected one of "
        + ", ".join(repr(c.value) for c in CLASSES)
    )


def enumerate_space() -> list[tuple[MetricTriple, Label]]:
    """All 18 (triple, outcome) rows in canonical order."""
    return [(t, classify_triple(t)) for t in ALL_TRIPLES]
