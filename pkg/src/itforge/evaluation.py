"""Evaluation harness: chance-corrected agreement, vote resolution,
classification metrics, and corpus distribution audits.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Mapping

from .taxonomy import (
    CLASSES,
    Cmi,
    Label,
    RelationClass,
    Sc,
    Stat,
    Undefined,
    UNDEFINED_NAME,
    class_from_name,
    label_name,
    triple_of_class,
)


class _Unsure:
    """Distinguished annotator option: no class could be assigned."""

    _instance: "_Unsure | None" = None

    def __new__(cls) -> "_Unsure":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return UNSURE_NAME


UNSURE_NAME = "Unsure"
UNSURE = _Unsure()

#: What an annotator may submit: a class, or the Unsure marker.
AnnotatorLabel = RelationClass | _Unsure


def parse_annotator_label(name: str) -> AnnotatorLabel:
    """Parse an annotator's label; 'Undefined' is not an annotator option."""
    if name == UNSURE_NAME:
        return UNSURE
    try:
        return class_from_name(name)
    except ValueError:
        valid = [c.value for c in CLASSES] + [UNSURE_NAME]
        raise ValueError(
            f"invalid label {name!r}; valid labels: {', '.join(valid)}"
        ) from None


def annotator_label_name(label: AnnotatorLabel) -> str:
    return UNSURE_NAME if isinstance(label, _Unsure) else label.value


@dataclass(frozen=True)
class LabelRecord:
    """One human annotation event."""

    pair_id: str
    annotator_id: str
    label: AnnotatorLabel
    timestamp: str  # ISO-8601 UTC instant

    def to_json(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "annotator_id": self.annotator_id,
            "label": annotator_label_name(self.label),
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LabelRecord":
        return cls(
            pair_id=obj["pair_id"],
            annotator_id=obj["annotator_id"],
            label=parse_annotator_label(obj["label"]),
            timestamp=obj.get("timestamp", ""),
        )


def load_label_records(path: str | Path) -> list[LabelRecord]:
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(LabelRecord.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return records


class AgreementError(ValueError):
    """Agreement cannot be computed on this data."""


@dataclass
class ReliabilityMatrix:
    """Unit-by-annotator categorical ratings."""

    units: dict[str, dict[str, Hashable]]

    @classmethod
    def from_records(
        cls, records: Iterable[LabelRecord], unsure_as_category: bool = True
    ) -> "ReliabilityMatrix":
        """Build from effective label records (one per pair/annotator).

        With ``unsure_as_category`` the Unsure marker participates as its
        own nominal category; otherwise those ratings count as missing.
        """
        units: dict[str, dict[str, Hashable]] = {}
        for rec in records:
            if isinstance(rec.label, _Unsure) and not unsure_as_category:
                continue
            units.setdefault(rec.pair_id, {})[rec.annotator_id] = annotator_label_name(
                rec.label
            )
        return cls(units)

    def categories(self) -> set[Hashable]:
        return {v for ratings in self.units.values() for v in ratings.values()}


def krippendorff_alpha(m: ReliabilityMatrix | Mapping[str, Mapping[str, Hashable]]) -> float:
    """Nominal-scale Krippendorff's alpha via the coincidence matrix.

    Each unit with m ratings contributes every ordered pair of its ratings
    with weight 1/(m-1); single-rating units are skipped. With o the
    coincidence counts and n_c its category margins,

        D_o = (1/n)       * sum_{c != k} o_ck
        D_e = (1/(n(n-1))) * sum_{c != k} n_c n_k
        alpha = 1 - D_o / D_e
    """
    units = m.units if isinstance(m, ReliabilityMatrix) else m
    coincidence: dict[tuple[Hashable, Hashable], float] = {}
    pairable_units = 0
    for ratings in units.values():
        values = list(ratings.values())
        m_u = len(values)
        if m_u < 2:
            continue
        pairable_units += 1
        w = 1.0 / (m_u - 1)
        for i, c in enumerate(values):
            for j, k in enumerate(values):
                if i != j:
                    coincidence[(c, k)] = coincidence.get((c, k), 0.0) + w
    if pairable_units == 0:
        raise AgreementError("no unit has two or more ratings")
    n_c: dict[Hashable, float] = {}
    for (c, _k), w in coincidence.items():
        n_c[c] = n_c.get(c, 0.0) + w
    n = sum(n_c.values())
    d_o = sum(w for (c, k), w in coincidence.items() if c != k) / n
    d_e = sum(n_c[c] * n_c[k] for c in n_c for k in n_c if c != k) / (n * (n - 1))
    if d_e == 0.0:
        raise AgreementError("agreement undefined: only one category was ever used")
    return 1.0 - d_o / d_e


class ExclusionReason(enum.Enum):
    UNSURE_MAJORITY = "unsure-majority"
    NO_MAJORITY = "no-majority"


@dataclass
class VoteResult:
    resolved: dict[str, RelationClass]
    excluded: dict[str, ExclusionReason]

    def to_json(self) -> dict:
        return {
            "resolved": {k: v.value for k, v in sorted(self.resolved.items())},
            "excluded": {k: v.value for k, v in sorted(self.excluded.items())},
        }


def majority_vote(records: Iterable[LabelRecord]) -> VoteResult:
    """Resolve ground truth per pair by strict majority.

    A label (class or Unsure) wins a pair when it holds more than half of
    that pair's votes. Unsure-majority and no-majority pairs are excluded,
    each with its reason. Votes count once per (pair, annotator); records
    must already be effective labels, so conflicting duplicates are an
    error.
    """
    votes: dict[str, dict[str, AnnotatorLabel]] = {}
    for rec in records:
        per_pair = votes.setdefault(rec.pair_id, {})
        if rec.annotator_id in per_pair and per_pair[rec.annotator_id] != rec.label:
            raise ValueError(
                f"conflicting labels for pair {rec.pair_id!r} by annotator "
                f"{rec.annotator_id!r}; resolve effective labels first"
            )
        per_pair[rec.annotator_id] = rec.label
    resolved: dict[str, RelationClass] = {}
    excluded: dict[str, ExclusionReason] = {}
    for pair_id, per_pair in votes.items():
        tally = Counter(annotator_label_name(v) for v in per_pair.values())
        total = sum(tally.values())
        top_name, top_count = tally.most_common(1)[0]
        if top_count * 2 <= total:
            excluded[pair_id] = ExclusionReason.NO_MAJORITY
        elif top_name == UNSURE_NAME:
            excluded[pair_id] = ExclusionReason.UNSURE_MAJORITY
        else:
            resolved[pair_id] = class_from_name(top_name)
    return VoteResult(resolved=resolved, excluded=excluded)


@dataclass
class EvalReport:
    """Confusion matrix plus the usual per-class rates.

    Rows are ground truth in canonical class order; columns append a final
    Undefined column for cascade rejections. Zero-denominator precision or
    recall is ``None``, never 0.
    """

    matrix: list[list[int]]  # 8 x 9
    precision: dict[str, float | None]
    recall: dict[str, float | None]
    accuracy: float
    support: dict[str, int]
    undefined_count: int
    total: int

    @property
    def undefined_rate(self) -> float:
        return self.undefined_count / self.total if self.total else 0.0

    def to_json(self) -> dict:
        names = [c.value for c in CLASSES]
        return {
            "class_order": names + [UNDEFINED_NAME],
            "matrix": self.matrix,
            "precision": self.precision,
            "recall": self.recall,
            "accuracy": self.accuracy,
            "support": self.support,
            "undefined_count": self.undefined_count,
            "undefined_rate": self.undefined_rate,
            "total": self.total,
        }


def classification_report(
    predictions: Mapping[str, Label], truth: Mapping[str, RelationClass]
) -> EvalReport:
    """Score predictions against ground truth.

    Every predicted pair must carry a truth label; ground truth is never
    Undefined, so Undefined predictions land in the extra column and can
    never be correct.
    """
    missing = sorted(set(predictions) - set(truth))
    if missing:
        shown = ", ".join(missing[:10]) + ("..." if len(missing) > 10 else "")
        raise ValueError(f"{len(missing)} predicted pairs missing from truth: {shown}")
    n_cls = len(CLASSES)
    matrix = [[0] * (n_cls + 1) for _ in range(n_cls)]
    for pair_id, pred in predictions.items():
        row = CLASSES.index(truth[pair_id])
        col = n_cls if isinstance(pred, Undefined) else CLASSES.index(pred)
        matrix[row][col] += 1
    return report_from_matrix(matrix)


def report_from_matrix(matrix: list[list[int]]) -> EvalReport:
    """Build an :class:`EvalReport` from a raw 8x8 or 8x9 count matrix."""
    n_cls = len(CLASSES)
    if len(matrix) != n_cls or any(len(r) not in (n_cls, n_cls + 1) for r in matrix):
        raise ValueError(f"expected {n_cls} rows of {n_cls} or {n_cls + 1} counts")
    matrix = [list(r) + [0] * (n_cls + 1 - len(r)) for r in matrix]
    total = sum(sum(r) for r in matrix)
    diag = [matrix[i][i] for i in range(n_cls)]
    col_sums = [sum(matrix[r][c] for r in range(n_cls)) for c in range(n_cls + 1)]
    row_sums = [sum(r) for r in matrix]
    precision: dict[str, float | None] = {}
    recall: dict[str, float | None] = {}
    support: dict[str, int] = {}
    for i, cls in enumerate(CLASSES):
        precision[cls.value] = diag[i] / col_sums[i] if col_sums[i] else None
        recall[cls.value] = diag[i] / row_sums[i] if row_sums[i] else None
        support[cls.value] = row_sums[i]
    return EvalReport(
        matrix=matrix,
        precision=precision,
        recall=recall,
        accuracy=sum(diag) / total if total else 0.0,
        support=support,
        undefined_count=col_sums[n_cls],
        total=total,
    )


def augmentation_quality_report(
    auto: Mapping[str, RelationClass], human: Mapping[str, RelationClass]
) -> EvalReport:
    """Score the automatic labels against human ground truth.

    Automatic labels play the prediction role; only pairs present on both
    sides count.
    """
    common = set(auto) & set(human)
    if not common:
        raise ValueError("no pair ids shared between automatic and human labels")
    return classification_report(
        {pid: auto[pid] for pid in common}, {pid: human[pid] for pid in common}
    )


@dataclass
class MetricCounts:
    """Per-metric label distribution derived from class counts."""

    cmi: dict[Cmi, int]
    sc: dict[Sc, int]
    stat: dict[Stat, int]
    total: int

    def to_json(self) -> dict:
        return {
            "cmi": {str(int(k)): v for k, v in self.cmi.items()},
            "sc": {str(int(k)): v for k, v in self.sc.items()},
            "stat": {k.value: v for k, v in self.stat.items()},
            "total": self.total,
        }


def metric_counts_from_class_counts(
    class_counts: Mapping[RelationClass, int]
) -> MetricCounts:
    """Aggregate class counts into CMI/SC/STAT counts via defining triples."""
    cmi = {level: 0 for level in Cmi}
    sc = {level: 0 for level in Sc}
    stat = {level: 0 for level in Stat}
    total = 0
    for cls, count in class_counts.items():
        t = triple_of_class(cls)
        cmi[t.cmi] += count
        sc[t.sc] += count
        stat[t.stat] += count
        total += count
    counts = MetricCounts(cmi=cmi, sc=sc, stat=stat, total=total)
    assert sum(cmi.values()) == sum(sc.values()) == sum(stat.values()) == total
    return counts


def compare_metric_counts(computed: MetricCounts, expected: Mapping) -> list[str]:
    """Diff computed metric counts against an expected table.

    Plain mismatches are reported per level; when two levels of one metric
    hold each other's expected values, the note says the expected rows look
    transposed (a more useful diagnosis than two bare mismatches).
    """
    notes: list[str] = []
    dims: list[tuple[str, dict]] = [
        ("cmi", {str(int(k)): v for k, v in computed.cmi.items()}),
        ("sc", {str(int(k)): v for k, v in computed.sc.items()}),
        ("stat", {k.value: v for k, v in computed.stat.items()}),
    ]
    for dim_name, comp in dims:
        exp = expected.get(dim_name)
        if exp is None:
            continue
        exp = {str(k): int(v) for k, v in exp.items()}
        mismatched = [
            lvl for lvl in comp if lvl in exp and comp[lvl] != exp[lvl]
        ]
        swapped: set[str] = set()
        for a in mismatched:
            for b in mismatched:
                if a < b and comp[a] == exp.get(b) and comp[b] == exp.get(a):
                    notes.append(
                        f"{dim_name}: expected rows {a!r} and {b!r} appear transposed "
                        f"(computed {a}={comp[a]}, {b}={comp[b]})"
                    )
                    swapped.update((a, b))
        for lvl in mismatched:
            if lvl not in swapped:
                notes.append(
                    f"{dim_name}: computed {lvl}={comp[lvl]} but expected {exp[lvl]}"
                )
    return notes


@dataclass
class ConsistencyReport:
    """Distribution audit of a corpus manifest."""

    class_counts: dict[str, int]
    metric_counts: MetricCounts
    mismatches: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return {
            "class_counts": dict(sorted(self.class_counts.items())),
            "metric_counts": self.metric_counts.to_json(),
            "mismatches": self.mismatches,
            "notes": self.notes,
            "ok": self.ok,
        }


def corpus_consistency_report(
    class_counts: Mapping[RelationClass, int],
    mismatches: list[dict] | None = None,
    expected_metrics: Mapping | None = None,
) -> ConsistencyReport:
    counts = metric_counts_from_class_counts(class_counts)
    notes = compare_metric_counts(counts, expected_metrics) if expected_metrics else []
    return ConsistencyReport(
        class_counts={c.value: class_counts.get(c, 0) for c in CLASSES},
        metric_counts=counts,
        mismatches=mismatches or [],
        notes=notes,
    )


def audit_corpus_file(
    path: str | Path, expected_metrics: Mapping | None = None
) -> ConsistencyReport:
    """Recount a corpus manifest from its raw records.

    Works below the strict pair loader so that manifests written by other
    tools can be audited: every record's stated class is rechecked against
    the class derived from its metric triple, and disagreements (including
    triples that map to Undefined) land in the mismatch list.
    """
    from .taxonomy import MetricTriple, classify_triple

    class_counts: dict[RelationClass, int] = {c: 0 for c in RelationClass}
    mismatches: list[dict] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            derived = classify_triple(MetricTriple.from_json(obj["auto_triple"]))
            stated = obj.get("auto_class")
            if label_name(derived) != stated or isinstance(derived, Undefined):
                mismatches.append(
                    {
                        "line": lineno,
                        "pair_id": obj.get("id"),
                        "stated": stated,
                        "derived": str(derived) if isinstance(derived, Undefined) else label_name(derived),
                    }
                )
                continue
            class_counts[derived] += 1
    return corpus_consistency_report(class_counts, mismatches, expected_metrics)


def render_consistency(report: ConsistencyReport) -> str:
    """Aligned text rendering: class distribution, then metric distribution."""
    lines = ["Class distribution", "------------------"]
    width = max(len(name) for name in report.class_counts)
    for name, count in report.class_counts.items():
        lines.append(f"{name:<{width}}  {count:>10}")
    lines.append(f"{'Total':<{width}}  {sum(report.class_counts.values()):>10}")
    lines += ["", "Metric distribution", "-------------------"]
    mc = report.metric_counts
    for level in Stat:
        lines.append(f"STAT {level.value:<4} {mc.stat[level]:>10}")
    for level in Sc:
        lines.append(f"SC {int(level):<6} {mc.sc[level]:>10}")
    for level in Cmi:
        lines.append(f"CMI {int(level):<5} {mc.cmi[level]:>10}")
    if report.notes:
        lines += ["", "Notes"] + [f"- {n}" for n in report.notes]
    if report.mismatches:
        lines += ["", f"Mismatched records: {len(report.mismatches)}"]
        for mm in report.mismatches[:20]:
            lines.append(
                f"- line {mm['line']} ({mm['pair_id']}): stated {mm['stated']!r}, derived {mm['derived']!r}"
            )
    return "\n".join(lines)


def render_report(report: EvalReport) -> str:
    """Aligned text confusion matrix with precision/recall footer."""
    names = [c.value for c in CLASSES]
    headers = names + [UNDEFINED_NAME, "Sum"]
    short = [n[:9] for n in headers]
    width = max(10, max(len(s) for s in short) + 1)
    head = f"{'Truth/Pred':<16}" + "".join(f"{s:>{width}}" for s in short)
    lines = [head]
    for i, name in enumerate(names):
        row = report.matrix[i]
        cells = "".join(f"{v:>{width}}" for v in row + [sum(row)])
        lines.append(f"{name:<16}" + cells)

    def fmt(v: float | None) -> str:
        return "n/a" if v is None else f"{100 * v:.1f}%"

    lines.append(
        f"{'Precision':<16}"
        + "".join(f"{fmt(report.precision[n]):>{width}}" for n in names)
    )
    lines.append(
        f"{'Recall':<16}" + "".join(f"{fmt(report.recall[n]):>{width}}" for n in names)
    )
    lines.append(
        f"Accuracy: {100 * report.accuracy:.1f}%   "
        f"Undefined predictions: {report.undefined_count} "
        f"({100 * report.undefined_rate:.1f}%)   Total: {report.total}"
    )
    return "\n".join(lines)
