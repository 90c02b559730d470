"""Agreement, vote resolution, report math, and distribution audits."""

import json
import random

import pytest

from itforge.evaluation import (
    UNSURE,
    AgreementError,
    ExclusionReason,
    LabelRecord,
    MetricCounts,
    ReliabilityMatrix,
    annotator_label_name,
    audit_corpus_file,
    augmentation_quality_report,
    classification_report,
    compare_metric_counts,
    corpus_consistency_report,
    krippendorff_alpha,
    majority_vote,
    metric_counts_from_class_counts,
    parse_annotator_label,
    report_from_matrix,
)
from itforge.taxonomy import (
    CLASSES,
    Cmi,
    InvalidReason,
    RelationClass,
    Sc,
    Stat,
    Undefined,
)

# ----------------------------------------------------------------- fixtures

# Classic-classifier confusion fixture (rows: truth, cols: predictions).
CLASSIC_CONFUSION = [
    [67, 3, 5, 23, 34, 5, 11, 1],
    [0, 94, 0, 0, 5, 0, 0, 1],
    [0, 0, 93, 0, 4, 9, 0, 0],
    [0, 0, 0, 84, 0, 0, 11, 0],
    [2, 2, 0, 2, 83, 0, 0, 6],
    [0, 0, 3, 0, 0, 84, 0, 0],
    [0, 0, 0, 2, 0, 0, 69, 0],
    [2, 0, 0, 0, 21, 1, 0, 71],
]
CLASSIC_EXPECTED = {  # class: (precision %, recall %)
    "Uncorrelated": (94.4, 45.0),
    "Interdependent": (94.9, 94.0),
    "Complementary": (92.1, 87.7),
    "Illustration": (75.7, 88.4),
    "Anchorage": (56.5, 87.4),
    "Contrasting": (84.8, 96.5),
    "Bad Illustration": (75.8, 97.2),
    "Bad Anchorage": (89.9, 74.7),
}

# Auto-vs-human fixture: constructed by integer search so that its per-class
# rates reproduce the reference precision/recall within 0.1pp.
AUTO_QUALITY_CONFUSION = [
    [148, 0, 0, 0, 0, 38, 28, 0],
    [0, 206, 0, 0, 5, 0, 0, 0],
    [0, 0, 88, 0, 0, 0, 0, 17],
    [0, 0, 0, 67, 13, 0, 0, 0],
    [0, 0, 0, 14, 131, 0, 0, 0],
    [0, 5, 12, 0, 0, 137, 0, 0],
    [0, 1, 0, 0, 0, 0, 69, 0],
    [2, 2, 0, 2, 1, 0, 3, 114],
]
AUTO_QUALITY_EXPECTED = {  # class: (recall %, precision %)
    "Uncorrelated": (69.2, 98.7),
    "Interdependent": (97.6, 96.3),
    "Complementary": (83.8, 88.0),
    "Illustration": (83.7, 80.7),
    "Anchorage": (90.3, 87.3),
    "Contrasting": (89.0, 78.3),
    "Bad Illustration": (98.6, 69.0),
    "Bad Anchorage": (91.9, 87.0),
}

# Per-class totals of the full generated corpus.
CORPUS_CLASS_COUNTS = {
    RelationClass.UNCORRELATED: 60000,
    RelationClass.INTERDEPENDENT: 1007,
    RelationClass.COMPLEMENTARY: 33088,
    RelationClass.ILLUSTRATION: 5447,
    RelationClass.ANCHORAGE: 62637,
    RelationClass.CONTRASTING: 31368,
    RelationClass.BAD_ILLUSTRATION: 4099,
    RelationClass.BAD_ANCHORAGE: 27210,
}
# The reference per-metric table those counts were reported against; its
# STAT T and STAT 0 rows disagree with the aggregation (they are swapped).
REFERENCE_METRIC_TABLE = {
    "stat": {"T": 125463, "0": 9546, "I": 89847},
    "sc": {"-1": 62677, "0": 60000, "1": 102179},
    "cmi": {"0": 61007, "1": 163849},
}


def rec(pair, annotator, label, ts="2020-01-01T00:00:00+00:00"):
    return LabelRecord(pair_id=pair, annotator_id=annotator, label=label, timestamp=ts)


# ------------------------------------------------------ krippendorff alpha


def alpha_pair_enumeration_oracle(units: dict) -> float:
    """Direct pair enumeration: no coincidence matrix, O(n^2) loops."""
    pooled = []
    d_o_sum = 0.0
    n = 0
    for ratings in units.values():
        vals = list(ratings.values())
        m = len(vals)
        if m < 2:
            continue
        n += m
        pooled.extend(vals)
        disagreements = sum(
            1 for i in range(m) for j in range(m) if i != j and vals[i] != vals[j]
        )
        d_o_sum += disagreements / (m - 1)
    d_o = d_o_sum / n
    d_e = sum(
        1
        for i in range(len(pooled))
        for j in range(len(pooled))
        if i != j and pooled[i] != pooled[j]
    ) / (n * (n - 1))
    return 1.0 - d_o / d_e


def random_units(rng: random.Random):
    n_annotators = rng.randint(2, 5)
    n_units = rng.randint(2, 20)
    n_cats = rng.randint(2, 4)
    units = {}
    for u in range(n_units):
        ratings = {}
        for a in range(n_annotators):
            if rng.random() < 0.3:  # missing rating
                continue
            ratings[f"a{a}"] = f"cat{rng.randint(0, n_cats - 1)}"
        if ratings:
            units[f"u{u}"] = ratings
    return units


def test_alpha_perfect_agreement_is_exactly_one():
    units = {f"u{i}": {"a": i % 2, "b": i % 2, "c": i % 2} for i in range(10)}
    assert krippendorff_alpha(units) == 1.0


def test_alpha_two_unit_hand_computed_fixture():
    # {A,B} and {A,A}: o_AB = o_BA = 1, o_AA = 2 -> D_o = D_e = 0.5 -> 0.0
    units = {"u1": {"x": "A", "y": "B"}, "u2": {"x": "A", "y": "A"}}
    assert krippendorff_alpha(units) == 0.0


def test_alpha_matches_pair_enumeration_oracle():
    rng = random.Random(42)
    checked = 0
    while checked < 100:
        units = random_units(rng)
        pairable = [u for u in units.values() if len(u) >= 2]
        if not pairable:
            continue
        try:
            ours = krippendorff_alpha(units)
        except AgreementError:
            continue  # single-category draw; undefined for the oracle too
        assert ours == pytest.approx(alpha_pair_enumeration_oracle(units), abs=1e-9)
        checked += 1


def test_alpha_errors():
    with pytest.raises(AgreementError):
        krippendorff_alpha({"u1": {"a": "A"}, "u2": {"b": "B"}})
    with pytest.raises(AgreementError):
        krippendorff_alpha({"u1": {"a": "A", "b": "A"}, "u2": {"a": "A", "b": "A"}})


def test_alpha_invariant_under_relabeling_and_column_permutation():
    rng = random.Random(7)
    units = random_units(rng)
    base = krippendorff_alpha(units)
    relabeled = {
        u: {a: "X" + str(v) for a, v in r.items()} for u, r in units.items()
    }
    assert krippendorff_alpha(relabeled) == pytest.approx(base, abs=1e-12)
    renamed_annotators = {
        u: {"z" + a: v for a, v in r.items()} for u, r in units.items()
    }
    assert krippendorff_alpha(renamed_annotators) == pytest.approx(base, abs=1e-12)


def test_alpha_ignores_single_rating_units():
    units = {"u1": {"a": "A", "b": "B"}, "u2": {"a": "A", "b": "A"}}
    base = krippendorff_alpha(units)
    units["u3"] = {"a": "B"}
    assert krippendorff_alpha(units) == base


def test_alpha_near_zero_for_iid_uniform_labels():
    rng = random.Random(123)
    units = {
        f"u{i}": {f"a{a}": f"c{rng.randint(0, 3)}" for a in range(3)}
        for i in range(2000)
    }
    assert abs(krippendorff_alpha(units)) < 0.05


def test_reliability_matrix_from_records_unsure_handling():
    records = [
        rec("p1", "a", RelationClass.ANCHORAGE),
        rec("p1", "b", UNSURE),
        rec("p2", "a", RelationClass.CONTRASTING),
    ]
    with_unsure = ReliabilityMatrix.from_records(records, unsure_as_category=True)
    assert with_unsure.units["p1"]["b"] == "Unsure"
    without = ReliabilityMatrix.from_records(records, unsure_as_category=False)
    assert "b" not in without.units["p1"]


# ------------------------------------------------------------ majority vote


def test_majority_vote_examples():
    records = [
        rec("p1", "a", RelationClass.ANCHORAGE),
        rec("p1", "b", RelationClass.ANCHORAGE),
        rec("p1", "c", UNSURE),
        rec("p2", "a", UNSURE),
        rec("p2", "b", UNSURE),
        rec("p2", "c", RelationClass.COMPLEMENTARY),
        rec("p3", "a", RelationClass.COMPLEMENTARY),
        rec("p3", "b", RelationClass.ANCHORAGE),
        rec("p3", "c", RelationClass.CONTRASTING),
    ]
    result = majority_vote(records)
    assert result.resolved == {"p1": RelationClass.ANCHORAGE}
    assert result.excluded == {
        "p2": ExclusionReason.UNSURE_MAJORITY,
        "p3": ExclusionReason.NO_MAJORITY,
    }


def test_majority_vote_order_and_timestamp_invariant():
    records = [
        rec("p1", "a", RelationClass.ANCHORAGE, ts="2020-01-01T00:00:02+00:00"),
        rec("p1", "b", RelationClass.ANCHORAGE, ts="2020-01-01T00:00:01+00:00"),
        rec("p1", "c", RelationClass.ILLUSTRATION, ts="2020-01-01T00:00:03+00:00"),
    ]
    forward = majority_vote(records)
    backward = majority_vote(list(reversed(records)))
    assert forward.resolved == backward.resolved == {"p1": RelationClass.ANCHORAGE}


def test_majority_vote_rejects_conflicting_duplicates():
    records = [
        rec("p1", "a", RelationClass.ANCHORAGE),
        rec("p1", "a", RelationClass.CONTRASTING),
    ]
    with pytest.raises(ValueError, match="effective"):
        majority_vote(records)


def test_majority_vote_collapses_identical_duplicates():
    records = [
        rec("p1", "a", RelationClass.ANCHORAGE),
        rec("p1", "a", RelationClass.ANCHORAGE),
        rec("p1", "b", RelationClass.ILLUSTRATION),
    ]
    result = majority_vote(records)
    assert result.excluded == {"p1": ExclusionReason.NO_MAJORITY}


def test_parse_annotator_label():
    assert parse_annotator_label("Unsure") is UNSURE
    assert parse_annotator_label("Bad Anchorage") is RelationClass.BAD_ANCHORAGE
    with pytest.raises(ValueError, match="valid labels"):
        parse_annotator_label("Undefined")
    assert annotator_label_name(UNSURE) == "Unsure"


# ---------------------------------------------------- classification report


def test_report_perfect_predictions():
    truth = {f"p{i}": cls for i, cls in enumerate(CLASSES)}
    report = classification_report(dict(truth), truth)
    assert report.accuracy == 1.0
    assert all(v == 1.0 for v in report.precision.values())
    assert all(v == 1.0 for v in report.recall.values())
    assert report.undefined_count == 0


def test_report_reproduces_classic_confusion_rates():
    report = report_from_matrix(CLASSIC_CONFUSION)
    for cls, (precision, recall) in CLASSIC_EXPECTED.items():
        assert 100 * report.precision[cls] == pytest.approx(precision, abs=0.1)
        assert 100 * report.recall[cls] == pytest.approx(recall, abs=0.1)
    assert report.total == 798
    assert report.support["Uncorrelated"] == 149


def test_report_matches_counting_oracle_on_random_maps():
    rng = random.Random(99)
    labels = list(CLASSES) + [Undefined(InvalidReason.CASE_D)]
    predictions = {}
    truth = {}
    for i in range(500):
        pid = f"p{i}"
        truth[pid] = rng.choice(CLASSES)
        predictions[pid] = rng.choice(labels)
    report = classification_report(predictions, truth)
    # oracle: direct counting per (truth, prediction) cell
    for r, truth_cls in enumerate(CLASSES):
        for c, pred_cls in enumerate(CLASSES):
            expected = sum(
                1
                for pid in truth
                if truth[pid] is truth_cls and predictions[pid] is pred_cls
            )
            assert report.matrix[r][c] == expected
        undefined = sum(
            1
            for pid in truth
            if truth[pid] is truth_cls and isinstance(predictions[pid], Undefined)
        )
        assert report.matrix[r][len(CLASSES)] == undefined
    correct = sum(1 for pid in truth if predictions[pid] is truth[pid])
    assert report.accuracy == pytest.approx(correct / len(truth))


def test_report_accuracy_is_support_weighted_recall():
    report = report_from_matrix(CLASSIC_CONFUSION)
    weighted = sum(
        report.recall[c.value] * report.support[c.value] for c in CLASSES
    )
    assert report.accuracy == pytest.approx(weighted / report.total)


def test_report_missing_truth_errors_with_ids():
    predictions = {"known": RelationClass.ANCHORAGE, "ghost": RelationClass.CONTRASTING}
    truth = {"known": RelationClass.ANCHORAGE}
    with pytest.raises(ValueError, match="ghost"):
        classification_report(predictions, truth)


def test_report_zero_denominators_are_none_not_zero():
    # one pair: truth Anchorage, predicted Undefined
    predictions = {"p": Undefined(InvalidReason.CASE_A)}
    truth = {"p": RelationClass.ANCHORAGE}
    report = classification_report(predictions, truth)
    assert report.precision["Anchorage"] is None  # never predicted
    assert report.recall["Anchorage"] == 0.0
    assert report.recall["Contrasting"] is None  # absent from truth
    assert report.undefined_count == 1


# -------------------------------------------------- augmentation quality


def test_augmentation_quality_perfect():
    auto = {f"p{i}": cls for i, cls in enumerate(CLASSES)}
    report = augmentation_quality_report(auto, dict(auto))
    assert all(v == 1.0 for v in report.precision.values())
    assert all(v == 1.0 for v in report.recall.values())


def test_augmentation_quality_reproduces_reference_rates():
    report = report_from_matrix(AUTO_QUALITY_CONFUSION)
    for cls, (recall, precision) in AUTO_QUALITY_EXPECTED.items():
        assert 100 * report.recall[cls] == pytest.approx(recall, abs=0.1)
        assert 100 * report.precision[cls] == pytest.approx(precision, abs=0.1)


def test_augmentation_quality_requires_overlap():
    with pytest.raises(ValueError, match="shared"):
        augmentation_quality_report(
            {"a": RelationClass.ANCHORAGE}, {"b": RelationClass.ANCHORAGE}
        )


def test_augmentation_quality_uses_intersection():
    auto = {"p1": RelationClass.ANCHORAGE, "only-auto": RelationClass.CONTRASTING}
    human = {"p1": RelationClass.ANCHORAGE, "only-human": RelationClass.ILLUSTRATION}
    report = augmentation_quality_report(auto, human)
    assert report.total == 1 and report.accuracy == 1.0


# ------------------------------------------------------- consistency audit


def test_metric_counts_from_full_scale_class_counts():
    counts = metric_counts_from_class_counts(CORPUS_CLASS_COUNTS)
    assert counts.total == 224856
    assert counts.sc == {Sc.NEG: 62677, Sc.ZERO: 60000, Sc.POS: 102179}
    assert counts.cmi == {Cmi.ZERO: 61007, Cmi.ONE: 163849}
    assert counts.stat == {Stat.T: 9546, Stat.EQUAL: 125463, Stat.I: 89847}


def test_reference_table_swap_is_flagged():
    counts = metric_counts_from_class_counts(CORPUS_CLASS_COUNTS)
    notes = compare_metric_counts(counts, REFERENCE_METRIC_TABLE)
    assert any("transposed" in n and "stat" in n for n in notes)
    # sc and cmi agree exactly, so the swap note is the only note
    assert len(notes) == 1


def test_consistency_report_totals_and_layout():
    report = corpus_consistency_report(
        CORPUS_CLASS_COUNTS, expected_metrics=REFERENCE_METRIC_TABLE
    )
    assert report.ok
    assert sum(report.class_counts.values()) == report.metric_counts.total
    assert any("transposed" in n for n in report.notes)


def test_consistency_empty_counts():
    report = corpus_consistency_report({})
    assert report.metric_counts.total == 0
    assert report.ok


def test_audit_flags_undefined_and_mislabeled_records(tmp_path):
    good = {
        "id": "ok-1",
        "image_ref": "x.jpg",
        "text": "fine",
        "concept_tags": [],
        "auto_triple": {"cmi": 1, "sc": 1, "stat": "I"},
        "auto_class": "Anchorage",
        "provenance": {"generator": "t", "seed": 0, "parent_ids": []},
    }
    undefined_triple = dict(good, id="bad-1", auto_triple={"cmi": 1, "sc": 0, "stat": "T"})
    mislabeled = dict(good, id="bad-2", auto_class="Illustration")
    path = tmp_path / "corpus.jsonl"
    path.write_text(
        "\n".join(json.dumps(r) for r in [good, undefined_triple, mislabeled]) + "\n"
    )
    report = audit_corpus_file(path)
    assert not report.ok
    assert {m["pair_id"] for m in report.mismatches} == {"bad-1", "bad-2"}
    assert report.class_counts["Anchorage"] == 1


def test_metric_counts_json_layout():
    counts = metric_counts_from_class_counts({RelationClass.ANCHORAGE: 2})
    obj = counts.to_json()
    assert obj["stat"] == {"T": 0, "0": 0, "I": 2}
    assert obj["cmi"] == {"0": 0, "1": 2}
    assert obj["sc"] == {"-1": 0, "0": 0, "1": 2}
