"""Command line entry point: `forge <subcommand>`.

Every subcommand is deterministic given its config and --seed. Config files
are JSON objects whose keys mirror the flag names (dashes as underscores);
explicit flags win over config values.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import augment as augment_mod
from . import corpus as corpus_mod
from .evaluation import (
    AgreementError,
    ReliabilityMatrix,
    corpus_consistency_report,
    classification_report,
    krippendorff_alpha,
    load_label_records,
    majority_vote,
    audit_corpus_file,
    render_consistency,
    render_report,
)
from .features import FeatureSchema, extract_features
from .manifest import (
    ImageTextPair,
    ManifestError,
    dump_json_line,
    load_pairs,
    write_pairs,
)
from .network import (
    Head,
    TrainConfig,
    cascade_predict,
    classic_predict,
    label_index,
    load_model,
    save_model,
    train,
)
from .taxonomy import (
    ALL_TRIPLES,
    CLASSES,
    RelationClass,
    Undefined,
    classify_triple,
    label_name,
)

TRAIN_MAX_SENTENCES = 30
TRAIN_MAX_WORDS = 50


class CliError(RuntimeError):
    """Validation failure: reported on stderr, exit code 1."""


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise CliError(f"config {path} must hold a JSON object")
    return obj


def _merged(args: argparse.Namespace, config: dict, key: str, default=None):
    """Flag value if given, else config value, else default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _emit(args, payload: dict, text: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _write_meta(path: Path, snapshot: dict) -> None:
    """Self-description sidecar: the config that produced an artifact."""
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(dump_json_line(snapshot) + "\n", encoding="utf-8")
    tmp.replace(path)


# ---------------------------------------------------------------- taxonomy


def cmd_taxonomy(args) -> int:
    rows = []
    for t in ALL_TRIPLES:
        outcome = classify_triple(t)
        rows.append(
            {
                "cmi": int(t.cmi),
                "sc": int(t.sc),
                "stat": t.stat.value,
                "outcome": str(outcome) if isinstance(outcome, Undefined) else outcome.value,
                "valid": not isinstance(outcome, Undefined),
            }
        )
    valid = sum(1 for r in rows if r["valid"])
    lines = [f"{'cmi':>3} {'sc':>3} {'stat':>4}  outcome", "-" * 34]
    for r in rows:
        lines.append(f"{r['cmi']:>3} {r['sc']:>3} {r['stat']:>4}  {r['outcome']}")
    lines.append("-" * 34)
    lines.append(f"{valid} valid classes, {len(rows) - valid} invalid combinations")
    _emit(args, {"rows": rows, "valid": valid, "invalid": len(rows) - valid}, "\n".join(lines))
    return 0


# ------------------------------------------------------------------- build


def cmd_build(args) -> int:
    config = _load_config(args.config)
    required = [
        "captions_path",
        "stories_path",
        "concept_images_path",
        "concept_summaries_path",
        "slogans_path",
        "targets",
    ]
    missing = [k for k in required if _merged(args, config, k) is None]
    if missing:
        raise CliError(f"build config missing keys: {', '.join(missing)}")
    build_cfg = corpus_mod.BuildConfig(
        captions_path=_merged(args, config, "captions_path"),
        stories_path=_merged(args, config, "stories_path"),
        concept_images_path=_merged(args, config, "concept_images_path"),
        concept_summaries_path=_merged(args, config, "concept_summaries_path"),
        slogans_path=_merged(args, config, "slogans_path"),
        targets=dict(_merged(args, config, "targets")),
        seed=int(_merged(args, config, "seed", 0)),
        lexicon_path=_merged(args, config, "lexicon_path"),
        stopwords_path=_merged(args, config, "stopwords_path"),
        max_sentences=int(_merged(args, config, "max_sentences", 10)),
        max_words_per_sentence=_merged(args, config, "max_words_per_sentence"),
    )
    manifest, report = corpus_mod.build_corpus(build_cfg)
    out_dir = Path(_merged(args, config, "out", "corpus"))
    pairs_path, summary_path = corpus_mod.write_corpus(manifest, report, out_dir)
    counts = {c.value: n for c, n in manifest.per_class_counts.items()}
    _emit(
        args,
        {"pairs": str(pairs_path), "summary": str(summary_path), "class_counts": counts},
        f"wrote {len(manifest.pairs)} pairs -> {pairs_path}\nsummary -> {summary_path}",
    )
    return 0


# ----------------------------------------------------------------- augment


def cmd_augment(args) -> int:
    lex = (
        augment_mod.load_lexicon(args.lexicon)
        if args.lexicon
        else augment_mod.load_bundled_lexicon()
    )
    if args.text is not None:
        new_text, count = augment_mod.substitute_antonyms(args.text, lex)
        _emit(args, {"text": new_text, "replacements": count}, f"{new_text}\n({count} replacements)")
        return 0
    if not args.pairs or not args.out:
        raise CliError("augment needs --pairs and --out (or --text for a one-off)")
    pairs = load_pairs(args.pairs)
    eligible = [p for p in pairs if p.auto_class in augment_mod.NEGATION_MAP]
    if args.fraction < 1.0:
        import random

        order = list(range(len(eligible)))
        random.Random(corpus_mod.mix_seed(args.seed, "augment-cli")).shuffle(order)
        keep = sorted(order[: int(round(args.fraction * len(eligible)))])
        eligible = [eligible[i] for i in keep]
    negatives = []
    rejected = 0
    for p in eligible:
        try:
            negatives.append(augment_mod.derive_negative(p, lex))
        except augment_mod.NoReplacementsError:
            rejected += 1
    write_pairs(negatives, args.out)
    _write_meta(
        Path(args.out + ".meta.json"),
        {
            "command": "augment",
            "pairs": args.pairs,
            "lexicon": args.lexicon or "bundled",
            "fraction": args.fraction,
            "seed": args.seed,
        },
    )
    _emit(
        args,
        {
            "out": args.out,
            "eligible": len(eligible),
            "converted": len(negatives),
            "rejected": rejected,
        },
        f"converted {len(negatives)} of {len(eligible)} eligible pairs "
        f"({rejected} rejected for zero replacements) -> {args.out}",
    )
    return 0


# ------------------------------------------------------------------- train


def _pair_features(
    pairs: list[ImageTextPair], schema: FeatureSchema, lex
) -> np.ndarray:
    rows = []
    for p in pairs:
        text = corpus_mod.truncate_text(p.text, TRAIN_MAX_SENTENCES, TRAIN_MAX_WORDS)
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
        rows.append(extract_features(p, schema, lex))
    return np.array(rows)


_HEAD_NAMES = {"classic": Head.CLASSIC, "cmi": Head.CMI, "sc": Head.SC, "stat": Head.STAT}


def cmd_train(args) -> int:
    config = _load_config(args.config)
    corpus_path = _merged(args, config, "corpus")
    if not corpus_path:
        raise CliError("train needs --corpus")
    pairs = load_pairs(corpus_path)
    if not pairs:
        raise CliError(f"no pairs in {corpus_path}")
    head_arg = _merged(args, config, "heads", "all")
    head_names = list(_HEAD_NAMES) if head_arg == "all" else head_arg.split(",")
    for name in head_names:
        if name not in _HEAD_NAMES:
            raise CliError(f"unknown head {name!r}; choose from {', '.join(_HEAD_NAMES)}")
    seed = int(_merged(args, config, "seed", 0))
    holdout = float(_merged(args, config, "holdout", 0.0))
    out_dir = Path(_merged(args, config, "out", "models"))
    out_dir.mkdir(parents=True, exist_ok=True)
    lex = (
        augment_mod.load_lexicon(args.lexicon)
        if args.lexicon
        else augment_mod.load_bundled_lexicon()
    )
    schema = FeatureSchema()

    rng = np.random.default_rng(corpus_mod.mix_seed(seed, "train-split"))
    order = rng.permutation(len(pairs))
    n_holdout = int(round(holdout * len(pairs)))
    holdout_idx = set(order[:n_holdout].tolist())
    train_pairs = [p for i, p in enumerate(pairs) if i not in holdout_idx]
    holdout_pairs = [p for i, p in enumerate(pairs) if i in holdout_idx]
    if holdout_pairs:
        write_pairs(holdout_pairs, out_dir / "holdout.jsonl")
    if not train_pairs:
        raise CliError("holdout fraction leaves no training data")

    x = _pair_features(train_pairs, schema, lex)
    train_cfg = TrainConfig(
        epochs=int(_merged(args, config, "epochs", 200)),
        learning_rate=float(_merged(args, config, "learning_rate", 1e-3)),
        batch_size=int(_merged(args, config, "batch_size", 32)),
        seed=seed,
        hidden_dim=int(_merged(args, config, "hidden_dim", 128)),
        class_weighting=bool(_merged(args, config, "class_weighting", False)),
        backend=_merged(args, config, "backend"),
    )
    summary = {}
    for name in head_names:
        head = _HEAD_NAMES[name]
        dataset = [
            (x[i], label_index(head, p.auto_class)) for i, p in enumerate(train_pairs)
        ]
        model = train(dataset, head, train_cfg, schema_hash=schema.content_hash())
        path = out_dir / f"{name}.model.json"
        save_model(model, path)
        summary[name] = {
            "path": str(path),
            "final_loss": model.metadata["final_loss"],
            "samples": len(dataset),
        }
    _write_meta(
        out_dir / "train.meta.json",
        {
            "command": "train",
            "corpus": str(corpus_path),
            "heads": head_names,
            "holdout": holdout,
            "lexicon": args.lexicon or "bundled",
            "schema_hash": schema.content_hash(),
            "config": train_cfg.to_json(),
        },
    )
    _emit(
        args,
        {"models": summary, "holdout": len(holdout_pairs)},
        "\n".join(
            f"{name}: loss {info['final_loss']:.4f} -> {info['path']}"
            for name, info in summary.items()
        )
        + (f"\nheld out {len(holdout_pairs)} pairs -> {out_dir / 'holdout.jsonl'}" if holdout_pairs else ""),
    )
    return 0


# ----------------------------------------------------------------- predict


def _load_models(models_dir: Path, mode: str, schema: FeatureSchema) -> dict:
    expected = schema.content_hash()
    needed = ["classic"] if mode == "classic" else ["cmi", "sc", "stat"]
    loaded = {}
    for name in needed:
        path = models_dir / f"{name}.model.json"
        if not path.is_file():
            raise CliError(f"missing model file {path}")
        loaded[name] = load_model(path, expected_schema_hash=expected)
    return loaded


def cmd_predict(args) -> int:
    if args.mode not in ("classic", "cascade"):
        raise CliError("--mode must be classic or cascade")
    pairs = load_pairs(args.pairs)
    schema = FeatureSchema()
    lex = (
        augment_mod.load_lexicon(args.lexicon)
        if args.lexicon
        else augment_mod.load_bundled_lexicon()
    )
    models = _load_models(Path(args.models), args.mode, schema)
    x = _pair_features(pairs, schema, lex)
    rows = []
    for i, pair in enumerate(pairs):
        if args.mode == "classic":
            label = classic_predict(models["classic"], x[i])
        else:
            label = cascade_predict(models["cmi"], models["sc"], models["stat"], x[i])
        row = {"pair_id": pair.id, "label": label_name(label)}
        if isinstance(label, Undefined):
            row["reject_reason"] = label.reason.value
        rows.append(row)
    out = Path(args.out)
    tmp = out.with_name(out.name + ".tmp")
    with tmp.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(dump_json_line(row) + "\n")
    tmp.replace(out)
    _write_meta(
        Path(str(out) + ".meta.json"),
        {
            "command": "predict",
            "models": args.models,
            "pairs": args.pairs,
            "mode": args.mode,
            "lexicon": args.lexicon or "bundled",
            "schema_hash": schema.content_hash(),
        },
    )
    undefined = sum(1 for r in rows if r["label"] == "Undefined")
    _emit(
        args,
        {"out": str(out), "predicted": len(rows), "undefined": undefined},
        f"predicted {len(rows)} pairs ({undefined} Undefined) -> {out}",
    )
    return 0


# ---------------------------------------------------------------- evaluate


def _load_predictions(path: str) -> dict:
    preds = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            name = obj["label"]
            if name == "Undefined":
                from .taxonomy import InvalidReason

                label = Undefined(InvalidReason(obj.get("reject_reason", "A")))
            else:
                from .taxonomy import class_from_name

                label = class_from_name(name)
            preds[obj["pair_id"]] = label
    return preds


def cmd_evaluate(args) -> int:
    if args.labels:
        records = load_label_records(args.labels)
        matrix = ReliabilityMatrix.from_records(records, args.unsure_as_category)
        vote = majority_vote(records)
        try:
            alpha = krippendorff_alpha(matrix)
            alpha_text = f"Krippendorff's alpha: {alpha:.6f}"
        except AgreementError as exc:
            alpha = None
            alpha_text = f"Krippendorff's alpha: undefined ({exc})"
        payload = {
            "alpha": alpha,
            "resolved": len(vote.resolved),
            "excluded": {k: v.value for k, v in sorted(vote.excluded.items())},
        }
        text = (
            f"{alpha_text}\n"
            f"resolved pairs: {len(vote.resolved)}\n"
            f"excluded pairs: {len(vote.excluded)}"
        )
        _emit(args, payload, text)
        return 0
    if not args.pred or not args.truth:
        raise CliError("evaluate needs --pred and --truth, or --labels")
    preds = _load_predictions(args.pred)
    truth_pairs = load_pairs(args.truth)
    truth = {p.id: p.auto_class for p in truth_pairs}
    report = classification_report(preds, truth)
    _emit(args, report.to_json(), render_report(report))
    return 0


# ------------------------------------------------------------- consistency


def cmd_consistency(args) -> int:
    expected = None
    if args.expected:
        expected = json.loads(Path(args.expected).read_text(encoding="utf-8"))
    report = audit_corpus_file(args.manifest, expected_metrics=expected)
    _emit(args, report.to_json(), render_consistency(report))
    return 0 if report.ok else 1


# ---------------------------------------------------------- annotate-serve


def cmd_annotate_serve(args) -> int:
    import os

    import uvicorn

    from .service import create_app, open_session

    addr = args.addr or os.environ.get("FORGE_ADDR", "127.0.0.1:8765")
    media_root = args.media_root or os.environ.get("FORGE_MEDIA_ROOT")
    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        raise CliError(f"invalid --addr {addr!r}; expected host:port")
    store = open_session(
        corpus_path=args.corpus,
        annotators=[a for a in args.annotators.split(",") if a],
        log_path=args.log,
        session_seed=args.session_seed,
    )
    app = create_app(
        store,
        media_root=media_root,
        ui_dir=args.ui,
        unsure_as_category=args.unsure_as_category,
    )
    print(f"serving {len(store.pairs)} pairs for {len(store.annotators)} annotators on {addr}")
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return 0


# -------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge",
        description="Synthesize, predict, and evaluate semantic image-text relations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("taxonomy", help="enumerate the metric space and its classes")
    p.add_argument("--enumerate", action="store_true", help="list all 18 combinations")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_taxonomy)

    p = sub.add_parser("build", help="synthesize a labeled corpus from source manifests")
    p.add_argument("--config", help="JSON config with paths and per-class targets")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory (default: corpus)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("augment", help="derive antonym-substituted negatives")
    p.add_argument("--pairs", help="input corpus manifest")
    p.add_argument("--out", help="output manifest of derived negatives")
    p.add_argument("--lexicon", help="TSV lexicon (default: bundled)")
    p.add_argument("--fraction", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--text", help="transform a single text and exit")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train", help="train metric/class heads on a corpus")
    p.add_argument("--config")
    p.add_argument("--corpus")
    p.add_argument("--heads", help="comma list of classic,cmi,sc,stat or 'all'")
    p.add_argument("--out", help="model output directory (default: models)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--hidden-dim", dest="hidden_dim", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--holdout", type=float, help="fraction of pairs held out to holdout.jsonl")
    p.add_argument("--class-weighting", dest="class_weighting", action="store_true", default=None)
    p.add_argument("--backend", choices=["native", "python"])
    p.add_argument("--lexicon")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict classes for a pair manifest")
    p.add_argument("--models", required=True, help="directory with *.model.json")
    p.add_argument("--pairs", required=True)
    p.add_argument("--mode", required=True, choices=["classic", "cascade"])
    p.add_argument("--out", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions, or analyze annotation labels")
    p.add_argument("--pred", help="predictions JSONL from `forge predict`")
    p.add_argument("--truth", help="corpus manifest with auto labels as ground truth")
    p.add_argument("--labels", help="label records JSONL (agreement/majority mode)")
    p.add_argument(
        "--no-unsure-as-category",
        dest="unsure_as_category",
        action="store_false",
        help="treat Unsure as missing instead of as its own category",
    )
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("consistency", help="audit a corpus manifest's label distribution")
    p.add_argument("--manifest", required=True)
    p.add_argument("--expected", help="JSON file of expected per-metric counts")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_consistency)

    p = sub.add_parser("annotate-serve", help="run the annotation HTTP service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--log", required=True, help="append-only label log (JSONL)")
    p.add_argument("--annotators", required=True, help="comma-separated annotator ids")
    p.add_argument("--addr", help="host:port (default: env FORGE_ADDR or 127.0.0.1:8765)")
    p.add_argument("--media-root", dest="media_root", help="directory for /media (env FORGE_MEDIA_ROOT)")
    p.add_argument("--ui", help="directory with a built UI bundle to serve at /")
    p.add_argument("--session-seed", dest="session_seed", type=int, default=0)
    p.add_argument(
        "--no-unsure-as-category",
        dest="unsure_as_category",
        action="store_false",
    )
    p.set_defaults(func=cmd_annotate_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ManifestError, corpus_mod.CorpusError, augment_mod.LexiconError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
