"""Annotation backend: serves blind pairs to annotators over HTTP, records
labels in an append-only log, and reports live agreement.

The JSONL label log is the single source of truth; restarting the process
replays it, so the effective-label map always equals what the log implies.
"""

from __future__ import annotations

import json
import os
import random
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .corpus import mix_seed
from .evaluation import (
    AgreementError,
    LabelRecord,
    ReliabilityMatrix,
    krippendorff_alpha,
    majority_vote,
    parse_annotator_label,
)
from .manifest import ImageTextPair, dump_json_line, load_pairs

FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>Annotation service</title></head>
<body><h1>Annotation service is running</h1>
<p>No UI bundle is configured. Point <code>--ui</code> at a built frontend
directory, or use the JSON API under <code>/api/</code>.</p></body></html>
"""


class ServiceError(ValueError):
    """Client error surfaced as {ok: false, error: ...}."""

    def __init__(self, message: str, status: int = 400):
        super().__init__(message)
        self.status = status


@dataclass
class AnnotationStore:
    """Session state: corpus, annotator cursors, and the label log."""

    pairs: list[ImageTextPair]
    annotators: tuple[str, ...]
    log_path: Path
    session_seed: int = 0
    _records: list[LabelRecord] = field(default_factory=list)
    _effective: dict[tuple[str, str], LabelRecord] = field(default_factory=dict)
    _orders: dict[str, list[int]] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self) -> None:
        ids = [p.id for p in self.pairs]
        if len(set(ids)) != len(ids):
            raise ValueError("corpus contains duplicate pair ids")
        self._by_id = {p.id: p for p in self.pairs}
        for annotator in self.annotators:
            order = list(range(len(self.pairs)))
            random.Random(mix_seed(self.session_seed, "serve-order", annotator)).shuffle(order)
            self._orders[annotator] = order
        self.log_path = Path(self.log_path)
        if self.log_path.exists():
            for rec in _read_log(self.log_path):
                self._apply(rec)

    def _apply(self, rec: LabelRecord) -> None:
        self._records.append(rec)
        self._effective[(rec.pair_id, rec.annotator_id)] = rec

    def _check_annotator(self, annotator: str) -> None:
        if annotator not in self._orders:
            raise ServiceError(
                f"unknown annotator {annotator!r}; registered: "
                + ", ".join(self.annotators),
                status=404,
            )

    def next_pair(self, annotator: str) -> ImageTextPair | None:
        """First unlabeled pair in this annotator's shuffled order.

        Idempotent: asking again without submitting returns the same pair.
        ``None`` means the annotator is done.
        """
        self._check_annotator(annotator)
        with self._lock:
            for idx in self._orders[annotator]:
                pair = self.pairs[idx]
                if (pair.id, annotator) not in self._effective:
                    return pair
        return None

    def submit_label(self, annotator: str, pair_id: str, label_name: str) -> LabelRecord:
        """Append one label event; resubmission overwrites the effective label."""
        self._check_annotator(annotator)
        if pair_id not in self._by_id:
            raise ServiceError(f"unknown pair {pair_id!r}", status=404)
        try:
            label = parse_annotator_label(label_name)
        except ValueError as exc:
            raise ServiceError(str(exc)) from None
        rec = LabelRecord(
            pair_id=pair_id,
            annotator_id=annotator,
            label=label,
            timestamp=datetime.now(timezone.utc).isoformat(),
        )
        with self._lock:
            with self.log_path.open("a", encoding="utf-8") as fh:
                fh.write(dump_json_line(rec.to_json()) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._apply(rec)
        return rec

    def effective_records(self) -> list[LabelRecord]:
        """Latest label per (pair, annotator), in corpus-then-annotator order."""
        with self._lock:
            eff = dict(self._effective)
        out = []
        for pair in self.pairs:
            for annotator in self.annotators:
                rec = eff.get((pair.id, annotator))
                if rec is not None:
                    out.append(rec)
        return out

    def progress(self) -> dict:
        with self._lock:
            counts = {a: 0 for a in self.annotators}
            for (_pid, annotator) in self._effective:
                counts[annotator] += 1
        return {
            "total_pairs": len(self.pairs),
            "annotators": counts,
            "log_events": len(self._records),
        }

    def agreement_snapshot(self, unsure_as_category: bool = True) -> dict:
        """Live alpha over pairs with two or more effective labels.

        Returns an insufficient-data marker instead of raising when the
        session cannot support the computation yet.
        """
        records = self.effective_records()
        matrix = ReliabilityMatrix.from_records(records, unsure_as_category)
        votes = {
            pid: {a: str(v) for a, v in sorted(ratings.items())}
            for pid, ratings in sorted(matrix.units.items())
        }
        try:
            alpha = krippendorff_alpha(matrix)
            return {"alpha": alpha, "insufficient_data": False, "votes": votes}
        except AgreementError as exc:
            return {
                "alpha": None,
                "insufficient_data": True,
                "reason": str(exc),
                "votes": votes,
            }

    def export(self) -> dict:
        """Raw effective records plus the majority-vote resolution."""
        records = self.effective_records()
        vote = majority_vote(records)
        return {
            "records": [r.to_json() for r in records],
            "resolved": {k: v.value for k, v in sorted(vote.resolved.items())},
            "excluded": {k: v.value for k, v in sorted(vote.excluded.items())},
        }

    def export_text(self) -> str:
        """Canonical JSONL export of the effective records."""
        return "".join(
            dump_json_line(r.to_json()) + "\n" for r in self.effective_records()
        )


def _read_log(path: Path) -> list[LabelRecord]:
    records = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(LabelRecord.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: corrupt log record ({exc})") from None
    return records


def _pair_payload(pair: ImageTextPair) -> dict:
    """What an annotator may see: id, image, text. Never the auto labels."""
    if pair.image_ref.startswith(("http://", "https://")):
        image_url = pair.image_ref
    else:
        image_url = "/media/" + pair.image_ref
    return {"id": pair.id, "image_url": image_url, "text": pair.text}


def _ok(data) -> JSONResponse:
    return JSONResponse({"ok": True, "data": data})


def _err(message: str, status: int = 400) -> JSONResponse:
    return JSONResponse({"ok": False, "error": message}, status_code=status)


def create_app(
    store: AnnotationStore,
    media_root: str | Path | None = None,
    ui_dir: str | Path | None = None,
    unsure_as_category: bool = True,
) -> FastAPI:
    app = FastAPI(title="itforge annotation service")
    media_root = Path(media_root).resolve() if media_root else None
    ui_dir = Path(ui_dir) if ui_dir else None

    @app.exception_handler(ServiceError)
    async def _service_error(_request, exc: ServiceError):
        return _err(str(exc), exc.status)

    @app.get("/api/pairs/next")
    def next_pair(annotator: str = ""):
        if not annotator:
            raise ServiceError("missing 'annotator' query parameter")
        pair = store.next_pair(annotator)
        if pair is None:
            return _ok({"done": True})
        return _ok({"done": False, "pair": _pair_payload(pair)})

    @app.post("/api/labels")
    async def submit_label(body: dict):
        for key in ("pair_id", "annotator", "label"):
            if key not in body:
                raise ServiceError(f"missing field {key!r}")
        rec = store.submit_label(body["annotator"], body["pair_id"], body["label"])
        return _ok({"recorded": rec.to_json(), "progress": store.progress()})

    @app.get("/api/progress")
    def progress():
        return _ok(store.progress())

    @app.get("/api/agreement")
    def agreement():
        return _ok(store.agreement_snapshot(unsure_as_category))

    @app.get("/api/export")
    def export():
        return _ok(store.export())

    @app.get("/media/{path:path}")
    def media(path: str):
        if media_root is None:
            raise ServiceError("no media root configured", status=404)
        target = (media_root / path).resolve()
        if not str(target).startswith(str(media_root) + os.sep) and target != media_root:
            raise ServiceError("path escapes media root", status=403)
        if not target.is_file():
            raise ServiceError(f"no such media file: {path}", status=404)
        return FileResponse(target)

    if ui_dir is not None and (ui_dir / "index.html").is_file():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:

        @app.get("/")
        def index():
            return HTMLResponse(FALLBACK_PAGE)

    return app


def open_session(
    corpus_path: str | Path,
    annotators: list[str],
    log_path: str | Path,
    session_seed: int = 0,
) -> AnnotationStore:
    pairs = load_pairs(corpus_path)
    if not annotators:
        raise ValueError("at least one annotator id is required")
    return AnnotationStore(
        pairs=pairs,
        annotators=tuple(annotators),
        log_path=Path(log_path),
        session_seed=session_seed,
    )
