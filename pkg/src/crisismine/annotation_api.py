"""HTTP API backing the annotation UI: label queue, append-only journal,
progress and export endpoints."""

from __future__ import annotations

import json
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from crisismine.evaluation import (AnnotationFormatError, MqmAnnotation,
                                   mqm_segment_score)
from crisismine.thresholding import AnnotationBatch, DomainLabel, now_iso


class LabelSubmission(BaseModel):
    segment_id: str
    label: str
    annotator: str
    hazard_tag: str | None = None


class MqmErrorIn(BaseModel):
    category: str
    subtype: str | None = None
    severity: str
    span: tuple[int, int] | None = None


class MqmScoreRequest(BaseModel):
    errors: list[MqmErrorIn]


class EvaluationSubmission(BaseModel):
    segment_id: str
    system: str = ""
    annotator: str = ""
    da_score: float
    errors: list[MqmErrorIn] = []


class LabelStore:
    """Append-only JSONL journal of domain labels; state is a replay."""

    def __init__(self, journal_path):
        self.path = Path(journal_path)
        self.lock = threading.Lock()
        self.labels = {}  # (segment_id, annotator) -> DomainLabel
        if self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        d = json.loads(line)
                        lab = DomainLabel(
                            segment_id=d["segment_id"], label=d["label"],
                            annotator=d.get("annotator", ""),
                            rationale_tag=d.get("hazard_tag") or None,
                            timestamp=d.get("timestamp", ""))
                        self.labels[(lab.segment_id, lab.annotator)] = lab

    def add(self, label: DomainLabel):
        key = (label.segment_id, label.annotator)
        with self.lock:
            if key in self.labels:
                return self.labels[key]
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(label.to_dict(), ensure_ascii=False) + "\n")
            self.labels[key] = label
            return None

    def sorted_labels(self):
        return [self.labels[k] for k in sorted(self.labels)]


def create_app(batch: AnnotationBatch, journal_path,
               eval_journal_path=None) -> FastAPI:
    app = FastAPI(title="crisismine annotation API")
    store = LabelStore(journal_path)
    eval_path = Path(eval_journal_path) if eval_journal_path else None
    eval_lock = threading.Lock()
    items_by_id = {it.segment_id: it for it in batch.items}

    @app.get("/items")
    def list_items(annotator: str = ""):
        done = {sid for (sid, ann) in store.labels if ann == annotator}
        return [
            {"segment_id": it.segment_id, "partition": it.partition,
             "src": it.source_text, "tgt": it.target_text}
            for it in batch.items if it.segment_id not in done
        ]

    @app.post("/labels", status_code=201)
    def submit_label(sub: LabelSubmission):
        if sub.segment_id not in items_by_id:
            raise HTTPException(404, f"unknown segment id {sub.segment_id!r}")
        try:
            label = DomainLabel(segment_id=sub.segment_id, label=sub.label,
                                annotator=sub.annotator,
                                rationale_tag=sub.hazard_tag or None,
                                timestamp=now_iso())
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        existing = store.add(label)
        if existing is not None:
            raise HTTPException(409, detail={
                "error": "already labeled",
                "existing": existing.to_dict(),
            })
        return {"status": "ok"}

    @app.get("/progress")
    def progress():
        per_annotator = {}
        for (_, ann) in store.labels:
            per_annotator[ann] = per_annotator.get(ann, 0) + 1
        return {
            "total_items": len(batch.items),
            "labeled": len({sid for (sid, _) in store.labels}),
            "per_annotator": per_annotator,
        }

    @app.get("/export")
    def export(format: str = "jsonl"):
        labels = store.sorted_labels()
        if format == "csv":
            lines = ["segment_id,label,annotator,hazard_tag"]
            lines += [f"{l.segment_id},{l.label},{l.annotator},{l.rationale_tag or ''}"
                      for l in labels]
            return PlainTextResponse("\n".join(lines) + "\n", media_type="text/csv")
        body = "\n".join(json.dumps(l.to_dict(), ensure_ascii=False) for l in labels)
        return PlainTextResponse(body + ("\n" if body else ""),
                                 media_type="application/x-ndjson")

    @app.post("/mqm/score")
    def mqm_score(req: MqmScoreRequest):
        try:
            anns = [MqmAnnotation(segment_id="", category=e.category,
                                  subtype=e.subtype, severity=e.severity,
                                  span=e.span)
                    for e in req.errors]
        except AnnotationFormatError as exc:
            raise HTTPException(422, str(exc))
        return {"score": mqm_segment_score(anns)}

    @app.post("/evaluations", status_code=201)
    def submit_evaluation(sub: EvaluationSubmission):
        try:
            anns = [MqmAnnotation(segment_id=sub.segment_id, category=e.category,
                                  subtype=e.subtype, severity=e.severity,
                                  annotator=sub.annotator, span=e.span)
                    for e in sub.errors]
        except AnnotationFormatError as exc:
            raise HTTPException(422, str(exc))
        if not 0.0 <= sub.da_score <= 100.0:
            raise HTTPException(422, "DA score must be in [0, 100]")
        record = {
            "segment_id": sub.segment_id, "system": sub.system,
            "annotator": sub.annotator, "da_score": sub.da_score,
            "errors": [
                {"category": a.category, "subtype": a.subtype,
                 "severity": a.severity, "span": list(a.span) if a.span else None}
                for a in anns
            ],
            "timestamp": now_iso(),
        }
        if eval_path is not None:
            with eval_lock:
                eval_path.parent.mkdir(parents=True, exist_ok=True)
                with eval_path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        return {"status": "ok", "mqm_weighted": mqm_segment_score(anns)}

    @app.get("/taxonomy")
    def taxonomy():
        from crisismine.evaluation import MQM_TAXONOMY, SEVERITY_WEIGHTS
        from crisismine.thresholding import HAZARD_CLUSTERS
        return {
            "mqm": {c: sorted(s) for c, s in MQM_TAXONOMY.items()},
            "severities": SEVERITY_WEIGHTS,
            "hazard_clusters": list(HAZARD_CLUSTERS),
        }

    app.state.store = store
    return app


def serve_annotation_api(batch: AnnotationBatch, journal_path,
                         host: str = "127.0.0.1", port: int = 8710,
                         eval_journal_path=None, static_dir=None):
    """Run the annotation service (blocking)."""
    import uvicorn
    from fastapi.staticfiles import StaticFiles

    app = create_app(batch, journal_path, eval_journal_path)
    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port, log_level="warning")
