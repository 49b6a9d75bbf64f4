"""Stratified annotation batches and retention-threshold selection over
ranked retrieval results."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

HAZARD_CLUSTERS = (
    "Meteorological and Hydrological",
    "Extraterrestrial",
    "Geological",
    "Environmental",
    "Chemical",
    "Biological",
    "Technological",
    "Societal",
)

LABELS = ("in_domain", "out_of_domain")


class LabelImportError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    index: int  # 1-based
    rank_range: tuple  # (lo, hi) inclusive
    member_ids: tuple

    def __len__(self):
        return len(self.member_ids)


@dataclass(frozen=True)
class DomainLabel:
    segment_id: str
    label: str
    annotator: str = ""
    rationale_tag: str | None = None
    timestamp: str = ""

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        if self.rationale_tag is not None:
            if self.label != "in_domain":
                raise ValueError("hazard tag only valid for in_domain labels")
            if self.rationale_tag not in HAZARD_CLUSTERS:
                raise ValueError(f"unknown hazard cluster {self.rationale_tag!r}")

    def to_dict(self) -> dict:
        d = {"segment_id": self.segment_id, "label": self.label,
             "annotator": self.annotator}
        if self.rationale_tag:
            d["hazard_tag"] = self.rationale_tag
        if self.timestamp:
            d["timestamp"] = self.timestamp
        return d


@dataclass(frozen=True)
class AnnotationItem:
    segment_id: str
    partition: int
    source_text: str = ""
    target_text: str = ""


@dataclass(frozen=True)
class AnnotationBatch:
    items: tuple
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))

    def ids(self):
        return [it.segment_id for it in self.items]

    def save(self, path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write(json.dumps({"seed": self.seed}) + "\n")
            for it in self.items:
                fh.write(json.dumps({
                    "segment_id": it.segment_id, "partition": it.partition,
                    "src": it.source_text, "tgt": it.target_text,
                }, ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path) -> "AnnotationBatch":
        items = []
        seed = 0
        with Path(path).open(encoding="utf-8") as fh:
            for i, line in enumerate(fh):
                if not line.strip():
                    continue
                d = json.loads(line)
                if i == 0 and "seed" in d and "segment_id" not in d:
                    seed = d["seed"]
                    continue
                items.append(AnnotationItem(
                    segment_id=d["segment_id"], partition=d["partition"],
                    source_text=d.get("src", ""), target_text=d.get("tgt", "")))
        return cls(items=tuple(items), seed=seed)


@dataclass(frozen=True)
class ThresholdDecision:
    cut_partition: int | None  # first partition where out > in; None if never
    retained_rank_max: int
    per_partition_stats: tuple  # (index, n_in, n_out, proportion_in)
    retained_ids: tuple

    def to_dict(self) -> dict:
        return {
            "cut_partition": self.cut_partition,
            "retained_rank_max": self.retained_rank_max,
            "per_partition_stats": [
                {"index": i, "n_in": a, "n_out": b, "proportion_in": p}
                for i, a, b, p in self.per_partition_stats
            ],
            "retained_count": len(self.retained_ids),
            "retained_ids": list(self.retained_ids),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n",
                              encoding="utf-8")


def make_partitions(ranked, num_partitions: int) -> list:
    """Contiguous near-equal partitions tiling ranks 1..len(ranked)."""
    n = len(ranked)
    if num_partitions < 1 or num_partitions > n:
        raise ValueError(f"num_partitions must be in [1, {n}], got {num_partitions}")
    base, extra = divmod(n, num_partitions)
    partitions = []
    lo = 1
    pos = 0
    for idx in range(1, num_partitions + 1):
        size = base + (1 if idx <= extra else 0)
        members = tuple(rc.segment_id for rc in ranked[pos:pos + size])
        partitions.append(Partition(index=idx, rank_range=(lo, lo + size - 1),
                                    member_ids=members))
        pos += size
        lo += size
    return partitions


def sample_for_annotation(partitions, per_partition: int, seed: int = 0,
                          texts: dict | None = None) -> AnnotationBatch:
    """Seeded uniform sample without replacement from each partition."""
    rng = np.random.default_rng(seed)
    items = []
    for part in partitions:
        if per_partition > len(part):
            raise ValueError(
                f"cannot sample {per_partition} from partition {part.index} "
                f"of size {len(part)}"
            )
        picks = rng.choice(len(part), size=per_partition, replace=False)
        for i in sorted(int(p) for p in picks):
            seg_id = part.member_ids[i]
            src, tgt = (texts or {}).get(seg_id, ("", ""))
            items.append(AnnotationItem(segment_id=seg_id, partition=part.index,
                                        source_text=src, target_text=tgt))
    return AnnotationBatch(items=tuple(items), seed=seed)


def _parse_label_row(row: dict, lineno, batch_ids) -> DomainLabel:
    seg_id = row.get("segment_id")
    if not seg_id:
        raise LabelImportError(f"line {lineno}: missing segment_id")
    if seg_id not in batch_ids:
        raise LabelImportError(f"line {lineno}: id {seg_id!r} not in annotation batch")
    try:
        return DomainLabel(
            segment_id=seg_id,
            label=row.get("label", ""),
            annotator=row.get("annotator", "") or "",
            rationale_tag=row.get("hazard_tag") or None,
            timestamp=row.get("timestamp", "") or "",
        )
    except ValueError as exc:
        raise LabelImportError(f"line {lineno}: {exc}")


def import_labels(batch: AnnotationBatch, labels_file) -> list:
    """Read CSV or JSONL labels; rejects unknown ids/labels and duplicate
    (id, annotator) rows."""
    path = Path(labels_file)
    batch_ids = set(batch.ids())
    labels = []
    seen = set()
    if path.suffix == ".csv":
        with path.open(encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        entries = [(i + 2, row) for i, row in enumerate(rows)]  # header is line 1
    else:
        entries = []
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if line.strip():
                    entries.append((lineno, json.loads(line)))
    for lineno, row in entries:
        label = _parse_label_row(row, lineno, batch_ids)
        key = (label.segment_id, label.annotator)
        if key in seen:
            raise LabelImportError(
                f"line {lineno}: duplicate label for {key[0]!r} by {key[1]!r}")
        seen.add(key)
        labels.append(label)
    return labels


def adjudicate(labels) -> dict:
    """Majority vote per segment id; ties resolve to in_domain (soft
    domain boundary)."""
    votes = {}
    for lab in labels:
        votes.setdefault(lab.segment_id, []).append(lab.label)
    out = {}
    for seg_id, vs in votes.items():
        n_in = vs.count("in_domain")
        n_out = vs.count("out_of_domain")
        out[seg_id] = "in_domain" if n_in >= n_out else "out_of_domain"
    return out


def select_threshold(partitions, labels, retain_top: int | None = None) -> ThresholdDecision:
    """Cut at the first partition where out-of-domain labels outnumber
    in-domain ones; everything in strictly earlier partitions is retained.

    ``retain_top`` overrides the partition-boundary cut with an explicit
    rank bound (retained set becomes all members with rank <= retain_top).
    """
    verdicts = adjudicate(labels)
    stats = []
    cut = None
    for part in partitions:
        member_set = set(part.member_ids)
        part_verdicts = [v for sid, v in verdicts.items() if sid in member_set]
        if not part_verdicts:
            raise ValueError(f"partition {part.index} has no labeled samples")
        n_in = part_verdicts.count("in_domain")
        n_out = part_verdicts.count("out_of_domain")
        stats.append((part.index, n_in, n_out, n_in / (n_in + n_out)))
        if cut is None and n_out > n_in:
            cut = part.index

    if retain_top is not None:
        rank_max = retain_top
    elif cut is None:
        rank_max = partitions[-1].rank_range[1]
    else:
        rank_max = partitions[cut - 1].rank_range[0] - 1  # end of previous partition

    retained = []
    for part in partitions:
        lo, hi = part.rank_range
        if hi <= rank_max:
            retained.extend(part.member_ids)
        elif lo <= rank_max:
            retained.extend(part.member_ids[:rank_max - lo + 1])
    return ThresholdDecision(cut_partition=cut, retained_rank_max=rank_max,
                             per_partition_stats=tuple(stats),
                             retained_ids=tuple(retained))


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()
