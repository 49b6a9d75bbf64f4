"""Core corpus data types and JSONL/TSV file I/O."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path


class CorpusFormatError(ValueError):
    """Raised for malformed corpus files (carries the offending line number)."""


@dataclass(frozen=True)
class Segment:
    """One parallel sentence pair."""

    id: str
    source_text: str
    target_text: str
    source_corpus: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.source_text.strip() or not self.target_text.strip():
            raise ValueError(f"segment {self.id!r}: empty source or target text")


@dataclass(frozen=True)
class Corpus:
    name: str
    segments: tuple
    language_pair: tuple = ("it", "en")

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        ids = [s.id for s in self.segments]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate segment ids: {dupes[:5]}")

    def __len__(self):
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    def replace_segments(self, segments) -> "Corpus":
        return Corpus(self.name, tuple(segments), self.language_pair)


@dataclass(frozen=True)
class PipelineManifest:
    stage_name: str
    input_count: int
    output_count: int
    parameters: dict
    content_digest: str

    def to_dict(self) -> dict:
        return {
            "stage_name": self.stage_name,
            "input_count": self.input_count,
            "output_count": self.output_count,
            "parameters": {k: str(v) for k, v in self.parameters.items()},
            "content_digest": self.content_digest,
        }

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def read(cls, path) -> "PipelineManifest":
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            stage_name=d["stage_name"],
            input_count=d["input_count"],
            output_count=d["output_count"],
            parameters=d["parameters"],
            content_digest=d["content_digest"],
        )


def _segment_to_json(seg: Segment) -> dict:
    return {
        "id": seg.id,
        "src": seg.source_text,
        "tgt": seg.target_text,
        "corpus": seg.source_corpus,
        "meta": seg.meta,
    }


def read_corpus(path, format: str = "jsonl", name: str | None = None,
                language_pair=("it", "en")) -> Corpus:
    """Read a corpus file, preserving input order.

    Segments without an explicit id get ``<name>:<line>`` (1-based).
    """
    path = Path(path)
    if name is None:
        name = path.stem
    segments = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if format == "jsonl":
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusFormatError(f"{path}:{lineno}: invalid JSON ({exc})")
                if "src" not in obj or "tgt" not in obj:
                    missing = [k for k in ("src", "tgt") if k not in obj]
                    raise CorpusFormatError(f"{path}:{lineno}: missing field(s) {missing}")
                seg_id = obj.get("id") or f"{name}:{lineno}"
                try:
                    seg = Segment(
                        id=seg_id,
                        source_text=obj["src"],
                        target_text=obj["tgt"],
                        source_corpus=obj.get("corpus", name),
                        meta=obj.get("meta", {}),
                    )
                except (ValueError, TypeError) as exc:
                    raise CorpusFormatError(f"{path}:{lineno}: {exc}")
            elif format == "tsv":
                cols = line.split("\t")
                if len(cols) < 2:
                    raise CorpusFormatError(
                        f"{path}:{lineno}: expected >=2 tab-separated columns, got {len(cols)}"
                    )
                seg_id = cols[2] if len(cols) >= 3 and cols[2].strip() else f"{name}:{lineno}"
                try:
                    seg = Segment(
                        id=seg_id,
                        source_text=cols[0],
                        target_text=cols[1],
                        source_corpus=name,
                        meta={"line": str(lineno)},
                    )
                except (ValueError, TypeError) as exc:
                    raise CorpusFormatError(f"{path}:{lineno}: {exc}")
            else:
                raise ValueError(f"unknown corpus format: {format!r}")
            segments.append(seg)
    try:
        return Corpus(name=name, segments=tuple(segments), language_pair=tuple(language_pair))
    except ValueError as exc:
        raise CorpusFormatError(f"{path}: {exc}")


def serialize_corpus(corpus: Corpus, format: str = "jsonl") -> bytes:
    lines = []
    for seg in corpus.segments:
        if format == "jsonl":
            lines.append(json.dumps(_segment_to_json(seg), ensure_ascii=False))
        elif format == "tsv":
            for text in (seg.source_text, seg.target_text):
                if "\t" in text or "\n" in text:
                    raise ValueError(
                        f"segment {seg.id!r} contains tab/newline; use jsonl format"
                    )
            lines.append(f"{seg.source_text}\t{seg.target_text}\t{seg.id}")
        else:
            raise ValueError(f"unknown corpus format: {format!r}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def content_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_corpus(corpus: Corpus, path, format: str = "jsonl",
                 stage_name: str = "write_corpus",
                 parameters: dict | None = None,
                 input_count: int | None = None) -> PipelineManifest:
    """Write a corpus and return a manifest with a digest of the bytes written."""
    if len(corpus) == 0:
        raise ValueError("refusing to write empty corpus")
    data = serialize_corpus(corpus, format)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)
    return PipelineManifest(
        stage_name=stage_name,
        input_count=len(corpus) if input_count is None else input_count,
        output_count=len(corpus),
        parameters=dict(parameters or {"format": format}),
        content_digest=content_digest(data),
    )
