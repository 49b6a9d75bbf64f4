"""Training-dataset construction: paragraph-level SFT examples and
readability-gated DPO preference pairs."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from crisismine.corpus import Corpus, PipelineManifest, content_digest
from crisismine.embeddings import EmbeddingMatrix, unit_rows
from crisismine.readability import readability_report

SIMPLIFICATION_PROMPT = """You are a text simplification AI.
Your task is to simplify the following input to A2 CEFR level. Use only common, everyday words that are appropriate for the context.
Choose words that native speakers would naturally use.
Explain essential terms if those can't be simplified and
maintain the content as in the original.

Input: {text}

Answer just with the simplification
and nothing else. Keep the original tone."""

TRANSLATION_INSTRUCTION = "Translate the following Italian text into simple English:"


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ParagraphExample:
    id: str
    source_paragraph: str
    target_paragraph: str
    member_ids: tuple
    granularity: str  # "sentence" | "paragraph"


@dataclass(frozen=True)
class GateConfig:
    min_fre_gain: float = 5.0
    min_fre: float = 50.0
    min_adequacy: float = 0.5
    required_keywords: tuple = ("evacuate", "avoid", "emergency", "danger")


@dataclass(frozen=True)
class GateReport:
    passed: bool
    reasons: tuple
    original_fre: float
    simplified_fre: float
    adequacy: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed, "reasons": list(self.reasons),
            "original_fre": self.original_fre,
            "simplified_fre": self.simplified_fre, "adequacy": self.adequacy,
        }


@dataclass(frozen=True)
class PreferencePair:
    id: str
    prompt: str
    chosen: str
    rejected: str
    gate_report: GateReport

    def __post_init__(self):
        if self.chosen == self.rejected:
            raise ValueError("chosen and rejected must differ")


@dataclass(frozen=True)
class SimplificationRequest:
    text: str
    prompt_template: str = SIMPLIFICATION_PROMPT
    model_name: str = "gpt-5-mini"
    params: dict = field(default_factory=dict)

    def render(self) -> str:
        if self.prompt_template.count("{text}") != 1:
            raise ValueError("prompt template must contain {text} exactly once")
        return self.prompt_template.replace("{text}", self.text)


def input_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# paragraph construction

def build_paragraphs(corpus: Corpus, embeddings: EmbeddingMatrix,
                     segments_per_paragraph: int = 10, seed: int = 0,
                     min_size: int = 3, max_size: int = 6) -> list:
    """Greedy similarity grouping into 3-6 sentence paragraphs, roughly one
    paragraph per ``segments_per_paragraph`` input segments; leftovers are
    emitted as sentence-level examples. Output partitions the corpus."""
    segs = list(corpus)
    if not segs:
        return []
    if tuple(embeddings.ids) != tuple(s.id for s in segs):
        raise ValueError("embeddings not aligned with corpus")
    vectors = unit_rows(embeddings.vectors).astype(np.float64)
    rng = np.random.default_rng(seed)
    n = len(segs)
    num_paragraphs = round(n / segments_per_paragraph)

    unused = list(range(n))
    seed_order = list(rng.permutation(n))
    examples = []
    for p in range(num_paragraphs):
        if len(unused) < min_size:
            break
        while seed_order and seed_order[0] not in unused:
            seed_order.pop(0)
        if not seed_order:
            break
        first = seed_order.pop(0)
        unused.remove(first)
        members = [first]
        target_size = int(rng.integers(min_size, max_size + 1))
        centroid = vectors[first].copy()
        while len(members) < target_size and unused:
            sims = vectors[unused] @ (centroid / np.linalg.norm(centroid))
            pick_pos = int(np.argmax(sims))
            pick = unused.pop(pick_pos)
            members.append(pick)
            centroid += vectors[pick]
        members.sort()  # corpus order inside the paragraph
        examples.append(ParagraphExample(
            id=f"para:{p + 1}",
            source_paragraph=" ".join(segs[i].source_text for i in members),
            target_paragraph=" ".join(segs[i].target_text for i in members),
            member_ids=tuple(segs[i].id for i in members),
            granularity="paragraph",
        ))
    for i in unused:
        examples.append(ParagraphExample(
            id=f"sent:{segs[i].id}",
            source_paragraph=segs[i].source_text,
            target_paragraph=segs[i].target_text,
            member_ids=(segs[i].id,),
            granularity="sentence",
        ))
    return examples


# ---------------------------------------------------------------------------
# simplification clients

class OfflineSimplificationTable:
    """Pre-generated simplifications keyed by sha256 of the input text.

    File format: JSONL with {"input_digest", "simplified"}.
    """

    def __init__(self, path):
        self.table = {}
        with Path(path).open(encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    d = json.loads(line)
                    self.table[d["input_digest"]] = d["simplified"]

    def complete(self, request: SimplificationRequest) -> str:
        key = input_digest(request.text)
        if key not in self.table:
            raise GenerationError(f"no offline simplification for digest {key[:12]}...")
        return self.table[key]


class HttpLlmClient:
    """Chat-completion style HTTP client for live simplification."""

    def __init__(self, endpoint: str, model: str = "gpt-5-mini",
                 timeout: float = 120.0, retries: int = 2, headers=None,
                 archive_path=None, transport=None):
        import httpx

        self.endpoint = endpoint
        self.model = model
        self.retries = retries
        self.archive_path = Path(archive_path) if archive_path else None
        self._client = httpx.Client(timeout=timeout, headers=headers or {},
                                    transport=transport)

    def complete(self, request: SimplificationRequest) -> str:
        payload = {
            "model": request.model_name or self.model,
            "messages": [{"role": "user", "content": request.render()}],
        }
        last_exc = None
        for _ in range(self.retries + 1):
            try:
                resp = self._client.post(self.endpoint, json=payload)
                resp.raise_for_status()
                body = resp.json()
                text = body["choices"][0]["message"]["content"]
                if self.archive_path:
                    with self.archive_path.open("a", encoding="utf-8") as fh:
                        fh.write(json.dumps({"request": payload, "response": body},
                                            ensure_ascii=False) + "\n")
                return text
            except Exception as exc:
                last_exc = exc
        raise GenerationError(
            f"simplification failed for digest {input_digest(request.text)[:12]}: {last_exc}")


def generate_simplification(request: SimplificationRequest, client) -> str:
    return client.complete(request)


# ---------------------------------------------------------------------------
# quality gate

_NUM_TOKEN_RE = re.compile(r"\S*\d\S*")
_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)

_STOPWORDS = {
    "the", "a", "an", "and", "or", "but", "of", "to", "in", "on", "at", "for",
    "with", "by", "from", "is", "are", "was", "were", "be", "been", "it",
    "this", "that", "these", "those", "as", "not", "no", "do", "does", "did",
    "will", "would", "can", "could", "should", "must", "may", "have", "has",
    "had", "you", "your", "we", "our", "they", "their",
}


def _content_words(text: str) -> set:
    return {w.lower() for w in _WORD_RE.findall(text) if w.lower() not in _STOPWORDS}


def quality_gate(original: str, simplified: str,
                 thresholds: GateConfig | None = None) -> GateReport:
    """Readability-gain, readability-floor, adequacy-proxy and
    safety-content checks for one simplification."""
    if not original.strip() or not simplified.strip():
        raise ValueError("gate inputs must be non-empty")
    cfg = thresholds or GateConfig()
    reasons = []

    orig_fre = readability_report(original).fre
    simp_fre = readability_report(simplified).fre
    if simp_fre - orig_fre < cfg.min_fre_gain:
        reasons.append("no readability gain")
    if simp_fre < cfg.min_fre:
        reasons.append("readability below floor")

    orig_words = _content_words(original)
    adequacy = (len(orig_words & _content_words(simplified)) / len(orig_words)
                if orig_words else 1.0)
    if adequacy < cfg.min_adequacy:
        reasons.append("insufficient content overlap")

    simp_lower = simplified.lower()
    missing_numbers = [t for t in _NUM_TOKEN_RE.findall(original)
                       if t.lower() not in simp_lower]
    if missing_numbers:
        reasons.append(f"numbers dropped: {missing_numbers[:5]}")
    missing_kw = [k for k in cfg.required_keywords
                  if k in original.lower() and k not in simp_lower]
    if missing_kw:
        reasons.append(f"safety keywords dropped: {missing_kw}")

    return GateReport(passed=not reasons, reasons=tuple(reasons),
                      original_fre=orig_fre, simplified_fre=simp_fre,
                      adequacy=adequacy)


def external_adequacy_scorer(endpoint: str):
    """Adapter for an external adequacy metric behind HTTP; returns a
    callable (original, simplified) -> score in [0, 1]."""
    import httpx

    client = httpx.Client(timeout=60.0)

    def score(original: str, simplified: str) -> float:
        resp = client.post(endpoint, json={"source": original, "hypothesis": simplified})
        resp.raise_for_status()
        return float(resp.json()["score"])

    return score


# ---------------------------------------------------------------------------
# dataset emission

def build_preference_pairs(translations: Corpus, client,
                           gate: GateConfig | None = None,
                           review_sample: int = 20, seed: int = 0):
    """chosen = gated simplification of the model translation, rejected =
    the translation itself. Returns (pairs, rejections, review_rows)."""
    pairs = []
    rejections = []
    for seg in translations:
        request = SimplificationRequest(text=seg.target_text)
        try:
            simplified = client.complete(request)
        except GenerationError as exc:
            rejections.append({"id": seg.id, "stage": "generation", "reason": str(exc)})
            continue
        report = quality_gate(seg.target_text, simplified, gate)
        if not report.passed:
            rejections.append({"id": seg.id, "stage": "gate",
                               "reason": "; ".join(report.reasons),
                               "gate_report": report.to_dict()})
            continue
        pairs.append(PreferencePair(
            id=seg.id,
            prompt=f"{TRANSLATION_INSTRUCTION}\n{seg.source_text}",
            chosen=simplified,
            rejected=seg.target_text,
            gate_report=report,
        ))
    # stratified human-review sample: evenly spaced across the emitted pairs
    review_rows = []
    if pairs:
        k = min(review_sample, len(pairs))
        idx = np.linspace(0, len(pairs) - 1, k).round().astype(int)
        rng = np.random.default_rng(seed)  # kept for interface stability
        del rng
        review_rows = [pairs[i] for i in sorted(set(int(i) for i in idx))]
    return pairs, rejections, review_rows


def emit_dpo_dataset(pairs, path, rejections=None, rejection_path=None,
                     review_rows=None, review_path=None) -> PipelineManifest:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        json.dumps({"prompt": p.prompt, "chosen": p.chosen, "rejected": p.rejected,
                    "id": p.id, "gate_report": p.gate_report.to_dict()},
                   ensure_ascii=False)
        for p in pairs
    ]
    data = ("\n".join(lines) + "\n").encode("utf-8") if lines else b""
    path.write_bytes(data)
    if rejection_path is not None:
        with Path(rejection_path).open("w", encoding="utf-8") as fh:
            for row in rejections or []:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    if review_path is not None:
        with Path(review_path).open("w", encoding="utf-8") as fh:
            for p in review_rows or []:
                fh.write(json.dumps({"id": p.id, "original": p.rejected,
                                     "simplified": p.chosen}, ensure_ascii=False) + "\n")
    return PipelineManifest(
        stage_name="build_dpo",
        input_count=len(pairs) + len(rejections or []),
        output_count=len(pairs),
        parameters={"rejections": str(len(rejections or []))},
        content_digest=content_digest(data),
    )


def emit_sft_dataset(examples, path) -> PipelineManifest:
    """Instruction-style JSONL records {"prompt", "response"}; deterministic
    ordering (paragraphs first, then sentence examples, by id)."""
    if not examples:
        raise ValueError("no examples to emit")
    ordered = sorted(examples, key=lambda e: (e.granularity != "paragraph", e.id))
    lines = [
        json.dumps({
            "prompt": f"{TRANSLATION_INSTRUCTION}\n{e.source_paragraph}",
            "response": e.target_paragraph,
            "id": e.id,
            "granularity": e.granularity,
            "member_ids": list(e.member_ids),
        }, ensure_ascii=False)
        for e in ordered
    ]
    data = ("\n".join(lines) + "\n").encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return PipelineManifest(
        stage_name="build_sft",
        input_count=sum(len(e.member_ids) for e in examples),
        output_count=len(examples),
        parameters={"paragraphs": str(sum(1 for e in examples
                                          if e.granularity == "paragraph"))},
        content_digest=content_digest(data),
    )
