"""Surface metrics (BLEU, chrF) and human-evaluation analytics (weighted
MQM, DA aggregation, Cohen's kappa, bubble-chart export)."""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

SEVERITY_WEIGHTS = {"trivial": 0, "minor": 1, "major": 5, "critical": 25}

# category -> allowed subtypes; None entries admit annotations without a subtype
MQM_TAXONOMY = {
    "Accuracy": {"Addition", "Mistranslation", "Omission", "Overtranslation",
                 "Undertranslation"},
    "AudienceAppropriateness": {"Offensive"},
    "LinguisticConventions": {"Grammar", "Punctuation"},
    "Style": {"AwkwardStyle", "LanguageRegister"},
    "Terminology": {"WrongTerm"},
    "Fluency": set(),
    "LocaleConventions": set(),
    "Verity": set(),
}


class AnnotationFormatError(ValueError):
    pass


@dataclass(frozen=True)
class MqmAnnotation:
    segment_id: str
    category: str
    subtype: str | None
    severity: str
    annotator: str = ""
    span: tuple | None = None

    def __post_init__(self):
        if self.category not in MQM_TAXONOMY:
            raise AnnotationFormatError(f"unknown MQM category {self.category!r}")
        allowed = MQM_TAXONOMY[self.category]
        if self.subtype:
            if self.subtype not in allowed:
                raise AnnotationFormatError(
                    f"subtype {self.subtype!r} not valid for category {self.category!r}")
        elif allowed:
            raise AnnotationFormatError(
                f"category {self.category!r} requires a subtype from {sorted(allowed)}")
        if self.severity not in SEVERITY_WEIGHTS:
            raise AnnotationFormatError(f"unknown severity {self.severity!r}")

    @property
    def weight(self) -> int:
        return SEVERITY_WEIGHTS[self.severity]


@dataclass(frozen=True)
class SegmentEvaluation:
    segment_id: str
    system: str
    da_score: float
    annotations: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "annotations", tuple(self.annotations))
        if not 0.0 <= self.da_score <= 100.0:
            raise ValueError("DA score must be in [0, 100]")

    @property
    def mqm_weighted(self) -> float:
        return mqm_segment_score(self.annotations)


def mqm_segment_score(annotations) -> float:
    """Negated sum of severity weights; 0 for an error-free segment."""
    return -float(sum(a.weight for a in annotations))


# ---------------------------------------------------------------------------
# BLEU

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def tokenize(text: str) -> list:
    """Lowercase, split words and punctuation. Versioned with the package."""
    return _TOKEN_RE.findall(text.lower())


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(hypotheses, references, max_n: int = 4, smooth: bool = False) -> float:
    """Corpus BLEU on a 0-1 scale with brevity penalty exp(1 - r/c)."""
    if len(hypotheses) != len(references):
        raise ValueError("hypothesis/reference length mismatch")
    if not hypotheses:
        raise ValueError("empty input")
    match = [0] * max_n
    total = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        h = tokenize(hyp)
        r = tokenize(ref)
        if not r:
            raise ValueError("empty reference")
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, max_n + 1):
            h_ngrams = _ngrams(h, n)
            r_ngrams = _ngrams(r, n)
            match[n - 1] += sum(min(c, r_ngrams[g]) for g, c in h_ngrams.items())
            total[n - 1] += max(len(h) - n + 1, 0)
    log_prec = 0.0
    for n in range(max_n):
        m, t = match[n], total[n]
        if smooth:
            m, t = m + 1, t + 1
        if m == 0 or t == 0:
            return 0.0
        log_prec += math.log(m / t)
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / max(hyp_len, 1))
    return bp * math.exp(log_prec / max_n)


# ---------------------------------------------------------------------------
# chrF

def _char_ngrams(text: str, n: int) -> Counter:
    chars = re.sub(r"\s+", "", text)
    return Counter(chars[i:i + n] for i in range(len(chars) - n + 1))


def chrf(hypotheses, references, char_n: int = 6, beta: float = 2.0) -> float:
    """chrF on a 0-100 scale: F_beta per n-gram order over corpus-summed
    counts, averaged over orders 1..char_n (whitespace excluded)."""
    if len(hypotheses) != len(references):
        raise ValueError("hypothesis/reference length mismatch")
    if not hypotheses:
        raise ValueError("empty input")
    f_scores = []
    for n in range(1, char_n + 1):
        matches = hyp_total = ref_total = 0
        for hyp, ref in zip(hypotheses, references):
            h = _char_ngrams(hyp, n)
            r = _char_ngrams(ref, n)
            matches += sum(min(c, r[g]) for g, c in h.items())
            hyp_total += sum(h.values())
            ref_total += sum(r.values())
        if hyp_total == 0 and ref_total == 0:
            continue  # order longer than every segment; skip
        prec = matches / hyp_total if hyp_total else 0.0
        rec = matches / ref_total if ref_total else 0.0
        denom = beta * beta * prec + rec
        f_scores.append((1 + beta * beta) * prec * rec / denom if denom else 0.0)
    if not f_scores:
        raise ValueError("no character n-grams in input")
    return 100.0 * sum(f_scores) / len(f_scores)


# ---------------------------------------------------------------------------
# agreement

@dataclass(frozen=True)
class AgreementReport:
    kappa: float
    mean_abs_diff: float | None
    confusion: dict  # (label_a, label_b) -> count


def cohens_kappa(labels_a, labels_b) -> AgreementReport:
    if len(labels_a) != len(labels_b):
        raise ValueError("label sequences differ in length")
    if not labels_a:
        raise ValueError("empty label sequences")
    n = len(labels_a)
    alphabet = sorted(set(labels_a) | set(labels_b), key=str)
    confusion = Counter(zip(labels_a, labels_b))
    p_o = sum(confusion[(lab, lab)] for lab in alphabet) / n
    count_a = Counter(labels_a)
    count_b = Counter(labels_b)
    p_e = sum((count_a[lab] / n) * (count_b[lab] / n) for lab in alphabet)
    kappa = 1.0 if p_e == 1.0 else (p_o - p_e) / (1.0 - p_e)
    mad = None
    try:
        mad = sum(abs(float(a) - float(b)) for a, b in zip(labels_a, labels_b)) / n
    except (TypeError, ValueError):
        pass
    return AgreementReport(kappa=kappa, mean_abs_diff=mad, confusion=dict(confusion))


# ---------------------------------------------------------------------------
# summaries and exports

def evaluation_summary(evals, da_threshold: float = 75.0) -> dict:
    """Per-system means, error breakdowns, and the share of segments at or
    above the DA quality threshold."""
    if not evals:
        raise ValueError("no evaluations")
    systems = {}
    for ev in evals:
        systems.setdefault(ev.system, []).append(ev)
    out = {"da_threshold": da_threshold, "systems": {}}
    for system, items in sorted(systems.items()):
        by_category = Counter()
        by_subtype = Counter()
        by_severity = Counter()
        for ev in items:
            for ann in ev.annotations:
                by_category[ann.category] += 1
                by_subtype[(ann.category, ann.subtype or "")] += 1
                by_severity[ann.severity] += 1
        high = sum(1 for ev in items if ev.da_score >= da_threshold)
        out["systems"][system] = {
            "segments": len(items),
            "mean_da": sum(ev.da_score for ev in items) / len(items),
            "mean_mqm": sum(ev.mqm_weighted for ev in items) / len(items),
            "total_errors": sum(len(ev.annotations) for ev in items),
            "errors_by_category": dict(by_category),
            "errors_by_subtype": {f"{c}/{s}": v for (c, s), v in by_subtype.items()},
            "errors_by_severity": dict(by_severity),
            "high_quality_count": high,
            "high_quality_share": high / len(items),
        }
    # share of segments scored identically across each system pair
    names = sorted(systems)
    pair_shares = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            da_a = {ev.segment_id: ev.da_score for ev in systems[a]}
            da_b = {ev.segment_id: ev.da_score for ev in systems[b]}
            shared = sorted(set(da_a) & set(da_b))
            if shared:
                same = sum(1 for sid in shared if da_a[sid] == da_b[sid])
                pair_shares[f"{a}|{b}"] = same / len(shared)
    out["identical_score_share"] = pair_shares
    return out


def export_bubble_data(evals) -> list:
    """Group identical (weighted MQM, DA) points with frequencies."""
    if not evals:
        raise ValueError("no evaluations")
    counts = Counter((ev.mqm_weighted, ev.da_score) for ev in evals)
    return [
        {"mqm": mqm, "da": da, "freq": freq}
        for (mqm, da), freq in sorted(counts.items())
    ]


def write_bubble_csv(rows, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("mqm,da,freq\n")
        for row in rows:
            fh.write(f"{row['mqm']},{row['da']},{row['freq']}\n")


def read_annotations_jsonl(path) -> list:
    """Read SegmentEvaluation records: one JSON object per line with
    segment_id, system, da_score, and an errors list."""
    evals = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                anns = tuple(
                    MqmAnnotation(
                        segment_id=d["segment_id"],
                        category=e["category"],
                        subtype=e.get("subtype"),
                        severity=e["severity"],
                        annotator=e.get("annotator", ""),
                        span=tuple(e["span"]) if e.get("span") else None,
                    )
                    for e in d.get("errors", [])
                )
                evals.append(SegmentEvaluation(
                    segment_id=d["segment_id"], system=d.get("system", ""),
                    da_score=float(d["da_score"]), annotations=anns))
            except (KeyError, ValueError, AnnotationFormatError) as exc:
                raise AnnotationFormatError(f"{path}:{lineno}: {exc}")
    return evals
