"""Classical readability indices (FRE, FKGL, SMOG, Coleman-Liau, ARI,
Dale-Chall) with rule-based English syllabification.

The syllable counter is deterministic and dictionary-free. Rules, in order:

1. a vowel group (aeiouy run) counts one syllable;
2. +1 for hiatus pairs ia, ua, iu, uo, and io (unless part of -tion/-sion);
3. -1 for words ending "ely" (silent e before the suffix);
4. else -1 for a silent final "e" (not consonant+"le");
5. -1 for final "ed" preceded by a consonant other than t/d;
6. every word counts at least one syllable.

Values are comparable only within one version of these rules and of the
bundled familiar-word list.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from importlib import resources

_WORD_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)*", re.UNICODE)
_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")
_HIATUS_RE = re.compile(r"ia|ua|iu|uo")
_IO_RE = re.compile(r"(?<![ts])io")
_SENT_SPLIT_RE = re.compile(r"(?<=[.!?…])[)\"»”']*\s+")

_ABBREVIATIONS = {
    "mr", "mrs", "ms", "dr", "prof", "st", "no", "etc", "vs", "fig",
    "e.g", "i.e", "ca", "approx", "dept", "vol", "p", "pp",
}


def _load_familiar_words() -> frozenset:
    data = resources.files("crisismine.data").joinpath("familiar_words.txt").read_bytes()
    words = frozenset(w.strip().lower() for w in data.decode("utf-8").splitlines()
                      if w.strip())
    return words


_FAMILIAR = None


def familiar_words() -> frozenset:
    global _FAMILIAR
    if _FAMILIAR is None:
        _FAMILIAR = _load_familiar_words()
    return _FAMILIAR


def familiar_words_digest() -> str:
    data = resources.files("crisismine.data").joinpath("familiar_words.txt").read_bytes()
    return hashlib.sha256(data).hexdigest()


def count_syllables(word: str) -> int:
    w = "".join(c for c in word.lower() if c.isalpha())
    if not w:
        return 1
    count = len(_VOWEL_GROUP_RE.findall(w))
    count += len(_HIATUS_RE.findall(w)) + len(_IO_RE.findall(w))
    if count > 1:
        if w.endswith("ely"):
            count -= 1
        elif w.endswith("e") and not (
            len(w) >= 3 and w.endswith("le") and w[-3] not in "aeiouy"
        ):
            count -= 1
        if count > 1 and w.endswith("ed") and len(w) >= 3 \
                and w[-3] not in "aeiouytd":
            count -= 1
    return max(count, 1)


def split_sentences(text: str) -> list:
    chunks = _SENT_SPLIT_RE.split(text)
    merged = []
    for chunk in chunks:
        if merged:
            prev_last = merged[-1].rstrip().rstrip(".").split()
            if prev_last and prev_last[-1].lower().rstrip(".") in _ABBREVIATIONS:
                merged[-1] = merged[-1] + " " + chunk
                continue
        merged.append(chunk)
    return [c for c in merged if _WORD_RE.search(c)]


def _is_familiar(word: str) -> bool:
    w = word.lower().strip("'")
    fam = familiar_words()
    if w in fam:
        return True
    candidates = []
    if w.endswith("s"):
        candidates.append(w[:-1])
    if w.endswith(("es", "ed")):
        candidates.append(w[:-2])
    if w.endswith("ed"):
        candidates.append(w[:-1])  # -d after silent e (moved -> move)
    if w.endswith("ing"):
        candidates.append(w[:-3])
        candidates.append(w[:-3] + "e")
    return any(c in fam for c in candidates)


@dataclass(frozen=True)
class TextStats:
    sentences: int
    words: int
    characters: int  # letters + digits
    syllables: int
    complex_words: int  # >= 3 syllables
    familiar_word_misses: int


@dataclass(frozen=True)
class ReadabilityReport:
    fre: float
    fkgl: float
    smog: float
    coleman_liau: float
    ari: float
    dale_chall: float
    stats: TextStats

    def to_dict(self) -> dict:
        return {
            "fre": self.fre, "fkgl": self.fkgl, "smog": self.smog,
            "coleman_liau": self.coleman_liau, "ari": self.ari,
            "dale_chall": self.dale_chall,
            "stats": self.stats.__dict__,
        }


def text_stats(text: str) -> TextStats:
    sentences = split_sentences(text)
    words = _WORD_RE.findall(text)
    characters = sum(1 for w in words for c in w if c.isalnum())
    syllables = 0
    complex_words = 0
    misses = 0
    for w in words:
        sy = count_syllables(w)
        syllables += sy
        if sy >= 3:
            complex_words += 1
        if not _is_familiar(w):
            misses += 1
    return TextStats(
        sentences=len(sentences), words=len(words), characters=characters,
        syllables=syllables, complex_words=complex_words,
        familiar_word_misses=misses,
    )


def report_from_stats(stats: TextStats) -> ReadabilityReport:
    if stats.words == 0 or stats.sentences == 0:
        raise ValueError("readability undefined for empty text")
    w, s = stats.words, stats.sentences
    wps = w / s
    spw = stats.syllables / w
    cpw = stats.characters / w
    fre = 206.835 - 1.015 * wps - 84.6 * spw
    fkgl = 0.39 * wps + 11.8 * spw - 15.59
    smog = 1.0430 * math.sqrt(stats.complex_words * 30.0 / s) + 3.1291
    coleman_liau = 0.0588 * (cpw * 100.0) - 0.296 * (100.0 / wps) - 15.8
    ari = 4.71 * cpw + 0.5 * wps - 21.43
    miss_frac = stats.familiar_word_misses / w
    dale_chall = 0.1579 * (miss_frac * 100.0) + 0.0496 * wps
    if miss_frac > 0.05:
        dale_chall += 3.6365
    return ReadabilityReport(fre=fre, fkgl=fkgl, smog=smog,
                             coleman_liau=coleman_liau, ari=ari,
                             dale_chall=dale_chall, stats=stats)


def readability_report(text: str) -> ReadabilityReport:
    return report_from_stats(text_stats(text))


METRIC_NAMES = ("fre", "fkgl", "smog", "coleman_liau", "ari", "dale_chall")


def corpus_readability(corpus, side: str = "target") -> dict:
    """Macro-average of per-segment reports plus quartiles; unusable
    segments are skipped and counted."""
    per_metric = {m: [] for m in METRIC_NAMES}
    skipped = 0
    for seg in corpus:
        text = seg.target_text if side == "target" else seg.source_text
        try:
            rep = readability_report(text)
        except ValueError:
            skipped += 1
            continue
        for m in METRIC_NAMES:
            per_metric[m].append(getattr(rep, m))
    n = len(per_metric["fre"])
    if n == 0:
        raise ValueError("no scorable segments")

    def quantiles(vals):
        vals = sorted(vals)
        return {
            "q25": vals[int(0.25 * (len(vals) - 1))],
            "q50": vals[int(0.50 * (len(vals) - 1))],
            "q75": vals[int(0.75 * (len(vals) - 1))],
        }

    return {
        "segments_scored": n,
        "skipped_count": skipped,
        "mean": {m: sum(v) / n for m, v in per_metric.items()},
        "quantiles": {m: quantiles(v) for m, v in per_metric.items()},
    }
