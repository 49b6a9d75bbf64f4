"""Corpus cleaning: exact/MinHash deduplication, length, language and
well-formedness filters."""

from __future__ import annotations

import hashlib
import re
import unicodedata
from dataclasses import dataclass, field

import numpy as np

from crisismine.corpus import Corpus
from crisismine.kernels import minhash_signature_kernel
from crisismine.langid import LanguageDetector

_WS_RE = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """NFKC-normalize, collapse runs of whitespace, trim. Idempotent."""
    return _WS_RE.sub(" ", unicodedata.normalize("NFKC", text)).strip()


@dataclass(frozen=True)
class CleaningConfig:
    min_words: int = 8
    near_dup_threshold: float = 0.8
    expected_langs: tuple = ("it", "en")
    seed: int = 0
    num_permutations: int = 128
    shingle_size: int = 3
    lsh_bands: int = 32

    def __post_init__(self):
        if not 0.0 <= self.near_dup_threshold <= 1.0:
            raise ValueError("near_dup_threshold must be in [0, 1]")
        if self.min_words < 1:
            raise ValueError("min_words must be >= 1")
        if self.num_permutations % self.lsh_bands != 0:
            raise ValueError("lsh_bands must divide num_permutations")


@dataclass(frozen=True)
class MinHashSignature:
    values: tuple
    num_permutations: int
    shingle_size: int

    def __post_init__(self):
        if len(self.values) != self.num_permutations:
            raise ValueError("signature length != num_permutations")


def _permutations(config: CleaningConfig):
    rng = np.random.default_rng(config.seed)
    # multiply-shift family: odd multiplier, arbitrary offset, mod 2^64
    a = rng.integers(0, 2**63, size=config.num_permutations, dtype=np.uint64) * 2 + 1
    b = rng.integers(0, 2**63, size=config.num_permutations, dtype=np.uint64)
    return a, b


def _shingles(text: str, size: int) -> set:
    words = normalize_text(text).lower().split()
    if len(words) >= size:
        return {" ".join(words[i:i + size]) for i in range(len(words) - size + 1)}
    return set(words)  # too short for a full shingle: single-word fallback


def _hash64(s: str) -> int:
    return int.from_bytes(hashlib.blake2b(s.encode("utf-8"), digest_size=8).digest(), "big")


def shingle_hashes(text: str, size: int) -> np.ndarray:
    hs = sorted(_hash64(s) for s in _shingles(text, size))
    return np.asarray(hs, dtype=np.uint64)


def minhash_signature(text: str, config: CleaningConfig,
                      _perms=None) -> MinHashSignature:
    if not text.strip():
        raise ValueError("cannot sign empty text")
    a, b = _perms if _perms is not None else _permutations(config)
    sig = minhash_signature_kernel(shingle_hashes(text, config.shingle_size), a, b)
    return MinHashSignature(tuple(int(v) for v in sig),
                            config.num_permutations, config.shingle_size)


def estimated_jaccard(sig_a: MinHashSignature, sig_b: MinHashSignature) -> float:
    if sig_a.num_permutations != sig_b.num_permutations:
        raise ValueError("signature length mismatch")
    matches = sum(x == y for x, y in zip(sig_a.values, sig_b.values))
    return matches / sig_a.num_permutations


def exact_dedup(corpus: Corpus) -> Corpus:
    """Keep the first occurrence of each normalized (src, tgt) pair."""
    seen = set()
    kept = []
    for seg in corpus:
        key = (normalize_text(seg.source_text), normalize_text(seg.target_text))
        if key not in seen:
            seen.add(key)
            kept.append(seg)
    return corpus.replace_segments(kept)


def near_dedup(corpus: Corpus, config: CleaningConfig) -> Corpus:
    """Greedy source-side fuzzy dedup in corpus order.

    A segment is dropped when its estimated Jaccard against any retained
    signature reaches the threshold. With b bands of r rows, a pair whose
    signatures disagree in fewer than b positions always shares a fully
    matching band, so banding is a lossless candidate filter whenever
    (1 - threshold) * num_permutations < bands; otherwise we fall back to
    scanning all retained signatures, keeping behavior identical to the
    all-pairs comparison.
    """
    perms = _permutations(config)
    banding_complete = (1.0 - config.near_dup_threshold) * config.num_permutations \
        < config.lsh_bands
    rows = config.num_permutations // config.lsh_bands

    kept = []
    kept_sigs = []
    buckets = {}  # (band_index, band_values) -> list of retained indices
    for seg in corpus:
        sig = minhash_signature(seg.source_text, config, _perms=perms)
        if banding_complete:
            candidates = set()
            for band in range(config.lsh_bands):
                key = (band, sig.values[band * rows:(band + 1) * rows])
                candidates.update(buckets.get(key, ()))
        else:
            candidates = range(len(kept_sigs))
        duplicate = any(
            estimated_jaccard(sig, kept_sigs[i]) >= config.near_dup_threshold
            for i in candidates
        )
        if duplicate:
            continue
        idx = len(kept_sigs)
        kept.append(seg)
        kept_sigs.append(sig)
        for band in range(config.lsh_bands):
            key = (band, sig.values[band * rows:(band + 1) * rows])
            buckets.setdefault(key, []).append(idx)
    return corpus.replace_segments(kept)


def length_filter(corpus: Corpus, config: CleaningConfig) -> Corpus:
    kept = [s for s in corpus if len(s.source_text.split()) >= config.min_words]
    return corpus.replace_segments(kept)


def language_filter(corpus: Corpus, config: CleaningConfig,
                    detector: LanguageDetector | None = None) -> Corpus:
    detector = detector or LanguageDetector()
    src_lang, tgt_lang = config.expected_langs
    for lang in (src_lang, tgt_lang):
        if lang not in detector.profiles:
            raise ValueError(f"detector has no profile for language {lang!r}")
    kept = [
        s for s in corpus
        if detector.detect(s.source_text) == src_lang
        and detector.detect(s.target_text) == tgt_lang
    ]
    return corpus.replace_segments(kept)


_BRACKET_PAIRS = [("(", ")"), ("[", "]"), ("{", "}"), ("«", "»")]
_TERMINAL_RE = re.compile(r'[.!?…][)"»”\']*\s*$')


def _well_formed(text: str) -> bool:
    text = normalize_text(text)
    for lo, hi in _BRACKET_PAIRS:
        if text.count(lo) != text.count(hi):
            return False
    if text.count('"') % 2 == 1:
        return False
    letters = [c for c in text if c.isalpha()]
    if not letters:
        return False
    upper_ratio = sum(c.isupper() for c in letters) / len(letters)
    if upper_ratio > 0.8:
        return False
    if len(text.split()) < 12 and not _TERMINAL_RE.search(text):
        return False
    return True


def wellformedness_filter(corpus: Corpus) -> Corpus:
    kept = [s for s in corpus
            if _well_formed(s.source_text) and _well_formed(s.target_text)]
    return corpus.replace_segments(kept)


@dataclass
class CleaningReport:
    counts: dict = field(default_factory=dict)  # filter name -> (in, out)

    def record(self, name: str, before: int, after: int):
        self.counts[name] = {"in": before, "out": after}


def clean_corpus(corpus: Corpus, config: CleaningConfig,
                 detector: LanguageDetector | None = None):
    """Full cleaning pipeline; returns (cleaned, CleaningReport)."""
    report = CleaningReport()
    stages = [
        ("exact_dedup", lambda c: exact_dedup(c)),
        ("near_dedup", lambda c: near_dedup(c, config)),
        ("length_filter", lambda c: length_filter(c, config)),
        ("language_filter", lambda c: language_filter(c, config, detector)),
        ("wellformedness_filter", lambda c: wellformedness_filter(c)),
    ]
    for name, fn in stages:
        before = len(corpus)
        corpus = fn(corpus)
        report.record(name, before, len(corpus))
    return corpus, report
