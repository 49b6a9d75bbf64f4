import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crisismine.cleaning import (CleaningConfig, estimated_jaccard,
                                 exact_dedup, language_filter, length_filter,
                                 minhash_signature, near_dedup,
                                 normalize_text, wellformedness_filter)
from crisismine.corpus import Corpus, Segment
from crisismine.langid import LanguageDetector
from tests.conftest import make_segment


def seg(i, src, tgt="a plain english target sentence with enough words here."):
    return Segment(id=f"s:{i}", source_text=src, target_text=tgt)


def corpus_of(sources):
    return Corpus(name="t", segments=tuple(seg(i, s) for i, s in enumerate(sources)))


# ---------------------------------------------------------------------------
# normalize_text

def test_normalize_collapses_whitespace():
    assert normalize_text("  Allerta   rossa ") == "Allerta rossa"


def test_normalize_idempotent_on_normal_string():
    s = "Allerta rossa in Liguria"
    assert normalize_text(s) == s


def test_normalize_nbsp_equals_space_version():
    with_nbsp = "allerta rossa domani"
    assert normalize_text(with_nbsp) == normalize_text("allerta rossa domani")


@settings(max_examples=100, deadline=None)
@given(st.text())
def test_normalize_idempotence_property(s):
    assert normalize_text(normalize_text(s)) == normalize_text(s)


# ---------------------------------------------------------------------------
# exact dedup

def test_exact_dedup_keeps_first():
    a = make_segment(1, src="prima frase qui.")
    b = make_segment(2, src="seconda frase qui.")
    a2 = make_segment(3, src="prima frase qui.")
    a2 = Segment(id="s:3", source_text=a.source_text, target_text=a.target_text)
    corpus = Corpus(name="t", segments=(a, b, a2))
    out = exact_dedup(corpus)
    assert [s.id for s in out] == [a.id, b.id]


def test_exact_dedup_identity_on_distinct():
    corpus = corpus_of([f"frase distinta numero {i} qui." for i in range(5)])
    assert len(exact_dedup(corpus)) == 5


def test_exact_dedup_whitespace_variants_are_duplicates():
    corpus = Corpus(name="t", segments=(
        Segment(id="a", source_text="allerta  rossa", target_text="red  alert"),
        Segment(id="b", source_text=" allerta rossa ", target_text="red alert"),
    ))
    # oracle: dedup over normalize_text keys
    keys = {(normalize_text(s.source_text), normalize_text(s.target_text))
            for s in corpus}
    out = exact_dedup(corpus)
    assert len(out) == len(keys) == 1
    assert out.segments[0].id == "a"


# ---------------------------------------------------------------------------
# MinHash

def test_signature_deterministic():
    cfg = CleaningConfig(seed=7)
    text = "il fiume ha superato il livello di guardia questa mattina"
    assert minhash_signature(text, cfg) == minhash_signature(text, cfg)


def test_disjoint_vocabulary_low_estimate():
    cfg = CleaningConfig()
    s1 = minhash_signature("uno due tre quattro cinque sei sette otto nove", cfg)
    s2 = minhash_signature("alpha beta gamma delta epsilon zeta eta theta iota", cfg)
    assert estimated_jaccard(s1, s2) < 0.1  # exact Jaccard is 0


def test_known_jaccard_half_estimate():
    # word-level shingles: sets {a..f} and {c..h} have exact Jaccard 4/8 = 0.5
    cfg = CleaningConfig(shingle_size=1)
    s1 = minhash_signature("alfa beta carta dado elmo faro", cfg)
    s2 = minhash_signature("carta dado elmo faro gufo hotel", cfg)
    assert abs(estimated_jaccard(s1, s2) - 0.5) <= 0.15


def test_minhash_estimator_mean_error():
    # random word-set pairs with known exact Jaccard; mean abs error <= 0.05
    cfg = CleaningConfig(shingle_size=1)
    rng = np.random.default_rng(13)
    vocab = [f"w{i}" for i in range(60)]
    errors = []
    for _ in range(300):
        size_a = int(rng.integers(5, 30))
        size_b = int(rng.integers(5, 30))
        a = set(rng.choice(vocab, size=size_a, replace=False))
        b = set(rng.choice(vocab, size=size_b, replace=False))
        exact = len(a & b) / len(a | b)
        est = estimated_jaccard(minhash_signature(" ".join(sorted(a)), cfg),
                                minhash_signature(" ".join(sorted(b)), cfg))
        errors.append(abs(est - exact))
    assert float(np.mean(errors)) <= 0.05


# ---------------------------------------------------------------------------
# near dedup

def brute_force_near_dedup(corpus, cfg):
    kept = []
    kept_sigs = []
    for s in corpus:
        sig = minhash_signature(s.source_text, cfg)
        if any(estimated_jaccard(sig, k) >= cfg.near_dup_threshold
               for k in kept_sigs):
            continue
        kept.append(s.id)
        kept_sigs.append(sig)
    return kept


def test_near_dedup_identical_sources():
    src = "il comune ha diramato una nuova allerta meteo per domani"
    corpus = Corpus(name="t", segments=(seg(0, src), seg(1, src)))
    assert len(near_dedup(corpus, CleaningConfig())) == 1


def test_near_dedup_dissimilar_unchanged():
    rng = np.random.default_rng(5)
    words = [f"parola{i}" for i in range(200)]
    sources = [" ".join(words[j] for j in rng.choice(200, 12, replace=False))
               for _ in range(20)]
    corpus = corpus_of(sources)
    assert len(near_dedup(corpus, CleaningConfig())) == 20


def planted_neardup_corpus(n_base=150, n_dup=50, seed=3):
    rng = np.random.default_rng(seed)
    words = [f"voce{i}" for i in range(500)]
    bases = [" ".join(words[j] for j in rng.choice(500, 40, replace=False))
             for _ in range(n_base)]
    sources = list(bases)
    for i in range(n_dup):
        sources.append(bases[i % n_base] + f" extra{i}")
    order = rng.permutation(len(sources))
    return corpus_of([sources[i] for i in order])


def test_near_dedup_matches_brute_force_oracle():
    cfg = CleaningConfig()
    corpus = planted_neardup_corpus()
    assert len(corpus) == 200
    got = [s.id for s in near_dedup(corpus, cfg)]
    assert got == brute_force_near_dedup(corpus, cfg)
    assert len(got) < len(corpus)  # planted duplicates were removed


def test_near_dedup_idempotent():
    cfg = CleaningConfig()
    corpus = planted_neardup_corpus(n_base=30, n_dup=10)
    once = near_dedup(corpus, cfg)
    twice = near_dedup(once, cfg)
    assert [s.id for s in twice] == [s.id for s in once]


# ---------------------------------------------------------------------------
# length filter

def test_length_filter_default_boundary():
    cfg = CleaningConfig()
    seven = seg(0, "una due tre quattro cinque sei sette")
    eight = seg(1, "una due tre quattro cinque sei sette otto")
    corpus = Corpus(name="t", segments=(seven, eight))
    out = length_filter(corpus, cfg)
    assert [s.id for s in out] == ["s:1"]


def test_length_filter_min_one_keeps_all():
    corpus = corpus_of(["breve.", "frase un poco piu lunga di prima."])
    assert len(length_filter(corpus, CleaningConfig(min_words=1))) == 2


# ---------------------------------------------------------------------------
# language filter

SMOKE_IT = [
    "Domani le scuole resteranno chiuse per il maltempo.",
    "Il sindaco ha firmato una nuova ordinanza urgente.",
    "Si consiglia di non uscire di casa durante la notte.",
    "La strada provinciale è stata chiusa al traffico.",
    "I vigili del fuoco sono intervenuti nella zona industriale.",
    "Il livello del fiume continua a salire rapidamente.",
    "Sono previste raffiche di vento molto forti sulla costa.",
    "La popolazione è invitata a seguire gli aggiornamenti ufficiali.",
    "Un incendio è divampato nel bosco vicino al paese.",
    "Le squadre di soccorso lavorano senza sosta da ore.",
    "Il treno regionale è stato cancellato per un guasto.",
    "Abbiamo ricevuto molte segnalazioni dai cittadini preoccupati.",
    "Il ponte sarà riaperto solo dopo le verifiche tecniche.",
    "La neve ha raggiunto i trenta centimetri in montagna.",
    "Gli esperti monitorano la situazione con grande attenzione.",
    "Restate in casa e chiudete bene porte e finestre.",
    "Il comune ha aperto un centro di accoglienza temporaneo.",
    "La frana ha interrotto la linea ferroviaria principale.",
    "Le lezioni riprenderanno regolarmente lunedì mattina.",
    "Una forte scossa è stata avvertita in tutta la provincia.",
]
SMOKE_EN = [
    "Schools will remain closed tomorrow because of the storm.",
    "The mayor has signed a new emergency order tonight.",
    "Please stay indoors during the night if possible.",
    "The main road has been closed to all traffic.",
    "Firefighters responded quickly to the industrial area.",
    "The river level continues to rise very quickly.",
    "Strong gusts of wind are expected along the coast.",
    "Residents should follow the official updates carefully.",
    "A fire broke out in the forest near the village.",
    "Rescue teams have been working for many hours.",
    "The regional train was cancelled due to a fault.",
    "We received many reports from worried citizens today.",
    "The bridge will reopen only after technical checks.",
    "Snow reached thirty centimeters in the mountains overnight.",
    "Experts are monitoring the situation very closely.",
    "Stay inside and keep doors and windows firmly closed.",
    "The town has opened a temporary shelter for families.",
    "The landslide interrupted the main railway line.",
    "Classes will resume as usual on Monday morning.",
    "A strong tremor was felt across the whole province.",
]
SMOKE_OTHER = [
    ("de", "Der Zug fährt heute nicht."),
    ("de", "Die Feuerwehr warnt vor starkem Regen im Süden."),
    ("de", "Bitte bleiben Sie heute Abend zu Hause."),
    ("de", "Die Brücke ist wegen Hochwasser gesperrt."),
    ("de", "Morgen bleiben alle Schulen geschlossen."),
    ("fr", "Les écoles resteront fermées demain matin."),
    ("fr", "Le maire a signé un nouvel arrêté d'urgence."),
    ("fr", "Restez chez vous pendant la tempête."),
    ("fr", "Le pont est fermé à cause de la crue."),
    ("fr", "Les secours travaillent depuis plusieurs heures."),
]


def test_detector_smoke_set_accuracy():
    det = LanguageDetector()
    labeled = [("it", s) for s in SMOKE_IT] + [("en", s) for s in SMOKE_EN] \
        + SMOKE_OTHER
    assert len(labeled) == 50
    correct = sum(det.detect(s) == lang for lang, s in labeled)
    assert correct / len(labeled) >= 0.95
    # no non-target sentence may leak into the it/en pair
    for lang, s in SMOKE_OTHER:
        assert det.detect(s) not in ("it", "en")


def test_language_filter_drops_german_source():
    cfg = CleaningConfig()
    good = Segment(id="a", source_text=SMOKE_IT[0], target_text=SMOKE_EN[0])
    bad = Segment(id="b", source_text="Der Zug fährt heute nicht.",
                  target_text=SMOKE_EN[1])
    out = language_filter(Corpus(name="t", segments=(good, bad)), cfg)
    assert [s.id for s in out] == ["a"]


def test_language_filter_empty_corpus():
    out = language_filter(Corpus(name="t", segments=()), CleaningConfig())
    assert len(out) == 0


def test_language_filter_unknown_language_is_config_error():
    with pytest.raises(ValueError, match="profile"):
        language_filter(Corpus(name="t", segments=()),
                        CleaningConfig(expected_langs=("xx", "en")))


# ---------------------------------------------------------------------------
# well-formedness

def good_pair(id_, src):
    return Segment(id=id_, source_text=src,
                   target_text="A well formed target sentence ends here.")


def test_wellformed_drops_unbalanced_bracket():
    corpus = Corpus(name="t", segments=(good_pair("a", "(incomplete fragment"),))
    assert len(wellformedness_filter(corpus)) == 0


def test_wellformed_keeps_normal_sentence():
    corpus = Corpus(name="t", segments=(
        good_pair("a", "Una frase ben formata termina con il punto."),))
    assert len(wellformedness_filter(corpus)) == 1


def test_wellformed_drops_no_alphabetic():
    corpus = Corpus(name="t", segments=(good_pair("a", "12:00 — 14:00"),))
    assert len(wellformedness_filter(corpus)) == 0


def test_wellformed_drops_allcaps():
    corpus = Corpus(name="t", segments=(
        good_pair("a", "ALLERTA METEO ROSSA DOMANI SU TUTTA LA REGIONE."),))
    assert len(wellformedness_filter(corpus)) == 0


def test_wellformed_short_without_terminal_punct_dropped():
    corpus = Corpus(name="t", segments=(good_pair("a", "Aggiornamento viabilità ore"),))
    assert len(wellformedness_filter(corpus)) == 0


# ---------------------------------------------------------------------------
# shared filter properties

@pytest.mark.parametrize("filter_fn", [
    exact_dedup,
    lambda c: near_dedup(c, CleaningConfig()),
    lambda c: length_filter(c, CleaningConfig()),
    lambda c: wellformedness_filter(c),
])
def test_filters_are_idempotent_subsequence_operators(filter_fn):
    corpus = planted_neardup_corpus(n_base=20, n_dup=10, seed=9)
    out = filter_fn(corpus)
    ids_in = [s.id for s in corpus]
    ids_out = [s.id for s in out]
    assert set(ids_out) <= set(ids_in)
    # order preserved
    assert ids_out == [i for i in ids_in if i in set(ids_out)]
    assert [s.id for s in filter_fn(out)] == ids_out
