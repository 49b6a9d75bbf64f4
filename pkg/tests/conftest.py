import json

import numpy as np
import pytest

from crisismine.corpus import Corpus, Segment
from crisismine.embeddings import EmbeddingMatrix, write_vector_file

IT_WORDS = (
    "allerta rossa pioggia fiume strada chiusa scuole domani emergenza "
    "protezione civile comune zona costiera vento forte terremoto scossa "
    "evacuazione soccorsi volontari ponte temporale neve frana rischio "
    "abitanti sindaco ordinanza regione provincia popolazione sicurezza "
    "torrente esondazione incendio bosco collina allagamento viabilita"
).split()

EN_WORDS = (
    "red alert heavy rain river road closed schools tomorrow emergency "
    "civil protection municipality coastal area strong wind earthquake "
    "evacuation rescue volunteers bridge storm snow landslide risk "
    "residents mayor order region province population safety stream "
    "flooding fire forest hill roads warning services teams shelter"
).split()


def make_segment(i, src=None, tgt=None, corpus_name="demo"):
    return Segment(
        id=f"{corpus_name}:{i}",
        source_text=src or f"frase di prova numero {i} con parole sufficienti qui.",
        target_text=tgt or f"test sentence number {i} with enough words here.",
        source_corpus=corpus_name,
    )


def make_corpus(n=5, name="demo"):
    return Corpus(name=name, segments=tuple(make_segment(i, corpus_name=name)
                                            for i in range(1, n + 1)))


def synthetic_sentence(rng, words, n_words=10, prefix=""):
    picks = [words[i] for i in rng.choice(len(words), size=n_words)]
    text = " ".join(picks)
    if prefix:
        text = f"{prefix} {text}"
    return text[0].upper() + text[1:] + "."


def pytest_terminal_summary(terminalreporter):
    """Replay the acceptance-criterion PASS/FAIL lines at the end of a run."""
    import sys
    lines = []
    for name, mod in sys.modules.items():
        if name.rsplit(".", 1)[-1] == "test_acceptance":
            lines.extend(getattr(mod, "RESULTS", []))
    if lines:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for line in dict.fromkeys(lines):
            terminalreporter.write_line(f"  {line}")


@pytest.fixture
def demo_fixture(tmp_path):
    """Desk-scale end-to-end fixture: a reference corpus, 600 candidates with
    200 planted near the reference centroids in a synthetic vector space,
    and a vector file covering every segment id."""
    rng = np.random.default_rng(42)
    dim = 16
    n_ref, n_planted, n_noise = 50, 200, 400

    ref_centers = rng.normal(size=(5, dim)) * 8.0

    def write_jsonl(path, rows):
        with path.open("w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    ref_rows, ref_ids, ref_vecs = [], [], []
    for i in range(n_ref):
        sid = f"ref:{i + 1}"
        ref_rows.append({
            "id": sid,
            "src": synthetic_sentence(rng, IT_WORDS, 10, prefix=f"riferimento {i}"),
            "tgt": synthetic_sentence(rng, EN_WORDS, 10, prefix=f"reference {i}"),
            "corpus": "Reference",
        })
        ref_ids.append(sid)
        ref_vecs.append(ref_centers[i % 5] + 0.1 * rng.normal(size=dim))

    gen_rows, gen_ids, gen_vecs, planted = [], [], [], set()
    for i in range(n_planted + n_noise):
        sid = f"gen:{i + 1}"
        gen_rows.append({
            "id": sid,
            "src": synthetic_sentence(rng, IT_WORDS, 11, prefix=f"segnalazione {i}"),
            "tgt": synthetic_sentence(rng, EN_WORDS, 11, prefix=f"bulletin {i}"),
            "corpus": "General",
        })
        gen_ids.append(sid)
        if i < n_planted:
            planted.add(sid)
            gen_vecs.append(ref_centers[i % 5] + 0.3 * rng.normal(size=dim))
        else:
            v = rng.normal(size=dim) * 8.0
            # keep noise away from every reference center
            while min(np.linalg.norm(v - c) for c in ref_centers) < 6.0:
                v = rng.normal(size=dim) * 8.0
            gen_vecs.append(v)

    ref_path = tmp_path / "reference.jsonl"
    gen_path = tmp_path / "general.jsonl"
    write_jsonl(ref_path, ref_rows)
    write_jsonl(gen_path, gen_rows)

    matrix = EmbeddingMatrix(
        ids=tuple(ref_ids + gen_ids),
        vectors=np.asarray(ref_vecs + gen_vecs, dtype=np.float32))
    vec_path = tmp_path / "vectors.vec"
    write_vector_file(matrix, vec_path)

    return {
        "root": tmp_path,
        "reference": ref_path,
        "general": gen_path,
        "vectors": vec_path,
        "planted": planted,
        "dim": dim,
    }


def write_demo_config(fixture, workdir, top_k=600, per_partition=30,
                      num_partitions=6):
    config_path = fixture["root"] / f"config_{workdir.name}.yaml"
    config_path.write_text(f"""\
paths:
  workdir: {workdir}
  reference_corpus: {fixture['reference']}
  general_corpus: {fixture['general']}
  vectors_file: {fixture['vectors']}
cleaning:
  seed: 3
retrieval:
  k: 5
  top_k: {top_k}
  seed: 11
  dim: {fixture['dim']}
threshold:
  num_partitions: {num_partitions}
  per_partition: {per_partition}
  sample_seed: 5
""", encoding="utf-8")
    return config_path
