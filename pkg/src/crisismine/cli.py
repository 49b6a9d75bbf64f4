"""Pipeline orchestration CLI: one subcommand per stage, manifest sidecars,
and a digest-verified run report.

Exit codes: 0 success, 2 config error, 3 missing stage dependency,
4 data error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from crisismine import cleaning as cl
from crisismine import corpus as cp
from crisismine import datasets as ds
from crisismine import embeddings as em
from crisismine import evaluation as ev
from crisismine import readability as rd
from crisismine import retrieval as rt
from crisismine import thresholding as th
from crisismine.config import ConfigError, PipelineConfig, load_config

EXIT_CONFIG = 2
EXIT_DEPENDENCY = 3
EXIT_DATA = 4


class DependencyError(RuntimeError):
    def __init__(self, artifact, producing_stage):
        super().__init__(
            f"missing artifact {artifact}; run stage '{producing_stage}' first")


def _require(path, producing_stage):
    path = Path(path)
    if not path.exists():
        raise DependencyError(path, producing_stage)
    return path


def _artifact(config: PipelineConfig, name: str) -> Path:
    config.workdir.mkdir(parents=True, exist_ok=True)
    return config.workdir / name


def _write_manifest(config, stage, input_count, output_count, parameters, data_digest):
    manifest = cp.PipelineManifest(
        stage_name=stage, input_count=input_count, output_count=output_count,
        parameters=parameters, content_digest=data_digest)
    manifest.write(_artifact(config, f"{stage}.manifest.json"))
    return manifest


def _file_digest(path) -> str:
    return cp.content_digest(Path(path).read_bytes())


def _cleaning_config(config: PipelineConfig) -> cl.CleaningConfig:
    c = config.cleaning
    return cl.CleaningConfig(
        min_words=c.min_words, near_dup_threshold=c.near_dup_threshold,
        expected_langs=tuple(c.expected_langs), seed=c.seed,
        num_permutations=c.num_permutations, shingle_size=c.shingle_size,
        lsh_bands=c.lsh_bands)


# ---------------------------------------------------------------------------
# stage implementations

def stage_clean(config: PipelineConfig):
    cfg = _cleaning_config(config)
    manifests = {}
    for role, src in (("reference", config.paths.reference_corpus),
                      ("general", config.paths.general_corpus)):
        if not src:
            continue
        path = _require(src, "(external input)")
        fmt = "tsv" if path.suffix == ".tsv" else "jsonl"
        corpus = cp.read_corpus(path, format=fmt)
        cleaned, report = cl.clean_corpus(corpus, cfg)
        out = _artifact(config, f"{role}.clean.jsonl")
        if len(cleaned) == 0:
            raise ValueError(f"cleaning removed every segment of {src}")
        cp.write_corpus(cleaned, out)
        params = {"input": str(path), "input_digest": _file_digest(path)}
        for name, counts in report.counts.items():
            params[f"count_{name}"] = f"{counts['in']}->{counts['out']}"
        manifests[role] = _write_manifest(
            config, f"clean_{role}", len(corpus), len(cleaned), params,
            _file_digest(out))
    if not manifests:
        raise ConfigError("no corpora configured under paths")
    return manifests


def _provider(config: PipelineConfig):
    r = config.retrieval
    if r.provider == "file":
        path = _require(config.paths.vectors_file or "", "(external input)")
        return em.FileEmbeddingProvider(path)
    if r.provider == "http":
        if not r.endpoint:
            raise ConfigError("retrieval.endpoint required for http provider")
        return em.HttpEmbeddingProvider(r.endpoint, dim=r.dim)
    raise ConfigError(f"unknown embedding provider {r.provider!r}")


def stage_embed(config: PipelineConfig):
    provider = _provider(config)
    cache = config.paths.cache_dir or None
    manifests = {}
    for role in ("reference", "general"):
        src = _require(_artifact(config, f"{role}.clean.jsonl"), "clean")
        corpus = cp.read_corpus(src)
        matrix = em.embed_segments(corpus, provider, side=config.retrieval.side,
                                   cache_dir=cache)
        out = _artifact(config, f"{role}.vec")
        em.write_vector_file(matrix, out)
        manifests[role] = _write_manifest(
            config, f"embed_{role}", len(corpus), len(matrix),
            {"side": config.retrieval.side, "provider": provider.name,
             "input_digest": _file_digest(src)},
            _file_digest(out))
    return manifests


def stage_cluster(config: PipelineConfig):
    src = _require(_artifact(config, "reference.vec"), "embed")
    matrix = em.read_vector_file(src)
    centroids = rt.kmeans_cluster(matrix, k=config.retrieval.k,
                                  seed=config.retrieval.seed)
    out = _artifact(config, "centroids.json")
    centroids.save(out)
    return _write_manifest(
        config, "cluster", len(matrix), centroids.k,
        {"k": str(config.retrieval.k), "seed": str(config.retrieval.seed),
         "inertia": repr(centroids.inertia), "input_digest": _file_digest(src)},
        _file_digest(out))


def stage_retrieve(config: PipelineConfig):
    cent_path = _require(_artifact(config, "centroids.json"), "cluster")
    vec_path = _require(_artifact(config, "general.vec"), "embed")
    centroids = rt.CentroidSet.load(cent_path)
    matrix = em.read_vector_file(vec_path)
    top_k = min(config.retrieval.top_k, len(matrix))
    truncated = top_k < config.retrieval.top_k
    ranked = rt.retrieve_topk(matrix, centroids, top_k)
    out = _artifact(config, "retrieval.jsonl")
    rt.write_ranked(ranked, out)
    return _write_manifest(
        config, "retrieve", len(matrix), len(ranked),
        {"top_k": str(config.retrieval.top_k),
         "top_k_truncated": str(truncated).lower(),
         "input_digest": _file_digest(vec_path),
         "centroids_digest": _file_digest(cent_path)},
        _file_digest(out))


def stage_partition(config: PipelineConfig):
    src = _require(_artifact(config, "retrieval.jsonl"), "retrieve")
    ranked = rt.read_ranked(src)
    partitions = th.make_partitions(ranked, config.threshold.num_partitions)
    out = _artifact(config, "partitions.json")
    payload = [{"index": p.index, "rank_range": list(p.rank_range),
                "member_ids": list(p.member_ids)} for p in partitions]
    out.write_text(json.dumps(payload) + "\n", encoding="utf-8")
    return _write_manifest(
        config, "partition", len(ranked), len(partitions),
        {"num_partitions": str(config.threshold.num_partitions),
         "input_digest": _file_digest(src)},
        _file_digest(out))


def _load_partitions(config: PipelineConfig):
    src = _require(_artifact(config, "partitions.json"), "partition")
    data = json.loads(src.read_text(encoding="utf-8"))
    return [th.Partition(index=d["index"], rank_range=tuple(d["rank_range"]),
                         member_ids=tuple(d["member_ids"])) for d in data]


def stage_sample(config: PipelineConfig):
    partitions = _load_partitions(config)
    gen_path = _require(_artifact(config, "general.clean.jsonl"), "clean")
    corpus = cp.read_corpus(gen_path)
    texts = {s.id: (s.source_text, s.target_text) for s in corpus}
    batch = th.sample_for_annotation(partitions, config.threshold.per_partition,
                                     seed=config.threshold.sample_seed, texts=texts)
    out = _artifact(config, "batch.jsonl")
    batch.save(out)
    return _write_manifest(
        config, "sample", sum(len(p) for p in partitions), len(batch.items),
        {"per_partition": str(config.threshold.per_partition),
         "seed": str(config.threshold.sample_seed)},
        _file_digest(out))


def stage_import_labels(config: PipelineConfig, labels_file=None):
    batch_path = _require(_artifact(config, "batch.jsonl"), "sample")
    batch = th.AnnotationBatch.load(batch_path)
    labels_file = labels_file or config.paths.labels_file
    if not labels_file:
        raise ConfigError("paths.labels_file (or --labels) required")
    labels = th.import_labels(batch, _require(labels_file, "(annotation)"))
    out = _artifact(config, "labels.jsonl")
    with out.open("w", encoding="utf-8") as fh:
        for lab in sorted(labels, key=lambda l: (l.segment_id, l.annotator)):
            fh.write(json.dumps(lab.to_dict(), ensure_ascii=False) + "\n")
    return _write_manifest(
        config, "import_labels", len(batch.items), len(labels),
        {"labels_file": str(labels_file)}, _file_digest(out))


def stage_threshold(config: PipelineConfig):
    partitions = _load_partitions(config)
    labels_path = _require(_artifact(config, "labels.jsonl"), "import_labels")
    labels = []
    with labels_path.open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                d = json.loads(line)
                labels.append(th.DomainLabel(
                    segment_id=d["segment_id"], label=d["label"],
                    annotator=d.get("annotator", ""),
                    rationale_tag=d.get("hazard_tag") or None,
                    timestamp=d.get("timestamp", "")))
    decision = th.select_threshold(partitions, labels,
                                   retain_top=config.threshold.retain_top)
    out = _artifact(config, "threshold.json")
    decision.save(out)

    gen_path = _require(_artifact(config, "general.clean.jsonl"), "clean")
    corpus = cp.read_corpus(gen_path)
    retained_ids = set(decision.retained_ids)
    retained = corpus.replace_segments([s for s in corpus if s.id in retained_ids])
    retained_path = _artifact(config, "retained.jsonl")
    if len(retained):
        cp.write_corpus(retained, retained_path)
    else:
        retained_path.write_bytes(b"")
    return _write_manifest(
        config, "threshold", sum(len(p) for p in partitions),
        len(decision.retained_ids),
        {"cut_partition": str(decision.cut_partition),
         "retained_rank_max": str(decision.retained_rank_max),
         "retain_top_override": str(config.threshold.retain_top),
         "labels_digest": _file_digest(labels_path)},
        _file_digest(out))


def stage_build_sft(config: PipelineConfig):
    src = _require(_artifact(config, "retained.jsonl"), "threshold")
    corpus = cp.read_corpus(src)
    provider = _provider(config)
    matrix = em.embed_segments(corpus, provider, side=config.retrieval.side,
                               cache_dir=config.paths.cache_dir or None)
    examples = ds.build_paragraphs(
        corpus, matrix, segments_per_paragraph=config.dataset.segments_per_paragraph,
        seed=config.dataset.paragraph_seed)
    out = _artifact(config, "sft.jsonl")
    manifest = ds.emit_sft_dataset(examples, out)
    return _write_manifest(
        config, "build_sft", manifest.input_count, manifest.output_count,
        {**manifest.parameters, "input_digest": _file_digest(src)},
        manifest.content_digest)


def stage_build_dpo(config: PipelineConfig):
    src = config.paths.translations_corpus
    if not src:
        raise ConfigError("paths.translations_corpus required for build_dpo")
    corpus = cp.read_corpus(_require(src, "(external input)"))
    if config.dataset.offline_table:
        client = ds.OfflineSimplificationTable(
            _require(config.dataset.offline_table, "(external input)"))
    elif config.dataset.llm_endpoint:
        client = ds.HttpLlmClient(
            config.dataset.llm_endpoint,
            archive_path=_artifact(config, "llm_archive.jsonl"))
    else:
        raise ConfigError("dataset.offline_table or dataset.llm_endpoint required")
    gate = ds.GateConfig(min_fre_gain=config.dataset.min_fre_gain,
                         min_fre=config.dataset.min_fre,
                         min_adequacy=config.dataset.min_adequacy)
    pairs, rejections, review = ds.build_preference_pairs(corpus, client, gate)
    manifest = ds.emit_dpo_dataset(
        pairs, _artifact(config, "dpo.jsonl"),
        rejections=rejections, rejection_path=_artifact(config, "dpo.rejections.jsonl"),
        review_rows=review, review_path=_artifact(config, "dpo.review.jsonl"))
    return _write_manifest(
        config, "build_dpo", len(corpus), len(pairs),
        {"rejections": str(len(rejections)), "input_digest": _file_digest(src)},
        manifest.content_digest)


REPORT_STAGES = (
    "clean_reference", "clean_general", "embed_reference", "embed_general",
    "cluster", "retrieve", "partition", "sample", "import_labels", "threshold",
    "build_sft", "build_dpo",
)

_STAGE_OUTPUTS = {
    "clean_reference": "reference.clean.jsonl",
    "clean_general": "general.clean.jsonl",
    "embed_reference": "reference.vec",
    "embed_general": "general.vec",
    "cluster": "centroids.json",
    "retrieve": "retrieval.jsonl",
    "partition": "partitions.json",
    "sample": "batch.jsonl",
    "import_labels": "labels.jsonl",
    "threshold": "threshold.json",
    "build_sft": "sft.jsonl",
    "build_dpo": "dpo.jsonl",
}


def stage_report(config: PipelineConfig):
    """Summarize manifests and verify the digest chain."""
    stages = {}
    mismatches = []
    for stage in REPORT_STAGES:
        mpath = _artifact(config, f"{stage}.manifest.json")
        if not mpath.exists():
            continue
        manifest = cp.PipelineManifest.read(mpath)
        out_file = _artifact(config, _STAGE_OUTPUTS[stage])
        current = _file_digest(out_file) if out_file.exists() else None
        ok = current == manifest.content_digest
        if not ok:
            mismatches.append(stage)
        stages[stage] = {
            "input_count": manifest.input_count,
            "output_count": manifest.output_count,
            "parameters": manifest.parameters,
            "content_digest": manifest.content_digest,
            "digest_verified": ok,
        }
    report = {"stages": stages, "digest_mismatches": mismatches}
    tpath = _artifact(config, "threshold.json")
    if tpath.exists():
        decision = json.loads(tpath.read_text(encoding="utf-8"))
        report["threshold_decision"] = {
            k: decision[k] for k in ("cut_partition", "retained_rank_max",
                                     "retained_count", "per_partition_stats")
        }
    _artifact(config, "report.json").write_text(
        json.dumps(report, indent=2) + "\n", encoding="utf-8")

    lines = ["# Pipeline run report", ""]
    for stage, info in stages.items():
        status = "ok" if info["digest_verified"] else "DIGEST MISMATCH"
        lines.append(f"- **{stage}**: {info['input_count']} -> "
                     f"{info['output_count']} ({status})")
    if "threshold_decision" in report:
        td = report["threshold_decision"]
        lines += ["", f"Threshold cut at partition {td['cut_partition']}; "
                      f"retained {td['retained_count']} segments "
                      f"(rank <= {td['retained_rank_max']})."]
    _artifact(config, "report.md").write_text("\n".join(lines) + "\n",
                                              encoding="utf-8")
    if mismatches:
        raise ValueError(f"digest mismatch in stages: {mismatches}")
    return report


# ---------------------------------------------------------------------------
# click wiring

def _run(fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except DependencyError as exc:
        click.echo(f"dependency error: {exc}", err=True)
        sys.exit(EXIT_DEPENDENCY)
    except (ValueError, cp.CorpusFormatError, th.LabelImportError,
            ev.AnnotationFormatError, em.EmbeddingError) as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(EXIT_DATA)


def _load(config_path) -> PipelineConfig:
    if config_path is None:
        raise ConfigError("--config is required for pipeline stages")
    return load_config(config_path)


@click.group()
def main():
    """Crisis-domain corpus mining and evaluation pipeline."""


def _stage_command(name, fn, needs_config=True):
    @main.command(name=name)
    @click.option("--config", "config_path", type=click.Path(), default=None)
    def cmd(config_path):
        _run(lambda: fn(_load(config_path)))
    cmd.__name__ = name
    return cmd


_stage_command("clean", stage_clean)
_stage_command("embed", stage_embed)
_stage_command("cluster", stage_cluster)
_stage_command("retrieve", stage_retrieve)
_stage_command("partition", stage_partition)
_stage_command("sample", stage_sample)
_stage_command("threshold", stage_threshold)
_stage_command("build-sft", stage_build_sft)
_stage_command("build-dpo", stage_build_dpo)
_stage_command("report", stage_report)


@main.command("import-labels")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--labels", "labels_file", type=click.Path(), default=None)
def import_labels_cmd(config_path, labels_file):
    _run(lambda: stage_import_labels(_load(config_path), labels_file))


@main.command("serve-annotation")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8710, type=int)
@click.option("--static-dir", type=click.Path(), default=None)
def serve_annotation_cmd(config_path, host, port, static_dir):
    from crisismine.annotation_api import serve_annotation_api

    def run():
        config = _load(config_path)
        batch_path = _require(_artifact(config, "batch.jsonl"), "sample")
        batch = th.AnnotationBatch.load(batch_path)
        serve_annotation_api(
            batch, _artifact(config, "label_journal.jsonl"), host=host, port=port,
            eval_journal_path=_artifact(config, "eval_journal.jsonl"),
            static_dir=static_dir)

    _run(run)


@main.command("readability")
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--side", type=click.Choice(["source", "target"]), default="target")
@click.option("--report", "fmt", type=click.Choice(["json", "csv"]), default="json")
def readability_cmd(in_path, side, fmt):
    def run():
        corpus = cp.read_corpus(in_path)
        agg = rd.corpus_readability(corpus, side=side)
        if fmt == "json":
            click.echo(json.dumps(agg, indent=2))
        else:
            click.echo("metric,mean")
            for m, v in agg["mean"].items():
                click.echo(f"{m},{v}")
    _run(run)


@main.command("evaluate")
@click.option("--hyp", type=click.Path(exists=True), required=True)
@click.option("--ref", type=click.Path(exists=True), required=True)
@click.option("--metrics", default="bleu,chrf")
def evaluate_cmd(hyp, ref, metrics):
    def run():
        hyps = [l for l in Path(hyp).read_text(encoding="utf-8").splitlines() if l]
        refs = [l for l in Path(ref).read_text(encoding="utf-8").splitlines() if l]
        out = {}
        for metric in metrics.split(","):
            metric = metric.strip()
            if metric == "bleu":
                out["bleu"] = ev.bleu(hyps, refs)
            elif metric == "chrf":
                out["chrf"] = ev.chrf(hyps, refs)
            else:
                raise ValueError(f"unknown metric {metric!r}")
        click.echo(json.dumps(out, indent=2))
    _run(run)


@main.command("score-mqm")
@click.option("--annotations", type=click.Path(exists=True), required=True)
@click.option("--report", "fmt", type=click.Choice(["json"]), default="json")
@click.option("--da-threshold", default=75.0, type=float)
@click.option("--bubble-csv", type=click.Path(), default=None)
def score_mqm_cmd(annotations, fmt, da_threshold, bubble_csv):
    def run():
        evals = ev.read_annotations_jsonl(annotations)
        summary = ev.evaluation_summary(evals, da_threshold=da_threshold)
        if bubble_csv:
            ev.write_bubble_csv(ev.export_bubble_data(evals), bubble_csv)
        click.echo(json.dumps(summary, indent=2))
    _run(run)


if __name__ == "__main__":
    main()
