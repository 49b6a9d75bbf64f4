"""Reference-corpus k-means clustering and max-centroid-similarity retrieval."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from crisismine.embeddings import EmbeddingMatrix, unit_rows

MAX_ITER = 300


@dataclass(frozen=True)
class CentroidSet:
    centroids: np.ndarray  # (k, dim)
    k: int
    assignments: dict  # reference id -> cluster index
    inertia: float
    seed: int
    inertia_history: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "centroids",
                           np.ascontiguousarray(self.centroids, dtype=np.float64))
        if self.centroids.shape[0] != self.k:
            raise ValueError("centroid count != k")

    def save(self, path) -> None:
        payload = {
            "k": self.k,
            "seed": self.seed,
            "inertia": self.inertia,
            "inertia_history": list(self.inertia_history),
            "assignments": self.assignments,
            "centroids": self.centroids.tolist(),
        }
        Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "CentroidSet":
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            centroids=np.asarray(d["centroids"], dtype=np.float64),
            k=d["k"],
            assignments=d["assignments"],
            inertia=d["inertia"],
            seed=d["seed"],
            inertia_history=tuple(d["inertia_history"]),
        )


@dataclass(frozen=True)
class RankedCandidate:
    segment_id: str
    score: float
    best_centroid: int
    rank: int


def _kmeans_pp_init(points: np.ndarray, k: int, rng) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    dist_sq = ((points - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = dist_sq.sum()
        if total <= 0:
            # all remaining points coincide with a chosen center
            centers[i] = points[rng.integers(n)]
            continue
        idx = rng.choice(n, p=dist_sq / total)
        centers[i] = points[idx]
        dist_sq = np.minimum(dist_sq, ((points - centers[i]) ** 2).sum(axis=1))
    return centers


def kmeans_cluster(reference: EmbeddingMatrix, k: int = 5, seed: int = 0) -> CentroidSet:
    """Lloyd's algorithm with k-means++ init on unit-normalized rows.

    Converges when the assignment vector is stable or after MAX_ITER
    iterations. Empty clusters are repaired by seizing the point farthest
    from its assigned centroid.
    """
    n = len(reference)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k={k} exceeds number of points ({n})")
    points = unit_rows(reference.vectors).astype(np.float64)
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(points, k, rng)

    labels = None
    history = []
    for _ in range(MAX_ITER):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        # repair empty clusters: seize the point currently farthest from its
        # centroid (each point seized at most once per iteration)
        seized = np.zeros(n, dtype=bool)
        for c in range(k):
            if not (new_labels == c).any():
                own_d2 = d2[np.arange(n), new_labels].copy()
                own_d2[seized] = -np.inf
                farthest = int(own_d2.argmax())
                new_labels[farthest] = c
                seized[farthest] = True
                d2[farthest, :] = np.inf
                d2[farthest, c] = 0.0
        history.append(float(d2[np.arange(n), new_labels].sum()))
        if labels is not None and (new_labels == labels).all():
            labels = new_labels
            break
        labels = new_labels
        for c in range(k):
            centers[c] = points[labels == c].mean(axis=0)

    inertia = float(((points - centers[labels]) ** 2).sum())
    assignments = {seg_id: int(lab) for seg_id, lab in zip(reference.ids, labels)}
    return CentroidSet(centroids=centers, k=k, assignments=assignments,
                       inertia=inertia, seed=seed, inertia_history=tuple(history))


def retrieve_topk(candidates: EmbeddingMatrix, centroids: CentroidSet,
                  top_k: int) -> list:
    """Rank candidates by max cosine similarity to any centroid.

    Deterministic: ties break by segment id ascending; equals an exhaustive
    sort over the full cosine matrix.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    if candidates.dim != centroids.centroids.shape[1]:
        raise ValueError("candidate/centroid dimension mismatch")
    cand = unit_rows(candidates.vectors).astype(np.float64)
    cents = unit_rows(centroids.centroids).astype(np.float64)
    sims = cand @ cents.T  # (n, k)
    best = sims.argmax(axis=1)
    scores = sims[np.arange(len(cand)), best]
    order = sorted(range(len(cand)),
                   key=lambda i: (-scores[i], candidates.ids[i]))[:top_k]
    return [
        RankedCandidate(segment_id=candidates.ids[i], score=float(scores[i]),
                        best_centroid=int(best[i]), rank=rank)
        for rank, i in enumerate(order, start=1)
    ]


def write_ranked(ranked, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for rc in ranked:
            fh.write(json.dumps({
                "segment_id": rc.segment_id,
                "score": rc.score,
                "best_centroid": rc.best_centroid,
                "rank": rc.rank,
            }) + "\n")


def read_ranked(path) -> list:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            out.append(RankedCandidate(segment_id=d["segment_id"], score=d["score"],
                                       best_centroid=d["best_centroid"], rank=d["rank"]))
    return out
