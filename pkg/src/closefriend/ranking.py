"""Top-k target recommendation and the end-to-end event metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boosting import TreeEnsemble
from .errors import ParameterError
from .graph import Graph


@dataclass(frozen=True)
class FeedWindow:
    source: int
    targets: tuple   # (target, score) pairs, scores non-increasing
    k: int


def rank_candidates(candidates, scores, k: int):
    """Order candidates by descending score, ascending id on ties; keep k."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    order = sorted(range(len(candidates)),
                   key=lambda i: (-scores[i], candidates[i]))
    return tuple((int(candidates[i]), float(scores[i])) for i in order[:k])


def recommend_topk(g: Graph, model: TreeEnsemble, source: int, target_set,
                   k: int, pair_features: dict) -> FeedWindow:
    """Feed window of the k best-scoring eligible target neighbors of source.

    `pair_features` maps (source, target) to the same feature vectors the
    model was trained on, so window scores equal model predictions exactly.
    Sources without eligible targets get an empty window.
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    tset = set(int(t) for t in target_set)
    nbrs, _ = g.target_neighbors(source)
    candidates = [int(t) for t in nbrs if int(t) in tset
                  and (int(source), int(t)) in pair_features]
    if not candidates:
        return FeedWindow(int(source), (), k)
    X = np.vstack([pair_features[(int(source), t)] for t in candidates])
    scores = model.predict_margin(X)
    return FeedWindow(int(source), rank_candidates(candidates, scores, k), k)


def recommend_all(g: Graph, model: TreeEnsemble, sources, target_set, k: int,
                  pair_features: dict) -> list[FeedWindow]:
    return [recommend_topk(g, model, s, target_set, k, pair_features)
            for s in sorted(int(s) for s in sources)]


def write_recommendations(windows, path, manifest_name: str | None = None) -> None:
    """`source target rank score` rows, one per recommended pair."""
    with open(path, "w", encoding="utf-8") as f:
        if manifest_name:
            f.write(f"# manifest: {manifest_name}\n")
        for w in windows:
            for rank, (t, score) in enumerate(w.targets, start=1):
                f.write(f"{w.source} {t} {rank} {repr(score)}\n")


@dataclass(frozen=True)
class E2EReport:
    exposed_sources: int
    adoptions: int

    @property
    def rate(self) -> float:
        return self.adoptions / self.exposed_sources


def e2e_rate(outcome) -> float:
    """Adoptions over sources that saw the event.

    A source adopting through several targets counts once per adoption, so
    the rate may exceed 1.
    """
    exposed = {s for s, _ in outcome.exposures}
    if not exposed:
        raise ParameterError("E2E rate undefined with zero exposed sources")
    return len(outcome.adoptions) / len(exposed)
