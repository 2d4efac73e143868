"""PageRank and personalized PageRank via the truncated restart series.

The score vector is the series  sum_t alpha * (1-alpha)^t * s @ P^t,
truncated once the remaining walk mass (1-alpha)^t drops below eps.  The
transition matrix is degree-uniform (P[i, j] = 1/d_i for each edge i->j);
rows of dangling nodes are zero, so their walk mass is absorbed rather than
teleported.  Edge weights deliberately do not enter the transition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import ParameterError
from .graph import Graph
from .groups import CandidateGroup


@dataclass(frozen=True)
class PageRankVector:
    values: np.ndarray
    alpha: float
    source: int | None = None  # None for the global vector

    @property
    def is_global(self) -> bool:
        return self.source is None


def _check_params(alpha: float, eps: float) -> None:
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must be in (0, 1), got {alpha}")
    if not (eps > 0.0):
        raise ParameterError(f"eps must be positive, got {eps}")


def transition_matrix(g: Graph) -> sparse.csr_matrix:
    """Row-stochastic (up to dangling rows) degree-uniform transition matrix."""
    deg = g.out_degrees().astype(np.float64)
    data = np.ones(g.m, dtype=np.float64)
    starts = np.repeat(np.arange(g.n), np.diff(g.fwd_indptr))
    data /= deg[starts]
    return sparse.csr_matrix((data, g.fwd_indices, g.fwd_indptr), shape=(g.n, g.n))


def _series(P: sparse.csr_matrix, s: np.ndarray, alpha: float, eps: float) -> np.ndarray:
    acc = np.zeros_like(s)
    cur = s.copy()
    decay = 1.0  # (1 - alpha)^t
    while decay >= eps:
        acc += alpha * decay * cur
        cur = cur @ P
        decay *= 1.0 - alpha
        if not cur.any():
            break
    return acc


def pagerank(g: Graph, alpha: float = 0.15, eps: float = 1e-6) -> PageRankVector:
    """Global PageRank with the uniform starting vector s[i] = 1/n."""
    _check_params(alpha, eps)
    s = np.full(g.n, 1.0 / g.n if g.n else 0.0)
    return PageRankVector(_series(transition_matrix(g), s, alpha, eps), alpha)


def personalized_pagerank(g: Graph, source: int, alpha: float = 0.15,
                          eps: float = 1e-6) -> PageRankVector:
    """PPR from `source`: the stop distribution of the random walk with restart."""
    _check_params(alpha, eps)
    g._check_node(source)
    s = np.zeros(g.n)
    s[source] = 1.0
    values = _series(transition_matrix(g), s, alpha, eps)
    return PageRankVector(values, alpha, source=int(source))


def personalized_pagerank_many(g: Graph, sources, alpha: float = 0.15,
                               eps: float = 1e-6) -> dict:
    """PPR vectors for several sources, sharing one transition matrix.

    Batches sources into dense blocks so the sparse matmul amortizes; output
    is identical to per-source personalized_pagerank calls.
    """
    _check_params(alpha, eps)
    sources = [int(s) for s in sources]
    P = transition_matrix(g).T.tocsr()  # iterate columns: x_next = P^T @ x
    steps = max(1, math.ceil(math.log(eps) / math.log(1.0 - alpha)))
    out = {}
    block = 64
    for i in range(0, len(sources), block):
        batch = sources[i:i + block]
        X = np.zeros((g.n, len(batch)))
        for j, s in enumerate(batch):
            X[s, j] = 1.0
        acc = np.zeros_like(X)
        decay = 1.0
        for _ in range(steps):
            acc += alpha * decay * X
            X = P @ X
            decay *= 1.0 - alpha
            if not X.any():
                break
        for j, s in enumerate(batch):
            out[s] = acc[:, j]
    return out


def group_pagerank(pr: PageRankVector, grp: CandidateGroup, agg: str = "mean") -> float:
    """Aggregate global PageRank over the group's non-target members."""
    if not pr.is_global:
        raise ParameterError("group_pagerank requires the global vector")
    if grp.size < 2:
        raise ParameterError("candidate group must contain a source besides the target")
    vals = [float(pr.values[j]) for j in grp.sources]
    total = float(sum(vals))
    if agg == "sum":
        return total
    if agg == "mean":
        return total / len(vals)
    raise ParameterError(f"unknown aggregation {agg!r}")


def group_personalized_pagerank(g: Graph, grp: CandidateGroup, alpha: float = 0.15,
                                eps: float = 1e-6, agg: str = "mean",
                                ppr_values: np.ndarray | None = None) -> float:
    """Aggregate PPR from the group's target over its non-target members.

    `ppr_values` may carry a precomputed PPR vector for the target to avoid
    recomputation when many groups share one target.
    """
    if grp.size < 2:
        raise ParameterError("candidate group must contain a source besides the target")
    if ppr_values is None:
        ppr_values = personalized_pagerank(g, grp.target, alpha, eps).values
    vals = [float(ppr_values[j]) for j in grp.sources]
    total = float(sum(vals))
    if agg == "sum":
        return total
    if agg == "mean":
        return total / len(vals)
    raise ParameterError(f"unknown aggregation {agg!r}")
