"""Node embeddings and pairwise similarity.

Walk corpora come from biased second-order random walks; a small skip-gram
trainer with negative sampling turns them into vectors.  Vectors can also be
imported from a text file when they were produced elsewhere.  Pairwise
similarities are min-max normalized over a declared pair population so every
emitted value lands in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import GraphParseError, ParameterError, StateError, TrainingError
from .graph import Graph


@dataclass(frozen=True)
class WalkConfig:
    walk_length: int = 10
    walks_per_node: int = 5
    p: float = 1.0  # return parameter
    q: float = 1.0  # in-out parameter
    seed: int = 0

    def validate(self) -> None:
        if self.walk_length < 2:
            raise ParameterError("walk_length must be >= 2")
        if self.walks_per_node < 1:
            raise ParameterError("walks_per_node must be >= 1")
        if self.p <= 0 or self.q <= 0:
            raise ParameterError("p and q must be positive")


@dataclass(frozen=True)
class EmbeddingTable:
    vectors: np.ndarray  # (n, dim)
    provenance: str

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def walk_step_distribution(g: Graph, prev: int | None, cur: int,
                           p: float = 1.0, q: float = 1.0):
    """Candidate targets of `cur` with their biased, normalized probabilities.

    Pure-python reference of the bias used by the walk kernel: weight/p back
    to the predecessor, plain weight to common target neighbors of the
    predecessor, weight/q elsewhere.
    """
    row, w = g.target_neighbors(cur)
    if len(row) == 0:
        return row, np.zeros(0)
    weights = np.array(w, dtype=np.float64)
    if prev is not None:
        prev_row, _ = g.target_neighbors(prev)
        prev_set = set(int(x) for x in prev_row)
        for i, x in enumerate(row):
            if int(x) == prev:
                weights[i] /= p
            elif int(x) in prev_set:
                pass
            else:
                weights[i] /= q
    return row, weights / weights.sum()


def generate_walks(g: Graph, cfg: WalkConfig) -> np.ndarray:
    """walks_per_node truncated walks of walk_length from every node.

    Returns an int64 matrix; rows are walks, unused tail slots are -1.
    """
    cfg.validate()
    return _kernels.generate_walks_kernel(
        g.fwd_indptr, g.fwd_indices, g.fwd_weights,
        cfg.walk_length, cfg.walks_per_node, cfg.p, cfg.q, cfg.seed)


def write_walks(walks: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for row in walks:
            nodes = row[row >= 0]
            f.write(" ".join(str(int(v)) for v in nodes) + "\n")


def train_embeddings(corpus: np.ndarray, n_nodes: int, dim: int = 32,
                     window: int = 5, negatives: int = 5, epochs: int = 3,
                     lr: float = 0.025, seed: int = 0) -> EmbeddingTable:
    """Skip-gram-with-negative-sampling training over a walk corpus.

    Deterministic for a fixed seed: initialization, negative sampling and the
    update order are all derived from it.
    """
    if corpus.size == 0 or not np.any(corpus >= 0):
        raise TrainingError("empty walk corpus")
    if dim < 2:
        raise ParameterError("embedding dimension must be >= 2")
    rng = np.random.default_rng(seed)
    vec_in = ((rng.random((n_nodes, dim)) - 0.5) / dim).astype(np.float64)
    vec_out = np.zeros((n_nodes, dim), dtype=np.float64)

    tokens = corpus[corpus >= 0]
    counts = np.bincount(tokens, minlength=n_nodes).astype(np.float64)
    noise = counts ** 0.75
    total = noise.sum()
    table_size = 1 << 17
    # cumulative fill keeps the table deterministic and roughly proportional
    cum = np.cumsum(noise) / total
    neg_table = np.searchsorted(cum, (np.arange(table_size) + 0.5) / table_size)
    neg_table = neg_table.astype(np.int64)

    vectors = _kernels.sgns_train_kernel(
        np.ascontiguousarray(corpus, dtype=np.int64), vec_in, vec_out,
        window, negatives, epochs, lr, neg_table, seed)
    return EmbeddingTable(vectors, provenance=f"trained(seed={seed})")


def export_embeddings(table: EmbeddingTable, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for i in range(table.n):
            vals = " ".join(repr(float(x)) for x in table.vectors[i])
            f.write(f"{i} {vals}\n")


def import_embeddings(path, n_nodes: int) -> EmbeddingTable:
    """Read `node v1 .. vdim` rows covering every node exactly once."""
    rows: dict[int, np.ndarray] = {}
    dim = None
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                node = int(parts[0])
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError:
                raise GraphParseError("malformed embedding row", line_no) from None
            if dim is None:
                dim = len(vec)
                if dim < 1:
                    raise GraphParseError("embedding row without values", line_no)
            elif len(vec) != dim:
                raise GraphParseError(
                    f"ragged row: expected {dim} values, got {len(vec)}", line_no)
            if node in rows:
                raise GraphParseError(f"duplicate node {node}", line_no)
            rows[node] = vec
    missing = [v for v in range(n_nodes) if v not in rows]
    if missing:
        raise StateError(f"embedding file misses {len(missing)} nodes, first {missing[0]}")
    vectors = np.vstack([rows[v] for v in range(n_nodes)])
    return EmbeddingTable(vectors, provenance=f"imported({path})")


class SimilarityProvider:
    """Min-max normalized cosine or euclidean similarity in [0, 1].

    Must be fitted over the pair population of the current run before any
    similarity is emitted; a degenerate fit (max == min) maps every pair to
    the neutral value 0.5.
    """

    def __init__(self, table: EmbeddingTable, kind: str = "cosine"):
        if kind not in ("cosine", "euclidean"):
            raise ParameterError(f"unknown similarity kind {kind!r}")
        self.table = table
        self.kind = kind
        self._min = None
        self._max = None

    def raw(self, i: int, j: int) -> float:
        a, b = self.table.vectors[i], self.table.vectors[j]
        if self.kind == "cosine":
            na, nb = np.linalg.norm(a), np.linalg.norm(b)
            if na == 0.0 or nb == 0.0:
                return 0.0
            return float(np.dot(a, b) / (na * nb))
        return float(np.linalg.norm(a - b))

    def raw_many(self, pairs_i: np.ndarray, pairs_j: np.ndarray) -> np.ndarray:
        V = self.table.vectors
        A, B = V[pairs_i], V[pairs_j]
        if self.kind == "cosine":
            na = np.linalg.norm(A, axis=1)
            nb = np.linalg.norm(B, axis=1)
            denom = na * nb
            num = np.einsum("ij,ij->i", A, B)
            out = np.zeros(len(denom))
            nz = denom > 0
            out[nz] = num[nz] / denom[nz]
            return out
        return np.linalg.norm(A - B, axis=1)

    def fit(self, pairs_i, pairs_j) -> "SimilarityProvider":
        pairs_i = np.asarray(pairs_i, dtype=np.int64)
        pairs_j = np.asarray(pairs_j, dtype=np.int64)
        if len(pairs_i) == 0:
            raise StateError("cannot fit similarity statistics over an empty population")
        raw = self.raw_many(pairs_i, pairs_j)
        self._min = float(raw.min())
        self._max = float(raw.max())
        return self

    @property
    def fitted(self) -> bool:
        return self._min is not None

    def _normalize(self, raw):
        if self._min is None:
            raise StateError("similarity provider used before fit()")
        span = self._max - self._min
        scaled = np.where(span == 0.0, 0.5, (np.asarray(raw) - self._min) / (span if span else 1.0))
        scaled = np.clip(scaled, 0.0, 1.0)
        if self.kind == "euclidean":
            scaled = 1.0 - scaled  # large distance means low similarity
        return scaled

    def similarity(self, i: int, j: int) -> float:
        return float(self._normalize(self.raw(i, j)))

    def similarity_many(self, pairs_i, pairs_j) -> np.ndarray:
        pairs_i = np.asarray(pairs_i, dtype=np.int64)
        pairs_j = np.asarray(pairs_j, dtype=np.int64)
        return np.asarray(self._normalize(self.raw_many(pairs_i, pairs_j)), dtype=np.float64)
