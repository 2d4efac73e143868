"""Immutable directed weighted social graph with CSR adjacency in both directions.

External node identifiers are re-indexed to dense integers at load time; the
id dictionary travels with the graph and is persisted in binary snapshots.
The graph is never mutated after construction, so it is safe to share across
threads and processes.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import GraphParseError, GraphValidationError, ParameterError

SNAPSHOT_MAGIC = b"CFG1"
SNAPSHOT_VERSION = 1

WEIGHT_POLICIES = ("reject_out_of_range", "clamp", "minmax_rescale")

# Smallest weight produced by the clamp policy; keeps weights inside (0, 1].
CLAMP_FLOOR = 1e-6


@dataclass(frozen=True)
class EgoNetwork:
    """Source neighborhood of a target: its sources and the edges among them.

    The target itself is not a node of the ego network.
    """

    target: int
    nodes: np.ndarray          # sorted source ids
    edge_src: np.ndarray
    edge_dst: np.ndarray
    edge_weight: np.ndarray

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edge_src)


class Graph:
    """Directed weighted graph; adjacency rows are sorted by neighbor id."""

    def __init__(self, n, fwd_indptr, fwd_indices, fwd_weights,
                 rev_indptr, rev_indices, rev_weights, ids):
        self.n = int(n)
        self.m = int(len(fwd_indices))
        self.fwd_indptr = fwd_indptr
        self.fwd_indices = fwd_indices
        self.fwd_weights = fwd_weights
        self.rev_indptr = rev_indptr
        self.rev_indices = rev_indices
        self.rev_weights = rev_weights
        self.ids = list(ids)
        self.id_to_index = {ext: i for i, ext in enumerate(self.ids)}

    # -- neighborhood access -------------------------------------------------

    def _check_node(self, v: int) -> None:
        if not (0 <= v < self.n):
            raise IndexError(f"node {v} out of range [0, {self.n})")

    def target_neighbors(self, s: int):
        """Nodes t with (s, t) in E, with weights, sorted by id."""
        self._check_node(s)
        lo, hi = self.fwd_indptr[s], self.fwd_indptr[s + 1]
        return self.fwd_indices[lo:hi], self.fwd_weights[lo:hi]

    def source_neighbors(self, t: int):
        """Nodes s with (s, t) in E, with weights, sorted by id."""
        self._check_node(t)
        lo, hi = self.rev_indptr[t], self.rev_indptr[t + 1]
        return self.rev_indices[lo:hi], self.rev_weights[lo:hi]

    def out_degree(self, s: int) -> int:
        self._check_node(s)
        return int(self.fwd_indptr[s + 1] - self.fwd_indptr[s])

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.fwd_indptr)

    def edge_weight(self, s: int, t: int):
        """Weight of (s, t), or None when the edge does not exist."""
        self._check_node(s)
        self._check_node(t)
        lo, hi = self.fwd_indptr[s], self.fwd_indptr[s + 1]
        pos = lo + np.searchsorted(self.fwd_indices[lo:hi], t)
        if pos < hi and self.fwd_indices[pos] == t:
            return float(self.fwd_weights[pos])
        return None

    def has_edge(self, s: int, t: int) -> bool:
        return self.edge_weight(s, t) is not None

    def ego_network(self, t: int) -> EgoNetwork:
        """Sources of t plus every directed edge among them (t excluded)."""
        self._check_node(t)
        nodes, _ = self.source_neighbors(t)
        nodes = np.array(nodes, dtype=np.int64)
        e_src, e_dst, e_w = [], [], []
        for u in nodes:
            row, w = self.target_neighbors(int(u))
            if len(row) == 0:
                continue
            pos = np.clip(np.searchsorted(nodes, row), 0, len(nodes) - 1)
            mask = nodes[pos] == row
            if np.any(mask):
                e_src.append(np.full(int(mask.sum()), u, dtype=np.int64))
                e_dst.append(row[mask].astype(np.int64))
                e_w.append(w[mask])
        if e_src:
            edge_src = np.concatenate(e_src)
            edge_dst = np.concatenate(e_dst)
            edge_weight = np.concatenate(e_w)
        else:
            edge_src = np.zeros(0, dtype=np.int64)
            edge_dst = np.zeros(0, dtype=np.int64)
            edge_weight = np.zeros(0, dtype=np.float64)
        return EgoNetwork(int(t), nodes, edge_src, edge_dst, edge_weight)

    # -- persistence ---------------------------------------------------------

    def _payload(self) -> bytes:
        ids_blob = json.dumps(self.ids, separators=(",", ":")).encode("utf-8")
        parts = [
            struct.pack("<QQ", self.n, self.m),
            np.asarray(self.fwd_indptr, dtype=np.int64).tobytes(),
            np.asarray(self.fwd_indices, dtype=np.int64).tobytes(),
            np.asarray(self.fwd_weights, dtype=np.float64).tobytes(),
            np.asarray(self.rev_indptr, dtype=np.int64).tobytes(),
            np.asarray(self.rev_indices, dtype=np.int64).tobytes(),
            np.asarray(self.rev_weights, dtype=np.float64).tobytes(),
            struct.pack("<Q", len(ids_blob)),
            ids_blob,
        ]
        return b"".join(parts)

    def content_hash(self) -> str:
        """Stable hex digest of the full graph content."""
        return hashlib.sha256(self._payload()).hexdigest()

    def save_snapshot(self, path) -> None:
        with open(path, "wb") as f:
            f.write(SNAPSHOT_MAGIC)
            f.write(struct.pack("<I", SNAPSHOT_VERSION))
            f.write(self._payload())

    @classmethod
    def load_snapshot(cls, path) -> "Graph":
        with open(path, "rb") as f:
            blob = f.read()
        if blob[:4] != SNAPSHOT_MAGIC:
            raise GraphValidationError(f"{path}: not a graph snapshot")
        (version,) = struct.unpack_from("<I", blob, 4)
        if version != SNAPSHOT_VERSION:
            raise GraphValidationError(f"{path}: unsupported snapshot version {version}")
        off = 8
        n, m = struct.unpack_from("<QQ", blob, off)
        off += 16

        def take(count, dtype):
            nonlocal off
            arr = np.frombuffer(blob, dtype=dtype, count=count, offset=off).copy()
            off += arr.nbytes
            return arr

        fwd_indptr = take(n + 1, np.int64)
        fwd_indices = take(m, np.int64)
        fwd_weights = take(m, np.float64)
        rev_indptr = take(n + 1, np.int64)
        rev_indices = take(m, np.int64)
        rev_weights = take(m, np.float64)
        (ids_len,) = struct.unpack_from("<Q", blob, off)
        off += 8
        ids = json.loads(blob[off:off + ids_len].decode("utf-8"))
        return cls(n, fwd_indptr, fwd_indices, fwd_weights,
                   rev_indptr, rev_indices, rev_weights, ids)


def _build_csr(n, src, dst, w):
    order = np.lexsort((dst, src))
    src, dst, w = src[order], dst[order], w[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst.astype(np.int64), w.astype(np.float64)


def build_graph(src, dst, weights, ids) -> Graph:
    """Assemble a Graph from dense-indexed edge arrays.

    Raises GraphValidationError on self-loops, duplicate edges or weights
    outside (0, 1].
    """
    n = len(ids)
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    if np.any(src == dst):
        v = int(src[np.argmax(src == dst)])
        raise GraphValidationError(f"self-loop on node {ids[v]!r}")
    if len(weights) and (np.any(weights <= 0.0) or np.any(weights > 1.0)):
        raise GraphValidationError("edge weight outside (0, 1]")
    key = src * n + dst
    if len(np.unique(key)) != len(key):
        raise GraphValidationError("duplicate edge in input")
    fwd_indptr, fwd_indices, fwd_weights = _build_csr(n, src, dst, weights)
    rev_indptr, rev_indices, rev_weights = _build_csr(n, dst, src, weights)
    return Graph(n, fwd_indptr, fwd_indices, fwd_weights,
                 rev_indptr, rev_indices, rev_weights, ids)


def graph_from_edges(edges, n=None) -> Graph:
    """Convenience constructor from an iterable of (src, dst, weight) int triples."""
    edges = list(edges)
    src = np.array([e[0] for e in edges], dtype=np.int64)
    dst = np.array([e[1] for e in edges], dtype=np.int64)
    w = np.array([e[2] for e in edges], dtype=np.float64)
    if n is None:
        n = int(max(src.max(initial=-1), dst.max(initial=-1))) + 1 if edges else 0
    ids = [str(i) for i in range(n)]
    return build_graph(src, dst, w, ids)


def apply_weight_policy(raw: np.ndarray, policy: str, eps: float = 1e-6) -> np.ndarray:
    """Map raw weights into (0, 1] according to the configured policy."""
    if policy not in WEIGHT_POLICIES:
        raise ParameterError(f"unknown weight policy {policy!r}")
    raw = np.asarray(raw, dtype=np.float64)
    if policy == "reject_out_of_range":
        bad = (raw <= 0.0) | (raw > 1.0)
        if np.any(bad):
            raise GraphValidationError(
                f"weight {raw[bad][0]} outside (0, 1] under reject policy")
        return raw
    if policy == "clamp":
        return np.clip(raw, CLAMP_FLOOR, 1.0)
    # minmax_rescale: raw interaction counts mapped into (0, 1], order-preserving
    if len(raw) == 0:
        return raw
    lo, hi = raw.min(), raw.max()
    return (raw - lo + eps) / (hi - lo + eps)


def load_graph(path, weight_policy: str = "reject_out_of_range", eps: float = 1e-6) -> Graph:
    """Load a whitespace-separated `src dst weight` edge list.

    Lines starting with `#` and blank lines are skipped.  External ids are
    mapped to dense integers in first-appearance order, which makes repeated
    loads of the same file yield identical graphs.
    """
    ext_src, ext_dst, raw_w = [], [], []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise GraphParseError(
                    f"expected 'src dst weight', got {line!r}", line_no)
            try:
                w = float(parts[2])
            except ValueError:
                raise GraphParseError(f"bad weight {parts[2]!r}", line_no) from None
            ext_src.append(parts[0])
            ext_dst.append(parts[1])
            raw_w.append(w)

    ids: list[str] = []
    index: dict[str, int] = {}
    for ext in ext_src:
        if ext not in index:
            index[ext] = len(ids)
            ids.append(ext)
    for ext in ext_dst:
        if ext not in index:
            index[ext] = len(ids)
            ids.append(ext)

    src = np.array([index[e] for e in ext_src], dtype=np.int64)
    dst = np.array([index[e] for e in ext_dst], dtype=np.int64)
    w = apply_weight_policy(np.array(raw_w, dtype=np.float64), weight_policy, eps)
    return build_graph(src, dst, w, ids)
