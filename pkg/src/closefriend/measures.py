"""Per-pair closeness measures: the six group-identity dimensions with their
variants, plus the individual- and group-level baselines.

compute_feature_table is the batch engine: group-level quantities are
computed once per (target, group) and fanned out to every member pair, and
rows come back sorted by (target, source) so feature files are reproducible.
compute_all wraps the same engine into per-pair records.

Intra-group tightness only ever touches weighted pairs (pairs joined by an
edge) plus one vector-sum pass for the unweighted similarity component, so
per-group cost stays linear in the ego-network edge count even for large
groups.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .embedding import EmbeddingTable, SimilarityProvider
from .errors import LookupError_, ParameterError
from .graph import Graph
from .groups import CandidateGroup, GroupAssignment, categorize_target
from .pagerank import pagerank, personalized_pagerank_many

MEASURE_NAMES = (
    "tie", "com", "ppr", "n2v_cos", "n2v_euc", "gt", "gd", "cc_count", "gs",
    "gpr", "gpr_sum", "gppr", "gppr_sum",
    "ugt", "ugt_euc", "ugt_sum", "ugt_w", "ugt_delta",
    "igt", "igt_euc", "igt_sum", "igt_w", "igt_delta",
)

FLAG_NAMES = ("ugt_zero_weight", "igt_degenerate")

SIT_FEATURES = ("cc_count", "gs", "gpr", "gppr", "ugt", "igt")
INDIVIDUAL_FEATURES = ("tie", "com", "ppr", "n2v_cos", "n2v_euc")

FEATURE_SETS = {
    "sit": SIT_FEATURES,
    "individual": INDIVIDUAL_FEATURES,
    "all": MEASURE_NAMES,
}


@dataclass(frozen=True)
class MeasureRecord:
    source: int
    target: int
    group_index: int
    values: dict
    flags: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MeasureConfig:
    alpha: float = 0.15
    eps: float = 1e-6
    # "power" evaluates the exact truncated series; "push" runs local push;
    # "auto" switches to push above the node threshold
    ppr_method: str = "auto"
    push_threshold: float = 1e-5
    power_node_limit: int = 5000


# -- individual measures ------------------------------------------------------

def tie_strength(g: Graph, s: int, t: int) -> float:
    w = g.edge_weight(s, t)
    if w is None:
        raise LookupError_(f"edge ({s}, {t}) not present")
    return w


def union_adjacency(g: Graph):
    """CSR of each node's combined (in + out) neighbor set, sorted, deduplicated."""
    out_deg = np.diff(g.fwd_indptr)
    in_deg = np.diff(g.rev_indptr)
    src = np.concatenate([
        np.repeat(np.arange(g.n, dtype=np.int64), out_deg),
        np.repeat(np.arange(g.n, dtype=np.int64), in_deg),
    ])
    nbr = np.concatenate([g.fwd_indices, g.rev_indices])
    order = np.lexsort((nbr, src))
    src, nbr = src[order], nbr[order]
    if len(src):
        keep = np.ones(len(src), dtype=bool)
        keep[1:] = (src[1:] != src[:-1]) | (nbr[1:] != nbr[:-1])
        src, nbr = src[keep], nbr[keep]
    indptr = np.zeros(g.n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, nbr.astype(np.int64)


def common_neighbors(g: Graph, s: int, t: int) -> int:
    """|N(s) ∩ N(t)| where N is the union of in- and out-neighborhoods."""
    def nbrs(v):
        out_ids, _ = g.target_neighbors(v)
        in_ids, _ = g.source_neighbors(v)
        return set(int(x) for x in out_ids) | set(int(x) for x in in_ids)
    return len(nbrs(s) & nbrs(t))


# -- group-level baselines ----------------------------------------------------

def pair_weight(g: Graph, t: int, j: int) -> float:
    """w_{t,j}: the (t -> j) weight when present, else (j -> t), else 0."""
    w = g.edge_weight(t, j)
    if w is None:
        w = g.edge_weight(j, t)
    return 0.0 if w is None else w


def user_group_tie(g: Graph, grp: CandidateGroup) -> float:
    """Total tie strength between the target and the other group members."""
    if grp.size < 2:
        raise ParameterError("group must contain a source besides the target")
    return float(sum(pair_weight(g, grp.target, j) for j in grp.sources))


def group_density(g: Graph, grp: CandidateGroup) -> float:
    """Sum of in-group directed edge weights over |C|(|C|-1) possible edges."""
    if grp.size < 2:
        raise ParameterError("group must contain a source besides the target")
    members = set(grp.members)
    total = 0.0
    for u in grp.members:
        row, w = g.target_neighbors(u)
        for x, wx in zip(row, w):
            if int(x) in members:
                total += float(wx)
    return total / (grp.size * (grp.size - 1))


def multi_membership(assignment: GroupAssignment) -> int:
    return assignment.num_groups


def inclusiveness(grp: CandidateGroup) -> int:
    return grp.size


# -- tightness measures -------------------------------------------------------

def _intra_weights(g: Graph, pivot: int, others: list):
    """Tie weights from pivot to each member of `others` (0 when no edge)."""
    return np.array([pair_weight(g, pivot, j) for j in others])


def _weighted_similarity(g: Graph, pivot: int, others, sim: SimilarityProvider):
    """(weighted mean, weighted sum, mean weight, mean similarity, zero flag)."""
    others = list(others)
    if not others:
        return 0.0, 0.0, 0.0, 0.0, True
    w = _intra_weights(g, pivot, others)
    d = sim.similarity_many(np.full(len(others), pivot, dtype=np.int64),
                            np.array(others, dtype=np.int64))
    wsum = float(w.sum())
    weighted = float(np.dot(w, d))
    mean_w = wsum / len(others)
    mean_d = float(d.mean())
    if wsum == 0.0:
        return 0.0, weighted, mean_w, mean_d, True
    return weighted / wsum, weighted, mean_w, mean_d, False


def ugt(g: Graph, grp: CandidateGroup, sim: SimilarityProvider,
        agg: str = "mean") -> float:
    """Tie-weighted mean similarity between the target and group members."""
    mean, total, _, _, _ = _weighted_similarity(g, grp.target, grp.sources, sim)
    if agg == "sum":
        return total
    if agg == "mean":
        return mean
    raise ParameterError(f"unknown aggregation {agg!r}")


def ugt_parts(g: Graph, grp: CandidateGroup, sim: SimilarityProvider):
    """(mean, sum, w component, delta component, zero-weight flag)."""
    return _weighted_similarity(g, grp.target, grp.sources, sim)


def _group_edge_pairs(g: Graph, sources: list):
    """For each source, the other sources it shares a tie with, plus weights.

    Complexity is linear in the ego-network edge count: only pairs joined by
    a directed edge (either orientation) are materialized.
    """
    src_arr = np.array(sorted(sources), dtype=np.int64)
    nbrs: dict[int, dict] = {int(j): {} for j in sources}
    for j in src_arr:
        row, w = g.target_neighbors(int(j))
        if len(row) == 0:
            continue
        pos = np.clip(np.searchsorted(src_arr, row), 0, len(src_arr) - 1)
        mask = src_arr[pos] == row
        for x, wx in zip(row[mask], w[mask]):
            x = int(x)
            # pair_weight convention: the pivot's outgoing weight wins
            nbrs[int(j)][x] = float(wx)
            nbrs[x].setdefault(int(j), float(wx))
    return nbrs


def _mean_pairwise_cosine(vectors: np.ndarray, members: list) -> float:
    """Mean raw cosine over ordered distinct pairs via the vector-sum identity."""
    if len(members) < 2:
        return 0.0
    V = vectors[np.array(members, dtype=np.int64)]
    norms = np.linalg.norm(V, axis=1)
    nz = norms > 0
    U = np.zeros_like(V)
    U[nz] = V[nz] / norms[nz][:, None]
    total = np.linalg.norm(U.sum(axis=0)) ** 2 - float(nz.sum())
    cnt = len(members) * (len(members) - 1)
    return float(total) / cnt


def igt_parts(g: Graph, grp: CandidateGroup, sim: SimilarityProvider,
              cos_for_delta: SimilarityProvider | None = None):
    """Intra-group tightness and its variants.

    Each source acts as pivot over the remaining sources; a group with a
    single source carries no intra-group information and returns zeros with
    the degenerate flag set.  `cos_for_delta` supplies the similarity used by
    the unweighted delta component (defaults to `sim`).
    """
    sources = [int(j) for j in grp.sources]
    if len(sources) < 2:
        return 0.0, 0.0, 0.0, 0.0, True
    delta_sim = cos_for_delta or sim
    nbrs = _group_edge_pairs(g, sources)
    rest_count = len(sources) - 1
    phis, w_means = [], []
    for j in sources:
        adj = nbrs[j]
        if adj:
            others = np.fromiter(adj.keys(), dtype=np.int64, count=len(adj))
            w = np.fromiter(adj.values(), dtype=np.float64, count=len(adj))
            d = sim.similarity_many(np.full(len(others), j, dtype=np.int64), others)
            wsum = float(w.sum())
            phis.append(float(np.dot(w, d)) / wsum if wsum > 0 else 0.0)
            w_means.append(wsum / rest_count)
        else:
            phis.append(0.0)
            w_means.append(0.0)
    mean = float(np.mean(phis))
    total = float(np.sum(phis))
    raw_mean_cos = _mean_pairwise_cosine(delta_sim.table.vectors, sources)
    delta = float(delta_sim._normalize(raw_mean_cos))
    return mean, total, float(np.mean(w_means)), delta, False


def igt(g: Graph, grp: CandidateGroup, sim: SimilarityProvider,
        agg: str = "mean") -> float:
    mean, total, _, _, _ = igt_parts(g, grp, sim)
    if agg == "sum":
        return total
    if agg == "mean":
        return mean
    raise ParameterError(f"unknown aggregation {agg!r}")


# -- batch assembly -----------------------------------------------------------

def _similarity_population(g: Graph, pairs, assignments):
    """Pairs whose raw similarity statistics define the min-max fit.

    Evaluation pairs, target-member pairs, and the weighted intra-group pairs
    (source pairs joined by an edge).  Unweighted intra-group similarity uses
    the same fit, clipped into [0, 1].
    """
    seen = set()

    def add(a, b):
        seen.add((a, b) if a <= b else (b, a))

    for s, t in pairs:
        add(s, t)
    for asg in assignments.values():
        for grp in asg.groups:
            srcs = [int(j) for j in grp.sources]
            for j in srcs:
                add(grp.target, j)
            nbrs = _group_edge_pairs(g, srcs)
            for j, adj in nbrs.items():
                for k in adj:
                    add(j, k)
    pi = np.fromiter((a for a, _ in seen), dtype=np.int64, count=len(seen))
    pj = np.fromiter((b for _, b in seen), dtype=np.int64, count=len(seen))
    order = np.lexsort((pj, pi))
    return pi[order], pj[order]


def _ppr_lookup(g: Graph, queries: dict, cfg: MeasureConfig) -> dict:
    """queries: source -> sorted node list; returns (source, node) -> value."""
    sources = sorted(queries)
    out = {}
    use_power = cfg.ppr_method == "power" or (
        cfg.ppr_method == "auto" and g.n <= cfg.power_node_limit)
    if use_power:
        vecs = personalized_pagerank_many(g, sources, cfg.alpha, cfg.eps)
        for s in sources:
            for v in queries[s]:
                out[(s, v)] = float(vecs[s][v])
        return out
    qi = [0]
    qnodes = []
    for s in sources:
        qnodes.extend(queries[s])
        qi.append(len(qnodes))
    vals = _kernels.ppr_push_entries(
        g.fwd_indptr, g.fwd_indices,
        np.array(sources, dtype=np.int64),
        np.array(qi, dtype=np.int64),
        np.array(qnodes, dtype=np.int64),
        cfg.alpha, cfg.push_threshold)
    k = 0
    for s in sources:
        for v in queries[s]:
            out[(s, v)] = float(vals[k])
            k += 1
    return out


def compute_feature_table(g: Graph, pairs, table: EmbeddingTable,
                          cfg: MeasureConfig | None = None):
    """Batch measure computation.

    Returns (ordered pairs, group indices, value matrix over MEASURE_NAMES,
    flag matrix over FLAG_NAMES); rows sorted by (target, source).

    The engine is fully vectorized: one kernel pass labels every target's
    candidate groups and emits the intra-group edge instances, and all group
    aggregates are numpy reductions over the flattened membership, so cost
    stays near-linear in the touched ego-network edges.
    """
    cfg = cfg or MeasureConfig()
    pairs = [(int(s), int(t)) for s, t in pairs]
    if not pairs:
        return ([], np.zeros(0, dtype=np.int64),
                np.zeros((0, len(MEASURE_NAMES))),
                np.zeros((0, len(FLAG_NAMES)), dtype=np.int64))

    ordered = sorted(set(pairs), key=lambda p: (p[1], p[0]))
    arr_s = np.array([s for s, _ in ordered], dtype=np.int64)
    arr_t = np.array([t for _, t in ordered], dtype=np.int64)
    n = g.n

    # flat sorted (source * n + target) keys allow vectorized edge lookups
    fkey = (np.repeat(np.arange(n, dtype=np.int64), np.diff(g.fwd_indptr)) * n
            + g.fwd_indices)

    def edge_lookup(a, b):
        key = a * n + b
        if len(fkey) == 0:
            return np.zeros(len(key)), np.zeros(len(key), dtype=bool)
        pos = np.minimum(np.searchsorted(fkey, key), len(fkey) - 1)
        found = fkey[pos] == key
        return np.where(found, g.fwd_weights[pos], 0.0), found

    tie_w, tie_ok = edge_lookup(arr_s, arr_t)
    if not np.all(tie_ok):
        k = int(np.argmin(tie_ok))
        raise LookupError_(f"pair ({int(arr_s[k])}, {int(arr_t[k])}) is not an edge")

    targets = np.unique(arr_t)
    offs, labels, cc_counts, ins_p, ins_o, ins_w = _kernels.assign_groups_intra(
        g.rev_indptr, g.rev_indices, g.fwd_indptr, g.fwd_indices,
        g.fwd_weights, targets)

    # flattened membership: for each target its sources in ascending order
    mem_counts = np.diff(offs)
    mem_ti = np.repeat(np.arange(len(targets)), mem_counts)
    mem_t = targets[mem_ti]
    rev_pos = (np.repeat(g.rev_indptr[targets], mem_counts)
               + np.arange(offs[-1]) - np.repeat(offs[:-1], mem_counts))
    mem_j = g.rev_indices[rev_pos]
    mem_wb = g.rev_weights[rev_pos]          # w(j -> t), present by construction

    n_groups = int(cc_counts.sum())
    gbase = np.zeros(len(targets) + 1, dtype=np.int64)
    np.cumsum(cc_counts, out=gbase[1:])
    mem_gid = gbase[mem_ti] + labels
    n_src = np.bincount(mem_gid, minlength=n_groups).astype(np.float64)

    # target-member tie weights: outgoing (t -> j) wins, else (j -> t)
    mem_wf, mem_ff = edge_lookup(mem_t, mem_j)
    mem_wtj = np.where(mem_ff, mem_wf, mem_wb)

    # raw similarities (cosine and euclidean) for target-member pairs
    V = np.asarray(table.vectors, dtype=np.float64)
    norms = np.linalg.norm(V, axis=1)
    nzmask = norms > 0
    U = np.zeros_like(V)
    U[nzmask] = V[nzmask] / norms[nzmask][:, None]

    def raw_cos(a, b):
        denom = norms[a] * norms[b]
        num = np.einsum("ij,ij->i", V[a], V[b])
        out = np.zeros(len(denom))
        nz = denom > 0
        out[nz] = num[nz] / denom[nz]
        return out

    mem_rc = raw_cos(mem_t, mem_j)
    mem_re = np.linalg.norm(V[mem_t] - V[mem_j], axis=1)

    # ordered intra-group pivot pairs with the pivot's outgoing weight winning
    ap = np.concatenate([ins_p, ins_o])
    ao = np.concatenate([ins_o, ins_p])
    aw = np.concatenate([ins_w, ins_w])
    apri = np.concatenate([np.zeros(len(ins_p), dtype=np.int64),
                           np.ones(len(ins_o), dtype=np.int64)])
    order = np.lexsort((apri, ao, ap))
    ap, ao, aw = ap[order], ao[order], aw[order]
    if len(ap):
        keep = np.ones(len(ap), dtype=bool)
        keep[1:] = (ap[1:] != ap[:-1]) | (ao[1:] != ao[:-1])
        ap, ao, aw = ap[keep], ao[keep], aw[keep]
    ins_rc = raw_cos(mem_j[ap], mem_j[ao])
    ins_re = np.linalg.norm(V[mem_j[ap]] - V[mem_j[ao]], axis=1)

    # min-max statistics over the run's pair population (evaluation pairs are
    # target-member pairs themselves, so they add nothing new)
    cos = SimilarityProvider(table, "cosine")
    euc = SimilarityProvider(table, "euclidean")
    rc_all = np.concatenate([mem_rc, ins_rc])
    re_all = np.concatenate([mem_re, ins_re])
    cos._min, cos._max = float(rc_all.min()), float(rc_all.max())
    euc._min, euc._max = float(re_all.min()), float(re_all.max())
    span_c = cos._max - cos._min
    span_e = euc._max - euc._min

    def bsum(idx, weights):
        return np.bincount(idx, weights=weights, minlength=n_groups)

    # tie-weighted target-member similarity (population pairs never clip, so
    # normalization commutes with the weighted sums)
    s_w = bsum(mem_gid, mem_wtj)
    s_wrc = bsum(mem_gid, mem_wtj * mem_rc)
    s_wre = bsum(mem_gid, mem_wtj * mem_re)
    s_rc = bsum(mem_gid, mem_rc)
    safe_w = np.where(s_w > 0, s_w, 1.0)
    if span_c == 0.0:
        u_sum = 0.5 * s_w
        u_d = np.full(n_groups, 0.5)
    else:
        u_sum = (s_wrc - cos._min * s_w) / span_c
        u_d = (s_rc / n_src - cos._min) / span_c
    u_mean = np.where(s_w > 0, u_sum / safe_w, 0.0)
    if span_e == 0.0:
        ue_mean = np.where(s_w > 0, 0.5, 0.0)
    else:
        ue_mean = np.where(
            s_w > 0, 1.0 - (s_wre - euc._min * s_w) / (span_e * safe_w), 0.0)
    u_w = s_w / n_src

    # intra-group tightness: per-pivot weighted means, then group means
    m_total = len(mem_j)
    piv_w = np.bincount(ap, weights=aw, minlength=m_total)
    piv_wrc = np.bincount(ap, weights=aw * ins_rc, minlength=m_total)
    piv_wre = np.bincount(ap, weights=aw * ins_re, minlength=m_total)
    has = piv_w > 0
    safe_pw = np.where(has, piv_w, 1.0)
    phi_c = np.zeros(m_total)
    phi_e = np.zeros(m_total)
    if span_c == 0.0:
        phi_c[has] = 0.5
    else:
        phi_c[has] = (piv_wrc[has] - cos._min * piv_w[has]) / (span_c * safe_pw[has])
    if span_e == 0.0:
        phi_e[has] = 0.5
    else:
        phi_e[has] = 1.0 - (piv_wre[has] - euc._min * piv_w[has]) / (span_e * safe_pw[has])
    i_sum = bsum(mem_gid, phi_c)
    i_mean = i_sum / n_src
    ie_mean = bsum(mem_gid, phi_e) / n_src
    i_w = bsum(mem_gid, piv_w) / (n_src * np.maximum(n_src - 1.0, 1.0))

    # unweighted intra similarity: mean pairwise cosine via vector-sum identity
    perm = np.argsort(mem_gid, kind="stable")
    gstart = np.zeros(n_groups, dtype=np.int64)
    np.cumsum(n_src[:-1].astype(np.int64), out=gstart[1:])
    u_sums = np.add.reduceat(U[mem_j[perm]], gstart, axis=0)
    nz_cnt = bsum(mem_gid, nzmask[mem_j].astype(np.float64))
    pair_cnt = n_src * (n_src - 1.0)
    raw_mpc = np.where(
        pair_cnt > 0,
        (np.einsum("ij,ij->i", u_sums, u_sums) - nz_cnt)
        / np.maximum(pair_cnt, 1.0), 0.0)
    if span_c == 0.0:
        i_d = np.full(n_groups, 0.5)
    else:
        i_d = np.clip((raw_mpc - cos._min) / span_c, 0.0, 1.0)
    degenerate = n_src < 2
    for arr in (i_sum, i_mean, ie_mean, i_w, i_d):
        arr[degenerate] = 0.0
    i_flag = degenerate.astype(np.int64)
    u_flag = (s_w == 0).astype(np.int64)

    # group tie, density, centrality aggregates
    gt_sum = s_w
    intra_w = bsum(mem_gid[ins_p], ins_w) if len(ins_p) else np.zeros(n_groups)
    size = n_src + 1.0
    gd = (bsum(mem_gid, mem_wb) + bsum(mem_gid, np.where(mem_ff, mem_wf, 0.0))
          + intra_w) / (size * (size - 1.0))

    pr = pagerank(g, cfg.alpha, cfg.eps)
    gpr_sum = bsum(mem_gid, pr.values[mem_j])

    # one restart-series evaluation per distinct (walk source, queried node)
    qkey = np.unique(np.concatenate([arr_s * n + arr_t, mem_t * n + mem_j]))
    q_src = qkey // n
    q_dst = qkey % n
    u_sources, q_counts = np.unique(q_src, return_counts=True)
    qi = np.zeros(len(u_sources) + 1, dtype=np.int64)
    np.cumsum(q_counts, out=qi[1:])
    use_power = cfg.ppr_method == "power" or (
        cfg.ppr_method == "auto" and g.n <= cfg.power_node_limit)
    if use_power:
        vecs = personalized_pagerank_many(g, u_sources.tolist(),
                                          cfg.alpha, cfg.eps)
        qvals = np.empty(len(qkey))
        for si, s in enumerate(u_sources):
            sl = slice(qi[si], qi[si + 1])
            qvals[sl] = vecs[int(s)][q_dst[sl]]
    else:
        qvals = _kernels.ppr_push_entries(
            g.fwd_indptr, g.fwd_indices, u_sources.astype(np.int64),
            qi, q_dst.astype(np.int64), cfg.alpha, cfg.push_threshold)

    def ppr_of(a, b):
        return qvals[np.searchsorted(qkey, a * n + b)]

    gppr_sum = bsum(mem_gid, ppr_of(mem_t, mem_j))

    # fan group-level values out to the evaluation rows
    mem_key = mem_t * n + mem_j   # ascending: targets sorted, sources sorted
    row_pos = np.searchsorted(mem_key, arr_t * n + arr_s)
    rg = mem_gid[row_pos]
    gidx = labels[row_pos]
    cc_row = cc_counts[np.searchsorted(targets, arr_t)]

    und_indptr, und_indices = union_adjacency(g)
    com_counts = _kernels.count_common_sorted(und_indptr, und_indices, arr_s, arr_t)
    cos_vals = cos.similarity_many(arr_s, arr_t)
    euc_vals = euc.similarity_many(arr_s, arr_t)

    values = np.empty((len(ordered), len(MEASURE_NAMES)))
    values[:, 0] = tie_w
    values[:, 1] = com_counts
    values[:, 2] = ppr_of(arr_s, arr_t)
    values[:, 3] = cos_vals
    values[:, 4] = euc_vals
    values[:, 5] = gt_sum[rg]
    values[:, 6] = gd[rg]
    values[:, 7] = cc_row
    values[:, 8] = size[rg]
    values[:, 9] = (gpr_sum / n_src)[rg]
    values[:, 10] = gpr_sum[rg]
    values[:, 11] = (gppr_sum / n_src)[rg]
    values[:, 12] = gppr_sum[rg]
    values[:, 13] = np.clip(u_mean, 0.0, 1.0)[rg]
    values[:, 14] = np.clip(ue_mean, 0.0, 1.0)[rg]
    values[:, 15] = u_sum[rg]
    values[:, 16] = u_w[rg]
    values[:, 17] = np.clip(u_d, 0.0, 1.0)[rg]
    values[:, 18] = np.clip(i_mean, 0.0, 1.0)[rg]
    values[:, 19] = np.clip(ie_mean, 0.0, 1.0)[rg]
    values[:, 20] = i_sum[rg]
    values[:, 21] = i_w[rg]
    values[:, 22] = np.clip(i_d, 0.0, 1.0)[rg]
    flags = np.zeros((len(ordered), len(FLAG_NAMES)), dtype=np.int64)
    flags[:, 0] = u_flag[rg]
    flags[:, 1] = i_flag[rg]
    return ordered, gidx, values, flags


def compute_all(g: Graph, pairs, table: EmbeddingTable,
                cfg: MeasureConfig | None = None) -> list[MeasureRecord]:
    """Full MeasureRecord for every (source, target) pair (must all be edges)."""
    ordered, gidx, values, flags = compute_feature_table(g, pairs, table, cfg)
    records = []
    for idx, (s, t) in enumerate(ordered):
        records.append(MeasureRecord(
            s, t, int(gidx[idx]),
            {name: float(values[idx, k]) for k, name in enumerate(MEASURE_NAMES)},
            {name: bool(flags[idx, k]) for k, name in enumerate(FLAG_NAMES)}))
    return records


# -- feature file I/O ---------------------------------------------------------

def write_feature_file(path, ordered, gidx, values, flags,
                       manifest_name: str | None = None) -> None:
    """Text table: comment header, column-name row, one row per pair."""
    with open(path, "w", encoding="utf-8") as f:
        if manifest_name:
            f.write(f"# manifest: {manifest_name}\n")
        cols = ("source", "target", "group_index") + MEASURE_NAMES + FLAG_NAMES
        f.write(" ".join(cols) + "\n")
        for idx, (s, t) in enumerate(ordered):
            row = [str(s), str(t), str(int(gidx[idx]))]
            row += [repr(float(x)) for x in values[idx]]
            row += [str(int(x)) for x in flags[idx]]
            f.write(" ".join(row) + "\n")


def write_records(path, records, manifest_name: str | None = None) -> None:
    ordered = [(r.source, r.target) for r in records]
    gidx = np.array([r.group_index for r in records], dtype=np.int64)
    values = np.array([[r.values[n] for n in MEASURE_NAMES] for r in records])
    flags = np.array([[int(r.flags.get(n, False)) for n in FLAG_NAMES]
                      for r in records], dtype=np.int64)
    write_feature_file(path, ordered, gidx, values, flags, manifest_name)


def read_feature_file(path):
    """Returns (pairs, group indices, value matrix, flag matrix)."""
    pairs, gidx, values, flags = [], [], [], []
    header = None
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if header is None:
                header = parts
                expected = (["source", "target", "group_index"]
                            + list(MEASURE_NAMES) + list(FLAG_NAMES))
                if parts != expected:
                    raise LookupError_("unexpected feature file header")
                continue
            pairs.append((int(parts[0]), int(parts[1])))
            gidx.append(int(parts[2]))
            values.append([float(x) for x in parts[3:3 + len(MEASURE_NAMES)]])
            flags.append([int(x) for x in parts[3 + len(MEASURE_NAMES):]])
    return (pairs, np.array(gidx, dtype=np.int64),
            np.array(values, dtype=np.float64).reshape(len(pairs), len(MEASURE_NAMES)),
            np.array(flags, dtype=np.int64).reshape(len(pairs), len(FLAG_NAMES)))


def select_features(values: np.ndarray, feature_names) -> np.ndarray:
    cols = [MEASURE_NAMES.index(n) for n in feature_names]
    return values[:, cols]
