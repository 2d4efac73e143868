"""Numba kernels for the hot loops: local-push PPR, biased second-order
walks, skip-gram training and batched neighborhood intersection.

Every kernel is sequential and seeded, so results are bit-reproducible for a
fixed input.  RNG state is a hand-rolled splitmix64/xorshift64* pair because
numba kernels must not depend on Python-level RNG objects.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U64 = np.uint64
_DOUBLE_SCALE = 1.0 / 9007199254740992.0  # 2^-53


@njit(cache=True)
def _splitmix64(x):
    x = _U64(x) + _U64(0x9E3779B97F4A7C15)
    z = x
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


@njit(cache=True)
def _xorshift_next(state):
    x = state
    x ^= x >> _U64(12)
    x ^= x << _U64(25)
    x ^= x >> _U64(27)
    return x, x * _U64(0x2545F4914F6CDD1D)


@njit(cache=True)
def _rand_double(state):
    state, v = _xorshift_next(state)
    return state, float(v >> _U64(11)) * _DOUBLE_SCALE


@njit(cache=True)
def _binary_contains(arr, lo, hi, x):
    end = hi
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo < end and arr[lo] == x


@njit(cache=True)
def ppr_push_entries(indptr, indices, sources, query_indptr, query_nodes,
                     alpha, r_max):
    """Approximate PPR entries by forward local push.

    For each sources[i], returns the estimated stop probabilities at
    query_nodes[query_indptr[i]:query_indptr[i+1]].  Residual mass below
    r_max per node is dropped; estimates are lower bounds on the exact
    restart-series values.
    """
    n = len(indptr) - 1
    cap = n + 1  # circular queue capacity; at most n nodes queued at once
    p = np.zeros(n)
    r = np.zeros(n)
    in_queue = np.zeros(n, dtype=np.uint8)
    queue = np.empty(cap, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    out = np.zeros(len(query_nodes))

    for si in range(len(sources)):
        s = sources[si]
        n_touched = 0
        r[s] = 1.0
        touched[n_touched] = s
        n_touched += 1
        head, tail = 0, 0
        queue[tail] = s
        tail += 1
        in_queue[s] = 1
        while head != tail:
            v = queue[head]
            head += 1
            if head == cap:
                head = 0
            in_queue[v] = 0
            rv = r[v]
            if rv < r_max:
                continue
            r[v] = 0.0
            p[v] += alpha * rv
            lo, hi = indptr[v], indptr[v + 1]
            d = hi - lo
            if d == 0:
                continue  # dangling: remaining mass absorbed
            share = (1.0 - alpha) * rv / d
            for e in range(lo, hi):
                u = indices[e]
                if r[u] == 0.0 and p[u] == 0.0:
                    touched[n_touched] = u
                    n_touched += 1
                r[u] += share
                if r[u] >= r_max and in_queue[u] == 0:
                    queue[tail] = u
                    tail += 1
                    if tail == cap:
                        tail = 0
                    in_queue[u] = 1
        for k in range(query_indptr[si], query_indptr[si + 1]):
            out[k] = p[query_nodes[k]]
        # reset workspace for the next source
        for k in range(n_touched):
            v = touched[k]
            p[v] = 0.0
            r[v] = 0.0
    return out


@njit(cache=True)
def count_common_sorted(indptr, indices, pairs_a, pairs_b):
    """Intersection sizes of sorted CSR rows for each (a, b) pair."""
    out = np.zeros(len(pairs_a), dtype=np.int64)
    for k in range(len(pairs_a)):
        a, b = pairs_a[k], pairs_b[k]
        i, ihi = indptr[a], indptr[a + 1]
        j, jhi = indptr[b], indptr[b + 1]
        c = 0
        while i < ihi and j < jhi:
            x, y = indices[i], indices[j]
            if x == y:
                c += 1
                i += 1
                j += 1
            elif x < y:
                i += 1
            else:
                j += 1
        out[k] = c
    return out


@njit(cache=True)
def assign_groups_intra(rev_indptr, rev_indices, fwd_indptr, fwd_indices,
                        fwd_weights, targets):
    """Per-target component labels plus intra-group directed edge instances.

    For each target t (sources = rev row of t, sorted), unions sources joined
    by a directed edge and labels components in order of smallest source.
    Every directed edge (u -> v) with both endpoints sources of t is emitted
    once as an instance (pivot position, other position, weight), positions
    being global offsets into the flattened membership array.
    """
    nt = len(targets)
    offs = np.zeros(nt + 1, dtype=np.int64)
    maxdeg = 0
    for ti in range(nt):
        d = rev_indptr[targets[ti] + 1] - rev_indptr[targets[ti]]
        offs[ti + 1] = offs[ti] + d
        if d > maxdeg:
            maxdeg = d
    total = offs[nt]
    labels = np.empty(total, dtype=np.int64)
    counts = np.empty(nt, dtype=np.int64)
    parent = np.empty(max(maxdeg, 1), dtype=np.int64)

    cap = 1024
    ins_p = np.empty(cap, dtype=np.int64)
    ins_o = np.empty(cap, dtype=np.int64)
    ins_w = np.empty(cap, dtype=np.float64)
    k = 0

    for ti in range(nt):
        t = targets[ti]
        lo, hi = rev_indptr[t], rev_indptr[t + 1]
        d = hi - lo
        base = offs[ti]
        for i in range(d):
            parent[i] = i
        for i in range(d):
            u = rev_indices[lo + i]
            for e in range(fwd_indptr[u], fwd_indptr[u + 1]):
                v = fwd_indices[e]
                a, b = lo, hi
                while a < b:
                    mid = (a + b) // 2
                    if rev_indices[mid] < v:
                        a = mid + 1
                    else:
                        b = mid
                if a < hi and rev_indices[a] == v:
                    j = a - lo
                    if k == cap:
                        cap *= 2
                        tmp_p = np.empty(cap, dtype=np.int64)
                        tmp_o = np.empty(cap, dtype=np.int64)
                        tmp_w = np.empty(cap, dtype=np.float64)
                        tmp_p[:k] = ins_p
                        tmp_o[:k] = ins_o
                        tmp_w[:k] = ins_w
                        ins_p, ins_o, ins_w = tmp_p, tmp_o, tmp_w
                    ins_p[k] = base + i
                    ins_o[k] = base + j
                    ins_w[k] = fwd_weights[e]
                    k += 1
                    ri = i
                    while parent[ri] != ri:
                        ri = parent[ri]
                    rj = j
                    while parent[rj] != rj:
                        rj = parent[rj]
                    if ri != rj:
                        if ri < rj:
                            parent[rj] = ri
                        else:
                            parent[ri] = rj
        # roots are minimal positions; ascending scan numbers components by
        # smallest source
        ng = 0
        for i in range(d):
            r = i
            while parent[r] != r:
                r = parent[r]
            x = i
            while parent[x] != r:
                nxt = parent[x]
                parent[x] = r
                x = nxt
            if r == i:
                labels[base + i] = ng
                ng += 1
            else:
                labels[base + i] = labels[base + r]
        counts[ti] = ng
    return (offs, labels, counts,
            ins_p[:k].copy(), ins_o[:k].copy(), ins_w[:k].copy())


@njit(cache=True)
def generate_walks_kernel(indptr, indices, weights, walk_length, walks_per_node,
                          p, q, seed):
    """Biased second-order random walks from every node.

    Next-step candidate weights from current node with known predecessor:
    w/p for the predecessor itself, w for targets that the predecessor also
    points to, w/q otherwise.  Walks truncate at out-degree-0 nodes; unused
    slots hold -1.
    """
    n = len(indptr) - 1
    walks = np.full((n * walks_per_node, walk_length), -1, dtype=np.int64)
    probs = np.empty(256, dtype=np.float64)
    for start in range(n):
        for wi in range(walks_per_node):
            state = _splitmix64(_U64(seed) * _U64(0x9E3779B97F4A7C15)
                                + _U64(start) * _U64(walks_per_node) + _U64(wi))
            if state == _U64(0):
                state = _U64(0x106689D45497FDB5)
            row = start * walks_per_node + wi
            walks[row, 0] = start
            prev = -1
            cur = start
            for step in range(1, walk_length):
                lo, hi = indptr[cur], indptr[cur + 1]
                d = hi - lo
                if d == 0:
                    break
                if d > len(probs):
                    probs = np.empty(d, dtype=np.float64)
                total = 0.0
                for e in range(lo, hi):
                    x = indices[e]
                    w = weights[e]
                    if prev >= 0:
                        if x == prev:
                            w = w / p
                        elif _binary_contains(indices, indptr[prev],
                                              indptr[prev + 1], x):
                            pass  # common target neighbor of the predecessor
                        else:
                            w = w / q
                    total += w
                    probs[e - lo] = total
                state, u = _rand_double(state)
                pick = u * total
                nxt = indices[hi - 1]
                for e in range(d):
                    if pick < probs[e]:
                        nxt = indices[lo + e]
                        break
                walks[row, step] = nxt
                prev = cur
                cur = nxt
    return walks


@njit(cache=True)
def sgns_train_kernel(walks, vec_in, vec_out, window, negatives, epochs,
                      lr0, neg_table, seed):
    """Skip-gram with negative sampling over a padded walk matrix.

    Sequential single-writer updates in a fixed order; bit-reproducible for a
    fixed seed.  Learning rate decays linearly to 1e-4 * lr0.
    """
    dim = vec_in.shape[1]
    n_rows, length = walks.shape
    total_tokens = 0
    for r in range(n_rows):
        for c in range(length):
            if walks[r, c] >= 0:
                total_tokens += 1
    total_steps = max(1, total_tokens * epochs)
    state = _splitmix64(_U64(seed))
    if state == _U64(0):
        state = _U64(0x106689D45497FDB5)
    grad = np.empty(dim)
    done = 0
    for _ in range(epochs):
        for r in range(n_rows):
            for c in range(length):
                center = walks[r, c]
                if center < 0:
                    break
                lr = lr0 * max(1.0 - done / total_steps, 1e-4)
                done += 1
                c_lo = max(0, c - window)
                c_hi = min(length, c + window + 1)
                for cc in range(c_lo, c_hi):
                    ctx = walks[r, cc]
                    if ctx < 0 or cc == c:
                        continue
                    for k in range(dim):
                        grad[k] = 0.0
                    for neg in range(negatives + 1):
                        if neg == 0:
                            tgt = ctx
                            label = 1.0
                        else:
                            state, u = _rand_double(state)
                            tgt = neg_table[int(u * len(neg_table))]
                            if tgt == ctx:
                                continue
                            label = 0.0
                        dot = 0.0
                        for k in range(dim):
                            dot += vec_in[center, k] * vec_out[tgt, k]
                        if dot > 8.0:
                            sig = 1.0
                        elif dot < -8.0:
                            sig = 0.0
                        else:
                            sig = 1.0 / (1.0 + np.exp(-dot))
                        g = lr * (label - sig)
                        for k in range(dim):
                            grad[k] += g * vec_out[tgt, k]
                            vec_out[tgt, k] += g * vec_in[center, k]
                    for k in range(dim):
                        vec_in[center, k] += grad[k]
    return vec_in
