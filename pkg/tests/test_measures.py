import numpy as np
import pytest

from closefriend import (CandidateGroup, EmbeddingTable, LookupError_,
                         SimilarityProvider, categorize_target, common_neighbors,
                         compute_all, graph_from_edges, group_density, igt,
                         inclusiveness, multi_membership, pair_weight,
                         personalized_pagerank, read_feature_file,
                         select_features, tie_strength, ugt, user_group_tie,
                         write_records)
from closefriend.measures import (FLAG_NAMES, MEASURE_NAMES, MeasureConfig,
                                  compute_feature_table, igt_parts, ugt_parts,
                                  write_feature_file)


class StubSim:
    """Similarity provider stand-in with fixed per-pair values."""

    def __init__(self, values, n=10):
        self.values = {frozenset(k): v for k, v in values.items()}
        self.table = EmbeddingTable(np.zeros((n, 2)), "stub")

    def similarity_many(self, ii, jj):
        return np.array([self.values[frozenset((int(a), int(b)))]
                         for a, b in zip(ii, jj)])

    def similarity(self, i, j):
        return self.values[frozenset((int(i), int(j)))]

    def _normalize(self, raw):
        return np.clip(raw, 0.0, 1.0)


def col(name):
    return MEASURE_NAMES.index(name)


class TestIndividualMeasures:
    def test_tie_strength(self):
        g = graph_from_edges([(0, 1, 0.7), (1, 2, 1.0)])
        assert tie_strength(g, 0, 1) == 0.7
        assert tie_strength(g, 1, 2) == 1.0
        with pytest.raises(LookupError_):
            tie_strength(g, 2, 0)

    def test_common_neighbors_disjoint(self):
        g = graph_from_edges([(0, 1, 0.5), (2, 3, 0.5)])
        assert common_neighbors(g, 0, 2) == 0

    def test_common_neighbors_shared_hub(self):
        g = graph_from_edges([(0, 4, 0.5), (4, 0, 0.5), (1, 4, 0.5), (4, 1, 0.5)])
        assert common_neighbors(g, 0, 1) == 1

    def test_common_neighbors_four_clique(self):
        edges = [(a, b, 0.5) for a in range(4) for b in range(4) if a != b]
        g = graph_from_edges(edges)
        assert common_neighbors(g, 0, 1) == 2


class TestGroupBaselines:
    def test_user_group_tie(self):
        g = graph_from_edges([(1, 0, 0.5), (2, 0, 1.0), (1, 2, 0.9)])
        grp = categorize_target(g, 0).groups[0]
        assert user_group_tie(g, grp) == pytest.approx(1.5)

    def test_user_group_tie_single_source(self):
        g = graph_from_edges([(1, 0, 0.3)])
        grp = categorize_target(g, 0).groups[0]
        assert user_group_tie(g, grp) == pytest.approx(0.3)

    def test_group_density_hand_example(self):
        # C = {t=0, a=1, b=2}; edges t->a 0.5, a->t 0.5, a->b 0.5
        # plus b->t to make {a,b} one component... no: a->b already joins them
        g = graph_from_edges([(0, 1, 0.5), (1, 0, 0.5), (1, 2, 0.5), (2, 0, 0.5)])
        grp = CandidateGroup(0, (0, 1, 2), 0)
        # hand count restricted to the example's three edges: exclude b->t
        g2 = graph_from_edges([(0, 1, 0.5), (1, 0, 0.5), (1, 2, 0.5)], n=3)
        assert group_density(g2, grp) == pytest.approx(1.5 / 6.0)
        assert group_density(g2, grp) == pytest.approx(0.25)

    def test_group_density_full_clique(self):
        edges = [(a, b, 1.0) for a in range(3) for b in range(3) if a != b]
        g = graph_from_edges(edges)
        grp = CandidateGroup(0, (0, 1, 2), 0)
        assert group_density(g, grp) == pytest.approx(1.0)

    def test_multi_membership_and_inclusiveness(self):
        g = graph_from_edges([
            (1, 0, 0.5), (2, 0, 0.5), (3, 0, 0.5), (4, 0, 0.5), (5, 0, 0.5),
            (1, 2, 0.9), (2, 3, 0.9), (4, 5, 0.9),
        ])
        asg = categorize_target(g, 0)
        assert multi_membership(asg) == 2
        assert inclusiveness(asg.group_of(1)) == 4
        assert inclusiveness(asg.group_of(4)) == 3

    def test_pair_weight_fallback(self):
        g = graph_from_edges([(0, 1, 0.4), (2, 0, 0.6)], n=4)
        assert pair_weight(g, 0, 1) == 0.4   # forward edge wins
        assert pair_weight(g, 0, 2) == 0.6   # reverse fallback
        assert pair_weight(g, 0, 3) == 0.0   # no edge


class TestUGT:
    def test_hand_example(self):
        # w = {0.5, 1.0}, delta = {0.4, 0.8} -> (0.2 + 0.8) / 1.5
        g = graph_from_edges([(1, 0, 0.5), (2, 0, 1.0), (1, 2, 0.9)])
        grp = categorize_target(g, 0).groups[0]
        sim = StubSim({(0, 1): 0.4, (0, 2): 0.8, (1, 2): 0.1})
        assert ugt(g, grp, sim, "mean") == pytest.approx(1.0 / 1.5)
        assert round(ugt(g, grp, sim, "mean"), 4) == 0.6667
        assert ugt(g, grp, sim, "sum") == pytest.approx(1.0)

    def test_constant_delta(self):
        g = graph_from_edges([(1, 0, 0.2), (2, 0, 0.9), (1, 2, 0.5)])
        grp = categorize_target(g, 0).groups[0]
        sim = StubSim({(0, 1): 0.37, (0, 2): 0.37, (1, 2): 0.37})
        assert ugt(g, grp, sim, "mean") == pytest.approx(0.37)

    def test_zero_weight_flag(self):
        # hand-built group whose members have no tie to the pivot target
        g = graph_from_edges([(1, 2, 0.5)], n=4)
        grp = CandidateGroup(3, (1, 2, 3), 0)
        sim = StubSim({(3, 1): 0.4, (3, 2): 0.8})
        mean, total, w_comp, d_comp, flag = ugt_parts(g, grp, sim)
        assert mean == 0.0
        assert flag is True

    def test_component_extracts(self):
        g = graph_from_edges([(1, 0, 0.5), (2, 0, 1.0), (1, 2, 0.9)])
        grp = categorize_target(g, 0).groups[0]
        sim = StubSim({(0, 1): 0.4, (0, 2): 0.8, (1, 2): 0.1})
        mean, total, w_comp, d_comp, flag = ugt_parts(g, grp, sim)
        assert w_comp == pytest.approx(1.5 / 2)
        assert d_comp == pytest.approx(0.6)
        assert total == pytest.approx(mean * 1.5)
        assert flag is False


class TestIGT:
    def test_singleton_source_degenerate(self):
        g = graph_from_edges([(1, 0, 0.5)])
        grp = categorize_target(g, 0).groups[0]
        sim = StubSim({(0, 1): 0.9})
        assert igt(g, grp, sim) == 0.0
        *_, flag = igt_parts(g, grp, sim)
        assert flag is True

    def test_three_member_identity(self):
        # psi equals delta_{a,b}: each phi is a weighted mean of one value
        g = graph_from_edges([(1, 0, 0.5), (2, 0, 0.7), (1, 2, 0.3), (2, 1, 0.9)])
        grp = categorize_target(g, 0).groups[0]
        sim = StubSim({(0, 1): 0.2, (0, 2): 0.6, (1, 2): 0.42})
        assert igt(g, grp, sim, "mean") == pytest.approx(0.42)

    def test_no_intra_edges_zero(self):
        # two sources joined only through a third; drop it to sever them:
        # build a group by hand with sources that share no edge
        g = graph_from_edges([(1, 0, 0.5), (2, 0, 0.7)], n=3)
        grp = CandidateGroup(0, (0, 1, 2), 0)
        sim = StubSim({(0, 1): 0.2, (0, 2): 0.6, (1, 2): 0.5})
        mean, total, w_comp, _, flag = igt_parts(g, grp, sim)
        assert mean == 0.0
        assert w_comp == 0.0
        assert flag is False


def fig1_graph():
    return graph_from_edges([
        (1, 0, 0.5), (2, 0, 0.5), (3, 0, 0.5), (4, 0, 0.5), (5, 0, 0.5),
        (1, 2, 0.9), (2, 3, 0.9), (4, 5, 0.9),
    ])


def rand_table(n, dim=8, seed=0):
    rng = np.random.default_rng(seed)
    return EmbeddingTable(rng.normal(size=(n, dim)), "test")


class TestComputeAll:
    def test_fig1_reconstruction(self):
        g = fig1_graph()
        records = compute_all(g, [(2, 0)], rand_table(g.n))
        rec = records[0]
        assert rec.values["cc_count"] == 2
        assert rec.values["gs"] == 4

    def test_non_edge_pair_rejected(self):
        g = fig1_graph()
        with pytest.raises(LookupError_):
            compute_all(g, [(0, 2)], rand_table(g.n))

    def test_empty_pairs(self):
        g = fig1_graph()
        assert compute_all(g, [], rand_table(g.n)) == []

    def test_group_sharing(self):
        g = fig1_graph()
        records = compute_all(g, [(1, 0), (2, 0), (3, 0)], rand_table(g.n))
        shared = ("gs", "gpr", "gppr", "igt", "gd", "gt", "cc_count")
        for name in shared:
            vals = {round(r.values[name], 12) for r in records}
            assert len(vals) == 1, name

    def test_per_pair_composition_same_target(self):
        g = fig1_graph()
        table = rand_table(g.n)
        batch = compute_all(g, [(1, 0), (4, 0)], table)
        singles = compute_all(g, [(1, 0)], table) + compute_all(g, [(4, 0)], table)
        singles = sorted(singles, key=lambda r: (r.target, r.source))
        for a, b in zip(batch, singles):
            assert a.source == b.source
            for name in MEASURE_NAMES:
                assert a.values[name] == pytest.approx(b.values[name], abs=1e-12)

    def test_sum_mean_relations(self):
        g = fig1_graph()
        ordered, gidx, values, flags = compute_feature_table(
            g, [(1, 0), (4, 0)], rand_table(g.n))
        for i in range(len(ordered)):
            k = values[i, col("gs")] - 1
            assert values[i, col("gpr_sum")] == pytest.approx(
                values[i, col("gpr")] * k)
            assert values[i, col("gppr_sum")] == pytest.approx(
                values[i, col("gppr")] * k)
            wsum = values[i, col("ugt_w")] * k
            assert values[i, col("ugt_sum")] == pytest.approx(
                values[i, col("ugt")] * wsum)

    def test_ppr_column_matches_series(self):
        g = fig1_graph()
        cfg = MeasureConfig(alpha=0.15, eps=1e-6, ppr_method="power")
        ordered, _, values, _ = compute_feature_table(
            g, [(1, 0), (2, 0)], rand_table(g.n), cfg)
        for i, (s, t) in enumerate(ordered):
            want = personalized_pagerank(g, s, 0.15, 1e-6).values[t]
            assert values[i, col("ppr")] == pytest.approx(want, abs=1e-12)

    def test_bounds_and_finiteness(self):
        rng = np.random.default_rng(17)
        edges = []
        n = 20
        for i in range(n):
            for j in range(n):
                if i != j and rng.random() < 0.15:
                    edges.append((i, j, float(rng.uniform(0.05, 1.0))))
        g = graph_from_edges(edges, n=n)
        pairs = [(s, int(t)) for s in range(n) for t in g.target_neighbors(s)[0]]
        ordered, _, values, _ = compute_feature_table(g, pairs, rand_table(n, seed=1))
        assert np.all(np.isfinite(values))
        for name in ("ugt", "ugt_euc", "igt", "igt_euc", "ugt_delta", "igt_delta",
                     "n2v_cos", "n2v_euc"):
            c = values[:, col(name)]
            assert np.all(c >= 0.0) and np.all(c <= 1.0), name
        assert np.all(values[:, col("cc_count")] >= 1)
        assert np.all(values[:, col("gs")] >= 2)

    def test_push_and_power_agree(self):
        g = fig1_graph()
        pairs = [(s, 0) for s in range(1, 6)]
        table = rand_table(g.n)
        power = compute_feature_table(g, pairs, table,
                                      MeasureConfig(ppr_method="power"))[2]
        push = compute_feature_table(
            g, pairs, table,
            MeasureConfig(ppr_method="push", push_threshold=1e-9))[2]
        assert np.max(np.abs(power[:, col("ppr")] - push[:, col("ppr")])) < 1e-4
        assert np.max(np.abs(power[:, col("gppr")] - push[:, col("gppr")])) < 1e-4


def test_batch_matches_reference_path():
    """The vectorized batch engine agrees with the per-pair reference
    functions (weighted/intra tightness, tie, density, centrality sums)."""
    from closefriend import SimilarityProvider, pagerank
    from closefriend.measures import _similarity_population

    rng = np.random.default_rng(23)
    n = 30
    edges = [(i, j, float(rng.uniform(0.05, 1.0)))
             for i in range(n) for j in range(n)
             if i != j and rng.random() < 0.12]
    g = graph_from_edges(edges, n=n)
    pairs = [(s, int(t)) for s in range(n) for t in g.target_neighbors(s)[0]]
    table = rand_table(n, seed=9)

    ordered, gidx, values, flags = compute_feature_table(g, pairs, table)

    assignments = {t: categorize_target(g, t) for t in {t for _, t in pairs}}
    cos = SimilarityProvider(table, "cosine")
    euc = SimilarityProvider(table, "euclidean")
    pop = _similarity_population(g, pairs, assignments)
    cos.fit(*pop)
    euc.fit(*pop)
    pr = pagerank(g)

    for i, (s, t) in enumerate(ordered):
        grp = assignments[t].group_of(s)
        assert gidx[i] == grp.group_index
        u_mean, u_sum, u_w, u_d, u_flag = ugt_parts(g, grp, cos)
        ue_mean, *_ = ugt_parts(g, grp, euc)
        i_mean, i_sum, i_w, i_d, i_flag = igt_parts(g, grp, cos)
        ie_mean, *_ = igt_parts(g, grp, euc, cos_for_delta=cos)
        want = {
            "tie": tie_strength(g, s, t),
            "com": common_neighbors(g, s, t),
            "gt": user_group_tie(g, grp),
            "gd": group_density(g, grp),
            "cc_count": assignments[t].num_groups,
            "gs": grp.size,
            "gpr_sum": sum(pr.values[j] for j in grp.sources),
            "ugt": u_mean, "ugt_euc": ue_mean, "ugt_sum": u_sum,
            "ugt_w": u_w, "ugt_delta": u_d,
            "igt": i_mean, "igt_euc": ie_mean, "igt_sum": i_sum,
            "igt_w": i_w, "igt_delta": i_d,
        }
        for name, v in want.items():
            assert values[i, col(name)] == pytest.approx(v, abs=1e-9), (name, s, t)
        assert flags[i, 0] == int(u_flag)
        assert flags[i, 1] == int(i_flag)


class TestFeatureFile:
    def test_round_trip(self, tmp_path):
        g = fig1_graph()
        ordered, gidx, values, flags = compute_feature_table(
            g, [(1, 0), (4, 0)], rand_table(g.n))
        path = tmp_path / "features.tsv"
        write_feature_file(path, ordered, gidx, values, flags, manifest_name="m1")
        pairs2, gidx2, values2, flags2 = read_feature_file(path)
        assert pairs2 == ordered
        assert np.array_equal(gidx2, gidx)
        assert np.array_equal(values2, values)  # repr round-trips exactly
        assert np.array_equal(flags2, flags)
        assert path.read_text().startswith("# manifest: m1\n")

    def test_records_writer(self, tmp_path):
        g = fig1_graph()
        records = compute_all(g, [(1, 0)], rand_table(g.n))
        path = tmp_path / "features.tsv"
        write_records(path, records)
        pairs2, _, values2, _ = read_feature_file(path)
        assert pairs2 == [(1, 0)]
        assert values2[0, col("gs")] == records[0].values["gs"]

    def test_select_features(self):
        values = np.arange(2 * len(MEASURE_NAMES), dtype=float).reshape(2, -1)
        out = select_features(values, ("tie", "gs"))
        assert np.array_equal(out[:, 0], values[:, col("tie")])
        assert np.array_equal(out[:, 1], values[:, col("gs")])

    def test_header_validated(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("source target nope\n1 0 3.5\n")
        with pytest.raises(LookupError_):
            read_feature_file(path)
