"""Synthetic graphs and friendship-enhancing events with known ground truth.

The behavior model draws invitation and adoption decisions from logistic
probabilities over the *true* measure values of each pair, which makes the
lift of a learned recommender over random exposure a checkable property.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ParameterError
from .graph import Graph, build_graph
from .groups import categorize_target

GRAPH_FAMILIES = ("two_clique", "planted_groups", "random_power_law")


@dataclass(frozen=True)
class GeneratorConfig:
    family: str = "planted_groups"
    seed: int = 0
    # two_clique
    clique_size: int = 6
    # planted_groups
    n_targets: int = 100
    groups_per_target: int = 2
    group_size: int = 4
    extra_targets_per_source: int = 0
    intra_extra_edges: int = 1
    # random_power_law
    n_nodes: int = 1000
    n_edges: int = 5000
    exponent: float = 0.8

    def validate(self) -> None:
        if self.family not in GRAPH_FAMILIES:
            raise ConfigError(f"unknown graph family {self.family!r}")
        if self.family == "two_clique" and self.clique_size < 2:
            raise ConfigError("clique_size must be >= 2")
        if self.family == "planted_groups":
            if self.n_targets < 1 or self.groups_per_target < 1 or self.group_size < 1:
                raise ConfigError("planted_groups parameters must be positive")
        if self.family == "random_power_law":
            if self.n_nodes < 2:
                raise ConfigError("n_nodes must be >= 2")
            if self.n_edges > self.n_nodes * (self.n_nodes - 1):
                raise ConfigError("n_edges exceeds n * (n - 1)")


def _finish(edges: dict, n: int) -> Graph:
    src = np.array([e[0] for e in edges], dtype=np.int64)
    dst = np.array([e[1] for e in edges], dtype=np.int64)
    w = np.array(list(edges.values()), dtype=np.float64)
    ids = [str(i) for i in range(n)]
    return build_graph(src, dst, w, ids)


def _rand_weight(rng) -> float:
    return float(1.0 - rng.random())  # uniform over (0, 1]


def generate_graph(cfg: GeneratorConfig) -> Graph:
    """Seed-deterministic synthetic graph of the configured family."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    edges: dict[tuple, float] = {}

    if cfg.family == "two_clique":
        c = cfg.clique_size
        for base in (0, c):
            for i in range(c):
                for j in range(c):
                    if i != j:
                        edges[(base + i, base + j)] = _rand_weight(rng)
        edges[(0, c)] = _rand_weight(rng)
        edges[(c, 0)] = _rand_weight(rng)
        return _finish(edges, 2 * c)

    if cfg.family == "planted_groups":
        # targets first, then per-target blocks of sources; every group is a
        # connected chain plus optional extra intra edges, so categorization
        # recovers exactly groups_per_target components per planted target
        n_targets = cfg.n_targets
        next_node = n_targets
        target_list = list(range(n_targets))
        all_sources = []
        for t in target_list:
            for _ in range(cfg.groups_per_target):
                members = list(range(next_node, next_node + cfg.group_size))
                next_node += cfg.group_size
                all_sources.extend(members)
                for s in members:
                    edges[(s, t)] = _rand_weight(rng)
                for a, b in zip(members, members[1:]):
                    edges[(a, b)] = _rand_weight(rng)
                for _ in range(cfg.intra_extra_edges):
                    if len(members) >= 2:
                        a, b = rng.choice(members, size=2, replace=False)
                        if a != b and (int(a), int(b)) not in edges:
                            edges[(int(a), int(b))] = _rand_weight(rng)
        for s in all_sources:
            if cfg.extra_targets_per_source > 0:
                extra = rng.choice(n_targets, size=min(cfg.extra_targets_per_source,
                                                       n_targets), replace=False)
                for t in extra:
                    if (s, int(t)) not in edges:
                        edges[(s, int(t))] = _rand_weight(rng)
        return _finish(edges, next_node)

    # random_power_law: endpoint probabilities follow a rank power law
    n, m = cfg.n_nodes, cfg.n_edges
    weights = (np.arange(1, n + 1, dtype=np.float64)) ** (-cfg.exponent)
    probs = weights / weights.sum()
    attempts = 0
    while len(edges) < m:
        batch = max(1024, m - len(edges))
        ss = rng.choice(n, size=batch, p=probs)
        tt = rng.choice(n, size=batch, p=probs)
        for s, t in zip(ss, tt):
            if s != t and (int(s), int(t)) not in edges:
                edges[(int(s), int(t))] = _rand_weight(rng)
                if len(edges) == m:
                    break
        attempts += 1
        if attempts > 1000:
            raise ConfigError("edge sampling failed to reach the requested density")
    return _finish(edges, n)


@dataclass(frozen=True)
class BehaviorModel:
    """Logistic ground-truth behavior over true measure values."""

    invite_coefs: dict = field(default_factory=dict)
    invite_intercept: float = 0.0
    adopt_coefs: dict = field(default_factory=dict)
    adopt_intercept: float = 0.0

    def _prob(self, coefs, intercept, values) -> float:
        z = intercept + sum(c * values[name] for name, c in coefs.items())
        return 1.0 / (1.0 + np.exp(-z))

    def invite_probability(self, values: dict) -> float:
        return float(self._prob(self.invite_coefs, self.invite_intercept, values))

    def adopt_probability(self, values: dict) -> float:
        return float(self._prob(self.adopt_coefs, self.adopt_intercept, values))


@dataclass(frozen=True)
class EventOutcome:
    exposures: frozenset   # (source, target) pairs
    invitations: frozenset
    adoptions: frozenset

    def label(self, pair, behavior: str) -> int:
        if behavior == "invitation":
            return int(pair in self.invitations)
        if behavior == "adoption":
            return int(pair in self.adoptions)
        raise ParameterError(f"unknown behavior {behavior!r}")

    def validate_chain(self) -> bool:
        return self.adoptions <= self.invitations <= self.exposures


def simulate_event(g: Graph, sources, targets, behavior: BehaviorModel,
                   measure_lookup: dict, k: int = 5, seed: int = 0,
                   windows=None) -> EventOutcome:
    """One friendship-enhancing event.

    Exposure is random-k per source unless explicit feed `windows` are
    supplied (a list of FeedWindow from the recommender).  Invitation and
    adoption are sampled in causal order, so adoption implies invitation
    implies exposure on every run.
    """
    rng = np.random.default_rng(seed)
    tset = set(int(t) for t in targets)
    exposures, invitations, adoptions = set(), set(), set()

    if windows is not None:
        exposed_pairs = [(int(w.source), int(t)) for w in windows
                         for t, _ in w.targets]
    else:
        exposed_pairs = []
        for s in sorted(int(s) for s in sources):
            nbrs, _ = g.target_neighbors(s)
            eligible = [int(t) for t in nbrs if int(t) in tset]
            if not eligible:
                continue
            take = min(k, len(eligible))
            picked = rng.choice(len(eligible), size=take, replace=False)
            exposed_pairs.extend((s, eligible[i]) for i in sorted(picked))

    for s, t in exposed_pairs:
        exposures.add((s, t))
        values = measure_lookup[(s, t)]
        if rng.random() < behavior.invite_probability(values):
            invitations.add((s, t))
            if rng.random() < behavior.adopt_probability(values):
                adoptions.add((s, t))
    return EventOutcome(frozenset(exposures), frozenset(invitations),
                        frozenset(adoptions))


def write_outcome(outcome: EventOutcome, path, manifest_name: str | None = None) -> None:
    """`source target exposed invited adopted` rows, sorted by pair."""
    with open(path, "w", encoding="utf-8") as f:
        if manifest_name:
            f.write(f"# manifest: {manifest_name}\n")
        for s, t in sorted(outcome.exposures):
            inv = int((s, t) in outcome.invitations)
            ado = int((s, t) in outcome.adoptions)
            f.write(f"{s} {t} 1 {inv} {ado}\n")


def read_outcome(path) -> EventOutcome:
    exposures, invitations, adoptions = set(), set(), set()
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            s, t, exp, inv, ado = line.split()
            pair = (int(s), int(t))
            if int(exp):
                exposures.add(pair)
            if int(inv):
                invitations.add(pair)
            if int(ado):
                adoptions.add(pair)
    return EventOutcome(frozenset(exposures), frozenset(invitations),
                        frozenset(adoptions))


@dataclass(frozen=True)
class CCSizeDistribution:
    ratios: dict          # target -> averaged component size
    bin_edges: np.ndarray
    counts: np.ndarray


def averaged_cc_size_distribution(g: Graph, targets, mode: str = "all_sources",
                                  outcome: EventOutcome | None = None,
                                  bins: int = 10) -> CCSizeDistribution:
    """Per-target source count over component count, as a histogram.

    In inviting mode the ego network is rebuilt from inviting sources only;
    targets without any inviting source are excluded.
    """
    if mode not in ("all_sources", "inviting_sources"):
        raise ParameterError(f"unknown mode {mode!r}")
    if mode == "inviting_sources" and outcome is None:
        raise ParameterError("inviting mode requires an event outcome")
    ratios = {}
    for t in sorted(int(t) for t in targets):
        nbrs, _ = g.source_neighbors(t)
        srcs = [int(s) for s in nbrs]
        if mode == "inviting_sources":
            srcs = [s for s in srcs if (s, t) in outcome.invitations]
        if not srcs:
            continue
        n_cc = _component_count(g, t, srcs)
        ratios[t] = len(srcs) / n_cc
    vals = np.array(list(ratios.values())) if ratios else np.zeros(0)
    counts, edges = np.histogram(vals, bins=bins) if len(vals) else (
        np.zeros(bins, dtype=np.int64), np.linspace(0, 1, bins + 1))
    return CCSizeDistribution(ratios, edges, counts)


def _component_count(g: Graph, t: int, srcs: list) -> int:
    sset = set(srcs)
    if sset == set(int(s) for s in g.source_neighbors(t)[0]):
        return categorize_target(g, t).num_groups
    # induced subgraph on a subset of sources
    parent = {s: s for s in srcs}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s in srcs:
        row, _ = g.target_neighbors(s)
        for x in row:
            x = int(x)
            if x in sset:
                ra, rb = find(s), find(x)
                if ra != rb:
                    parent[ra] = rb
    return len({find(s) for s in srcs})
