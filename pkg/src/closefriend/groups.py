"""Candidate-group categorization: weakly connected components of ego networks.

Each target's source neighborhood is partitioned into WCCs of its ego
network; every WCC plus the target itself forms one candidate group.  Group
order (and therefore group_index) is deterministic: groups are sorted by
their smallest member id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import EgoNetwork, Graph


@dataclass(frozen=True)
class CandidateGroup:
    """One WCC of a target's ego network, plus the target."""

    target: int
    members: tuple  # sorted node ids, target included
    group_index: int

    @property
    def sources(self) -> tuple:
        return tuple(v for v in self.members if v != self.target)

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class GroupAssignment:
    target: int
    groups: tuple
    source_to_group: dict  # source id -> group_index

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    def group_of(self, source: int) -> CandidateGroup:
        return self.groups[self.source_to_group[source]]


class _UnionFind:
    """Union-find with path compression over a fixed universe of positions."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def weakly_connected_components(eg: EgoNetwork) -> list[set]:
    """Partition the ego-network nodes into WCCs, ignoring edge direction.

    Components are ordered by their smallest member id.
    """
    nodes = eg.nodes
    if len(nodes) == 0:
        return []
    pos = {int(v): i for i, v in enumerate(nodes)}
    uf = _UnionFind(len(nodes))
    for u, v in zip(eg.edge_src, eg.edge_dst):
        uf.union(pos[int(u)], pos[int(v)])
    comps: dict[int, set] = {}
    for i, v in enumerate(nodes):
        comps.setdefault(uf.find(i), set()).add(int(v))
    # roots are minimal positions and nodes is sorted, so sorting roots
    # orders components by smallest member id
    return [comps[r] for r in sorted(comps)]


def categorize_target(g: Graph, t: int) -> GroupAssignment:
    """Build the candidate groups of target t (one per ego-network WCC)."""
    eg = g.ego_network(t)
    groups = []
    source_to_group = {}
    for idx, comp in enumerate(weakly_connected_components(eg)):
        members = tuple(sorted(comp | {int(t)}))
        groups.append(CandidateGroup(int(t), members, idx))
        for s in comp:
            source_to_group[s] = idx
    return GroupAssignment(int(t), tuple(groups), source_to_group)


def dump_groups(assignments, path) -> None:
    """Write `target group_index member...` lines for a list of assignments."""
    with open(path, "w", encoding="utf-8") as f:
        for asg in assignments:
            for grp in asg.groups:
                members = " ".join(str(v) for v in grp.members)
                f.write(f"{asg.target} {grp.group_index} {members}\n")


def bfs_components_oracle(eg: EgoNetwork) -> list[set]:
    """Brute-force BFS reference for WCC; independent of the union-find path."""
    nodes = [int(v) for v in eg.nodes]
    adj: dict[int, set] = {v: set() for v in nodes}
    for u, v in zip(eg.edge_src, eg.edge_dst):
        adj[int(u)].add(int(v))
        adj[int(v)].add(int(u))
    seen: set = set()
    comps = []
    for v in nodes:
        if v in seen:
            continue
        comp = {v}
        queue = [v]
        while queue:
            cur = queue.pop()
            for nb in adj[cur]:
                if nb not in comp:
                    comp.add(nb)
                    queue.append(nb)
        seen |= comp
        comps.append(comp)
    return sorted(comps, key=min)
