"""Run configuration, seed substreams, and run manifests.

Every tunable has a documented default here; a JSON config file overrides
defaults and command-line flags override the file.  All randomness flows
from one root seed through named substreams so artifacts are reproducible
from the manifest alone.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field

from .errors import ConfigError


@dataclass
class RunConfig:
    # paths
    graph: str | None = None
    labels: str | None = None
    embeddings: str | None = None
    features: str | None = None
    model: str | None = None
    outcome: str | None = None
    out_dir: str = "out"
    # graph ingestion
    weight_policy: str = "reject_out_of_range"
    # centrality
    alpha: float = 0.15
    eps: float = 1e-6
    # walks / embeddings
    walk_length: int = 10
    walks_per_node: int = 5
    p: float = 1.0
    q: float = 1.0
    dim: int = 32
    window: int = 5
    negatives: int = 5
    epochs: int = 3
    embed_lr: float = 0.025
    # learner
    rounds: int = 100
    depth: int = 6
    learning_rate: float = 0.1
    lam: float = 1.0
    gamma: float = 0.0
    feature_set: str = "all"
    # recommendation
    k: int = 5
    # simulation
    family: str = "planted_groups"
    n_targets: int = 100
    groups_per_target: int = 2
    group_size: int = 4
    extra_targets_per_source: int = 0
    clique_size: int = 6
    n_nodes: int = 1000
    n_edges: int = 5000
    invite_coefs: dict = field(default_factory=dict)
    invite_intercept: float = 0.0
    adopt_coefs: dict = field(default_factory=dict)
    adopt_intercept: float = 0.0
    # orchestration
    seed: int = 0
    workers: int = 0  # 0 = machine parallelism

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path, "r", encoding="utf-8") as f:
                d = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(d)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(canon).hexdigest()


def substream(seed: int, name: str) -> int:
    """Deterministic per-purpose seed derived from the root seed."""
    h = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    # 63 bits so the value fits any signed 64-bit seed parameter
    return int.from_bytes(h[:8], "little") >> 1


@dataclass(frozen=True)
class Manifest:
    config_hash: str
    graph_hash: str
    seed: int

    @property
    def name(self) -> str:
        canon = json.dumps(
            {"config": self.config_hash, "graph": self.graph_hash,
             "seed": self.seed}, sort_keys=True).encode()
        return hashlib.sha256(canon).hexdigest()[:16]

    def save(self, out_dir) -> str:
        path = os.path.join(out_dir, "manifest.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump({"name": self.name, "config_hash": self.config_hash,
                       "graph_hash": self.graph_hash, "seed": self.seed},
                      f, indent=2, sort_keys=True)
            f.write("\n")
        return path


def resolve_out_dir(flag_value, cfg: RunConfig) -> str:
    """Precedence: flag > CLOSEFRIEND_OUT_DIR > config > default."""
    if flag_value:
        return flag_value
    env = os.environ.get("CLOSEFRIEND_OUT_DIR")
    if env:
        return env
    return cfg.out_dir
