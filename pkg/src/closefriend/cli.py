"""Batch command-line entry point.

Subcommands: ingest, features, train, predict, recommend, simulate, analyze.
Each run writes a manifest (config hash, graph hash, root seed) into the
output directory and stamps every artifact with the manifest name, so a rerun
with identical inputs reproduces the artifact set byte for byte.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import analysis, boosting, measures, ranking, simulate
from .boosting import TreeEnsemble
from .config import Manifest, RunConfig, resolve_out_dir, substream
from .embedding import (WalkConfig, generate_walks, import_embeddings,
                        train_embeddings)
from .errors import CloseFriendError, ConfigError
from .graph import Graph, load_graph
from .measures import (FEATURE_SETS, MEASURE_NAMES, MeasureConfig,
                       compute_feature_table, read_feature_file,
                       select_features, write_feature_file)

_SNAPSHOT_MAGIC = b"CFG1"


def _load_any_graph(path, policy: str) -> Graph:
    with open(path, "rb") as f:
        head = f.read(4)
    if head == _SNAPSHOT_MAGIC:
        return Graph.load_snapshot(path)
    return load_graph(path, weight_policy=policy)


def _all_edge_pairs(g: Graph):
    src = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.fwd_indptr))
    return list(zip(src.tolist(), g.fwd_indices.tolist()))


def _build_manifest(cfg: RunConfig, g: Graph | None, out_dir) -> Manifest:
    os.makedirs(out_dir, exist_ok=True)
    man = Manifest(cfg.config_hash(), g.content_hash() if g else "none", cfg.seed)
    man.save(out_dir)
    return man


def _embedding_table(g: Graph, cfg: RunConfig):
    if cfg.embeddings:
        return import_embeddings(cfg.embeddings, g.n)
    wcfg = WalkConfig(cfg.walk_length, cfg.walks_per_node, cfg.p, cfg.q,
                      seed=substream(cfg.seed, "walks"))
    walks = generate_walks(g, wcfg)
    return train_embeddings(walks, g.n, dim=cfg.dim, window=cfg.window,
                            negatives=cfg.negatives, epochs=cfg.epochs,
                            lr=cfg.embed_lr, seed=substream(cfg.seed, "sgns"))


def _compute_features(g: Graph, cfg: RunConfig):
    table = _embedding_table(g, cfg)
    mcfg = MeasureConfig(alpha=cfg.alpha, eps=cfg.eps)
    return compute_feature_table(g, _all_edge_pairs(g), table, mcfg)


def _read_labels(path) -> dict:
    labels = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            s, t, y = line.split()
            labels[(int(s), int(t))] = int(y)
    return labels


def _training_matrix(cfg: RunConfig, pairs, values, labels):
    names = FEATURE_SETS.get(cfg.feature_set)
    if names is None:
        raise ConfigError(f"unknown feature set {cfg.feature_set!r}")
    keep = [i for i, p in enumerate(pairs) if p in labels]
    if not keep:
        raise ConfigError("no labeled pairs overlap the feature file")
    X = select_features(values[keep], names)
    y = np.array([labels[pairs[i]] for i in keep], dtype=np.float64)
    return X, y, names, [pairs[i] for i in keep]


# -- subcommands --------------------------------------------------------------

def cmd_ingest(cfg: RunConfig, out_dir) -> None:
    if not cfg.graph:
        raise ConfigError("ingest requires a graph path")
    g = load_graph(cfg.graph, weight_policy=cfg.weight_policy)
    _build_manifest(cfg, g, out_dir)
    g.save_snapshot(os.path.join(out_dir, "graph.bin"))
    print(f"ingested {g.n} nodes, {g.m} edges -> {out_dir}/graph.bin")


def cmd_features(cfg: RunConfig, out_dir) -> None:
    if not cfg.graph:
        raise ConfigError("features requires a graph path")
    g = _load_any_graph(cfg.graph, cfg.weight_policy)
    man = _build_manifest(cfg, g, out_dir)
    ordered, gidx, values, flags = _compute_features(g, cfg)
    path = os.path.join(out_dir, "features.tsv")
    write_feature_file(path, ordered, gidx, values, flags, manifest_name=man.name)
    print(f"wrote {len(ordered)} pair rows -> {path}")


def cmd_train(cfg: RunConfig, out_dir) -> None:
    if not cfg.features or not cfg.labels:
        raise ConfigError("train requires feature and label paths")
    pairs, _, values, _ = read_feature_file(cfg.features)
    labels = _read_labels(cfg.labels)
    X, y, names, _ = _training_matrix(cfg, pairs, values, labels)
    man = _build_manifest(cfg, None, out_dir)
    model = boosting.train(X, y, n_rounds=cfg.rounds, max_depth=cfg.depth,
                           learning_rate=cfg.learning_rate, lam=cfg.lam,
                           gamma=cfg.gamma, seed=substream(cfg.seed, "train"),
                           feature_names=tuple(names))
    path = os.path.join(out_dir, "model.json")
    model.save(path, manifest_name=man.name)
    report = boosting.evaluate(model, X, y)
    print(f"trained {len(model.trees)} trees on {len(y)} pairs -> {path}")
    for k, v in report.metrics.items():
        print(f"train_{k} {v}")


def cmd_predict(cfg: RunConfig, out_dir) -> None:
    if not cfg.features or not cfg.model:
        raise ConfigError("predict requires feature and model paths")
    pairs, _, values, _ = read_feature_file(cfg.features)
    model = TreeEnsemble.load(cfg.model)
    names = model.feature_names or FEATURE_SETS[cfg.feature_set]
    X = select_features(values, names)
    man = _build_manifest(cfg, None, out_dir)
    margins = model.predict_margin(X)
    probs = boosting.sigmoid(margins)
    path = os.path.join(out_dir, "predictions.tsv")
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# manifest: {man.name}\n")
        f.write("source target margin probability\n")
        for (s, t), m, p in zip(pairs, margins, probs):
            f.write(f"{s} {t} {repr(float(m))} {repr(float(p))}\n")
    print(f"wrote {len(pairs)} predictions -> {path}")
    if cfg.labels:
        labels = _read_labels(cfg.labels)
        keep = [i for i, p in enumerate(pairs) if p in labels]
        y = np.array([labels[pairs[i]] for i in keep], dtype=np.float64)
        report = boosting.evaluate(model, X[keep], y)
        for k, v in report.metrics.items():
            print(f"test_{k} {v}")


def cmd_recommend(cfg: RunConfig, out_dir) -> None:
    if not cfg.graph or not cfg.features or not cfg.model:
        raise ConfigError("recommend requires graph, feature and model paths")
    g = _load_any_graph(cfg.graph, cfg.weight_policy)
    pairs, _, values, _ = read_feature_file(cfg.features)
    model = TreeEnsemble.load(cfg.model)
    names = model.feature_names or FEATURE_SETS[cfg.feature_set]
    man = _build_manifest(cfg, g, out_dir)
    feats = select_features(values, names)
    pair_features = {p: feats[i] for i, p in enumerate(pairs)}
    sources = sorted({s for s, _ in pairs})
    targets = {t for _, t in pairs}
    windows = ranking.recommend_all(g, model, sources, targets, cfg.k, pair_features)
    path = os.path.join(out_dir, "recommendations.tsv")
    ranking.write_recommendations(windows, path, manifest_name=man.name)
    print(f"wrote feed windows for {len(windows)} sources -> {path}")


def cmd_simulate(cfg: RunConfig, out_dir) -> None:
    gen = simulate.GeneratorConfig(
        family=cfg.family, seed=substream(cfg.seed, "graph"),
        clique_size=cfg.clique_size, n_targets=cfg.n_targets,
        groups_per_target=cfg.groups_per_target, group_size=cfg.group_size,
        extra_targets_per_source=cfg.extra_targets_per_source,
        n_nodes=cfg.n_nodes, n_edges=cfg.n_edges)
    g = simulate.generate_graph(gen)
    man = _build_manifest(cfg, g, out_dir)
    g.save_snapshot(os.path.join(out_dir, "graph.bin"))

    ordered, gidx, values, flags = _compute_features(g, cfg)
    write_feature_file(os.path.join(out_dir, "features.tsv"),
                       ordered, gidx, values, flags, manifest_name=man.name)

    lookup = {p: dict(zip(MEASURE_NAMES, values[i])) for i, p in enumerate(ordered)}
    behavior = simulate.BehaviorModel(cfg.invite_coefs, cfg.invite_intercept,
                                      cfg.adopt_coefs, cfg.adopt_intercept)
    sources = sorted({s for s, _ in ordered})
    targets = sorted({t for _, t in ordered})
    outcome = simulate.simulate_event(
        g, sources, targets, behavior, lookup, k=cfg.k,
        seed=substream(cfg.seed, "event"))
    path = os.path.join(out_dir, "outcome.tsv")
    simulate.write_outcome(outcome, path, manifest_name=man.name)
    print(f"simulated event: {len(outcome.exposures)} exposures, "
          f"{len(outcome.invitations)} invitations, "
          f"{len(outcome.adoptions)} adoptions -> {path}")


_CURVE_MEASURES = measures.SIT_FEATURES + ("ugt_w", "ugt_delta", "igt_w", "igt_delta")


def cmd_analyze(cfg: RunConfig, out_dir) -> None:
    if not cfg.features or not cfg.outcome:
        raise ConfigError("analyze requires feature and outcome paths")
    pairs, _, values, _ = read_feature_file(cfg.features)
    outcome = simulate.read_outcome(cfg.outcome)
    man = _build_manifest(cfg, None, out_dir)

    exposed = [i for i, p in enumerate(pairs) if p in outcome.exposures]
    if len(exposed) < analysis.N_LEVELS:
        raise ConfigError("too few exposed pairs with features to analyze")
    curves = []
    for name in _CURVE_MEASURES:
        col = values[exposed, MEASURE_NAMES.index(name)]
        binning = analysis.discretize(col, name=name)
        for behavior in ("invitation", "adoption"):
            y = np.array([outcome.label(pairs[i], behavior) for i in exposed])
            curves.append(analysis.conversion_curve(binning, y, behavior))

    metrics = {
        "exposures": float(len(outcome.exposures)),
        "invitations": float(len(outcome.invitations)),
        "adoptions": float(len(outcome.adoptions)),
        "e2e_rate": ranking.e2e_rate(outcome),
    }
    importance = {}
    if cfg.model:
        model = TreeEnsemble.load(cfg.model)
        names = model.feature_names or FEATURE_SETS[cfg.feature_set]
        X = select_features(values[exposed], names)
        y = np.array([outcome.label(pairs[i], "adoption") for i in exposed],
                     dtype=np.float64)
        report = boosting.evaluate(model, X, y)
        metrics.update({f"adoption_{k}": v for k, v in report.metrics.items()
                        if v is not None})
        importance = boosting.feature_importance(model)
    rep = analysis.RepetitionResult(metrics, importance)
    written = analysis.write_report(out_dir, [rep], curves, manifest_name=man.name)
    print(f"wrote analysis bundle ({len(written)} files) -> {out_dir}")


# -- argument wiring ----------------------------------------------------------

_COMMANDS = {
    "ingest": cmd_ingest,
    "features": cmd_features,
    "train": cmd_train,
    "predict": cmd_predict,
    "recommend": cmd_recommend,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
}

# flag name -> (type, help); defaults live in RunConfig and the config file
_FLAGS = {
    "graph": (str, "edge list or binary graph snapshot"),
    "labels": (str, "label file: source target label"),
    "embeddings": (str, "pre-trained embedding file to import"),
    "features": (str, "feature file from the features subcommand"),
    "model": (str, "trained model JSON"),
    "outcome": (str, "event outcome file"),
    "weight_policy": (str, "reject_out_of_range | clamp | minmax_rescale"),
    "alpha": (float, "restart probability"),
    "eps": (float, "series truncation threshold"),
    "walk_length": (int, "nodes per random walk"),
    "walks_per_node": (int, "walks started per node"),
    "p": (float, "walk return parameter"),
    "q": (float, "walk in-out parameter"),
    "dim": (int, "embedding dimension"),
    "window": (int, "skip-gram context window"),
    "negatives": (int, "negative samples per context"),
    "epochs": (int, "embedding training epochs"),
    "embed_lr": (float, "embedding learning rate"),
    "rounds": (int, "boosting rounds"),
    "depth": (int, "maximum tree depth"),
    "learning_rate": (float, "boosting shrinkage"),
    "lam": (float, "L2 leaf penalty"),
    "gamma": (float, "per-leaf penalty"),
    "feature_set": (str, "sit | individual | all"),
    "k": (int, "feed window size"),
    "family": (str, "two_clique | planted_groups | random_power_law"),
    "n_targets": (int, "planted targets"),
    "groups_per_target": (int, "planted groups per target"),
    "group_size": (int, "sources per planted group"),
    "extra_targets_per_source": (int, "extra exposure candidates per source"),
    "clique_size": (int, "two-clique size"),
    "n_nodes": (int, "random graph nodes"),
    "n_edges": (int, "random graph edges"),
    "invite_intercept": (float, "invitation logit intercept"),
    "adopt_intercept": (float, "adoption logit intercept"),
    "seed": (int, "root seed for all substreams"),
    "workers": (int, "worker count; 1 forces serial execution"),
}


def _parse_coef_list(items):
    coefs = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"coefficient must be name=value, got {item!r}")
        name, _, val = item.partition("=")
        if name not in MEASURE_NAMES:
            raise ConfigError(f"unknown measure {name!r}")
        try:
            coefs[name] = float(val)
        except ValueError:
            raise ConfigError(f"bad coefficient value in {item!r}") from None
    return coefs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="closefriend",
        description="Friendship-closeness feature extraction, learning, "
                    "recommendation and simulation over directed social graphs.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    defaults = RunConfig()
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None,
                       help="JSON run configuration file")
        p.add_argument("--out", type=str, default=None,
                       help=f"output directory (default {defaults.out_dir}; "
                            "env CLOSEFRIEND_OUT_DIR overrides the default)")
        for flag, (typ, help_text) in _FLAGS.items():
            default = getattr(defaults, flag)
            p.add_argument(f"--{flag.replace('_', '-')}", type=typ, default=None,
                           dest=flag, help=f"{help_text} (default {default})")
        p.add_argument("--invite-coef", action="append", dest="invite_coef",
                       metavar="MEASURE=BETA",
                       help="invitation coefficient over a true measure")
        p.add_argument("--adopt-coef", action="append", dest="adopt_coef",
                       metavar="MEASURE=BETA",
                       help="adoption coefficient over a true measure")
    return parser


def _merged_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    for flag in _FLAGS:
        val = getattr(args, flag, None)
        if val is not None:
            setattr(cfg, flag, val)
    if args.invite_coef:
        cfg.invite_coefs = _parse_coef_list(args.invite_coef)
    if args.adopt_coef:
        cfg.adopt_coefs = _parse_coef_list(args.adopt_coef)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _merged_config(args)
        out_dir = resolve_out_dir(args.out, cfg)
        _COMMANDS[args.subcommand](cfg, out_dir)
    except CloseFriendError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: OSError: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
