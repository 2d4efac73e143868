import json
import os

import pytest

from closefriend.cli import main


def run(args):
    return main([str(a) for a in args])


@pytest.fixture
def edge_file(tmp_path):
    path = tmp_path / "edges.txt"
    lines = []
    for t in range(3):
        for s in range(3):
            lines.append(f"s{t}_{s} t{t} 0.{5 + s}")
        lines.append(f"s{t}_0 s{t}_1 0.9")
    path.write_text("\n".join(lines) + "\n")
    return path


class TestIngest:
    def test_snapshot_written(self, tmp_path, edge_file):
        out = tmp_path / "out"
        assert run(["ingest", "--graph", edge_file, "--out", out]) == 0
        assert (out / "graph.bin").exists()
        assert (out / "manifest.json").exists()

    def test_missing_graph_flag_errors(self, tmp_path, capsys):
        assert run(["ingest", "--out", tmp_path / "o"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_file_errors(self, tmp_path, capsys):
        code = run(["ingest", "--graph", tmp_path / "nope.txt",
                    "--out", tmp_path / "o"])
        assert code == 1


class TestFeaturePipeline:
    def test_features_and_train_and_predict(self, tmp_path, edge_file):
        feat = tmp_path / "feat"
        assert run(["features", "--graph", edge_file, "--out", feat,
                    "--dim", 8, "--epochs", 1]) == 0
        feature_file = feat / "features.tsv"
        header = feature_file.read_text().splitlines()[1].split()
        assert header[:3] == ["source", "target", "group_index"]
        assert len(header) > 3

        labels = tmp_path / "labels.txt"
        rows = [l.split() for l in feature_file.read_text().splitlines()[2:]]
        labs = [f"{r[0]} {r[1]} {i % 2}" for i, r in enumerate(rows)]
        labels.write_text("\n".join(labs) + "\n")

        tr = tmp_path / "tr"
        assert run(["train", "--features", feature_file, "--labels", labels,
                    "--out", tr, "--rounds", 3, "--depth", 2]) == 0
        assert (tr / "model.json").exists()

        pred = tmp_path / "pred"
        assert run(["predict", "--features", feature_file,
                    "--model", tr / "model.json", "--out", pred]) == 0
        lines = (pred / "predictions.tsv").read_text().splitlines()
        assert lines[1].split() == ["source", "target", "margin", "probability"]
        assert len(lines) == 2 + len(rows)

        rec = tmp_path / "rec"
        assert run(["recommend", "--graph", edge_file,
                    "--features", feature_file, "--model", tr / "model.json",
                    "--out", rec, "--k", 2]) == 0
        assert (rec / "recommendations.tsv").exists()

    def test_recommend_without_model_errors(self, tmp_path, edge_file, capsys):
        assert run(["recommend", "--graph", edge_file,
                    "--out", tmp_path / "o"]) == 1
        assert "error:" in capsys.readouterr().err


class TestSimulateAnalyze:
    def test_simulate_then_analyze(self, tmp_path):
        sim = tmp_path / "sim"
        assert run(["simulate", "--out", sim, "--n-targets", 8,
                    "--group-size", 3, "--seed", 4, "--dim", 8, "--epochs", 1,
                    "--invite-coef", "ugt=3.0", "--invite-intercept", "-1"]) == 0
        assert (sim / "outcome.tsv").exists()
        ana = tmp_path / "ana"
        assert run(["analyze", "--features", sim / "features.tsv",
                    "--outcome", sim / "outcome.tsv", "--out", ana]) == 0
        assert (ana / "metrics.tsv").exists()
        assert (ana / "conversion_ugt_adoption.tsv").exists()

    def test_bad_coef_name_errors(self, tmp_path, capsys):
        assert run(["simulate", "--out", tmp_path / "o",
                    "--invite-coef", "bogus=1"]) == 1


class TestConfigPrecedence:
    def test_flag_overrides_config(self, tmp_path, edge_file):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"k": 1, "out_dir": str(tmp_path / "cfgout")}))
        out = tmp_path / "flagout"
        assert run(["ingest", "--config", cfg, "--graph", edge_file,
                    "--out", out]) == 0
        assert (out / "graph.bin").exists()
        assert not (tmp_path / "cfgout").exists()

    def test_config_out_dir_used(self, tmp_path, edge_file):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"out_dir": str(tmp_path / "cfgout")}))
        assert run(["ingest", "--config", cfg, "--graph", edge_file]) == 0
        assert (tmp_path / "cfgout" / "graph.bin").exists()

    def test_env_out_dir(self, tmp_path, edge_file, monkeypatch):
        monkeypatch.setenv("CLOSEFRIEND_OUT_DIR", str(tmp_path / "envout"))
        assert run(["ingest", "--graph", edge_file]) == 0
        assert (tmp_path / "envout" / "graph.bin").exists()

    def test_unknown_config_key_errors(self, tmp_path, edge_file):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bogus_knob": 1}))
        assert run(["ingest", "--config", cfg, "--graph", edge_file,
                    "--out", tmp_path / "o"]) == 1


def read_artifacts(root):
    out = {}
    for dirpath, _, files in os.walk(root):
        for f in files:
            p = os.path.join(dirpath, f)
            out[os.path.relpath(p, root)] = open(p, "rb").read()
    return out


def test_byte_identical_reruns(tmp_path, edge_file, monkeypatch):
    """Identical config + seed reproduce identical artifact bytes."""
    outs = []
    for name in ("run1", "run2"):
        root = tmp_path / name
        root.mkdir()
        monkeypatch.chdir(root)  # identical relative paths, identical config
        (root / "edges.txt").write_text(edge_file.read_text())
        run(["features", "--graph", "edges.txt", "--out", "feat",
             "--dim", 8, "--epochs", 1, "--seed", 21])
        rows = [l.split() for l in
                (root / "feat" / "features.tsv").read_text().splitlines()[2:]]
        (root / "labels.txt").write_text("\n".join(
            f"{r[0]} {r[1]} {i % 2}" for i, r in enumerate(rows)) + "\n")
        run(["train", "--features", "feat/features.tsv",
             "--labels", "labels.txt", "--out", "tr",
             "--rounds", 4, "--depth", 2, "--seed", 21])
        outs.append(read_artifacts(root))
    a, b = outs
    assert a.keys() == b.keys()
    for key in a:
        assert a[key] == b[key], key
