import json

import numpy as np
import pytest

from src import __version__
from src.boxcover import write_edge_list
from src.cli import cli_dispatch
from src.data import read_npy, synth_graph, write_matrix_csv


def run(*argv):
    return cli_dispatch([str(a) for a in argv])


def read(path):
    return json.loads(path.read_text())


class TestExitCodes:
    def test_unknown_subcommand(self):
        assert run("render") == 1

    def test_missing_subcommand(self):
        assert run() == 1

    def test_version(self, capsys):
        assert run("--version") == 0
        assert __version__ in capsys.readouterr().out

    def test_bad_choice(self, tmp_path, identical_features_npy):
        assert run("ssrate", identical_features_npy, "--mode", "soft", "--output-dir", tmp_path) == 1

    def test_missing_input(self, output_dir):
        assert run("ssrate", output_dir / "missing.npy", "--output-dir", output_dir, "--quiet") == 1

    def test_unknown_config_key(self, tmp_path, identical_features_npy):
        config = tmp_path / "bad.toml"
        config.write_text("[metric]\nthreshold_count = 12\n")
        assert run("ssrate", identical_features_npy, "--config", config, "--output-dir", tmp_path) == 1

    def test_invalid_toml(self, tmp_path, identical_features_npy):
        config = tmp_path / "bad.toml"
        config.write_text("[metric\n")
        assert run("ssrate", identical_features_npy, "--config", config, "--output-dir", tmp_path) == 1


class TestSsrate:
    def test_identical_features(self, output_dir, identical_features_npy, capsys):
        assert run("ssrate", identical_features_npy, "--output-dir", output_dir, "--quiet") == 0
        assert capsys.readouterr().out.startswith("ss_rate ")
        report = read(output_dir / "ssrate.json")
        assert report["ss_rate"] == pytest.approx(1.0, abs=1e-9)
        assert report["d"] == 6 and report["mode"] == "hard"
        assert report["input"] == str(identical_features_npy)

    def test_manifest(self, output_dir, identical_features_npy):
        argv = ["ssrate", str(identical_features_npy), "--output-dir", str(output_dir), "--seed", "4", "--quiet"]
        assert cli_dispatch(argv) == 0
        manifest = read(output_dir / "manifest.json")
        assert manifest["command"] == "ssrate"
        assert manifest["argv"] == argv
        assert manifest["seed"] == 4
        assert manifest["version"] == __version__
        assert manifest["config"]["metric"]["grid_count"] == 64

    def test_config_file_and_flags(self, tmp_path, output_dir, layer_npys):
        config = tmp_path / "run.toml"
        config.write_text('[metric]\nmode = "smooth"\nk = 30.0\ngrid_count = 16\n')
        assert run("ssrate", layer_npys[0], "--config", config, "--grid-count", 32,
                   "--epsilon", 0.5, "--output-dir", output_dir, "--quiet") == 0
        report = read(output_dir / "ssrate.json")
        assert report["mode"] == "smooth(30)"
        assert len(report["thetas"]) == 32
        assert isinstance(report["edges"], int)

    def test_boxcurve_plot(self, output_dir, layer_npys):
        assert run("boxcurve", layer_npys[1], "--plot", "--output-dir", output_dir, "--quiet") == 0
        assert (output_dir / "boxcurve.json").exists()
        svg = (output_dir / "boxcurve.svg").read_text()
        assert 'id="log_n"' in svg and 'id="pf"' in svg

    @pytest.mark.parametrize("argv, outputs", [
        (["ssrate", "{layer2}", "--mode", "smooth"], ["ssrate.json"]),
        (["boxcurve", "{layer1}", "--plot"], ["boxcurve.json", "boxcurve.svg"]),
        (["invariance", "stat", "{layer0}", "{layer1}", "{layer2}"], ["invariance_stat.json"]),
        (["invariance", "geom", "{layer0}", "{layer1}", "{layer2}", "--method", "cmds"], ["invariance_geom.json"]),
        (["embed", "{layer0}", "--labels", "{labels}"], ["embedding.svg", "embedding.csv", "embedding.json"]),
        (["boxcover", "{edges}", "--theta", "1", "2", "3"], ["boxcover.json"]),
        (["train", "--widths", "2", "8", "8", "3", "--epochs", "2", "--alpha", "1e-4", "--gamma", "0.4"],
         ["train_log.csv", "train_log.json", "model.bin", "model.json", "train_summary.json"]),
        (["synth", "points", "cantor", "--n", "100"], ["cantor.npy"]),
        (["synth", "blobs", "--per-class", "10"], ["blobs.csv"]),
        (["synth", "graph", "random_connected", "--n", "15"], ["random_connected.edgelist"]),
    ], ids=["ssrate", "boxcurve", "invariance-stat", "invariance-geom", "embed", "boxcover", "train",
            "synth-points", "synth-blobs", "synth-graph"])
    def test_reruns_are_byte_identical(self, tmp_path, layer_npys, argv, outputs):
        inputs = {f"layer{i}": path for i, path in enumerate(layer_npys)}
        inputs["labels"] = write_matrix_csv((np.arange(24) % 3).reshape(-1, 1), tmp_path / "labels.csv")
        inputs["edges"] = write_edge_list(synth_graph("ring", 12), tmp_path / "ring.edgelist")
        resolved = [arg.format(**inputs) for arg in argv]
        runs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run(*resolved, "--seed", 5, "--output-dir", out, "--quiet") == 0
            runs.append([(out / output).read_bytes() for output in outputs])
        assert runs[0] == runs[1]


class TestOtherCommands:
    def test_gradcheck_passes(self, output_dir, capsys):
        assert run("gradcheck", "--seed", 7, "--output-dir", output_dir, "--quiet") == 0
        assert capsys.readouterr().out.strip().endswith("PASS")
        assert read(output_dir / "gradcheck.json")["passed"] is True

    def test_invariance(self, output_dir, layer_npys):
        assert run("invariance", "stat", *layer_npys, "--output-dir", output_dir, "--quiet") == 0
        stat = read(output_dir / "invariance_stat.json")
        assert stat["sigma"] >= 0.0
        assert len(stat["per_layer"]) == 3
        assert run("invariance", "geom", *layer_npys, "--method", "cmds", "--output-dir", output_dir, "--quiet") == 0
        geom = read(output_dir / "invariance_geom.json")
        assert geom["method"] == "cmds" and geom["delta"] >= 0.0

    def test_embed_with_labels(self, tmp_path, output_dir, layer_npys):
        labels = write_matrix_csv((np.arange(24) % 3).reshape(-1, 1), tmp_path / "labels.csv")
        assert run("embed", layer_npys[0], "--labels", labels, "--output-dir", output_dir, "--quiet") == 0
        assert (output_dir / "embedding.svg").read_text().count("<use ") == 24
        assert (output_dir / "embedding.csv").read_text().startswith("node_id,x,y\n")
        assert read(output_dir / "embedding.json")["d"] == 24

    def test_synth_and_boxcover(self, output_dir):
        assert run("synth", "graph", "ring", "--n", 12, "--output-dir", output_dir, "--quiet") == 0
        edges = output_dir / "ring.edgelist"
        assert run("boxcover", edges, "--theta", 1, 2, 3, "--output-dir", output_dir, "--quiet") == 0
        payload = read(output_dir / "boxcover.json")
        assert payload["n"] == 12 and payload["edges"] == 12
        assert [row["theta"] for row in payload["counts"]] == [1, 2, 3]
        assert payload["counts"][0]["exact"] == 6
        assert set(payload["fits"]) == {"greedy", "burning"}

    def test_synth_points_deterministic(self, tmp_path):
        for name in ("a", "b"):
            assert run("synth", "points", "cantor", "--n", 200, "--seed", 3,
                       "--output-dir", tmp_path / name, "--quiet") == 0
        a, b = (tmp_path / "a" / "cantor.npy"), (tmp_path / "b" / "cantor.npy")
        assert a.read_bytes() == b.read_bytes()
        assert read_npy(a).shape == (200, 2)

    def test_synth_blobs(self, output_dir):
        assert run("synth", "blobs", "--classes", 2, "--per-class", 10, "--dim", 3,
                   "--output-dir", output_dir, "--quiet") == 0
        lines = (output_dir / "blobs.csv").read_text().splitlines()
        assert lines[0] == "x0,x1,x2,label" and len(lines) == 21

    def test_calibrate_then_train(self, output_dir):
        common = ["--widths", 2, 8, 8, 3, "--epochs", 2, "--output-dir", output_dir, "--quiet"]
        assert run("calibrate", *common) == 0
        gamma = read(output_dir / "gamma.json")["gamma"]
        assert len(gamma) == 2
        assert run("train", "--alpha", 1e-4, "--gamma-file", output_dir / "gamma.json", *common) == 0
        summary = read(output_dir / "train_summary.json")
        assert summary["alpha"] == 1e-4
        assert summary["penalty_fac"] == 1e4
        assert summary["gamma"] == pytest.approx(gamma)
        assert (output_dir / "model.bin").exists() and (output_dir / "model.json").exists()
        header = (output_dir / "train_log.csv").read_text().splitlines()[0]
        assert header.startswith("epoch,task_loss,total_loss")
