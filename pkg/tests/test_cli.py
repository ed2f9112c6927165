import json
import subprocess
import sys

import numpy as np
import pytest

from hyperband.cli import RunConfig, main, validate_config


def run_cli(*args: str) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "hyperband", *args],
        capture_output=True, text=True,
    )


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("ds")
    assert main(["synth", "--preset", "duplicate", "--seed", "1", "--out", str(out)]) == 0
    return out


class TestValidateConfig:
    def test_clean_profile_config(self):
        cfg = RunConfig(command="profile", cube="c.json", gt="g.csv", out="o")
        assert validate_config(cfg) == []

    def test_th_requires_mi_th(self):
        cfg = RunConfig(command="select", cube="c", gt="g", selector="jmi",
                        k=3, th=0.1, out="o")
        assert any("only valid with --selector mi_th" in e for e in validate_config(cfg))

    def test_mi_th_requires_th(self):
        cfg = RunConfig(command="select", cube="c", gt="g", selector="mi_th",
                        k=3, out="o")
        assert any("required with --selector mi_th" in e for e in validate_config(cfg))

    def test_missing_k(self):
        cfg = RunConfig(command="select", cube="c", gt="g", selector="ig", out="o")
        assert any("--k is required" in e for e in validate_config(cfg))

    def test_unsorted_ks(self):
        cfg = RunConfig(command="sweep", cube="c", gt="g", selector="ig",
                        ks=(5, 3), out="o")
        assert any("ascending" in e for e in validate_config(cfg))

    def test_map_k_must_be_in_ks(self):
        cfg = RunConfig(command="sweep", cube="c", gt="g", selector="ig",
                        ks=(2, 4), k=3, out="o")
        assert any("must be one of --ks" in e for e in validate_config(cfg))

    def test_bins_and_svm_bounds(self):
        cfg = RunConfig(command="profile", cube="c", gt="g", out="o",
                        bins=1, svm_c=-1.0, svm_gamma=0.0)
        errors = validate_config(cfg)
        assert len(errors) == 3

    def test_bad_classifier(self):
        cfg = RunConfig(command="evaluate", cube="c", gt="g", selector="ig",
                        k=2, classifier="forest", out="o")
        assert any("classifier" in e for e in validate_config(cfg))


class TestExitCodes:
    def test_missing_cube_file_exits_1(self, tmp_path):
        proc = run_cli("profile", "--cube", str(tmp_path / "nope.json"),
                       "--gt", str(tmp_path / "nope.csv"), "--out", str(tmp_path))
        assert proc.returncode == 1
        assert proc.stderr.strip().startswith("hyperband: error:")
        assert len(proc.stderr.strip().splitlines()) == 1

    def test_invalid_flag_combo_exits_1(self, dataset, tmp_path):
        proc = run_cli("select", "--cube", str(dataset / "cube.json"),
                       "--gt", str(dataset / "gt.csv"), "--selector", "jmi",
                       "--k", "2", "--th", "0.5", "--out", str(tmp_path))
        assert proc.returncode == 1
        assert "only valid with --selector mi_th" in proc.stderr

    def test_unknown_flag_exits_nonzero(self, tmp_path):
        proc = run_cli("select", "--frobnicate")
        assert proc.returncode == 1

    def test_help_exits_0(self):
        proc = run_cli("--help")
        assert proc.returncode == 0
        assert "profile" in proc.stdout

    def test_k_beyond_bands_exits_1(self, dataset, tmp_path):
        proc = run_cli("select", "--cube", str(dataset / "cube.json"),
                       "--gt", str(dataset / "gt.csv"), "--selector", "ig",
                       "--k", "99", "--out", str(tmp_path))
        assert proc.returncode == 1
        assert "out of range" in proc.stderr


class TestArtifacts:
    def test_synth_writes_dataset(self, dataset):
        names = {p.name for p in dataset.iterdir()}
        assert {"cube.json", "cube.u16", "gt.csv", "expected.json"} <= names
        expected = json.loads((dataset / "expected.json").read_text())
        assert expected["minimal"] == [0, 2]
        assert expected["redundant"] == [1]

    def test_profile_artifact(self, dataset, tmp_path):
        assert main(["profile", "--cube", str(dataset / "cube.json"),
                     "--gt", str(dataset / "gt.csv"), "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "profile.csv").read_text().splitlines()
        assert lines[0].startswith("# config: ")
        assert lines[1] == "band,mi_bits"
        assert len(lines) == 2 + 4  # header rows + one per band
        cfg = json.loads(lines[0].removeprefix("# config: "))
        assert cfg["command"] == "profile" and cfg["seed"] == 0

    def test_select_trace_columns(self, dataset, tmp_path):
        assert main(["select", "--cube", str(dataset / "cube.json"),
                     "--gt", str(dataset / "gt.csv"), "--selector", "mi_th",
                     "--th", "0", "--k", "4", "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "trace.csv").read_text().splitlines()
        header_idx = next(i for i, l in enumerate(lines) if not l.startswith("#"))
        assert lines[header_idx] == "step,band_index,criterion_value,accepted"
        assert any(l.startswith("# stop_reason: ") for l in lines[:header_idx])
        rows = [l.split(",") for l in lines[header_idx + 1:]]
        assert {r[3] for r in rows} <= {"0", "1"}

    def test_evaluate_artifacts(self, dataset, tmp_path):
        assert main(["evaluate", "--cube", str(dataset / "cube.json"),
                     "--gt", str(dataset / "gt.csv"), "--selector", "jmi",
                     "--k", "2", "--classifier", "knn", "--seed", "3",
                     "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["seed"] == 3
        assert len(report["band_subset"]) == 2
        assert len(report["per_class"]) == 4
        assert 0.0 <= report["overall_accuracy"] <= 100.0
        csv_lines = (tmp_path / "report.csv").read_text().splitlines()
        overall = next(l for l in csv_lines if l.startswith("overall,"))
        assert float(overall.split(",")[-1]) == pytest.approx(
            report["overall_accuracy"], abs=5e-4)

    def test_sweep_artifacts_and_map_roundtrip(self, dataset, tmp_path):
        assert main(["sweep", "--cube", str(dataset / "cube.json"),
                     "--gt", str(dataset / "gt.csv"), "--selector", "ig",
                     "--ks", "1,2", "--classifier", "knn",
                     "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        data = [l for l in lines if not l.startswith("#")]
        assert data[0] == "selector,k,seed,overall_accuracy"
        assert [r.split(",")[1] for r in data[1:]] == ["1", "2"]
        # the map grid parses through the ground-truth reader
        from hyperband.cube_io import load_ground_truth
        grid = load_ground_truth(tmp_path / "map.csv", 120, 120)
        assert grid.n_classes <= 4

    def test_byte_identical_reruns(self, dataset, tmp_path):
        args = ["evaluate", "--cube", str(dataset / "cube.json"),
                "--gt", str(dataset / "gt.csv"), "--selector", "ig",
                "--k", "2", "--classifier", "knn", "--out", str(tmp_path)]
        assert main(args) == 0
        first = {n: (tmp_path / n).read_bytes() for n in ("report.csv", "report.json")}
        assert main(args) == 0
        for name, blob in first.items():
            assert (tmp_path / name).read_bytes() == blob
