"""
Test script to verify run directories, JSON backups, manifests and sweep summaries
"""
import json
import os

import numpy as np
import pytest

from artifact_store import MANIFEST, SWEEP_COLUMNS, ArtifactStore
from rendezvous import __version__


@pytest.fixture
def store(tmp_path):
    return ArtifactStore(str(tmp_path / "runs"))


def test_run_names_and_directories(store):
    assert store.run_name("turn90", 0.5) == "turn90_k0.50"
    directory = store.run_dir("turn90_k0.50")
    assert os.path.isdir(directory)
    assert store.run_dir_if_exists("turn90_k0.50") == directory
    assert store.run_dir_if_exists("missing") is None
    assert store.run_dir_if_exists("../outside") is None


def test_csv_has_header(store):
    directory = store.run_dir("r")
    path = store.write_csv(directory, "table.csv", ("t", "e_z"), np.array([[0.0, -50.0], [0.05, -49.9]]))
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert lines[0] == "t,e_z"
    assert lines[2] == "0.05,-49.9"


def test_json_write_replaces_and_cleans_backup(store):
    directory = store.run_dir("r")
    store.write_json(directory, "report.json", {"status": "running"})
    store.write_json(directory, "report.json", {"status": "converged"})
    with open(os.path.join(directory, "report.json"), encoding="utf-8") as f:
        assert json.load(f) == {"status": "converged"}
    assert not os.path.exists(os.path.join(directory, "report.json.backup"))


def test_failed_json_write_restores_previous_version(store):
    directory = store.run_dir("r")
    store.write_json(directory, "report.json", {"status": "running"})
    with pytest.raises(TypeError):
        store.write_json(directory, "report.json", {"bad": object()})
    with open(os.path.join(directory, "report.json"), encoding="utf-8") as f:
        assert json.load(f) == {"status": "running"}
    assert not os.path.exists(os.path.join(directory, "report.json.backup"))


def test_manifest_lists_existing_files(store):
    directory = store.run_dir("straight_k0.00")
    store.write_json(directory, "report.json", {})
    store.write_manifest(directory, {"scenario": "straight"}, {"status": "converged"}, ["report.json"])
    manifest = store.load_manifest(directory)
    assert manifest["tool_version"] == __version__
    assert manifest["files"] == ["report.json", MANIFEST]
    assert all(os.path.exists(os.path.join(directory, name)) for name in manifest["files"])
    with pytest.raises(FileNotFoundError):
        store.write_manifest(directory, {}, {}, ["trajectory.csv"])


def test_list_runs_skips_directories_without_manifest(store):
    done = store.run_dir("a")
    store.write_manifest(done, {}, {"status": "converged"}, [])
    store.run_dir("b")
    runs = store.list_runs()
    assert [run["run"] for run in runs] == ["a"]
    assert runs[0]["summary"] == {"status": "converged"}
    info = store.get_data_file_info(done)
    assert MANIFEST in info["files"]


def test_sweep_summary_leaves_failed_fields_empty(store):
    rows = [
        {"k": 0.0, "T_pred": 126.5, "T_achieved": 126.7, "iterations": 31, "worst_residual": -0.01},
        {"k": 1.0, "T_pred": 40.3, "T_achieved": None, "iterations": None, "worst_residual": None},
    ]
    path = store.write_sweep_summary(rows)
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert lines[1] == "0,126.5,126.7,31,-0.01"
    assert lines[2] == "1,40.3,,,"
