import json

import pytest

from mvfluid.cli import main

MINIMAL = {
    "name": "cli-test",
    "mesh": {"cells": [3, 3], "spacing": [0.25, 0.25]},
    "material": {"rho0": 997, "gamma": 6, "a_tilde": 3.041e4, "b": 3.0397e4},
    "dt": 1e-3,
    "steps": 4,
    "output": {"snapshot_stride": 2, "diagnostics_stride": 1},
}


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "example1-baro" in out and "conv2d-free --axis time" in out


def test_run_config_file(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(MINIMAL))
    out_dir = tmp_path / "out"
    assert main(["run", str(path), "--out", str(out_dir), "--steps", "2"]) == 0
    assert (out_dir / "snap_2.csv").exists() and (out_dir / "diagnostics.csv").exists()
    assert "cli-test" in capsys.readouterr().out


def test_config_error_exit_code(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({**MINIMAL, "dt": -1}))
    assert main(["run", str(path)]) == 2
    assert "configuration error" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "nope.json")]) == 2
    assert main(["converge", "example1-baro", "--axis", "time"]) == 2
    assert main(["converge", "conv2d-free", "--axis", "time", "--levels", "1"]) == 2


def test_runtime_error_exit_code(tmp_path):
    doc = {**MINIMAL, "initial": {"type": "perturbation", "nodes": [[1, 0]], "fraction": 5.0}}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    assert main(["run", str(path)]) == 3


def test_bad_arguments_exit():
    with pytest.raises(SystemExit):
        main(["converge", "conv2d-free"])
