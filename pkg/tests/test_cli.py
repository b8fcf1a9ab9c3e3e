import json
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

from sage_weyl.cli import _overrides, build_parser, main
from sage_weyl.exceptions import SingularSolve
from sage_weyl.helpers.enums import Experiment


@pytest.fixture
def write_config(tmp_path):
    def write(payload, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return write


def _error(out):
    return json.loads((out / "error.json").read_text(encoding="utf-8"))


def test_run_succeeds(tmp_path, write_config):
    config = write_config({"experiment": "triple-check", "model": "random"})
    out = tmp_path / "results"
    assert main(["run", str(config), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["passed"] is True


def test_subcommand_overrides_experiment(tmp_path, write_config):
    config = write_config(
        {
            "experiment": "triple-check",
            "model": "random",
            "B": {"kind": "scalar", "value": 0.5},
        }
    )
    out = tmp_path / "results"
    assert main(["krein-check", str(config), "--out", str(out), "--jobs", "2"]) == 0
    assert (out / "krein.csv").exists()


def test_bad_grid_exits_with_configuration_code(tmp_path, write_config):
    config = write_config(
        {
            "experiment": "sweep",
            "model": "discrete",
            "grid": {"dim": 1, "extents": [1.0], "h": -0.1},
        }
    )
    assert main(["run", str(config), "--out", str(tmp_path)]) == 2
    error = _error(tmp_path)
    assert error["code"] == "bad_grid"
    assert error["pointer"] == "/grid/h"
    assert error["exit_code"] == 2


def test_missing_config_file(tmp_path):
    assert main(["run", str(tmp_path / "absent.json"), "--out", str(tmp_path)]) == 2
    assert _error(tmp_path)["code"] == "config_invalid"


def test_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{", encoding="utf-8")
    assert main(["run", str(path), "--out", str(tmp_path)]) == 2


def test_numerical_failure_exit_code(tmp_path, write_config):
    config = write_config({"experiment": "triple-check", "model": "random"})
    failure = SingularSolve("λ on σ(A0).")
    with patch("sage_weyl.cli.run_experiment", side_effect=failure):
        assert main(["run", str(config), "--out", str(tmp_path)]) == 3
    assert _error(tmp_path)["code"] == "singular_solve"


def test_linear_algebra_failure_is_numerical(tmp_path, write_config):
    config = write_config({"experiment": "triple-check", "model": "random"})
    failure = np.linalg.LinAlgError("Singular matrix")
    with patch("sage_weyl.cli.run_experiment", side_effect=failure):
        assert main(["run", str(config), "--out", str(tmp_path)]) == 3
    error = _error(tmp_path)
    assert error["code"] == "numerical_error"
    assert error["detail"] == "Singular matrix"


def test_parser_knows_every_experiment():
    parser = build_parser()
    for experiment in Experiment:
        args = parser.parse_args([str(experiment), "config.json"])
        assert args.command == str(experiment)
        assert args.config == Path("config.json")
    with pytest.raises(SystemExit):
        parser.parse_args(["unknown", "config.json"])


def test_overrides():
    parser = build_parser()
    args = parser.parse_args(
        ["sweep", "c.json", "--jobs", "0", "--seed", "7", "--out", "x"]
    )
    assert _overrides(args) == {
        "experiment": Experiment.SWEEP,
        "jobs": 1,
        "seed": 7,
        "out": Path("x"),
    }
    assert _overrides(parser.parse_args(["run", "c.json"])) == {}
