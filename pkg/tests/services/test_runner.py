import csv
import json

import pytest

from sage_weyl.exceptions import ConfigInvalid
from sage_weyl.helpers.enums import Experiment
from sage_weyl.models.config import ExperimentConfig
from sage_weyl.services.runner import RUNNERS, run_experiment

INTERVAL_GRID = {"dim": 1, "extents": [1.0], "h": 0.02}
HALFLINE_WINDOW = {"lo": -1e4, "hi": -1.0, "samples": 12}


def _run(tmp_path, **raw):
    raw.setdefault("out", str(tmp_path))
    return run_experiment(ExperimentConfig.from_dict(raw))


def _read_csv(path):
    with path.open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


def test_every_experiment_has_a_runner():
    assert set(RUNNERS) == set(Experiment)


def test_triple_check_on_random_model(tmp_path):
    report = _run(
        tmp_path,
        experiment="triple-check",
        model="random",
        random={"interior": 12, "boundary": 3},
        seed=4,
    )
    assert report["passed"]
    assert report["pairs"] == 20
    assert all(row["symmetry_defect"] <= 1e-10 for row in report["weyl"])
    assert report["derivative_residual"]["residual"] <= 1e-5
    saved = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert saved["passed"] is True
    assert saved["model"]["kind"] == report["model"]["kind"]


def test_green_check_alias(tmp_path):
    report = _run(tmp_path, experiment="green-check", model="random")
    assert report["experiment"] == "green-check"
    assert report["passed"]


def test_krein_check_writes_csv(tmp_path):
    report = _run(
        tmp_path,
        experiment="krein-check",
        model="random",
        B={"kind": "scalar", "value": 0.5},
        lambdas=[[0.0, 2.0], [-1.0, -1.0]],
    )
    assert report["passed"]
    assert report["max_deviation"] <= 1e-8
    lines = (tmp_path / "krein.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "lambda_re,lambda_im,deviation"
    assert len(lines) == 3


def test_hypotheses_report(tmp_path):
    report = _run(
        tmp_path,
        experiment="hypotheses",
        model="random",
        B={"kind": "scalar", "value": 0.5},
    )
    assert report["selfadjoint"].passed
    assert report["lower_bound"].passed
    assert report["spectral_transfer_residual"]["residual"] <= 1e-10
    saved = json.loads((tmp_path / "hypotheses.json").read_text(encoding="utf-8"))
    assert saved["selfadjoint"]["passed"] is True


def test_hypotheses_threshold(tmp_path):
    halfline = _run(
        tmp_path / "halfline",
        experiment="hypotheses",
        model="halfline",
        B={"kind": "scalar", "value": 2.0},
    )
    assert halfline["neumann_threshold"] == pytest.approx(-4.0, rel=1e-9)
    # M(λ) levels off at L_∂∂⁻¹w on random models, far above 1/100
    capped = _run(
        tmp_path / "random",
        experiment="hypotheses",
        model="random",
        B={"kind": "scalar", "value": 100.0},
    )
    assert capped["neumann_threshold"] is None


def test_decay_fit_on_free_halfline(tmp_path):
    envelope = _run(
        tmp_path, experiment="decay-fit", model="halfline", fit_window=HALFLINE_WINDOW
    )
    assert envelope["alpha"] == pytest.approx(0.5, abs=1e-8)
    assert envelope["C"] == pytest.approx(1.0, rel=1e-6)
    rows = _read_csv(tmp_path / "samples.csv")
    assert len(rows) >= 12
    assert list(rows[0]) == ["lambda", "norm_M", "bound_value", "satisfied"]
    assert all(row["satisfied"] == "true" for row in rows)
    assert (tmp_path / "envelope.json").exists()


def test_bound_certify_on_free_halfline(tmp_path):
    report = _run(
        tmp_path,
        experiment="bound-certify",
        model="halfline",
        B={"kind": "scalar", "value": 1.0},
        omegas=[2.0, 0.5, 1.0],
        fit_window=HALFLINE_WINDOW,
    )
    assert [entry["omega"] for entry in report["certificates"]] == [0.5, 1.0, 2.0]
    for entry in report["certificates"]:
        assert entry["min_sigma"] == pytest.approx(-(entry["omega"] ** 2), rel=1e-9)
        assert entry["slack"] >= -1e-8
    assert report["dirichlet_min_sigma"] == 0.0
    assert all(row["holds"] for row in report["small_coupling"])
    saved = json.loads((tmp_path / "certificates.json").read_text(encoding="utf-8"))
    assert saved["certificates"][0]["certificate"]["route"] == "decay"


def test_sweep_on_free_halfline(tmp_path):
    summary = _run(
        tmp_path,
        experiment="sweep",
        model="halfline",
        B={"kind": "scalar", "value": 1.0},
        omegas=[1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
        fit_window=HALFLINE_WINDOW,
        jobs=2,
    )
    assert summary["asymptotic_slope"] == pytest.approx(2.0, abs=1e-3)
    assert summary["monotone"] is True
    assert summary["certificates_hold"] is True
    assert summary["below_dirichlet"] is True
    rows = _read_csv(tmp_path / "sweep.csv")
    assert [float(row["omega"]) for row in rows] == [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]


def test_interval_sweep_is_independent_of_jobs(tmp_path):
    config = {
        "experiment": "sweep",
        "model": "discrete",
        "grid": INTERVAL_GRID,
        "B": {"kind": "scalar", "value": 1.0},
        "omegas": [0.0, 1.0, 2.0, 4.0, 8.0],
    }
    serial = _run(tmp_path, out=str(tmp_path / "serial"), jobs=1, **config)
    _run(tmp_path, out=str(tmp_path / "threaded"), jobs=4, **config)
    assert (tmp_path / "serial" / "sweep.csv").read_bytes() == (
        tmp_path / "threaded" / "sweep.csv"
    ).read_bytes()
    assert serial["rows"] == 5
    assert serial["monotone"] is True
    assert serial["certificates_hold"] is True


def test_sweep_without_slope_reports_none(tmp_path):
    summary = _run(
        tmp_path,
        experiment="sweep",
        model="discrete",
        grid=INTERVAL_GRID,
        B={"kind": "scalar", "value": -1.0},
        omegas=[1.0, 2.0],
    )
    assert summary["asymptotic_slope"] is None
    assert summary["monotone"] is None


def test_saturated_window_is_rejected(tmp_path):
    with pytest.raises(ConfigInvalid) as info:
        _run(
            tmp_path,
            experiment="decay-fit",
            model="discrete",
            grid=INTERVAL_GRID,
            fit_window={"lo": -1000.0, "hi": -10.0},
        )
    assert info.value.pointer == "/fit_window/lo"


def test_missing_parameter(tmp_path):
    with pytest.raises(ConfigInvalid) as info:
        _run(tmp_path, experiment="krein-check", model="random")
    assert info.value.pointer == "/B"


def test_sweep_needs_couplings(tmp_path):
    with pytest.raises(ConfigInvalid) as info:
        _run(
            tmp_path,
            experiment="sweep",
            model="discrete",
            grid=INTERVAL_GRID,
            B={"kind": "scalar", "value": 1.0},
        )
    assert info.value.pointer == "/omegas"


def test_decay_fit_needs_window(tmp_path):
    with pytest.raises(ConfigInvalid) as info:
        _run(tmp_path, experiment="decay-fit", model="halfline")
    assert info.value.pointer == "/fit_window"
